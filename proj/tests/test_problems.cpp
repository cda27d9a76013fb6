#include "acacg/problems.hpp"

#include "acacg/prox.hpp"
#include "acacg/solvers.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cstdio>
#include <fstream>
#include <random>

using namespace acacg;

namespace {

bool gradient_matches_fd(const CompositeProblem& problem, const Vector& z, double rel_tol) {
    const Vector analytic = problem.smooth_grad(z);
    const Vector numeric = oracles::fd_gradient(problem.smooth_value, z);
    return (analytic - numeric).norm() <= rel_tol * (1.0 + analytic.norm());
}

Vector random_gaussian(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    return v;
}

}  // namespace

// ---------------------------------------------------------------- QP

TEST_CASE("qp_generate is a pure function of parameters and seed") {
    QpParams params{4, 10, 0.2, 100.0, 10.0};
    const QpInstance a = qp_generate(params, 42);
    const QpInstance b = qp_generate(params, 42);
    CHECK(a.alpha1 == b.alpha1);
    CHECK(a.alpha2 == b.alpha2);
    CHECK((a.b - b.b).norm() == 0.0);
    CHECK((a.d_diag - b.d_diag).norm() == 0.0);
    REQUIRE(a.A_ops.size() == b.A_ops.size());
    for (std::size_t i = 0; i < a.A_ops.size(); ++i)
        CHECK((Matrix(a.A_ops[i]) - Matrix(b.A_ops[i])).cwiseAbs().maxCoeff() == 0.0);

    const QpInstance c = qp_generate(params, 43);
    CHECK((a.b - c.b).norm() != 0.0);
}

TEST_CASE("qp_generate with zero lower target yields a convex quadratic") {
    QpParams params{4, 10, 0.2, 100.0, 0.0};
    const QpInstance inst = qp_generate(params, 17);
    CHECK(inst.alpha1 == 0.0);
    // the assembled operator is PSD, so the measured bottom eigenvalue is zero
    CHECK(std::abs(inst.measured_lower) <= 1e-8);
    CHECK(inst.measured_upper == doctest::Approx(100.0).epsilon(0.01));
}

TEST_CASE("desk-scale qp instance hits its eigenvalue targets (dense oracle)") {
    QpParams params{20, 60, 0.05, 1e4, 1e3};
    const QpInstance inst = qp_generate(params, 7);
    const Matrix hessian = oracles::dense_symmetric_hessian(qp_hessian_operator(inst), 60);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().maxCoeff();
    const double bottom = eig.eigenvalues().minCoeff();
    CHECK(top >= 0.99e4);
    CHECK(top <= 1.01e4);
    CHECK(bottom <= -0.99e3);
    CHECK(bottom >= -1.01e3);
    // the PSD building blocks have entries in [0,1]
    for (const SparseMatrix& op : inst.A_ops) {
        CHECK(Matrix(op).minCoeff() >= 0.0);
        CHECK(Matrix(op).maxCoeff() <= 1.0 + 1e-12);
    }
}

TEST_CASE("qp oracle values and gradients") {
    QpParams params{4, 10, 0.2, 100.0, 10.0};
    const QpInstance inst = qp_generate(params, 5);
    const CompositeProblem problem = qp_oracles(inst);
    const int n = params.n;

    // at Z = 0 only the offset term survives
    const Vector zero = Vector::Zero(n * n);
    CHECK(problem.smooth_value(zero) ==
          doctest::Approx(0.5 * inst.alpha2 * inst.b.squaredNorm()));

    // gradient at 0 is -alpha2 * A*(b)
    Matrix adj = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < inst.A_ops.size(); ++i)
        adj += inst.b[static_cast<int>(i)] * Matrix(inst.A_ops[i]);
    CHECK((problem.smooth_grad(zero) + inst.alpha2 * flatten(adj)).norm() <
          1e-10 * (1.0 + inst.alpha2 * adj.norm()));

    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix m = Matrix::Zero(n, n);
        const Vector g = random_gaussian(n * n, rng);
        m = Eigen::Map<const Matrix>(g.data(), n, n);
        const Vector z = flatten(project_spectraplex(m));
        CHECK(gradient_matches_fd(problem, z, 1e-5));
    }

    CHECK(problem.in_domain(problem.initial_point, 1e-10));
    CHECK(*problem.diameter == doctest::Approx(std::sqrt(2.0)));
}

// ---------------------------------------------------------------- SVM

TEST_CASE("svm instance basics") {
    SvmParams params{50, 30, 10.0, 0.1};
    const SvmInstance inst = svm_generate(params, 3);
    for (int i = 0; i < inst.labels.size(); ++i)
        CHECK(std::abs(std::abs(inst.labels[i]) - 1.0) == 0.0);
    CHECK(inst.lambda == doctest::Approx(1.0 / 30.0));
    CHECK(inst.z0.norm() <= params.radius);

    const SvmInstance again = svm_generate(params, 3);
    CHECK((inst.points - again.points).cwiseAbs().maxCoeff() == 0.0);
    CHECK((inst.labels - again.labels).norm() == 0.0);
}

TEST_CASE("svm_lipschitz closed form") {
    SvmInstance inst;
    inst.params = SvmParams{4, 1, 1.0, 1.0};
    inst.points = Matrix::Zero(1, 4);
    inst.points(0, 1) = 1.0;  // unit norm
    inst.labels = Vector::Ones(1);
    inst.lambda = 0.0;
    CHECK(svm_lipschitz(inst) == doctest::Approx(0.7698003589195010).epsilon(1e-12));

    inst.lambda = 0.25;
    inst.points.setZero();
    CHECK(svm_lipschitz(inst) == doctest::Approx(0.25));

    // scaling the data by c scales the data term by c^2
    SvmInstance scaled = inst;
    scaled.lambda = 0.0;
    inst.lambda = 0.0;
    inst.points(0, 1) = 2.0;
    scaled.points(0, 1) = 6.0;
    CHECK(svm_lipschitz(scaled) == doctest::Approx(9.0 * svm_lipschitz(inst)));
}

TEST_CASE("svm oracle values and gradients") {
    SvmParams params{60, 40, 25.0, 0.08};
    const SvmInstance inst = svm_generate(params, 9);
    const CompositeProblem problem = svm_oracles(inst);

    // tanh(0) = 0, so the loss at the origin is exactly 1
    const Vector zero = Vector::Zero(params.n);
    CHECK(problem.smooth_value(zero) == doctest::Approx(1.0));
    Vector expected = Vector::Zero(params.n);
    for (int i = 0; i < params.p; ++i)
        expected -= inst.labels[i] * inst.points.row(i).transpose();
    expected /= params.p;
    CHECK((problem.smooth_grad(zero) - expected).norm() < 1e-12 * (1.0 + expected.norm()));

    CHECK(problem.upper_curvature == doctest::Approx(svm_lipschitz(inst)));
    CHECK(problem.lower_curvature == problem.upper_curvature);

    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 5; ++trial) {
        const Vector z = project_ball(random_gaussian(params.n, rng, 5.0), params.radius);
        CHECK(gradient_matches_fd(problem, z, 1e-5));
    }
}

// ---------------------------------------------------------------- sparse PCA

TEST_CASE("spca covariance is symmetric PSD and generation is pure") {
    const SpcaParams params = spca_dataset_preset(1, 60);
    const SpcaInstance inst = spca_generate(params, 4);
    CHECK((inst.sigma_hat - inst.sigma_hat.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(inst.sigma_hat, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() > -1e-10);

    const SpcaInstance again = spca_generate(params, 4);
    CHECK((inst.sigma_hat - again.sigma_hat).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(spca_generate(spca_dataset_preset(1, 40), 4), std::invalid_argument);
}

TEST_CASE("spca penalty derivative and branch agreement") {
    SpcaParams params = spca_dataset_preset(3, 12);
    const SpcaInstance inst = spca_generate(params, 8);
    const CompositeProblem problem = spca_oracles(inst);
    const int p = params.p;
    const int block = p * p;

    CHECK(problem.upper_curvature ==
          doctest::Approx(std::max(params.mu + 2.0 * params.beta, 1.0 / params.b)));
    CHECK(problem.lower_curvature == doctest::Approx(1.0 / params.b));

    // q'(0) = 0: the Y gradient vanishes at (X, Y) = (0, 0)
    const Vector zeros = Vector::Zero(2 * block);
    const Vector g0 = problem.smooth_grad(zeros);
    CHECK(g0.tail(block).norm() == 0.0);

    // both branches of q meet at |t| = b lambda with value -b lambda^2 / 2
    const double t = params.b * params.lambda;
    auto f_with_y11 = [&](double value) {
        Vector z = Vector::Zero(2 * block);
        z[block] = value;  // Y(0,0)
        return problem.smooth_value(z);
    };
    CHECK(f_with_y11(t - 1e-9) == doctest::Approx(f_with_y11(t + 1e-9)).epsilon(1e-6));
    const double expected_q = -params.b * params.lambda * params.lambda / 2.0;
    // isolate q by subtracting the coupling term beta/2 * t^2
    CHECK(f_with_y11(t) - 0.5 * params.beta * t * t == doctest::Approx(expected_q));

    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix xm = Eigen::Map<const Matrix>(random_gaussian(block, rng).data(), p, p);
        const Matrix x = project_fantope(0.5 * (xm + xm.transpose()), params.r);
        const Vector y = random_gaussian(block, rng, 2.0);
        Vector z(2 * block);
        z << flatten(x), y;
        CHECK(gradient_matches_fd(problem, z, 1e-5));
    }

    // prox splits blockwise: Fantope projection and entrywise shrinkage
    const Vector probe = random_gaussian(2 * block, rng, 2.0);
    const Vector proxed = problem.prox(probe, 0.3);
    const Matrix want_x = project_fantope(Matrix(as_matrix(probe, p, p, 0)), params.r);
    const Matrix want_y =
        soft_threshold(Matrix(as_matrix(probe, p, p, block)), 0.3 * params.lambda);
    CHECK((as_matrix(proxed, p, p, 0) - want_x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((as_matrix(proxed, p, p, block) - want_y).cwiseAbs().maxCoeff() == 0.0);

    CHECK(problem.in_domain(problem.initial_point, 1e-10));
    CHECK(problem.nonsmooth_value(proxed) ==
          doctest::Approx(params.lambda * want_y.cwiseAbs().sum()));
}

// ---------------------------------------------------------------- matrix completion

TEST_CASE("mc instance radius and determinism") {
    McParams params{12, 9, 0.4, 2.2, 1.0, 1.0};
    const McInstance inst = mc_generate(params, 6);
    const double cells = 12.0 * 9.0;
    const double expected =
        std::sqrt(inst.observed.squaredNorm() + 25.0 * (cells - inst.omega.size()));
    CHECK(inst.radius == doctest::Approx(expected));
    CHECK(inst.p0() == doctest::Approx(1.0));
    CHECK(inst.tau() == doctest::Approx(1.0));

    const McInstance again = mc_generate(params, 6);
    CHECK(inst.omega == again.omega);
    CHECK((inst.observed - again.observed).norm() == 0.0);
}

TEST_CASE("mc oracle values and gradients") {
    McParams params{10, 8, 0.35, 1.5, 1.0, 0.5};
    const McInstance inst = mc_generate(params, 14);
    const CompositeProblem problem = mc_oracles(inst);

    CHECK(problem.upper_curvature == doctest::Approx(std::max(1.0, 2.0 * 1.5 * 4.0)));
    CHECK(problem.lower_curvature == doctest::Approx(2.0 * 1.5 * 4.0));

    // at Z = 0 the spectral part of the gradient cancels (p'(0) = p0)
    const Vector zero = Vector::Zero(params.rows * params.cols);
    Matrix data_grad = Matrix::Zero(params.rows, params.cols);
    for (std::size_t t = 0; t < inst.omega.size(); ++t)
        data_grad(inst.omega[t].first, inst.omega[t].second) = -inst.observed[static_cast<int>(t)];
    CHECK((problem.smooth_grad(zero) - flatten(data_grad)).norm() < 1e-12);

    // a matrix agreeing with O on Omega has zero data term
    Matrix filled = Matrix::Zero(params.rows, params.cols);
    for (std::size_t t = 0; t < inst.omega.size(); ++t)
        filled(inst.omega[t].first, inst.omega[t].second) = inst.observed[static_cast<int>(t)];
    Eigen::JacobiSVD<Matrix> svd(filled);
    double spectral = 0.0;
    for (int i = 0; i < svd.singularValues().size(); ++i) {
        const double s = svd.singularValues()[i];
        spectral += params.beta * std::log1p(s / params.theta) - inst.p0() * s;
    }
    CHECK(problem.smooth_value(flatten(filled)) == doctest::Approx(params.mu * spectral));

    std::mt19937_64 rng(27);
    for (int trial = 0; trial < 5; ++trial) {
        const Vector z =
            project_ball(random_gaussian(params.rows * params.cols, rng, 2.0), inst.radius);
        CHECK(gradient_matches_fd(problem, z, 1e-4));
    }
}

TEST_CASE("ratings reader feeds matrix completion") {
    const std::string path = "/tmp/acacg_test_ratings.tsv";
    {
        std::ofstream out(path);
        out << "1\t2\t5\t881250949\n";
        out << "3\t1\t3\t881250950\n";
        out << "2\t4\t1\t881250951\n";
    }
    const RatingsData data = read_ratings_tsv(path);
    CHECK(data.entries.size() == 3);
    CHECK(data.max_user == 3);
    CHECK(data.max_item == 4);

    McParams params;
    params.mu = 1.0;
    const McInstance inst = mc_from_ratings(data, params);
    CHECK(inst.params.rows == 3);
    CHECK(inst.params.cols == 4);
    CHECK(inst.omega.size() == 3);
    CHECK(inst.observed[0] == doctest::Approx(5.0));
    // 9 unobserved cells filled with 5 under the radius convention
    CHECK(inst.radius == doctest::Approx(std::sqrt(25.0 + 9.0 + 1.0 + 25.0 * 9.0)));
    std::remove(path.c_str());
}

// ---------------------------------------------------------------- NMF

TEST_CASE("nmf instance and oracle basics") {
    NmfParams params{16, 10, 3, 0.01};
    const NmfInstance inst = nmf_generate(params, 2);
    CHECK(inst.data.minCoeff() >= 0.0);
    CHECK(inst.curvature_estimate > 0.0);

    const NmfInstance again = nmf_generate(params, 2);
    CHECK((inst.data - again.data).cwiseAbs().maxCoeff() == 0.0);
    CHECK(inst.curvature_estimate == again.curvature_estimate);

    const CompositeProblem problem = nmf_oracles(inst);
    CHECK(problem.upper_curvature == doctest::Approx(inst.curvature_estimate));

    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 5; ++trial) {
        const Vector z = project_nonneg(random_gaussian(16 * 3 + 3 * 10, rng));
        CHECK(problem.smooth_value(z) >= 0.0);
        CHECK(gradient_matches_fd(problem, z, 1e-5));
    }
}

TEST_CASE("nmf gradient vanishes at an exact factorization") {
    const int n = 8, l = 6, p = 2;
    const Matrix x0 = Matrix::Constant(n, p, 1.0 / (n * p));
    const Matrix y0 = Matrix::Constant(p, l, 1.0 / (p * l));
    const NmfInstance inst = nmf_from_matrix(x0 * y0, p);
    const CompositeProblem problem = nmf_oracles(inst);
    CHECK(problem.smooth_grad(problem.initial_point).norm() == 0.0);
    CHECK(problem.smooth_value(problem.initial_point) == 0.0);

    CHECK_THROWS_AS(nmf_from_matrix(-Matrix::Ones(2, 2), 1), std::invalid_argument);
}

// ---------------------------------------------------------------- prox optimality

TEST_CASE("family prox oracles satisfy the subgradient inequality") {
    std::mt19937_64 rng(88);

    struct ProxCase {
        std::string name;
        std::function<Vector(const Vector&, double)> prox;
        std::function<double(const Vector&)> h_value;  // +inf outside dom h
        std::function<Vector()> sample;                // random feasible point
        int dim;
    };

    const double R = 2.5;
    std::vector<ProxCase> cases;
    cases.push_back({"ball indicator",
                     [R](const Vector& z, double) { return project_ball(z, R); },
                     [R](const Vector& z) {
                         return z.norm() <= R + 1e-9 ? 0.0
                                                     : std::numeric_limits<double>::infinity();
                     },
                     [&rng, R]() { return project_ball(random_gaussian(6, rng, 3.0), R); }, 6});
    cases.push_back({"nonneg indicator",
                     [](const Vector& z, double) { return project_nonneg(z); },
                     [](const Vector& z) {
                         return z.minCoeff() >= -1e-9 ? 0.0
                                                      : std::numeric_limits<double>::infinity();
                     },
                     [&rng]() { return project_nonneg(random_gaussian(6, rng, 2.0)); }, 6});
    cases.push_back(
        {"spectraplex indicator",
         [](const Vector& z, double) { return flatten(project_spectraplex(as_matrix(z, 3, 3))); },
         [](const Vector& z) {
             const Matrix m = as_matrix(z, 3, 3);
             if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8) return
                 std::numeric_limits<double>::infinity();
             Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
             if (eig.eigenvalues().minCoeff() < -1e-9 || std::abs(m.trace() - 1.0) > 1e-8)
                 return std::numeric_limits<double>::infinity();
             return 0.0;
         },
         [&rng]() {
             const Matrix m = Eigen::Map<const Matrix>(random_gaussian(9, rng).data(), 3, 3);
             return flatten(project_spectraplex(m));
         },
         9});
    const double tau = 0.6;
    cases.push_back(
        {"soft threshold (l1)",
         [](const Vector& z, double step) { return soft_threshold(Vector(z), step * 0.6); },
         [tau](const Vector& z) { return tau * z.lpNorm<1>(); },
         [&rng]() { return random_gaussian(6, rng, 2.0); }, 6});
    const double nuc_R = 3.0, nuc_tau = 0.4;
    cases.push_back({"nuclear norm + ball",
                     [nuc_R, nuc_tau](const Vector& z, double step) {
                         return flatten(
                             prox_nuclear_ball(Matrix(as_matrix(z, 3, 3)), step * nuc_tau, nuc_R));
                     },
                     [nuc_R, nuc_tau](const Vector& z) {
                         const Matrix m = as_matrix(z, 3, 3);
                         if (m.norm() > nuc_R + 1e-9)
                             return std::numeric_limits<double>::infinity();
                         Eigen::JacobiSVD<Matrix> svd(m);
                         return nuc_tau * svd.singularValues().sum();
                     },
                     [&rng, nuc_R]() {
                         Vector z = random_gaussian(9, rng, 2.0);
                         if (z.norm() > nuc_R) z *= nuc_R / z.norm();
                         return z;
                     },
                     9});

    for (const ProxCase& item : cases) {
        CAPTURE(item.name);
        for (int trial = 0; trial < 10; ++trial) {
            const Vector z = random_gaussian(item.dim, rng, 2.0);
            const double step = 0.25 + 0.5 * (trial % 3);
            const Vector prox_out = item.prox(z, step);
            std::vector<Vector> probes;
            for (int probe = 0; probe < 50; ++probe) probes.push_back(item.sample());
            CHECK(oracles::prox_optimality_holds(item.h_value, z, step, prox_out, probes, 1e-8));
        }
    }
}

// ---------------------------------------------------------------- file readers

TEST_CASE("matrix csv round trip") {
    std::mt19937_64 rng(91);
    Matrix m(4, 3);
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 4; ++i) m(i, j) = random_gaussian(1, rng)[0] * 1e3;
    const std::string path = "/tmp/acacg_test_matrix.csv";
    write_matrix_csv(path, m);
    const Matrix back = read_matrix_csv(path);
    REQUIRE(back.rows() == 4);
    REQUIRE(back.cols() == 3);
    CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
    std::remove(path.c_str());

    CHECK_THROWS(read_matrix_csv("/tmp/definitely_missing_file.csv"));
}
