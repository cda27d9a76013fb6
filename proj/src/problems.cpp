#include "acacg/problems.hpp"

#include "acacg/prox.hpp"
#include "acacg/solvers.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>

namespace acacg {

namespace {

double sech_squared(double t) {
    if (std::abs(t) > 350.0) return 0.0;
    const double c = std::cosh(t);
    return 1.0 / (c * c);
}

double sparse_dot(const SparseMatrix& s, const Eigen::Map<const Matrix>& dense) {
    double acc = 0.0;
    for (int outer = 0; outer < s.outerSize(); ++outer)
        for (SparseMatrix::InnerIterator it(s, outer); it; ++it)
            acc += it.value() * dense(it.row(), it.col());
    return acc;
}

void sparse_axpy(double coeff, const SparseMatrix& s, Matrix& dest) {
    for (int outer = 0; outer < s.outerSize(); ++outer)
        for (SparseMatrix::InnerIterator it(s, outer); it; ++it)
            dest(it.row(), it.col()) += coeff * it.value();
}

/// Sparse symmetric PSD matrix with nonnegative entries rescaled into [0,1].
SparseMatrix sparse_psd(int n, double density, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double factor_density = std::min(1.0, std::sqrt(density / n));
    Matrix factor = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double coin = unif(rng);
            const double value = unif(rng);
            if (coin < factor_density) factor(i, j) = value;
        }
    Matrix dense = factor.transpose() * factor;
    const double peak = dense.maxCoeff();
    if (peak > 0.0) dense /= peak;
    return dense.sparseView(1.0, 1e-300);
}

}  // namespace

// ---------------------------------------------------------------- QP

namespace {

struct QpOperators {
    Vector apply_A(const QpInstance& inst, const Eigen::Map<const Matrix>& Z) const {
        Vector out(inst.A_ops.size());
        for (std::size_t i = 0; i < inst.A_ops.size(); ++i)
            out[static_cast<int>(i)] = sparse_dot(inst.A_ops[i], Z);
        return out;
    }
    Vector apply_B(const QpInstance& inst, const Eigen::Map<const Matrix>& Z) const {
        Vector out(inst.B_ops.size());
        for (std::size_t j = 0; j < inst.B_ops.size(); ++j)
            out[static_cast<int>(j)] = sparse_dot(inst.B_ops[j], Z);
        return out;
    }
    Matrix adjoint_A(const QpInstance& inst, const Vector& w) const {
        Matrix out = Matrix::Zero(inst.params.n, inst.params.n);
        for (std::size_t i = 0; i < inst.A_ops.size(); ++i)
            sparse_axpy(w[static_cast<int>(i)], inst.A_ops[i], out);
        return out;
    }
    Matrix adjoint_B(const QpInstance& inst, const Vector& u) const {
        Matrix out = Matrix::Zero(inst.params.n, inst.params.n);
        for (std::size_t j = 0; j < inst.B_ops.size(); ++j)
            sparse_axpy(u[static_cast<int>(j)], inst.B_ops[j], out);
        return out;
    }
};

LinearOperator hessian_operator(std::shared_ptr<const QpInstance> inst, double alpha1,
                                double alpha2) {
    return [inst, alpha1, alpha2](const Vector& z) {
        const QpOperators ops;
        const int n = inst->params.n;
        const auto Z = as_matrix(z, n, n);
        Matrix out = Matrix::Zero(n, n);
        if (alpha1 != 0.0) {
            Vector u = ops.apply_B(*inst, Z);
            u.array() *= inst->d_diag.array().square();
            out -= alpha1 * ops.adjoint_B(*inst, u);
        }
        if (alpha2 != 0.0) {
            const Vector w = ops.apply_A(*inst, Z);
            out += alpha2 * ops.adjoint_A(*inst, w);
        }
        return flatten(out);
    };
}

}  // namespace

LinearOperator qp_hessian_operator(const QpInstance& inst) {
    auto copy = std::make_shared<const QpInstance>(inst);
    return hessian_operator(copy, inst.alpha1, inst.alpha2);
}

QpInstance qp_generate(const QpParams& params, std::uint64_t seed) {
    if (params.density <= 0.0 || params.density > 1.0)
        throw std::invalid_argument("qp_generate: density must lie in (0,1]");
    if (params.target_upper < params.target_lower || params.target_lower < 0.0)
        throw std::invalid_argument("qp_generate: need target_upper >= target_lower >= 0");

    const int dim = params.n * params.n;
    std::string last_error;
    for (int attempt = 0; attempt <= 3; ++attempt) {
        const std::uint64_t attempt_seed = seed + static_cast<std::uint64_t>(attempt);
        std::mt19937_64 rng(attempt_seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::uniform_int_distribution<int> diag_dist(1, 1000);

        QpInstance inst;
        inst.params = params;
        inst.seed = attempt_seed;
        inst.A_ops.reserve(params.l);
        inst.B_ops.reserve(params.n);
        for (int i = 0; i < params.l; ++i) inst.A_ops.push_back(sparse_psd(params.n, params.density, rng));
        for (int j = 0; j < params.n; ++j) inst.B_ops.push_back(sparse_psd(params.n, params.density, rng));
        inst.d_diag.resize(params.n);
        for (int j = 0; j < params.n; ++j) inst.d_diag[j] = diag_dist(rng);
        inst.b.resize(params.l);
        for (int i = 0; i < params.l; ++i) inst.b[i] = unif(rng);

        auto shared = std::make_shared<const QpInstance>(inst);
        const unsigned eig_seed = static_cast<unsigned>(attempt_seed & 0xffffffffu);
        try {
            const double h1 =
                extreme_eigenvalue(hessian_operator(shared, -1.0, 0.0), dim,
                                   WhichEigenvalue::Largest, 1e-6, eig_seed);
            const double h2 =
                extreme_eigenvalue(hessian_operator(shared, 0.0, 1.0), dim,
                                   WhichEigenvalue::Largest, 1e-6, eig_seed);
            if (h1 <= 0.0 && params.target_lower > 0.0)
                throw NumericalError("qp_generate: zero curvature operator B*D^2B");
            if (h2 <= 0.0) throw NumericalError("qp_generate: zero curvature operator A*A");

            double alpha1 = params.target_lower > 0.0 ? params.target_lower / h1 : 0.0;
            double alpha2 = params.target_upper / h2;

            auto measure = [&](double a1, double a2) {
                const LinearOperator H = hessian_operator(shared, a1, a2);
                const double top =
                    extreme_eigenvalue(H, dim, WhichEigenvalue::Largest, 1e-6, eig_seed);
                const double bottom =
                    extreme_eigenvalue(H, dim, WhichEigenvalue::Smallest, 1e-6, eig_seed);
                return std::make_pair(top, -bottom);
            };

            auto [upper, lower] = measure(alpha1, alpha2);
            // verify-and-rescale: resolve the 2x2 interference system against the
            // measured extremes until both targets land within 1%. When the two
            // operators are strongly aligned the resolve contracts slowly but
            // geometrically, so an Aitken jump on the coefficient sequences
            // collapses the crawl.
            std::vector<double> hist1, hist2;
            auto extrapolate = [](const std::vector<double>& hist, double next) {
                const std::size_t n = hist.size();
                if (n < 2) return next;
                const double d1 = hist[n - 1] - hist[n - 2];
                const double d2 = next - hist[n - 1];
                if (d1 == 0.0 || d2 == 0.0) return next;
                const double r = d2 / d1;
                if (r <= 0.05 || r >= 0.995) return next;
                const double jumped = next + d2 * r / (1.0 - r);
                return jumped > 0.0 ? jumped : next;
            };
            for (int round = 0; round < 60; ++round) {
                const bool upper_off =
                    std::abs(upper - params.target_upper) > 0.01 * params.target_upper;
                const bool lower_off =
                    params.target_lower > 0.0 &&
                    std::abs(lower - params.target_lower) > 0.01 * params.target_lower;
                if (!upper_off && !lower_off) break;
                const double e1 = alpha1 > 0.0 ? (alpha2 * h2 - upper) / alpha1 : 0.0;
                const double e2 = (alpha1 * h1 - lower) / alpha2;
                const double denom = h2 - e1 * e2 / h1;
                if (denom <= 0.0) break;
                double a2 = (params.target_upper + e1 * params.target_lower / h1) / denom;
                double a1 =
                    params.target_lower > 0.0 ? (params.target_lower + a2 * e2) / h1 : 0.0;
                if (!(a2 > 0.0) || a1 < 0.0) break;
                hist1.push_back(alpha1);
                hist2.push_back(alpha2);
                if (params.target_lower > 0.0) a1 = extrapolate(hist1, a1);
                a2 = extrapolate(hist2, a2);
                alpha1 = a1;
                alpha2 = a2;
                std::tie(upper, lower) = measure(alpha1, alpha2);
            }
            if (std::abs(upper - params.target_upper) > 0.01 * params.target_upper)
                throw NumericalError("qp_generate: lambda_max misses the target after rescale");
            if (params.target_lower > 0.0 &&
                std::abs(lower - params.target_lower) > 0.01 * params.target_lower)
                throw NumericalError("qp_generate: lambda_min misses the target after rescale");

            inst.alpha1 = alpha1;
            inst.alpha2 = alpha2;
            inst.measured_upper = upper;
            inst.measured_lower = lower;
            return inst;
        } catch (const NumericalError& err) {
            last_error = err.what();
        }
    }
    throw NumericalError("qp_generate: giving up after 3 resamples: " + last_error);
}

CompositeProblem qp_oracles(const QpInstance& inst) {
    auto data = std::make_shared<const QpInstance>(inst);
    const int n = inst.params.n;
    const double alpha1 = inst.alpha1, alpha2 = inst.alpha2;

    CompositeProblem problem;
    problem.shape = VariableShape::matrix(n, n);
    problem.upper_curvature = inst.params.target_upper;
    problem.lower_curvature = inst.params.target_lower;
    problem.diameter = std::sqrt(2.0);
    problem.initial_point = flatten(Matrix::Identity(n, n) / n);

    problem.smooth_value = [data, n, alpha1, alpha2](const Vector& z) {
        const QpOperators ops;
        const auto Z = as_matrix(z, n, n);
        Vector u = ops.apply_B(*data, Z);
        u.array() *= data->d_diag.array();
        const Vector w = ops.apply_A(*data, Z) - data->b;
        return -0.5 * alpha1 * u.squaredNorm() + 0.5 * alpha2 * w.squaredNorm();
    };
    problem.smooth_grad = [data, n, alpha1, alpha2](const Vector& z) {
        const QpOperators ops;
        const auto Z = as_matrix(z, n, n);
        Vector u = ops.apply_B(*data, Z);
        u.array() *= data->d_diag.array().square();
        const Vector w = ops.apply_A(*data, Z) - data->b;
        Matrix g = alpha2 * ops.adjoint_A(*data, w);
        if (alpha1 != 0.0) g -= alpha1 * ops.adjoint_B(*data, u);
        return flatten(g);
    };
    problem.prox = [n](const Vector& z, double) {
        return flatten(project_spectraplex(as_matrix(z, n, n)));
    };
    problem.in_domain = [n](const Vector& z, double tol) {
        const auto Z = as_matrix(z, n, n);
        if ((Z - Z.transpose()).cwiseAbs().maxCoeff() > tol) return false;
        if (std::abs(Z.trace() - 1.0) > tol) return false;
        Eigen::SelfAdjointEigenSolver<Matrix> es(Z, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff() >= -tol;
    };
    return problem;
}

// ---------------------------------------------------------------- SVM

namespace {

Vector sample_in_ball(int n, double radius, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector z(n);
    for (int i = 0; i < n; ++i) z[i] = gauss(rng);
    z.normalize();
    return z * radius * std::pow(unif(rng), 1.0 / n);
}

}  // namespace

SvmInstance svm_generate(const SvmParams& params, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    SvmInstance inst;
    inst.params = params;
    inst.seed = seed;
    inst.points = Matrix::Zero(params.p, params.n);
    for (int i = 0; i < params.p; ++i)
        for (int j = 0; j < params.n; ++j) {
            const double coin = unif(rng);
            const double value = unif(rng);
            if (coin < params.sparsity) inst.points(i, j) = value;
        }
    const Vector separator = sample_in_ball(params.n, params.radius, rng);
    inst.labels.resize(params.p);
    for (int i = 0; i < params.p; ++i)
        inst.labels[i] = inst.points.row(i).dot(separator) >= 0.0 ? 1.0 : -1.0;
    inst.lambda = 1.0 / params.p;
    inst.z0 = sample_in_ball(params.n, params.radius, rng);
    return inst;
}

double svm_lipschitz(const SvmInstance& inst) {
    const double c = 4.0 * std::sqrt(3.0) / 9.0;
    double sum = 0.0;
    for (int i = 0; i < inst.points.rows(); ++i) sum += c * inst.points.row(i).squaredNorm();
    return sum / inst.points.rows() + inst.lambda;
}

CompositeProblem svm_oracles(const SvmInstance& inst) {
    auto data = std::make_shared<const SvmInstance>(inst);
    const double M = svm_lipschitz(inst);
    const double radius = inst.params.radius;

    CompositeProblem problem;
    problem.shape = VariableShape::vector(inst.params.n);
    problem.upper_curvature = M;
    problem.lower_curvature = M;  // no sharper bound is known
    problem.diameter = 2.0 * radius;
    problem.initial_point = inst.z0;

    problem.smooth_value = [data](const Vector& z) {
        const Vector t = data->points * z;
        double loss = 0.0;
        for (int i = 0; i < t.size(); ++i) loss += 1.0 - std::tanh(data->labels[i] * t[i]);
        return loss / t.size() + 0.5 * data->lambda * z.squaredNorm();
    };
    problem.smooth_grad = [data](const Vector& z) {
        const Vector t = data->points * z;
        Vector coeff(t.size());
        for (int i = 0; i < t.size(); ++i)
            coeff[i] = -data->labels[i] * sech_squared(data->labels[i] * t[i]);
        return Vector(data->points.transpose() * coeff / t.size() + data->lambda * z);
    };
    problem.prox = [radius](const Vector& z, double) { return project_ball(z, radius); };
    problem.in_domain = [radius](const Vector& z, double tol) { return z.norm() <= radius + tol; };
    return problem;
}

// ---------------------------------------------------------------- sparse PCA

SpcaParams spca_dataset_preset(int which, int p) {
    SpcaParams params;
    params.p = p;
    switch (which) {
        case 1: params = {10, 5, p, 3.0, 0.33, 1.67, 0.25, 80}; break;
        case 2: params = {10, 5, p, 3.0, 0.33, 3.33, 1.0, 80}; break;
        case 3: params = {5, 1, p, 3.0, 30.0, 3.0, 5.0, 80}; break;
        case 4: params = {5, 1, p, 3.0, 30.0, 0.67, 1.0, 80}; break;
        default: throw std::invalid_argument("spca_dataset_preset: dataset index in 1..4");
    }
    return params;
}

SpcaInstance spca_generate(const SpcaParams& params, std::uint64_t seed) {
    if (params.s * params.r > params.p)
        throw std::invalid_argument("spca_generate: s*r disjoint supports exceed dimension");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> coin(0, 1);

    // spiked covariance with s-sparse leading eigenvectors on disjoint supports
    Matrix sigma = Matrix::Identity(params.p, params.p);
    for (int j = 0; j < params.r; ++j) {
        Vector v = Vector::Zero(params.p);
        for (int i = 0; i < params.s; ++i)
            v[j * params.s + i] = (coin(rng) == 0 ? -1.0 : 1.0) / std::sqrt(params.s);
        const double spike = 4.0 * (params.r - j);
        sigma += spike * v * v.transpose();
    }

    const Eigen::LLT<Matrix> chol(sigma);
    Matrix sum = Matrix::Zero(params.p, params.p);
    for (int draw = 0; draw < params.samples; ++draw) {
        Vector g(params.p);
        for (int i = 0; i < params.p; ++i) g[i] = gauss(rng);
        const Vector x = chol.matrixL() * g;
        sum.noalias() += x * x.transpose();
    }
    Matrix hat = sum / params.samples;

    SpcaInstance inst;
    inst.params = params;
    inst.seed = seed;
    inst.sigma_hat = 0.5 * (hat + hat.transpose());
    return inst;
}

CompositeProblem spca_oracles(const SpcaInstance& inst) {
    auto data = std::make_shared<const SpcaInstance>(inst);
    const int p = inst.params.p;
    const double b = inst.params.b, beta = inst.params.beta, mu = inst.params.mu,
                 lambda = inst.params.lambda;
    const int r = inst.params.r;
    const int block = p * p;

    CompositeProblem problem;
    problem.shape = VariableShape::matrix_pair(p, p, p, p);
    problem.upper_curvature = std::max(mu + 2.0 * beta, 1.0 / b);
    problem.lower_curvature = 1.0 / b;

    Matrix x0 = Matrix::Zero(p, p);
    for (int i = 0; i < r; ++i) x0(i, i) = 1.0;
    Vector init(2 * block);
    init << flatten(x0), flatten(x0);
    problem.initial_point = init;

    auto q_value = [b, lambda](double t) {
        const double at = std::abs(t);
        if (at <= b * lambda) return -t * t / (2.0 * b);
        return b * lambda * lambda / 2.0 - lambda * at;
    };
    auto q_prime = [b, lambda](double t) {
        if (std::abs(t) <= b * lambda) return -t / b;
        return t > 0.0 ? -lambda : lambda;
    };

    problem.smooth_value = [data, p, block, mu, beta, q_value](const Vector& z) {
        const auto X = as_matrix(z, p, p, 0);
        const auto Y = as_matrix(z, p, p, block);
        double q_sum = 0.0;
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < p; ++i) q_sum += q_value(Y(i, j));
        const double coupling = (X - Y).squaredNorm();
        return -(data->sigma_hat.cwiseProduct(X)).sum() + 0.5 * mu * X.squaredNorm() + q_sum +
               0.5 * beta * coupling;
    };
    problem.smooth_grad = [data, p, block, mu, beta, q_prime](const Vector& z) {
        const auto X = as_matrix(z, p, p, 0);
        const auto Y = as_matrix(z, p, p, block);
        const Matrix diff = X - Y;
        const Matrix gx = -data->sigma_hat + mu * X + beta * diff;
        Matrix gy = -beta * diff;
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < p; ++i) gy(i, j) += q_prime(Y(i, j));
        Vector g(2 * block);
        g << flatten(gx), flatten(gy);
        return g;
    };
    problem.prox = [p, block, r, lambda](const Vector& z, double step) {
        const Matrix X = project_fantope(as_matrix(z, p, p, 0), r);
        const Matrix Y = soft_threshold(Matrix(as_matrix(z, p, p, block)), step * lambda);
        Vector out(2 * block);
        out << flatten(X), flatten(Y);
        return out;
    };
    problem.nonsmooth_value = [p, block, lambda](const Vector& z) {
        return lambda * as_matrix(z, p, p, block).cwiseAbs().sum();
    };
    problem.in_domain = [p, r](const Vector& z, double tol) {
        const auto X = as_matrix(z, p, p, 0);
        if ((X - X.transpose()).cwiseAbs().maxCoeff() > tol) return false;
        if (std::abs(X.trace() - r) > tol) return false;
        Eigen::SelfAdjointEigenSolver<Matrix> es(X, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff() >= -tol && es.eigenvalues().maxCoeff() <= 1.0 + tol;
    };
    return problem;
}

// ---------------------------------------------------------------- matrix completion

RatingsData read_ratings_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_ratings_tsv: cannot open " + path);
    RatingsData data;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        long user = 0, item = 0, rating = 0, timestamp = 0;
        if (!(row >> user >> item >> rating >> timestamp))
            throw std::runtime_error("read_ratings_tsv: malformed record: " + line);
        data.entries.emplace_back(static_cast<int>(user), static_cast<int>(item),
                                  static_cast<double>(rating));
        data.max_user = std::max(data.max_user, static_cast<int>(user));
        data.max_item = std::max(data.max_item, static_cast<int>(item));
    }
    return data;
}

namespace {

double mc_radius(const McInstance& inst) {
    const double cells = static_cast<double>(inst.params.rows) * inst.params.cols;
    const double unobserved = cells - static_cast<double>(inst.omega.size());
    return std::sqrt(inst.observed.squaredNorm() + 25.0 * unobserved);
}

}  // namespace

McInstance mc_generate(const McParams& params, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> rating(1, 5);

    McInstance inst;
    inst.params = params;
    inst.seed = seed;
    std::vector<double> values;
    for (int j = 0; j < params.cols; ++j)
        for (int i = 0; i < params.rows; ++i) {
            const double coin = unif(rng);
            const int value = rating(rng);
            if (coin < params.observe_fraction) {
                inst.omega.emplace_back(i, j);
                values.push_back(value);
            }
        }
    inst.observed = Eigen::Map<const Vector>(values.data(), static_cast<int>(values.size()));
    inst.radius = mc_radius(inst);
    return inst;
}

McInstance mc_from_ratings(const RatingsData& data, const McParams& params) {
    McInstance inst;
    inst.params = params;
    inst.params.rows = data.max_user;
    inst.params.cols = data.max_item;
    std::vector<double> values;
    for (const auto& [user, item, rating] : data.entries) {
        inst.omega.emplace_back(user - 1, item - 1);
        values.push_back(rating);
    }
    inst.observed = Eigen::Map<const Vector>(values.data(), static_cast<int>(values.size()));
    inst.radius = mc_radius(inst);
    return inst;
}

CompositeProblem mc_oracles(const McInstance& inst) {
    auto data = std::make_shared<const McInstance>(inst);
    const int rows = inst.params.rows, cols = inst.params.cols;
    const double mu = inst.params.mu, beta = inst.params.beta, theta = inst.params.theta;
    const double p0 = inst.p0();
    const double R = inst.radius;

    CompositeProblem problem;
    problem.shape = VariableShape::matrix(rows, cols);
    problem.upper_curvature = std::max(1.0, 2.0 * mu * inst.tau());
    problem.lower_curvature = 2.0 * mu * inst.tau();
    problem.diameter = 2.0 * R;

    {
        std::mt19937_64 rng(inst.seed ^ 0x9e3779b97f4a7c15ull);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Vector z0(rows * cols);
        for (int i = 0; i < z0.size(); ++i) z0[i] = gauss(rng);
        problem.initial_point = project_ball(z0, R);
    }

    problem.smooth_value = [data, rows, cols, mu, beta, theta, p0](const Vector& z) {
        const auto Z = as_matrix(z, rows, cols);
        double fit = 0.0;
        for (std::size_t t = 0; t < data->omega.size(); ++t) {
            const auto [i, j] = data->omega[t];
            const double d = Z(i, j) - data->observed[static_cast<int>(t)];
            fit += d * d;
        }
        Eigen::JacobiSVD<Matrix> svd(Z);
        double spectral = 0.0;
        for (int i = 0; i < svd.singularValues().size(); ++i) {
            const double s = svd.singularValues()[i];
            spectral += beta * std::log1p(s / theta) - p0 * s;
        }
        return 0.5 * fit + mu * spectral;
    };
    problem.smooth_grad = [data, rows, cols, mu, beta, theta, p0](const Vector& z) {
        const auto Z = as_matrix(z, rows, cols);
        Matrix g = Matrix::Zero(rows, cols);
        for (std::size_t t = 0; t < data->omega.size(); ++t) {
            const auto [i, j] = data->omega[t];
            g(i, j) = Z(i, j) - data->observed[static_cast<int>(t)];
        }
        Eigen::JacobiSVD<Matrix> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
        Vector coeff = svd.singularValues();
        for (int i = 0; i < coeff.size(); ++i) coeff[i] = beta / (theta + coeff[i]) - p0;
        g.noalias() += mu * svd.matrixU() * coeff.asDiagonal() * svd.matrixV().transpose();
        return flatten(g);
    };
    problem.prox = [rows, cols, mu, p0, R](const Vector& z, double step) {
        return flatten(prox_nuclear_ball(as_matrix(z, rows, cols), step * mu * p0, R));
    };
    problem.nonsmooth_value = [rows, cols, mu, p0](const Vector& z) {
        Eigen::JacobiSVD<Matrix> svd(as_matrix(z, rows, cols));
        return mu * p0 * svd.singularValues().sum();
    };
    problem.in_domain = [R](const Vector& z, double tol) { return z.norm() <= R + tol; };
    return problem;
}

// ---------------------------------------------------------------- NMF

namespace {

CompositeProblem nmf_oracles_impl(std::shared_ptr<const NmfInstance> data) {
    const int n = data->params.rows, l = data->params.cols, p = data->params.inner;
    const int x_block = n * p;

    CompositeProblem problem;
    problem.shape = VariableShape::matrix_pair(n, p, p, l);
    problem.upper_curvature = data->curvature_estimate;
    problem.lower_curvature = data->curvature_estimate;

    Vector init(x_block + p * l);
    init << flatten(Matrix::Constant(n, p, 1.0 / (n * p))),
        flatten(Matrix::Constant(p, l, 1.0 / (p * l)));
    problem.initial_point = init;

    problem.smooth_value = [data, n, l, p, x_block](const Vector& z) {
        const auto X = as_matrix(z, n, p, 0);
        const auto Y = as_matrix(z, p, l, x_block);
        return 0.5 * (data->data - X * Y).squaredNorm();
    };
    problem.smooth_grad = [data, n, l, p, x_block](const Vector& z) {
        const auto X = as_matrix(z, n, p, 0);
        const auto Y = as_matrix(z, p, l, x_block);
        const Matrix residual_matrix = X * Y - data->data;
        Vector g(x_block + p * l);
        g << flatten(residual_matrix * Y.transpose()), flatten(X.transpose() * residual_matrix);
        return g;
    };
    problem.prox = [](const Vector& z, double) { return project_nonneg(z); };
    problem.in_domain = [](const Vector& z, double tol) { return z.minCoeff() >= -tol; };
    return problem;
}

double nmf_curvature_estimate(const NmfInstance& inst) {
    auto data = std::make_shared<const NmfInstance>(inst);
    const CompositeProblem probe = nmf_oracles_impl(data);
    const Vector origin = Vector::Zero(probe.initial_point.size());
    const auto curvature = observed_curvature(probe, origin, probe.initial_point);
    if (!curvature) throw NumericalError("nmf: degenerate initial point for curvature estimate");
    return 100.0 * std::abs(*curvature);
}

}  // namespace

NmfInstance nmf_generate(const NmfParams& params, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    NmfInstance inst;
    inst.params = params;
    inst.seed = seed;
    Matrix w(params.rows, params.inner), h(params.inner, params.cols);
    for (int j = 0; j < w.cols(); ++j)
        for (int i = 0; i < w.rows(); ++i) w(i, j) = unif(rng);
    for (int j = 0; j < h.cols(); ++j)
        for (int i = 0; i < h.rows(); ++i) h(i, j) = unif(rng);
    inst.data = w * h;
    for (int j = 0; j < inst.data.cols(); ++j)
        for (int i = 0; i < inst.data.rows(); ++i) inst.data(i, j) += params.noise * unif(rng);
    inst.curvature_estimate = nmf_curvature_estimate(inst);
    return inst;
}

NmfInstance nmf_from_matrix(const Matrix& data, int inner) {
    if (data.minCoeff() < 0.0)
        throw std::invalid_argument("nmf_from_matrix: data must be nonnegative");
    NmfInstance inst;
    inst.params.rows = static_cast<int>(data.rows());
    inst.params.cols = static_cast<int>(data.cols());
    inst.params.inner = inner;
    inst.data = data;
    inst.curvature_estimate = nmf_curvature_estimate(inst);
    return inst;
}

CompositeProblem nmf_oracles(const NmfInstance& inst) {
    return nmf_oracles_impl(std::make_shared<const NmfInstance>(inst));
}

// ---------------------------------------------------------------- file readers

Matrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_matrix_csv: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("read_matrix_csv: ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    Matrix m(static_cast<int>(rows.size()), rows.empty() ? 0 : static_cast<int>(rows[0].size()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    return m;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_matrix_csv: cannot open " + path);
    out.precision(17);
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
}

}  // namespace acacg
