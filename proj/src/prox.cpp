#include "acacg/prox.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace acacg {

namespace {

void require_finite(const Vector& v, const char* who) {
    if (!v.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite input");
}

}  // namespace

SpectralDecomposition eigen_decompose(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eigen_decompose: eigendecomposition failed");
    const int n = static_cast<int>(symmetric.rows());
    SpectralDecomposition out;
    out.basis.resize(n, n);
    out.values.resize(n);
    // Eigen returns ascending order; reverse to descending.
    for (int i = 0; i < n; ++i) {
        out.values[i] = solver.eigenvalues()[n - 1 - i];
        out.basis.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    return out;
}

Vector project_simplex(const Vector& v, double radius) {
    require_finite(v, "project_simplex");
    if (radius <= 0.0) throw std::invalid_argument("project_simplex: radius must be positive");
    const int n = static_cast<int>(v.size());
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumsum = 0.0, theta = u[0] - radius;
    for (int k = 0; k < n; ++k) {
        cumsum += u[k];
        const double t = (cumsum - radius) / (k + 1);
        if (u[k] - t > 0.0) theta = t;
    }
    Vector s = (v.array() - theta).cwiseMax(0.0);
    return s;
}

Vector project_capped_simplex(const Vector& v, double r) {
    require_finite(v, "project_capped_simplex");
    const int n = static_cast<int>(v.size());
    if (r > n + 1e-12)
        throw std::invalid_argument("project_capped_simplex: infeasible, r exceeds length");
    if (r <= 0.0) throw std::invalid_argument("project_capped_simplex: r must be positive");

    auto mass = [&](double theta) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += std::clamp(v[i] - theta, 0.0, 1.0);
        return total;
    };
    // mass(theta) is continuous and nonincreasing; bisect on the shift.
    double lo = v.minCoeff() - 1.0, hi = v.maxCoeff();
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (mass(mid) >= r ? lo : hi) = mid;
    }
    double theta = 0.5 * (lo + hi);
    Vector s(n);
    for (int i = 0; i < n; ++i) s[i] = std::clamp(v[i] - theta, 0.0, 1.0);
    // polish the interior coordinates so the sum is exact
    int interior = 0;
    for (int i = 0; i < n; ++i)
        if (s[i] > 0.0 && s[i] < 1.0) ++interior;
    if (interior > 0) {
        const double gap = (r - s.sum()) / interior;
        for (int i = 0; i < n; ++i)
            if (s[i] > 0.0 && s[i] < 1.0) s[i] = std::clamp(s[i] + gap, 0.0, 1.0);
    }
    return s;
}

Matrix project_spectraplex(const Matrix& Z) {
    const Matrix sym = 0.5 * (Z + Z.transpose());
    const SpectralDecomposition eig = eigen_decompose(sym);
    const Vector s = project_simplex(eig.values, 1.0);
    return eig.basis * s.asDiagonal() * eig.basis.transpose();
}

Matrix project_fantope(const Matrix& X, int r) {
    if (r <= 0 || r > X.rows())
        throw std::invalid_argument("project_fantope: rank must be in [1, n]");
    const Matrix sym = 0.5 * (X + X.transpose());
    const SpectralDecomposition eig = eigen_decompose(sym);
    const Vector s = project_capped_simplex(eig.values, static_cast<double>(r));
    return eig.basis * s.asDiagonal() * eig.basis.transpose();
}

Vector soft_threshold(const Vector& v, double tau) {
    if (tau < 0.0) throw std::invalid_argument("soft_threshold: tau must be nonnegative");
    return v.array().sign() * (v.array().abs() - tau).cwiseMax(0.0);
}

Matrix soft_threshold(const Matrix& v, double tau) {
    if (tau < 0.0) throw std::invalid_argument("soft_threshold: tau must be nonnegative");
    return v.array().sign() * (v.array().abs() - tau).cwiseMax(0.0);
}

Matrix prox_nuclear_ball(const Matrix& Z, double tau, double R) {
    if (tau < 0.0) throw std::invalid_argument("prox_nuclear_ball: tau must be nonnegative");
    if (R <= 0.0) throw std::invalid_argument("prox_nuclear_ball: R must be positive");
    Eigen::JacobiSVD<Matrix> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vector s = soft_threshold(svd.singularValues(), tau);
    const double norm = s.norm();
    if (norm > R) s *= R / norm;
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

Vector project_ball(const Vector& z, double R) {
    if (R <= 0.0) throw std::invalid_argument("project_ball: R must be positive");
    const double norm = z.norm();
    if (norm <= R) return z;
    return z * (R / norm);
}

Vector project_nonneg(const Vector& z) { return z.cwiseMax(0.0); }

namespace {

// Extreme Ritz value of the Lanczos tridiagonal matrix.
double extreme_ritz(const std::vector<double>& alpha, const std::vector<double>& beta,
                    bool largest) {
    const int m = static_cast<int>(alpha.size());
    Matrix T = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(T, Eigen::EigenvaluesOnly);
    return largest ? es.eigenvalues().maxCoeff() : es.eigenvalues().minCoeff();
}

}  // namespace

double extreme_eigenvalue(const LinearOperator& op, int dim, WhichEigenvalue which,
                          double rel_tol, unsigned seed) {
    if (dim <= 0) throw std::invalid_argument("extreme_eigenvalue: dim must be positive");
    const bool largest = (which == WhichEigenvalue::Largest);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector q(dim);
    for (int i = 0; i < dim; ++i) q[i] = gauss(rng);
    q.normalize();

    const int max_steps = std::min(dim, 500);
    // An extreme eigenvalue much smaller than the spectral spread can hide
    // behind a long Ritz plateau while the dominant end converges first: no
    // early stop before the discovery floor, and the estimate must hold still
    // across a 30-step window (6 checks, 5 steps apart).
    const int check_from = std::min(dim - 1, 115);
    const int stable_needed = 6;

    std::vector<Vector> basis;
    basis.reserve(max_steps);
    std::vector<double> alpha, beta;
    double estimate = 0.0, prev_estimate = 0.0, scale = 0.0;
    int stable_checks = 0;
    bool have_prev = false;

    for (int j = 0; j < max_steps; ++j) {
        basis.push_back(q);
        Vector w = op(q);
        const double a = q.dot(w);
        alpha.push_back(a);
        w -= a * q;
        if (j > 0) w -= beta[j - 1] * basis[j - 1];
        // full reorthogonalization, twice
        for (int pass = 0; pass < 2; ++pass)
            for (const Vector& b : basis) w -= b.dot(w) * b;
        const double bnorm = w.norm();
        scale = std::max({scale, std::abs(a), bnorm});

        const bool breakdown = bnorm <= 1e-13 * std::max(1.0, scale);
        // Ritz extraction is O(j^3); check periodically past the floor
        const bool check =
            breakdown || j == max_steps - 1 || (j >= check_from && j % 5 == 0);
        if (check) {
            estimate = extreme_ritz(alpha, beta, largest);
            if (breakdown) return estimate;  // invariant subspace
            const double tol = rel_tol * std::max(std::abs(estimate), 0.01 * scale);
            if (have_prev && std::abs(estimate - prev_estimate) <= tol) {
                if (++stable_checks >= stable_needed) return estimate;
            } else {
                stable_checks = 0;
            }
            prev_estimate = estimate;
            have_prev = true;
        }

        beta.push_back(bnorm);
        q = w / bnorm;
    }
    if (static_cast<int>(alpha.size()) >= dim) return estimate;  // Krylov space exhausted
    throw NumericalError("extreme_eigenvalue: no convergence within iteration budget", estimate);
}

}  // namespace acacg
