#pragma once

// Test-only reference oracles, kept independent of the library code paths
// they are used to check.

#include "acacg/composite.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace oracles {

using acacg::Matrix;
using acacg::Vector;

/// Exhaustive active-set solve of min ||s - v|| over { s >= 0, sum s = radius }.
/// Every support set is tried; feasible candidates compete on distance.
inline Vector brute_simplex(const Vector& v, double radius) {
    const int n = static_cast<int>(v.size());
    Vector best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        int support = 0;
        double support_sum = 0.0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                ++support;
                support_sum += v[i];
            }
        const double shift = (radius - support_sum) / support;
        Vector s = Vector::Zero(n);
        bool feasible = true;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                s[i] = v[i] + shift;
                if (s[i] < -1e-12) feasible = false;
            }
        if (!feasible) continue;
        const double dist = (s - v).squaredNorm();
        if (dist < best_dist) {
            best_dist = dist;
            best = s.cwiseMax(0.0);
        }
    }
    return best;
}

/// Exhaustive partition solve of min ||s - v|| over { 0 <= s <= 1, sum s = r }.
/// Coordinates are assigned to {at zero, interior, at one} in all 3^n ways.
inline Vector brute_capped_simplex(const Vector& v, double r) {
    const int n = static_cast<int>(v.size());
    Vector best;
    double best_dist = std::numeric_limits<double>::infinity();
    std::vector<int> part(n, 0);
    const long total = static_cast<long>(std::pow(3.0, n));
    for (long code = 0; code < total; ++code) {
        long rest = code;
        int interior = 0, ones = 0;
        double interior_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            part[i] = rest % 3;
            rest /= 3;
            if (part[i] == 1) {
                ++interior;
                interior_sum += v[i];
            } else if (part[i] == 2) {
                ++ones;
            }
        }
        Vector s = Vector::Zero(n);
        bool feasible = true;
        if (interior == 0) {
            if (std::abs(ones - r) > 1e-9) continue;
        }
        const double shift = interior > 0 ? (interior_sum + ones - r) / interior : 0.0;
        for (int i = 0; i < n; ++i) {
            if (part[i] == 1) {
                s[i] = v[i] - shift;
                if (s[i] < -1e-12 || s[i] > 1.0 + 1e-12) feasible = false;
            } else if (part[i] == 2) {
                s[i] = 1.0;
            }
        }
        if (!feasible) continue;
        const double dist = (s - v).squaredNorm();
        if (dist < best_dist) {
            best_dist = dist;
            best = s.cwiseMax(0.0).cwiseMin(1.0);
        }
    }
    return best;
}

/// Central finite differences with step 1e-6 (1 + ||z||).
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& z) {
    const double step = 1e-6 * (1.0 + z.norm());
    Vector g(z.size());
    Vector probe = z;
    for (int i = 0; i < z.size(); ++i) {
        probe[i] = z[i] + step;
        const double up = f(probe);
        probe[i] = z[i] - step;
        const double down = f(probe);
        probe[i] = z[i];
        g[i] = (up - down) / (2.0 * step);
    }
    return g;
}

/// Subgradient inequality certificate that p = prox(z, step) for the given h:
/// h(u) >= h(p) + <(z - p)/step, u - p> - tol must hold at every probe u.
inline bool prox_optimality_holds(const std::function<double(const Vector&)>& h_value,
                                  const Vector& z, double step, const Vector& prox_out,
                                  const std::vector<Vector>& probes, double tol) {
    const double h_p = h_value(prox_out);
    if (!std::isfinite(h_p)) return false;
    const Vector witness = (z - prox_out) / step;
    for (const Vector& u : probes) {
        const double h_u = h_value(u);
        if (!std::isfinite(h_u)) continue;  // infeasible probe carries no information
        if (h_u < h_p + witness.dot(u - prox_out) - tol) return false;
    }
    return true;
}

/// Straight-line transcription of the average-curvature accelerated loop,
/// written directly from the update equations with no shared code.
struct ReferenceStep {
    double a, A_next, M;
    Vector md, y_good, x_next, v, y_next;
    double C, C_avg;
    bool good;
};

inline std::vector<ReferenceStep> reference_adaptive_run(const acacg::CompositeProblem& problem,
                                                         double gamma, double alpha, bool act_mode,
                                                         int iterations) {
    std::vector<ReferenceStep> steps;
    const double M_bound = problem.upper_curvature;
    Vector y = problem.initial_point;
    Vector x = y;
    double A = 0.0;
    double M = gamma * M_bound;
    double c_sum = 0.0;
    int c_count = 0;

    for (int k = 0; k < iterations; ++k) {
        ReferenceStep s;
        s.M = M;
        s.a = (1.0 + std::sqrt(1.0 + 4.0 * M * A)) / (2.0 * M);
        s.A_next = A + s.a;
        s.md = (A * y + s.a * x) / s.A_next;

        const Vector grad_md = problem.smooth_grad(s.md);
        s.y_good = problem.prox(s.md - grad_md / M, 1.0 / M);
        s.x_next = problem.prox(x - s.a * grad_md, s.a);
        s.v = M * (s.md - s.y_good) + problem.smooth_grad(s.y_good) - grad_md;

        const double gap =
            problem.smooth_value(s.y_good) - problem.smooth_value(s.md) -
            grad_md.dot(s.y_good - s.md);
        const double dist2 = (s.y_good - s.md).squaredNorm();
        double C = 2.0 * gap / dist2;
        if (act_mode)
            C = std::max(C, (problem.smooth_grad(s.y_good) - grad_md).norm() / std::sqrt(dist2));
        else
            C = std::max(C, 0.0);
        s.C = C;
        c_sum += C;
        ++c_count;
        s.C_avg = c_sum / c_count;

        const double M_next = std::max(s.C_avg / alpha, gamma * M_bound);
        if (C > 0.9 * M) {
            s.y_next = (A * y + s.a * s.x_next) / s.A_next;
            s.good = false;
        } else {
            s.y_next = s.y_good;
            s.good = true;
        }

        A = s.A_next;
        x = s.x_next;
        y = s.y_next;
        M = M_next;
        steps.push_back(std::move(s));
    }
    return steps;
}

/// Dense Hessian of a linear operator restricted to the symmetric subspace,
/// in the orthonormal basis {e_ii} + {(e_ij + e_ji)/sqrt(2)}.
inline Matrix dense_symmetric_hessian(const std::function<Vector(const Vector&)>& op, int n) {
    std::vector<std::pair<int, int>> index;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) index.emplace_back(i, j);
    const int dim = static_cast<int>(index.size());
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

    auto to_flat = [n](const Matrix& m) { return Eigen::Map<const Vector>(m.data(), n * n); };
    Matrix H(dim, dim);
    for (int q = 0; q < dim; ++q) {
        const auto [i, j] = index[q];
        Matrix basis = Matrix::Zero(n, n);
        if (i == j) basis(i, i) = 1.0;
        else basis(i, j) = basis(j, i) = inv_sqrt2;
        const Vector image = op(to_flat(basis));
        const auto image_m = Eigen::Map<const Matrix>(image.data(), n, n);
        for (int r = 0; r < dim; ++r) {
            const auto [a, b] = index[r];
            H(r, q) = a == b ? image_m(a, a) : inv_sqrt2 * (image_m(a, b) + image_m(b, a));
        }
    }
    return 0.5 * (H + H.transpose());
}

}  // namespace oracles
