#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace acacg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Shape of the flattened variable space. Solvers work on flat vectors;
/// matrix-valued problems reshape at the oracle boundary (column-major).
struct VariableShape {
    enum class Kind { Vector, Matrix, MatrixPair };

    Kind kind = Kind::Vector;
    int rows = 0, cols = 1;    // first (or only) block
    int rows2 = 0, cols2 = 0;  // second block, MatrixPair only

    static VariableShape vector(int n) { return {Kind::Vector, n, 1, 0, 0}; }
    static VariableShape matrix(int r, int c) { return {Kind::Matrix, r, c, 0, 0}; }
    static VariableShape matrix_pair(int r1, int c1, int r2, int c2) {
        return {Kind::MatrixPair, r1, c1, r2, c2};
    }

    int block1_size() const { return rows * cols; }
    int block2_size() const { return rows2 * cols2; }
    int size() const { return block1_size() + block2_size(); }
};

inline Eigen::Map<const Matrix> as_matrix(const Vector& z, int rows, int cols, int offset = 0) {
    return Eigen::Map<const Matrix>(z.data() + offset, rows, cols);
}

inline Eigen::Map<Matrix> as_matrix(Vector& z, int rows, int cols, int offset = 0) {
    return Eigen::Map<Matrix>(z.data() + offset, rows, cols);
}

inline Vector flatten(const Matrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}

/// Oracle bundle for min f(z) + h(z): smooth value/gradient, a prox oracle
/// for h, and the curvature pair (M, m). All oracles must be deterministic
/// for a fixed instance and safe for concurrent calls.
struct CompositeProblem {
    std::function<double(const Vector&)> smooth_value;
    std::function<Vector(const Vector&)> smooth_grad;
    // argmin_u h(u) + (1/(2 step)) ||u - z||^2, step > 0
    std::function<Vector(const Vector&, double)> prox;
    // h on dom h; defaults to 0 (indicator-type h)
    std::function<double(const Vector&)> nonsmooth_value;
    // membership test for dom h, used by diagnostics only
    std::function<bool(const Vector&, double)> in_domain;

    double upper_curvature = 1.0;  // M
    double lower_curvature = 0.0;  // m
    std::optional<double> diameter;  // D, diagnostics only

    VariableShape shape;
    Vector initial_point;

    CompositeProblem() {
        nonsmooth_value = [](const Vector&) { return 0.0; };
        in_domain = [](const Vector&, double) { return true; };
    }

    double objective(const Vector& z) const { return smooth_value(z) + nonsmooth_value(z); }
};

/// Relative stopping rule of the benchmark protocol:
/// ||v|| / (||grad f(z0)|| + 1) <= rho_hat.
struct StoppingRule {
    double rho_hat = 1e-7;
    double denominator = 1.0;  // ||grad f(z0)|| + 1, cached at start
    int max_iters = 100000;
};

inline StoppingRule make_stopping_rule(const CompositeProblem& problem, const Vector& z0,
                                       double rho_hat, int max_iters) {
    if (rho_hat <= 0.0) throw std::invalid_argument("stopping rule: rho_hat must be positive");
    if (max_iters <= 0) throw std::invalid_argument("stopping rule: max_iters must be positive");
    StoppingRule rule;
    rule.rho_hat = rho_hat;
    rule.denominator = problem.smooth_grad(z0).norm() + 1.0;
    rule.max_iters = max_iters;
    return rule;
}

inline bool check_approx_stationary(double residual_norm, const StoppingRule& rule) {
    return residual_norm <= rule.rho_hat * rule.denominator;
}

inline bool check_approx_stationary(const Vector& v, const StoppingRule& rule) {
    return check_approx_stationary(v.norm(), rule);
}

/// Per-iteration solver state (A_k, x_k, y_k) plus the current curvature
/// estimate and last residual.
struct SolverState {
    int k = 0;
    double A = 0.0;
    Vector x, y;
    double M_cur = 0.0;
    std::optional<Vector> last_residual;
};

enum class TerminationStatus { Converged, MaxIters };

struct CurvatureStats {
    double max_curvature = 0.0;
    double avg_curvature = 0.0;
    double good_fraction = 0.0;
};

struct RunReport {
    TerminationStatus status = TerminationStatus::MaxIters;
    int iterations = 0;
    double best_residual_norm = 0.0;
    double final_objective = 0.0;
    double wall_time_sec = 0.0;
    std::optional<CurvatureStats> curvature;
    long prox_evals = 0;
};

inline std::string to_string(TerminationStatus s) {
    return s == TerminationStatus::Converged ? "converged" : "max_iters";
}

}  // namespace acacg
