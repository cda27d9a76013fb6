#pragma once

#include "acacg/composite.hpp"

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace acacg {

/// With the reference formula, alpha = (0.9/8) (1 + 1/(0.9 gamma))^-1.
double alpha_formula(double gamma);

/// (a_k, A_{k+1}) from the coupling a_k = (1 + sqrt(1 + 4 M_k A_k)) / (2 M_k),
/// A_{k+1} = A_k + a_k; the identity A_{k+1} = M_k a_k^2 holds exactly.
std::pair<double, double> step_coefficients(double M_k, double A_k);

/// Prox center x~_k = (A_k y_k + a_k x_k) / (A_k + a_k).
Vector md_point(double A_k, double a_k, const Vector& y_k, const Vector& x_k);

/// y(x~; M) = prox(x~ - grad f(x~)/M, 1/M), the linearized prox subproblem.
Vector composite_prox_step(const CompositeProblem& problem, const Vector& md, double M);
Vector composite_prox_step(const CompositeProblem& problem, const Vector& md,
                           const Vector& grad_md, double M);

/// x_{k+1} = prox(x_k - a_k grad f(x~), a_k).
Vector x_update(const CompositeProblem& problem, const Vector& x_k, const Vector& md, double a_k);
Vector x_update_from_grad(const CompositeProblem& problem, const Vector& x_k,
                          const Vector& grad_md, double a_k);

/// v = M (x~ - y_g) + grad f(y_g) - grad f(x~); lies in grad f(y_g) + dh(y_g).
Vector residual(const CompositeProblem& problem, const Vector& md, const Vector& y_good, double M);
Vector residual_from_grads(const Vector& md, const Vector& y_good, const Vector& grad_md,
                           const Vector& grad_yg, double M);

/// Observed curvature 2 [f(y) - f(x~) - <grad f(x~), y - x~>] / ||y - x~||^2.
/// Returns nullopt on a degenerate step ||y - x~|| <= 1e-14 (1 + ||x~||).
std::optional<double> observed_curvature(const CompositeProblem& problem, const Vector& md,
                                         const Vector& y);
std::optional<double> observed_curvature_from_values(double f_y, double f_md,
                                                     const Vector& grad_md, const Vector& md,
                                                     const Vector& y);

/// ACT rule: max of the observed curvature and the gradient difference ratio.
std::optional<double> curvature_act(const CompositeProblem& problem, const Vector& md,
                                    const Vector& y_good);
/// AC rule: max of the observed curvature and zero.
std::optional<double> curvature_ac(const CompositeProblem& problem, const Vector& md,
                                   const Vector& y_good);

/// M_{k+1} = max(C_avg / alpha, gamma M).
double m_update(double C_avg, double alpha, double gamma, double M);

struct YSelection {
    Vector y_next;
    bool good = false;
};

/// Good branch keeps y_g; a bad iteration (C_k > threshold M_k) takes the
/// convex combination (A_k y_k + a_k x_{k+1}) / A_{k+1} instead.
YSelection y_select(double A_k, double a_k, const Vector& y_k, const Vector& x_next,
                    const Vector& y_good, double C_k, double M_k, double threshold = 0.9);

enum class CurvatureMode { ACT, AC };

struct TraceRecord {
    int k = 0;
    double a = 0.0, A_next = 0.0;
    double M = 0.0;
    double C = 0.0, C_avg = 0.0;
    double F = 0.0;  // curvature at the selected y_{k+1}; NaN when unavailable
    double residual_norm = 0.0;
    bool good = false;
    bool degenerate = false;
};

struct CurvatureTrace {
    std::vector<TraceRecord> records;  // empty unless trace recording is on

    // running aggregates, kept regardless of recording
    double max_C = 0.0;
    double sum_C = 0.0;
    long count = 0;
    long good_count = 0;
    long total_iterations = 0;

    double avg_C() const { return count > 0 ? sum_C / count : 0.0; }
    double good_fraction() const {
        return total_iterations > 0 ? static_cast<double>(good_count) / total_iterations : 0.0;
    }
};

/// theta_k = max_{i <= k} M_k / M_i for each recorded iteration.
std::vector<double> theta_series(const CurvatureTrace& trace);

/// Snapshot of one iteration handed to the observer callback. References are
/// only valid during the call.
struct IterationView {
    int k;
    double A_k, a_k, A_next, M_k;
    double C_k, C_avg, residual_norm;
    bool good, degenerate;
    const Vector& md;      // x~_k
    const Vector& y_good;  // y(x~_k; M_k)
    const Vector& x_next;
    const Vector& y_next;
    const Vector& v;
};

using IterationObserver = std::function<void(const IterationView&)>;

struct AcAcgConfig {
    double gamma = 0.01;
    std::optional<double> alpha;  // nullopt: use alpha_formula(gamma)
    std::optional<double> initial_curvature;  // M_0; defaults to gamma * M
    CurvatureMode mode = CurvatureMode::ACT;
    double good_threshold = 0.9;
    double rho_hat = 1e-7;
    int max_iters = 100000;
    bool record_trace = false;
    std::optional<Vector> initial_point;  // defaults to problem.initial_point
    IterationObserver observer;
};

struct AcAcgResult {
    RunReport report;
    CurvatureTrace trace;
    Vector best_point;      // y with the smallest residual norm
    Vector best_residual;   // its certificate v
    Vector best_md_point;   // the prox center that produced it
    double best_M = 0.0;    // the curvature estimate that produced it
    double stopping_denominator = 1.0;
};

AcAcgResult solve_ac_acg(const CompositeProblem& problem, const AcAcgConfig& config);

struct AgConfig {
    double rho_hat = 1e-7;
    int max_iters = 100000;
    std::optional<Vector> initial_point;
    IterationObserver observer;
};

/// Constant-curvature accelerated baseline: the same loop with
/// M_k = M / 0.99 fixed and the good branch forced every iteration.
RunReport solve_ag(const CompositeProblem& problem, const AgConfig& config);

struct ConvexRule {
    enum class Kind { FISTA, AT, LLM };
    Kind kind = Kind::FISTA;
    bool monotone = false;
};

struct ConvexAcgConfig {
    std::optional<double> curvature;  // constant M_k; defaults to problem.upper_curvature
    double rho_hat = 1e-7;
    int max_iters = 100000;
    std::optional<Vector> initial_point;
    IterationObserver observer;
    bool record_objectives = false;
};

struct ConvexAcgResult {
    RunReport report;
    Vector best_point;
    Vector best_residual;
    std::vector<double> objective_history;  // phi(y_k), when recording is on
};

ConvexAcgResult solve_acg_convex(const CompositeProblem& problem, const ConvexRule& rule,
                                 const ConvexAcgConfig& config);

}  // namespace acacg
