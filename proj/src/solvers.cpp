#include "acacg/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace acacg {

namespace {

constexpr double kDegenerateStep = 1e-14;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

double alpha_formula(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("alpha_formula: gamma must lie in (0,1)");
    return (0.9 / 8.0) / (1.0 + 1.0 / (0.9 * gamma));
}

std::pair<double, double> step_coefficients(double M_k, double A_k) {
    const double a = (1.0 + std::sqrt(1.0 + 4.0 * M_k * A_k)) / (2.0 * M_k);
    return {a, A_k + a};
}

Vector md_point(double A_k, double a_k, const Vector& y_k, const Vector& x_k) {
    return (A_k * y_k + a_k * x_k) / (A_k + a_k);
}

Vector composite_prox_step(const CompositeProblem& problem, const Vector& md,
                           const Vector& grad_md, double M) {
    return problem.prox(md - grad_md / M, 1.0 / M);
}

Vector composite_prox_step(const CompositeProblem& problem, const Vector& md, double M) {
    return composite_prox_step(problem, md, problem.smooth_grad(md), M);
}

Vector x_update_from_grad(const CompositeProblem& problem, const Vector& x_k,
                          const Vector& grad_md, double a_k) {
    return problem.prox(x_k - a_k * grad_md, a_k);
}

Vector x_update(const CompositeProblem& problem, const Vector& x_k, const Vector& md, double a_k) {
    return x_update_from_grad(problem, x_k, problem.smooth_grad(md), a_k);
}

Vector residual_from_grads(const Vector& md, const Vector& y_good, const Vector& grad_md,
                           const Vector& grad_yg, double M) {
    return M * (md - y_good) + grad_yg - grad_md;
}

Vector residual(const CompositeProblem& problem, const Vector& md, const Vector& y_good,
                double M) {
    return residual_from_grads(md, y_good, problem.smooth_grad(md), problem.smooth_grad(y_good),
                               M);
}

std::optional<double> observed_curvature_from_values(double f_y, double f_md,
                                                     const Vector& grad_md, const Vector& md,
                                                     const Vector& y) {
    const double dist2 = (y - md).squaredNorm();
    if (std::sqrt(dist2) <= kDegenerateStep * (1.0 + md.norm())) return std::nullopt;
    const double linear = f_md + grad_md.dot(y - md);
    return 2.0 * (f_y - linear) / dist2;
}

std::optional<double> observed_curvature(const CompositeProblem& problem, const Vector& md,
                                         const Vector& y) {
    return observed_curvature_from_values(problem.smooth_value(y), problem.smooth_value(md),
                                          problem.smooth_grad(md), md, y);
}

std::optional<double> curvature_act(const CompositeProblem& problem, const Vector& md,
                                    const Vector& y_good) {
    const auto base = observed_curvature(problem, md, y_good);
    if (!base) return std::nullopt;
    const double grad_ratio =
        (problem.smooth_grad(y_good) - problem.smooth_grad(md)).norm() / (y_good - md).norm();
    return std::max(*base, grad_ratio);
}

std::optional<double> curvature_ac(const CompositeProblem& problem, const Vector& md,
                                   const Vector& y_good) {
    const auto base = observed_curvature(problem, md, y_good);
    if (!base) return std::nullopt;
    return std::max(*base, 0.0);
}

double m_update(double C_avg, double alpha, double gamma, double M) {
    return std::max(C_avg / alpha, gamma * M);
}

YSelection y_select(double A_k, double a_k, const Vector& y_k, const Vector& x_next,
                    const Vector& y_good, double C_k, double M_k, double threshold) {
    if (C_k > threshold * M_k) return {(A_k * y_k + a_k * x_next) / (A_k + a_k), false};
    return {y_good, true};
}

std::vector<double> theta_series(const CurvatureTrace& trace) {
    std::vector<double> theta;
    theta.reserve(trace.records.size());
    double min_M = std::numeric_limits<double>::infinity();
    for (const TraceRecord& rec : trace.records) {
        min_M = std::min(min_M, rec.M);
        theta.push_back(rec.M / min_M);
    }
    return theta;
}

AcAcgResult solve_ac_acg(const CompositeProblem& problem, const AcAcgConfig& config) {
    if (!(config.gamma > 0.0 && config.gamma < 1.0))
        throw std::invalid_argument("solve_ac_acg: gamma must lie in (0,1)");
    const double alpha = config.alpha ? *config.alpha : alpha_formula(config.gamma);
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("solve_ac_acg: alpha must lie in (0,1]");
    const double M = problem.upper_curvature;
    if (!(M > 0.0)) throw std::invalid_argument("solve_ac_acg: curvature bound must be positive");

    AcAcgResult result;
    CurvatureTrace& trace = result.trace;

    SolverState state;
    state.y = config.initial_point ? *config.initial_point : problem.initial_point;
    state.x = state.y;
    state.A = 0.0;
    state.M_cur = config.initial_curvature ? *config.initial_curvature : config.gamma * M;
    const StoppingRule rule =
        make_stopping_rule(problem, state.y, config.rho_hat, config.max_iters);
    result.stopping_denominator = rule.denominator;

    double C_avg = 0.0;  // C_{-1}^avg = 0 convention
    double best_norm = std::numeric_limits<double>::infinity();
    long prox_evals = 0;

    const auto started = Clock::now();
    TerminationStatus status = TerminationStatus::MaxIters;
    Vector y_good, x_next, y_next, v;

    for (; state.k < rule.max_iters; ++state.k) {
        const double A = state.A;
        const double M_cur = state.M_cur;
        const Vector& y = state.y;
        const Vector& x = state.x;
        const int k = state.k;

        const auto [a, A_next] = step_coefficients(M_cur, A);
        const Vector md = md_point(A, a, y, x);
        const double f_md = problem.smooth_value(md);
        const Vector grad_md = problem.smooth_grad(md);

        y_good = composite_prox_step(problem, md, grad_md, M_cur);
        x_next = x_update_from_grad(problem, x, grad_md, a);
        prox_evals += 2;

        const double f_yg = problem.smooth_value(y_good);
        const Vector grad_yg = problem.smooth_grad(y_good);
        v = residual_from_grads(md, y_good, grad_md, grad_yg, M_cur);
        const double v_norm = v.norm();

        if (v_norm < best_norm) {
            best_norm = v_norm;
            result.best_point = y_good;
            result.best_residual = v;
            result.best_md_point = md;
            result.best_M = M_cur;
        }

        const bool stop = check_approx_stationary(v_norm, rule);

        std::optional<double> C;
        if (!stop) {
            C = observed_curvature_from_values(f_yg, f_md, grad_md, md, y_good);
            if (C && config.mode == CurvatureMode::ACT)
                C = std::max(*C, (grad_yg - grad_md).norm() / (y_good - md).norm());
            if (C && config.mode == CurvatureMode::AC) C = std::max(*C, 0.0);
        }

        const bool degenerate = !stop && !C;
        double M_next = M_cur;
        bool good = true;
        if (stop) {
            y_next = y_good;
        } else if (degenerate) {
            // 0/0 curvature: reuse the running average and keep the good branch
            y_next = y_good;
            M_next = m_update(C_avg, alpha, config.gamma, M);
        } else {
            trace.max_C = std::max(trace.max_C, *C);
            trace.sum_C += *C;
            C_avg = trace.sum_C / static_cast<double>(++trace.count);
            M_next = m_update(C_avg, alpha, config.gamma, M);
            YSelection sel =
                y_select(A, a, y, x_next, y_good, *C, M_cur, config.good_threshold);
            y_next = std::move(sel.y_next);
            good = sel.good;
        }
        // the stopping iteration never reaches the good/bad classification
        if (!stop) {
            trace.total_iterations += 1;
            if (good) trace.good_count += 1;
        }

        if (config.record_trace) {
            TraceRecord rec;
            rec.k = k;
            rec.a = a;
            rec.A_next = A_next;
            rec.M = M_cur;
            rec.C = C ? *C : std::numeric_limits<double>::quiet_NaN();
            rec.C_avg = C_avg;
            rec.residual_norm = v_norm;
            rec.good = good;
            rec.degenerate = degenerate;
            // curvature at the selected iterate (equals C on good ACT-mode steps)
            const auto F = observed_curvature_from_values(problem.smooth_value(y_next), f_md,
                                                          grad_md, md, y_next);
            rec.F = F ? *F : std::numeric_limits<double>::quiet_NaN();
            trace.records.push_back(rec);
        }

        if (config.observer) {
            const IterationView view{k,    A,    a,          A_next, M_cur,
                                     C ? *C : std::numeric_limits<double>::quiet_NaN(),
                                     C_avg, v_norm, good, degenerate,
                                     md,   y_good, x_next, y_next, v};
            config.observer(view);
        }

        state.A = A_next;
        state.x = std::move(x_next);
        state.y = std::move(y_next);
        state.M_cur = M_next;
        state.last_residual = v;

        if (stop) {
            status = TerminationStatus::Converged;
            ++state.k;
            break;
        }
    }

    RunReport& report = result.report;
    report.status = status;
    report.iterations = state.k;
    report.best_residual_norm = best_norm;
    report.final_objective = problem.objective(state.y);
    report.wall_time_sec = seconds_since(started);
    report.prox_evals = prox_evals;
    CurvatureStats stats;
    stats.max_curvature = trace.max_C;
    stats.avg_curvature = trace.avg_C();
    stats.good_fraction = trace.good_fraction();
    report.curvature = stats;
    return result;
}

ConvexAcgResult solve_acg_convex(const CompositeProblem& problem, const ConvexRule& rule,
                                 const ConvexAcgConfig& config) {
    const double M = config.curvature ? *config.curvature : problem.upper_curvature;
    if (!(M > 0.0))
        throw std::invalid_argument("solve_acg_convex: curvature must be positive");

    ConvexAcgResult result;
    Vector y = config.initial_point ? *config.initial_point : problem.initial_point;
    Vector x = y;
    const StoppingRule stop_rule =
        make_stopping_rule(problem, y, config.rho_hat, config.max_iters);

    double A = 0.0;
    double phi_y = config.record_objectives || rule.monotone ? problem.objective(y) : 0.0;
    double best_norm = std::numeric_limits<double>::infinity();
    long prox_evals = 0;
    if (config.record_objectives) result.objective_history.push_back(phi_y);

    const auto started = Clock::now();
    int k = 0;
    TerminationStatus status = TerminationStatus::MaxIters;

    for (; k < stop_rule.max_iters; ++k) {
        const auto [a, A_next] = step_coefficients(M, A);
        const Vector md = md_point(A, a, y, x);
        const Vector grad_md = problem.smooth_grad(md);

        Vector x_next, y_accel, v;
        const bool fista_y = rule.kind != ConvexRule::Kind::AT;
        if (fista_y) {
            y_accel = composite_prox_step(problem, md, grad_md, M);
            ++prox_evals;
            v = residual_from_grads(md, y_accel, grad_md, problem.smooth_grad(y_accel), M);
            if (rule.kind == ConvexRule::Kind::FISTA) {
                x_next = y_accel + (A / a) * (y_accel - y);
            } else {  // LLM
                x_next = x_update_from_grad(problem, x, grad_md, a);
                ++prox_evals;
            }
        } else {  // AT
            x_next = x_update_from_grad(problem, x, grad_md, a);
            ++prox_evals;
            y_accel = (A * y + a * x_next) / A_next;
            // certificate at the prox output x_{k+1}
            v = (x - x_next) / a + problem.smooth_grad(x_next) - grad_md;
        }
        const double v_norm = v.norm();
        const Vector& certified = fista_y ? y_accel : x_next;
        if (v_norm < best_norm) {
            best_norm = v_norm;
            result.best_point = certified;
            result.best_residual = v;
        }

        Vector y_next = y_accel;
        if (rule.monotone) {
            const Vector y_na = composite_prox_step(problem, y, problem.smooth_grad(y), M);
            ++prox_evals;
            const double phi_a = problem.objective(y_accel);
            const double phi_na = problem.objective(y_na);
            if (phi_na < phi_a) {
                y_next = y_na;
                phi_y = phi_na;
            } else {
                phi_y = phi_a;
            }
        } else if (config.record_objectives) {
            phi_y = problem.objective(y_next);
        }
        if (config.record_objectives) result.objective_history.push_back(phi_y);

        if (config.observer) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            const IterationView view{k, A,   a,      A_next, M,     nan, nan, v_norm,
                                     true, false, md, y_accel, x_next, y_next, v};
            config.observer(view);
        }

        A = A_next;
        x = std::move(x_next);
        y = std::move(y_next);

        if (check_approx_stationary(v_norm, stop_rule)) {
            status = TerminationStatus::Converged;
            ++k;
            break;
        }
    }

    RunReport& report = result.report;
    report.status = status;
    report.iterations = k;
    report.best_residual_norm = best_norm;
    report.final_objective = problem.objective(y);
    report.wall_time_sec = seconds_since(started);
    report.prox_evals = prox_evals;
    return result;
}

RunReport solve_ag(const CompositeProblem& problem, const AgConfig& config) {
    ConvexRule rule;
    rule.kind = ConvexRule::Kind::LLM;
    rule.monotone = false;
    ConvexAcgConfig cfg;
    cfg.curvature = problem.upper_curvature / 0.99;
    cfg.rho_hat = config.rho_hat;
    cfg.max_iters = config.max_iters;
    cfg.initial_point = config.initial_point;
    cfg.observer = config.observer;
    return solve_acg_convex(problem, rule, cfg).report;
}

}  // namespace acacg
