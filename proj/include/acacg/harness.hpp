#pragma once

#include "acacg/composite.hpp"
#include "acacg/problems.hpp"
#include "acacg/solvers.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace acacg {

enum class SolverKind { AC, ACT, AG, FISTA, AT, LLM };

struct SolverSpec {
    SolverKind kind = SolverKind::AC;
    bool monotone = false;  // convex rules only
    std::optional<double> alpha;
    std::optional<double> gamma;
    std::optional<double> initial_curvature;
};

std::string solver_label(const SolverSpec& spec);
SolverSpec parse_solver_spec(const std::string& name);

struct ProblemSpec {
    std::string family;  // qp | svm | spca | mc | nmf
    QpParams qp;
    SvmParams svm;
    SpcaParams spca;
    McParams mc;
    NmfParams nmf;
    std::string data_file;  // optional ratings tsv (mc) or matrix csv (nmf)
};

struct ExperimentConfig {
    std::vector<ProblemSpec> problems;
    std::vector<SolverSpec> solvers;
    std::optional<double> rho_hat;  // default: 1e-7, 5e-4 for matrix completion
    std::uint64_t seed = 1;
    int max_iters = 100000;
    std::string output_path;
    bool audit = false;
    bool record_trace = false;
    std::string trace_prefix;  // per-iteration CSV dumps go to <prefix><solver>.csv
    int jobs = 1;
};

struct SolverCell {
    std::string solver;
    RunReport report;
    std::string failure;  // nonempty when the run aborted
    bool has_curvature_columns = false;
};

struct ResultRow {
    std::string instance_label;
    std::vector<SolverCell> cells;
};

struct AuditCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct AuditReport {
    std::string run_label;
    std::vector<AuditCheck> checks;
    bool all_passed() const;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::vector<AuditReport> audits;
};

double default_rho_hat(const std::string& family);

/// Instance + oracles for a problem spec; the label mirrors the benchmark
/// tables' first column.
CompositeProblem build_problem(const ProblemSpec& spec, std::uint64_t seed,
                               std::string* label = nullptr);

/// Per-family defaults for the adaptive solvers (gamma, alpha, M_0 presets).
AcAcgConfig make_ac_acg_config(const SolverSpec& spec, const std::string& family, double rho_hat,
                               int max_iters, double upper_curvature);

ExperimentResult run_experiment(const ExperimentConfig& config);

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(const std::string& path);
void print_results_table(std::ostream& out, const std::vector<ResultRow>& rows);
void print_audit_report(std::ostream& out, const std::vector<AuditReport>& audits);

/// (max C, avg C, good fraction) of a non-empty trace.
CurvatureStats curvature_stats(const CurvatureTrace& trace);

/// Least-squares slope of log(min_{i<=k} ||v_i||) against log(k) over the
/// tail half of the iterations; needs at least 50 recorded residuals.
double rate_diagnostic(const std::vector<double>& residual_norms);

/// Observer-driven invariant auditor for adaptive-curvature runs.
class TraceAuditor {
  public:
    TraceAuditor(const CompositeProblem& problem, const AcAcgConfig& config);

    IterationObserver observer();
    AuditReport finalize() const;

    const std::vector<double>& residual_norms() const { return residual_norms_; }

  private:
    const CompositeProblem* problem_;
    double gamma_, threshold_, curvature_bound_;
    bool formula_alpha_;
    bool act_mode_;  // the (M_k + C_k) residual bound needs the ACT curvature

    std::vector<double> a_, A_next_, M_, C_, C_avg_;
    std::vector<bool> good_, degenerate_;
    std::vector<double> residual_norms_;

    // live-check failure counters
    long coupling_failures_ = 0;
    long reconstruction_failures_ = 0;
    long residual_bound_failures_ = 0;
    long flag_failures_ = 0;
    long domain_failures_ = 0;
    long monotone_A_failures_ = 0;
    double last_A_ = 0.0;
};

/// Convenience wrapper: run AC-ACG with the auditor attached.
std::pair<AcAcgResult, AuditReport> audited_ac_acg(const CompositeProblem& problem,
                                                   AcAcgConfig config);

ExperimentConfig load_experiment_config(const std::string& json_path);

}  // namespace acacg
