#include "acacg/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace acacg {

namespace {

std::string format_double(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

std::string format_compact(double v) {
    std::ostringstream out;
    out << std::setprecision(4) << v;
    return out.str();
}

bool is_adaptive(SolverKind kind) { return kind == SolverKind::AC || kind == SolverKind::ACT; }

}  // namespace

std::string solver_label(const SolverSpec& spec) {
    std::string base;
    switch (spec.kind) {
        case SolverKind::AC: base = "ac"; break;
        case SolverKind::ACT: base = "act"; break;
        case SolverKind::AG: base = "ag"; break;
        case SolverKind::FISTA: base = "fista"; break;
        case SolverKind::AT: base = "at"; break;
        case SolverKind::LLM: base = "llm"; break;
    }
    if (spec.monotone) base += "-mono";
    return base;
}

SolverSpec parse_solver_spec(const std::string& name) {
    SolverSpec spec;
    std::string base = name;
    const std::string suffix = "-mono";
    if (base.size() > suffix.size() &&
        base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
        spec.monotone = true;
        base = base.substr(0, base.size() - suffix.size());
    }
    if (base == "ac") spec.kind = SolverKind::AC;
    else if (base == "act") spec.kind = SolverKind::ACT;
    else if (base == "ag") spec.kind = SolverKind::AG;
    else if (base == "fista") spec.kind = SolverKind::FISTA;
    else if (base == "at") spec.kind = SolverKind::AT;
    else if (base == "llm") spec.kind = SolverKind::LLM;
    else throw std::invalid_argument("unknown solver: " + name);
    if (spec.monotone && is_adaptive(spec.kind))
        throw std::invalid_argument("monotone mode applies to the convex rules only: " + name);
    return spec;
}

double default_rho_hat(const std::string& family) { return family == "mc" ? 5e-4 : 1e-7; }

CompositeProblem build_problem(const ProblemSpec& spec, std::uint64_t seed, std::string* label) {
    std::ostringstream name;
    CompositeProblem problem;
    if (spec.family == "qp") {
        const QpInstance inst = qp_generate(spec.qp, seed);
        problem = qp_oracles(inst);
        name << "qp(" << format_compact(spec.qp.target_upper) << "/"
             << format_compact(spec.qp.target_lower) << ")";
    } else if (spec.family == "svm") {
        const SvmInstance inst = svm_generate(spec.svm, seed);
        problem = svm_oracles(inst);
        name << "svm M=" << format_compact(svm_lipschitz(inst));
    } else if (spec.family == "spca") {
        const SpcaInstance inst = spca_generate(spec.spca, seed);
        problem = spca_oracles(inst);
        name << "spca M=" << format_compact(problem.upper_curvature);
    } else if (spec.family == "mc") {
        const McInstance inst = spec.data_file.empty()
                                    ? mc_generate(spec.mc, seed)
                                    : mc_from_ratings(read_ratings_tsv(spec.data_file), spec.mc);
        problem = mc_oracles(inst);
        name << "mc M=" << format_compact(problem.upper_curvature);
    } else if (spec.family == "nmf") {
        const NmfInstance inst = spec.data_file.empty()
                                     ? nmf_generate(spec.nmf, seed)
                                     : nmf_from_matrix(read_matrix_csv(spec.data_file),
                                                       spec.nmf.inner);
        problem = nmf_oracles(inst);
        name << "nmf M=" << format_compact(problem.upper_curvature);
    } else {
        throw std::invalid_argument("unknown problem family: " + spec.family);
    }
    if (label) *label = name.str();
    return problem;
}

AcAcgConfig make_ac_acg_config(const SolverSpec& spec, const std::string& family, double rho_hat,
                               int max_iters, double upper_curvature) {
    AcAcgConfig config;
    config.rho_hat = rho_hat;
    config.max_iters = max_iters;
    if (spec.kind == SolverKind::AC) {
        config.mode = CurvatureMode::AC;
        config.gamma = 1e-6;
        config.initial_curvature = 0.01 * upper_curvature;
        if (family == "qp") config.alpha = 1.0;
        else if (family == "nmf") config.alpha = 0.7;
        else config.alpha = 0.5;
    } else {
        config.mode = CurvatureMode::ACT;
        config.gamma = family == "svm" ? 0.002 : 0.01;
        if (family == "qp") config.alpha = 0.5;
        else if (family == "mc") config.alpha = 0.1;
        else if (family == "nmf") config.alpha = 0.7;
        else config.alpha = 0.5;
    }
    if (spec.gamma) config.gamma = *spec.gamma;
    if (spec.alpha) config.alpha = *spec.alpha;
    if (spec.initial_curvature) config.initial_curvature = *spec.initial_curvature;
    return config;
}

CurvatureStats curvature_stats(const CurvatureTrace& trace) {
    if (trace.count == 0 && trace.records.empty())
        throw std::invalid_argument("curvature_stats: empty trace");
    CurvatureStats stats;
    stats.max_curvature = trace.max_C;
    stats.avg_curvature = trace.avg_C();
    stats.good_fraction = trace.good_fraction();
    return stats;
}

double rate_diagnostic(const std::vector<double>& residual_norms) {
    const std::size_t total = residual_norms.size();
    if (total < 50) throw std::invalid_argument("rate_diagnostic: need at least 50 residuals");
    std::vector<double> running_min(total);
    double best = residual_norms[0];
    for (std::size_t i = 0; i < total; ++i) {
        best = std::min(best, residual_norms[i]);
        running_min[i] = best;
    }
    const std::size_t start = total / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t count = 0;
    for (std::size_t i = start; i < total; ++i) {
        if (running_min[i] <= 0.0) continue;
        const double x = std::log(static_cast<double>(i + 1));
        const double y = std::log(running_min[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 2) throw std::invalid_argument("rate_diagnostic: residual tail degenerate");
    const double denom = count * sxx - sx * sx;
    return (count * sxy - sx * sy) / denom;
}

// ---------------------------------------------------------------- auditor

TraceAuditor::TraceAuditor(const CompositeProblem& problem, const AcAcgConfig& config)
    : problem_(&problem),
      gamma_(config.gamma),
      threshold_(config.good_threshold),
      curvature_bound_(problem.upper_curvature),
      formula_alpha_(!config.alpha.has_value()),
      act_mode_(config.mode == CurvatureMode::ACT) {}

IterationObserver TraceAuditor::observer() {
    return [this](const IterationView& view) {
        a_.push_back(view.a_k);
        A_next_.push_back(view.A_next);
        M_.push_back(view.M_k);
        C_.push_back(view.C_k);
        C_avg_.push_back(view.C_avg);
        good_.push_back(view.good);
        degenerate_.push_back(view.degenerate);
        residual_norms_.push_back(view.residual_norm);

        const double coupled = view.M_k * view.a_k * view.a_k;
        if (std::abs(coupled - view.A_next) > 1e-12 * std::abs(view.A_next))
            ++coupling_failures_;
        if (view.A_next <= last_A_) ++monotone_A_failures_;
        last_A_ = view.A_next;

        const Vector rebuilt = composite_prox_step(*problem_, view.md, view.M_k);
        if (rebuilt.size() != view.y_good.size() ||
            !(rebuilt.array() == view.y_good.array()).all())
            ++reconstruction_failures_;

        if (!std::isnan(view.C_k)) {
            if (act_mode_) {
                const double bound =
                    (view.M_k + view.C_k) * (view.y_good - view.md).norm() + 1e-9;
                if (view.residual_norm > bound) ++residual_bound_failures_;
            }
            const bool should_be_good = view.C_k <= threshold_ * view.M_k;
            if (should_be_good != view.good) ++flag_failures_;
        }
        if (!problem_->in_domain(view.x_next, 1e-7) || !problem_->in_domain(view.y_next, 1e-7))
            ++domain_failures_;
    };
}

AuditReport TraceAuditor::finalize() const {
    AuditReport report;
    auto add = [&report](const std::string& name, bool ok, const std::string& detail = "") {
        report.checks.push_back({name, ok, detail});
    };
    const std::size_t n = M_.size();

    add("coupling A_{k+1} = M_k a_k^2 (1e-12 rel)", coupling_failures_ == 0,
        coupling_failures_ ? std::to_string(coupling_failures_) + " failures" : "");
    add("A_k strictly increasing", monotone_A_failures_ == 0);
    add("prox-step reconstruction bit-for-bit", reconstruction_failures_ == 0,
        reconstruction_failures_ ? std::to_string(reconstruction_failures_) + " failures" : "");
    if (act_mode_)
        add("residual bound ||v|| <= (M_k + C_k)||y_g - x~||", residual_bound_failures_ == 0);
    add("good flag matches C_k <= 0.9 M_k", flag_failures_ == 0);
    add("iterates stay in dom h", domain_failures_ == 0);

    bool floor_ok = true;
    for (double m : M_)
        if (m < gamma_ * curvature_bound_ * (1.0 - 1e-12)) floor_ok = false;
    add("curvature floor M_k >= gamma M", floor_ok);

    bool ratio_ok = true;
    for (std::size_t k = 1; k < n && ratio_ok; ++k)
        for (std::size_t i = 1; i < k; ++i)
            if (M_[k] < (static_cast<double>(i) / k) * M_[i] * (1.0 - 1e-12)) {
                ratio_ok = false;
                break;
            }
    add("curvature ordering M_k >= (i/k) M_i", ratio_ok);

    bool accum_ok = true;
    {
        double s = 0.0;  // sum of M_i^{-1/2} over i < k
        for (std::size_t k = 0; k < n; ++k) {
            s += 1.0 / std::sqrt(M_[k]);
            const std::size_t next = k + 1;  // A_next_[k] = A_{k+1}
            if (next >= 12) {
                const double upper = s * s;
                const double lower = 0.25 * s * s;
                if (A_next_[k] > upper * (1.0 + 1e-9) || A_next_[k] < lower * (1.0 - 1e-9))
                    accum_ok = false;
            }
        }
    }
    add("two-sided accumulator bounds for k >= 12", accum_ok);

    if (formula_alpha_) {
        bool card_ok = true;
        long bad = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!good_[i]) ++bad;
            const std::size_t k = i + 1;  // bad count over iterations 0..k-1
            if (k >= 12 && 3 * bad > static_cast<long>(k)) card_ok = false;
        }
        add("bad-iteration count |B_k| <= k/3 for k >= 12", card_ok);
    }

    bool avg_ok = true;
    {
        double sum = 0.0;
        long count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::isnan(C_[i])) continue;
            sum += C_[i];
            ++count;
            const double mean = sum / count;
            if (std::abs(mean - C_avg_[i]) > 1e-12 * std::max(1.0, std::abs(mean))) avg_ok = false;
        }
    }
    add("recorded running average matches mean of C_0..C_k", avg_ok);

    return report;
}

bool AuditReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const AuditCheck& c) { return c.passed; });
}

std::pair<AcAcgResult, AuditReport> audited_ac_acg(const CompositeProblem& problem,
                                                   AcAcgConfig config) {
    TraceAuditor auditor(problem, config);
    config.observer = auditor.observer();
    AcAcgResult result = solve_ac_acg(problem, config);
    return {std::move(result), auditor.finalize()};
}

// ---------------------------------------------------------------- experiment driver

namespace {

void dump_trace_csv(const std::string& path, const CurvatureTrace& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open trace output " + path);
    out << "k,a,A_next,M,C,C_avg,F,residual_norm,good,degenerate\n";
    for (const TraceRecord& r : trace.records) {
        out << r.k << ',' << format_double(r.a) << ',' << format_double(r.A_next) << ','
            << format_double(r.M) << ',' << format_double(r.C) << ',' << format_double(r.C_avg)
            << ',' << format_double(r.F) << ',' << format_double(r.residual_norm) << ','
            << (r.good ? 1 : 0) << ',' << (r.degenerate ? 1 : 0) << '\n';
    }
}

SolverCell run_single(const CompositeProblem& problem, const SolverSpec& spec,
                      const std::string& family, double rho_hat, int max_iters,
                      bool record_trace, const std::string& trace_path, bool audit,
                      AuditReport* audit_out) {
    SolverCell cell;
    cell.solver = solver_label(spec);
    try {
        if (is_adaptive(spec.kind)) {
            AcAcgConfig config =
                make_ac_acg_config(spec, family, rho_hat, max_iters, problem.upper_curvature);
            config.record_trace = record_trace;
            cell.has_curvature_columns = true;
            if (audit) {
                auto [result, report] = audited_ac_acg(problem, config);
                cell.report = result.report;
                if (audit_out) *audit_out = report;
                if (!trace_path.empty()) dump_trace_csv(trace_path, result.trace);
            } else {
                AcAcgResult result = solve_ac_acg(problem, config);
                cell.report = result.report;
                if (!trace_path.empty()) dump_trace_csv(trace_path, result.trace);
            }
        } else if (spec.kind == SolverKind::AG) {
            AgConfig config;
            config.rho_hat = rho_hat;
            config.max_iters = max_iters;
            cell.report = solve_ag(problem, config);
        } else {
            ConvexRule rule;
            rule.kind = spec.kind == SolverKind::FISTA ? ConvexRule::Kind::FISTA
                        : spec.kind == SolverKind::AT  ? ConvexRule::Kind::AT
                                                       : ConvexRule::Kind::LLM;
            rule.monotone = spec.monotone;
            ConvexAcgConfig config;
            config.rho_hat = rho_hat;
            config.max_iters = max_iters;
            cell.report = solve_acg_convex(problem, rule, config).report;
        }
    } catch (const std::exception& err) {
        cell.failure = err.what();
    }
    return cell;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    if (config.problems.empty())
        throw std::invalid_argument("run_experiment: need at least one instance");
    if (config.solvers.empty())
        throw std::invalid_argument("run_experiment: need at least one solver");
    if (config.rho_hat && *config.rho_hat <= 0.0)
        throw std::invalid_argument("run_experiment: rho_hat must be positive");

    ExperimentResult result;
    for (const ProblemSpec& spec : config.problems) {
        std::string label;
        const CompositeProblem problem = build_problem(spec, config.seed, &label);
        const double rho = config.rho_hat ? *config.rho_hat : default_rho_hat(spec.family);

        ResultRow row;
        row.instance_label = label;
        row.cells.resize(config.solvers.size());
        std::vector<AuditReport> audits(config.solvers.size());

        auto job = [&](std::size_t s) {
            const SolverSpec& solver = config.solvers[s];
            const bool wants_trace = config.record_trace && is_adaptive(solver.kind);
            const std::string trace_path =
                wants_trace && !config.trace_prefix.empty()
                    ? config.trace_prefix + solver_label(solver) + ".csv"
                    : std::string();
            row.cells[s] = run_single(problem, solver, spec.family, rho, config.max_iters,
                                      config.record_trace, trace_path,
                                      config.audit && is_adaptive(solver.kind), &audits[s]);
        };

        if (config.jobs > 1) {
            std::vector<std::future<void>> futures;
            futures.reserve(config.solvers.size());
            for (std::size_t s = 0; s < config.solvers.size(); ++s)
                futures.push_back(std::async(std::launch::async, job, s));
            for (auto& f : futures) f.get();
        } else {
            for (std::size_t s = 0; s < config.solvers.size(); ++s) job(s);
        }

        for (std::size_t s = 0; s < config.solvers.size(); ++s) {
            if (config.audit && is_adaptive(config.solvers[s].kind) &&
                row.cells[s].failure.empty()) {
                audits[s].run_label = label + " / " + row.cells[s].solver;
                result.audits.push_back(std::move(audits[s]));
            }
        }
        result.rows.push_back(std::move(row));
    }

    if (!config.output_path.empty()) {
        write_results_csv(config.output_path, result.rows);
        if (config.audit) {
            std::ofstream audit_file(config.output_path + ".audit.txt");
            print_audit_report(audit_file, result.audits);
        }
    }
    return result;
}

// ---------------------------------------------------------------- CSV + tables

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_results_csv: cannot open " + path);
    if (rows.empty()) return;
    out << "instance";
    for (const SolverCell& cell : rows.front().cells) {
        const std::string& s = cell.solver;
        out << ',' << s << "_status," << s << "_iters," << s << "_time_s," << s << "_objective,"
            << s << "_best_residual," << s << "_prox_evals," << s << "_max_C," << s << "_avg_C,"
            << s << "_good_fraction";
    }
    out << '\n';
    for (const ResultRow& row : rows) {
        out << row.instance_label;
        for (const SolverCell& cell : row.cells) {
            if (!cell.failure.empty()) {
                out << ",failed,0,0,0,0,0,,,";
                continue;
            }
            const RunReport& r = cell.report;
            out << ',' << to_string(r.status) << ',' << r.iterations << ','
                << format_double(r.wall_time_sec) << ',' << format_double(r.final_objective)
                << ',' << format_double(r.best_residual_norm) << ',' << r.prox_evals;
            if (cell.has_curvature_columns && r.curvature) {
                out << ',' << format_double(r.curvature->max_curvature) << ','
                    << format_double(r.curvature->avg_curvature) << ','
                    << format_double(r.curvature->good_fraction);
            } else {
                out << ",,,";
            }
        }
        out << '\n';
    }
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_results_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) return {};

    std::vector<std::string> header;
    {
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) header.push_back(cell);
    }
    const std::size_t per_solver = 9;
    const std::size_t solver_count = (header.size() - 1) / per_solver;

    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream stream(line);
        std::string cell;
        while (std::getline(stream, cell, ',')) cells.push_back(cell);
        cells.resize(header.size());

        ResultRow row;
        row.instance_label = cells[0];
        for (std::size_t s = 0; s < solver_count; ++s) {
            const std::size_t base = 1 + s * per_solver;
            SolverCell sc;
            const std::string& column = header[base];
            sc.solver = column.substr(0, column.rfind("_status"));
            if (cells[base] == "failed") {
                sc.failure = "failed";
            } else {
                sc.report.status = cells[base] == "converged" ? TerminationStatus::Converged
                                                              : TerminationStatus::MaxIters;
                sc.report.iterations = std::stoi(cells[base + 1]);
                sc.report.wall_time_sec = std::stod(cells[base + 2]);
                sc.report.final_objective = std::stod(cells[base + 3]);
                sc.report.best_residual_norm = std::stod(cells[base + 4]);
                sc.report.prox_evals = std::stol(cells[base + 5]);
                if (!cells[base + 6].empty()) {
                    CurvatureStats stats;
                    stats.max_curvature = std::stod(cells[base + 6]);
                    stats.avg_curvature = std::stod(cells[base + 7]);
                    stats.good_fraction = std::stod(cells[base + 8]);
                    sc.report.curvature = stats;
                    sc.has_curvature_columns = true;
                }
            }
            row.cells.push_back(std::move(sc));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void print_results_table(std::ostream& out, const std::vector<ResultRow>& rows) {
    for (const ResultRow& row : rows) {
        out << row.instance_label << '\n';
        out << "  " << std::left << std::setw(12) << "solver" << std::right << std::setw(10)
            << "iters" << std::setw(12) << "time(s)" << std::setw(16) << "objective"
            << std::setw(14) << "residual" << std::setw(8) << "prox" << std::setw(12) << "max C"
            << std::setw(12) << "avg C" << std::setw(8) << "good%" << '\n';
        for (const SolverCell& cell : row.cells) {
            out << "  " << std::left << std::setw(12) << cell.solver << std::right;
            if (!cell.failure.empty()) {
                out << "  FAILED: " << cell.failure << '\n';
                continue;
            }
            const RunReport& r = cell.report;
            out << std::setw(10) << r.iterations << std::setw(12) << std::setprecision(3)
                << std::fixed << r.wall_time_sec << std::defaultfloat << std::setw(16)
                << std::setprecision(8) << r.final_objective << std::setw(14)
                << std::setprecision(3) << r.best_residual_norm << std::setw(8) << r.prox_evals;
            if (cell.has_curvature_columns && r.curvature) {
                out << std::setw(12) << std::setprecision(3) << r.curvature->max_curvature
                    << std::setw(12) << r.curvature->avg_curvature << std::setw(7) << std::fixed
                    << std::setprecision(1) << 100.0 * r.curvature->good_fraction << '%'
                    << std::defaultfloat;
            }
            if (r.status == TerminationStatus::MaxIters) out << "  (max iters)";
            out << '\n';
        }
    }
}

void print_audit_report(std::ostream& out, const std::vector<AuditReport>& audits) {
    for (const AuditReport& audit : audits) {
        out << "audit: " << audit.run_label << '\n';
        for (const AuditCheck& check : audit.checks) {
            out << "  [" << (check.passed ? "PASS" : "FAIL") << "] " << check.name;
            if (!check.detail.empty()) out << " (" << check.detail << ")";
            out << '\n';
        }
    }
}

// ---------------------------------------------------------------- config file

namespace {

SolverSpec solver_from_json(const nlohmann::json& node) {
    if (node.is_string()) return parse_solver_spec(node.get<std::string>());
    SolverSpec spec = parse_solver_spec(node.at("name").get<std::string>());
    if (node.contains("alpha")) spec.alpha = node["alpha"].get<double>();
    if (node.contains("gamma")) spec.gamma = node["gamma"].get<double>();
    if (node.contains("M0")) spec.initial_curvature = node["M0"].get<double>();
    return spec;
}

ProblemSpec problem_from_json(const nlohmann::json& node) {
    ProblemSpec spec;
    spec.family = node.at("family").get<std::string>();
    auto get = [&node](const char* key, auto fallback) {
        using T = decltype(fallback);
        return node.contains(key) ? node[key].get<T>() : fallback;
    };
    if (spec.family == "qp") {
        spec.qp.l = get("l", spec.qp.l);
        spec.qp.n = get("n", spec.qp.n);
        spec.qp.density = get("density", spec.qp.density);
        spec.qp.target_upper = get("M", spec.qp.target_upper);
        spec.qp.target_lower = get("m", spec.qp.target_lower);
    } else if (spec.family == "svm") {
        spec.svm.n = get("n", spec.svm.n);
        spec.svm.p = get("p", spec.svm.p);
        spec.svm.radius = get("radius", spec.svm.radius);
        spec.svm.sparsity = get("sparsity", spec.svm.sparsity);
    } else if (spec.family == "spca") {
        if (node.contains("dataset"))
            spec.spca = spca_dataset_preset(node["dataset"].get<int>(), get("p", 60));
        spec.spca.p = get("p", spec.spca.p);
        spec.spca.s = get("s", spec.spca.s);
        spec.spca.r = get("r", spec.spca.r);
        spec.spca.b = get("b", spec.spca.b);
        spec.spca.beta = get("beta", spec.spca.beta);
        spec.spca.mu = get("mu", spec.spca.mu);
        spec.spca.lambda = get("lambda", spec.spca.lambda);
    } else if (spec.family == "mc") {
        spec.mc.rows = get("rows", spec.mc.rows);
        spec.mc.cols = get("cols", spec.mc.cols);
        spec.mc.observe_fraction = get("observe_fraction", spec.mc.observe_fraction);
        spec.mc.mu = get("mu", spec.mc.mu);
        spec.mc.beta = get("beta", spec.mc.beta);
        spec.mc.theta = get("theta", spec.mc.theta);
        spec.data_file = get("data_file", std::string());
    } else if (spec.family == "nmf") {
        spec.nmf.rows = get("rows", spec.nmf.rows);
        spec.nmf.cols = get("cols", spec.nmf.cols);
        spec.nmf.inner = get("inner", spec.nmf.inner);
        spec.nmf.noise = get("noise", spec.nmf.noise);
        spec.data_file = get("data_file", std::string());
    }
    return spec;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("load_experiment_config: cannot open " + json_path);
    nlohmann::json doc = nlohmann::json::parse(in);

    ExperimentConfig config;
    for (const auto& node : doc.at("instances")) config.problems.push_back(problem_from_json(node));
    for (const auto& node : doc.at("solvers")) config.solvers.push_back(solver_from_json(node));
    if (doc.contains("rho_hat")) config.rho_hat = doc["rho_hat"].get<double>();
    if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("max_iters")) config.max_iters = doc["max_iters"].get<int>();
    if (doc.contains("output")) config.output_path = doc["output"].get<std::string>();
    if (doc.contains("audit")) config.audit = doc["audit"].get<bool>();
    if (doc.contains("trace")) config.record_trace = doc["trace"].get<bool>();
    if (doc.contains("trace_prefix")) config.trace_prefix = doc["trace_prefix"].get<std::string>();
    if (doc.contains("jobs")) config.jobs = doc["jobs"].get<int>();
    return config;
}

}  // namespace acacg
