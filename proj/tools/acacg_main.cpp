#include "acacg/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

struct CommonOptions {
    std::string family = "qp";
    std::string config_path;
    std::string data_file;
    std::uint64_t seed = 1;

    // qp
    int l = 20, n = -1;  // n < 0: per-family default (qp 60, svm 200)
    double density = 0.05, big_m = 1e4, small_m = 1e3;
    // svm
    int svm_p = 100;
    double radius = 50.0;
    // spca
    int dataset = 1, spca_p = 60;
    // mc / nmf
    int rows = 40, cols = 60, inner = 5;
    double observe_fraction = 0.3, mu = 2.2, beta = 1.0, theta = 1.0;

    std::string solvers = "ac,act,ag";
    double rho_hat = -1.0;  // negative: family default
    int max_iters = 100000;
    std::string output;
    bool trace = false;
    int jobs = 1;
};

void add_instance_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--family", opt.family, "qp | svm | spca | mc | nmf");
    cmd->add_option("--seed", opt.seed, "instance seed");
    cmd->add_option("--l", opt.l, "qp: number of A operators");
    cmd->add_option("--n", opt.n, "qp: matrix dimension / svm: feature dimension");
    cmd->add_option("--density", opt.density, "qp: sparse operator density");
    cmd->add_option("--M", opt.big_m, "qp: target largest Hessian eigenvalue");
    cmd->add_option("--m", opt.small_m, "qp: target negated smallest Hessian eigenvalue");
    cmd->add_option("--points", opt.svm_p, "svm: number of data points");
    cmd->add_option("--radius", opt.radius, "svm: feasible ball radius");
    cmd->add_option("--dataset", opt.dataset, "spca: synthetic design 1..4");
    cmd->add_option("--p", opt.spca_p, "spca: matrix dimension");
    cmd->add_option("--rows", opt.rows, "mc/nmf: row dimension");
    cmd->add_option("--cols", opt.cols, "mc/nmf: column dimension");
    cmd->add_option("--observe-fraction", opt.observe_fraction, "mc: observed entry fraction");
    cmd->add_option("--mu", opt.mu, "mc: spectral penalty weight");
    cmd->add_option("--beta", opt.beta, "mc: log-sum beta");
    cmd->add_option("--theta", opt.theta, "mc: log-sum theta");
    cmd->add_option("--inner", opt.inner, "nmf: factorization rank");
    cmd->add_option("--data-file", opt.data_file,
                    "mc: ratings tsv / nmf: dense matrix csv (replaces synthetic data)");
}

acacg::ProblemSpec make_problem_spec(const CommonOptions& opt) {
    acacg::ProblemSpec spec;
    spec.family = opt.family;
    spec.data_file = opt.data_file;
    spec.qp = {opt.l, opt.n < 0 ? 60 : opt.n, opt.density, opt.big_m, opt.small_m};
    spec.svm.n = opt.n < 0 ? 200 : opt.n;
    spec.svm.p = opt.svm_p;
    spec.svm.radius = opt.radius;
    spec.spca = acacg::spca_dataset_preset(opt.dataset, opt.spca_p);
    spec.mc = {opt.rows, opt.cols, opt.observe_fraction, opt.mu, opt.beta, opt.theta};
    spec.nmf.rows = opt.rows;
    spec.nmf.cols = opt.cols;
    spec.nmf.inner = opt.inner;
    return spec;
}

acacg::ExperimentConfig make_config(const CommonOptions& opt, bool audit) {
    if (!opt.config_path.empty()) {
        acacg::ExperimentConfig config = acacg::load_experiment_config(opt.config_path);
        if (audit) config.audit = true;
        return config;
    }
    acacg::ExperimentConfig config;
    config.problems.push_back(make_problem_spec(opt));
    std::string token;
    std::istringstream list(opt.solvers);
    while (std::getline(list, token, ','))
        if (!token.empty()) config.solvers.push_back(acacg::parse_solver_spec(token));
    if (opt.rho_hat > 0.0) config.rho_hat = opt.rho_hat;
    config.seed = opt.seed;
    config.max_iters = opt.max_iters;
    config.output_path = opt.output;
    config.audit = audit;
    config.record_trace = opt.trace;
    if (opt.trace)
        config.trace_prefix = opt.output.empty() ? "trace-" : opt.output + ".trace-";
    config.jobs = opt.jobs;
    return config;
}

int cmd_generate(const CommonOptions& opt) {
    const acacg::ProblemSpec spec = make_problem_spec(opt);
    std::string label;
    const acacg::CompositeProblem problem = acacg::build_problem(spec, opt.seed, &label);
    std::cout << "instance: " << label << '\n'
              << "  family:          " << spec.family << '\n'
              << "  seed:            " << opt.seed << '\n'
              << "  variable size:   " << problem.initial_point.size() << '\n'
              << "  upper curvature: " << problem.upper_curvature << '\n'
              << "  lower curvature: " << problem.lower_curvature << '\n';
    if (problem.diameter) std::cout << "  domain diameter: " << *problem.diameter << '\n';
    std::cout << "  initial point feasible: "
              << (problem.in_domain(problem.initial_point, 1e-8) ? "yes" : "no") << '\n';
    return 0;
}

int cmd_run(const CommonOptions& opt, bool audit) {
    const acacg::ExperimentConfig config = make_config(opt, audit);
    const acacg::ExperimentResult result = acacg::run_experiment(config);
    acacg::print_results_table(std::cout, result.rows);
    if (audit) {
        acacg::print_audit_report(std::cout, result.audits);
        for (const acacg::AuditReport& report : result.audits)
            if (!report.all_passed()) return 1;
    }
    for (const acacg::ResultRow& row : result.rows)
        for (const acacg::SolverCell& cell : row.cells)
            if (!cell.failure.empty()) return 1;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"benchmark harness for average-curvature accelerated composite gradient solvers"};
    app.require_subcommand(1);
    CommonOptions opt;

    CLI::App* generate = app.add_subcommand("generate", "generate an instance and print a summary");
    add_instance_flags(generate, opt);

    auto add_run_flags = [&opt](CLI::App* cmd) {
        add_instance_flags(cmd, opt);
        cmd->add_option("--config", opt.config_path, "JSON experiment config (overrides flags)");
        cmd->add_option("--solvers", opt.solvers, "comma list: ac,act,ag,fista,at,llm[,-mono]");
        cmd->add_option("--rho-hat", opt.rho_hat, "relative stopping tolerance");
        cmd->add_option("--max-iters", opt.max_iters, "iteration cap");
        cmd->add_option("--output", opt.output, "CSV output path");
        cmd->add_flag("--trace", opt.trace, "dump per-iteration records as CSV");
        cmd->add_option("--jobs", opt.jobs, "concurrent solver runs per instance");
    };
    CLI::App* run = app.add_subcommand("run", "run solvers under the relative stopping rule");
    add_run_flags(run);
    CLI::App* audit = app.add_subcommand("audit", "run with trace invariant checks");
    add_run_flags(audit);

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) return cmd_generate(opt);
        if (run->parsed()) return cmd_run(opt, false);
        return cmd_run(opt, true);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    }
}
