#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "casrisk/case_io.hpp"
#include "casrisk/mc_baseline.hpp"
#include "casrisk/mt_search.hpp"

namespace {

using namespace casrisk;

std::vector<int> parse_id_list(const std::string& text) {
    std::vector<int> ids;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        ids.push_back(std::stoi(token));
    }
    return ids;
}

std::vector<double> parse_value_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        values.push_back(std::stod(token));
    }
    return values;
}

struct CommonArgs {
    std::string case_path;
    std::string config_path;
    std::string initial_outages;
    std::string out_dir = "out";
    int attempts = -1;
    std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool need_outages = true) {
    cmd->add_option("--case", args.case_path, "case file")->required();
    cmd->add_option("--config", args.config_path, "config file (defaults used when omitted)");
    auto* opt = cmd->add_option("--initial-outage", args.initial_outages,
                                "comma-separated branch ids tripped at t = 0");
    if (need_outages) opt->required();
    cmd->add_option("--attempts", args.attempts, "attempt budget override");
    cmd->add_option("--seed", args.seed, "seed override");
    cmd->add_option("--out", args.out_dir, "output directory");
}

AssessmentConfig make_config(const CommonArgs& args) {
    AssessmentConfig cfg =
        args.config_path.empty() ? AssessmentConfig{} : load_config(args.config_path);
    if (args.attempts > 0) cfg.attempt_budget = args.attempts;
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
    return cfg;
}

void validate_outages(const NetworkCase& net, const std::vector<int>& ids) {
    for (int id : ids) net.branch_pos(id);  // throws with the offending id
}

int cmd_assess(const CommonArgs& args) {
    const NetworkCase net = load_case(args.case_path);
    const AssessmentConfig cfg = make_config(args);
    const std::vector<int> outages = parse_id_list(args.initial_outages);
    validate_outages(net, outages);

    MatrixPool pool(net, cfg.matrix_cache_entries);
    CascadeSimulator sim(net, cfg, pool);
    const auto start = std::chrono::steady_clock::now();
    const AssessmentResult result =
        run_assessment(sim, outages, cfg.seed, cfg.attempt_budget);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    write_result_bundle(args.out_dir, result, cfg, outages, cfg.seed, wall);
    std::cout << "risk_mw=" << result.risk << " attempts=" << result.attempts
              << " coverage=" << (result.coverage_trace.empty() ? 1.0 : result.coverage_trace.back())
              << " converged=" << result.converged << "\n";
    return result.converged ? 0 : 2;
}

int cmd_enumerate(const CommonArgs& args) {
    const NetworkCase net = load_case(args.case_path);
    const AssessmentConfig cfg = make_config(args);
    const std::vector<int> outages = parse_id_list(args.initial_outages);
    validate_outages(net, outages);

    MatrixPool pool(net, cfg.matrix_cache_entries);
    CascadeSimulator sim(net, cfg, pool);
    SystemState probe = sim.initial_state();
    const double c0 = sim.apply_initial_outages(probe, outages);
    const EnumerationResult result = enumerate_all(sim, outages, true);
    write_enumeration_report(args.out_dir, result, c0);
    std::cout << "risk_mw=" << result.risk << " paths=" << result.path_count
              << " coverage=" << result.coverage << "\n";
    return 0;
}

int cmd_mc(const CommonArgs& args, int samples) {
    const NetworkCase net = load_case(args.case_path);
    const AssessmentConfig cfg = make_config(args);
    const std::vector<int> outages = parse_id_list(args.initial_outages);
    validate_outages(net, outages);

    MatrixPool pool(net, cfg.matrix_cache_entries);
    CascadeSimulator sim(net, cfg, pool);
    const McEstimate est = mc_risk(sim, outages, samples, cfg.seed);
    write_mc_report(args.out_dir, est);
    std::cout << "mean_mw=" << est.mean << " std_error="
              << (est.std_error_valid ? std::to_string(est.std_error) : "n/a")
              << " samples=" << est.samples << "\n";
    return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& parameter, const std::string& values,
              int repeats) {
    const NetworkCase net = load_case(args.case_path);
    const AssessmentConfig base_cfg = make_config(args);
    const std::vector<int> outages = parse_id_list(args.initial_outages);
    validate_outages(net, outages);
    const std::vector<double> value_list = parse_value_list(values);
    if (value_list.empty()) throw std::runtime_error("sweep: empty value list");

    std::vector<SweepRow> rows;
    for (double value : value_list) {
        AssessmentConfig cfg = base_cfg;
        if (parameter == "trust-lambda") {
            cfg.trust_lambda = value;
        } else if (parameter == "tau-d") {
            cfg.tau_d_min = value;
        } else if (parameter == "delay") {
            cfg.delay_min = value;
        } else {
            throw std::runtime_error("sweep: unknown parameter " + parameter);
        }
        for (int r = 0; r < repeats; ++r) {
            SweepRow row;
            row.value = value;
            row.seed = base_cfg.seed + static_cast<std::uint64_t>(r);
            try {
                MatrixPool pool(net, cfg.matrix_cache_entries);
                CascadeSimulator sim(net, cfg, pool);
                const AssessmentResult result =
                    run_assessment(sim, outages, row.seed, cfg.attempt_budget);
                row.attempts = result.attempts;
                row.risk = result.risk;
                row.phi = convergence_metric(result.risk_trace, result.attempts);
                row.converged = result.converged;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            rows.push_back(row);
        }
    }
    std::filesystem::create_directories(args.out_dir);
    write_sweep_csv(args.out_dir + "/sweep.csv", parameter, rows);
    std::cout << "rows=" << rows.size() << " -> " << args.out_dir << "/sweep.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cascading-outage risk assessment over a DC grid model"};
    app.require_subcommand(1);

    CommonArgs assess_args, enum_args, mc_args, sweep_args;
    int mc_samples = 10000;
    std::string sweep_parameter, sweep_values;
    int sweep_repeats = 1;

    CLI::App* assess = app.add_subcommand("assess", "guided tree search assessment");
    add_common(assess, assess_args);

    CLI::App* enumerate = app.add_subcommand("enumerate", "exhaustive tree enumeration");
    add_common(enumerate, enum_args);

    CLI::App* mc = app.add_subcommand("mc", "sequential Monte Carlo baseline");
    add_common(mc, mc_args);
    mc->add_option("--samples", mc_samples, "number of Monte Carlo samples");

    CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep of repeated assessments");
    add_common(sweep, sweep_args);
    sweep->add_option("--parameter", sweep_parameter, "trust-lambda | tau-d | delay")->required();
    sweep->add_option("--values", sweep_values, "comma-separated parameter values")->required();
    sweep->add_option("--repeats", sweep_repeats, "runs per value (distinct seeds)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (assess->parsed()) return cmd_assess(assess_args);
        if (enumerate->parsed()) return cmd_enumerate(enum_args);
        if (mc->parsed()) return cmd_mc(mc_args, mc_samples);
        if (sweep->parsed()) return cmd_sweep(sweep_args, sweep_parameter, sweep_values,
                                              sweep_repeats);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
