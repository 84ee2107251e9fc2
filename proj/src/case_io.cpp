#include "casrisk/case_io.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace casrisk {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!known.count(key)) {
            throw MalformedCaseError("case: unknown key \"" + key + "\" in " + where);
        }
    }
}

double num_field(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw MalformedCaseError("case: missing " + where + "." + key);
    if (!obj[key].is_number())
        throw MalformedCaseError("case: " + where + "." + key + " must be a number");
    return obj[key].get<double>();
}

int int_field(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw MalformedCaseError("case: missing " + where + "." + key);
    if (!obj[key].is_number_integer())
        throw MalformedCaseError("case: " + where + "." + key + " must be an integer");
    return obj[key].get<int>();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

}  // namespace

NetworkCase load_case(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedCaseError("case: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw MalformedCaseError("case: parse error in " + path + ": " + e.what());
    }
    if (!j.is_object()) throw MalformedCaseError("case: top level must be an object");
    reject_unknown(j, {"base_mva", "buses", "branches", "generators", "loads", "load_curve"},
                   "top level");

    NetworkCase net;
    if (j.contains("base_mva")) net.base_mva = num_field(j, "base_mva", "top level");

    for (const json& b : j.value("buses", json::array())) {
        if (!b.is_object()) throw MalformedCaseError("case: bus entries must be objects");
        reject_unknown(b, {"id"}, "buses[]");
        net.buses.push_back(int_field(b, "id", "buses[]"));
    }
    int n = 0;
    for (const json& b : j.value("branches", json::array())) {
        const std::string where = "branches[" + std::to_string(n++) + "]";
        if (!b.is_object()) throw MalformedCaseError("case: " + where + " must be an object");
        reject_unknown(b, {"id", "from", "to", "x_pu", "rating_mw", "lambda0_per_hr"}, where);
        Branch br;
        br.id = int_field(b, "id", where);
        br.from_bus = int_field(b, "from", where);
        br.to_bus = int_field(b, "to", where);
        br.reactance_pu = num_field(b, "x_pu", where);
        br.rating_mw = num_field(b, "rating_mw", where);
        br.lambda0_per_hr = num_field(b, "lambda0_per_hr", where);
        net.branches.push_back(br);
    }
    n = 0;
    for (const json& g : j.value("generators", json::array())) {
        const std::string where = "generators[" + std::to_string(n++) + "]";
        if (!g.is_object()) throw MalformedCaseError("case: " + where + " must be an object");
        reject_unknown(g, {"bus", "p_mw", "pmin_mw", "pmax_mw", "ramp_mw_per_min"}, where);
        Generator gen;
        gen.bus = int_field(g, "bus", where);
        gen.p_mw = num_field(g, "p_mw", where);
        gen.pmin_mw = num_field(g, "pmin_mw", where);
        gen.pmax_mw = num_field(g, "pmax_mw", where);
        gen.ramp_mw_per_min = num_field(g, "ramp_mw_per_min", where);
        net.generators.push_back(gen);
    }
    n = 0;
    for (const json& l : j.value("loads", json::array())) {
        const std::string where = "loads[" + std::to_string(n++) + "]";
        if (!l.is_object()) throw MalformedCaseError("case: " + where + " must be an object");
        reject_unknown(l, {"bus", "p_mw"}, where);
        net.loads.push_back({int_field(l, "bus", where), num_field(l, "p_mw", where)});
    }
    n = 0;
    for (const json& p : j.value("load_curve", json::array())) {
        const std::string where = "load_curve[" + std::to_string(n++) + "]";
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            throw MalformedCaseError("case: " + where + " must be a [minute, multiplier] pair");
        }
        net.load_curve.points.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    net.finalize();
    return net;
}

void save_case(const NetworkCase& net, const std::string& path) {
    json j;
    j["base_mva"] = net.base_mva;
    j["buses"] = json::array();
    for (int id : net.buses) j["buses"].push_back({{"id", id}});
    j["branches"] = json::array();
    for (const Branch& b : net.branches) {
        j["branches"].push_back({{"id", b.id},
                                 {"from", b.from_bus},
                                 {"to", b.to_bus},
                                 {"x_pu", b.reactance_pu},
                                 {"rating_mw", b.rating_mw},
                                 {"lambda0_per_hr", b.lambda0_per_hr}});
    }
    j["generators"] = json::array();
    for (const Generator& g : net.generators) {
        j["generators"].push_back({{"bus", g.bus},
                                   {"p_mw", g.p_mw},
                                   {"pmin_mw", g.pmin_mw},
                                   {"pmax_mw", g.pmax_mw},
                                   {"ramp_mw_per_min", g.ramp_mw_per_min}});
    }
    j["loads"] = json::array();
    for (const Load& l : net.loads) j["loads"].push_back({{"bus", l.bus}, {"p_mw", l.p_mw}});
    if (!net.load_curve.points.empty()) {
        j["load_curve"] = json::array();
        for (const auto& [minute, mult] : net.load_curve.points) {
            j["load_curve"].push_back(json::array({minute, mult}));
        }
    }
    open_out(path) << j.dump(2) << "\n";
}

std::string config_to_json(const AssessmentConfig& cfg) {
    json j;
    j["tau_d_min"] = cfg.tau_d_min;
    j["t_max_min"] = cfg.t_max_min;
    j["trust_lambda"] = cfg.trust_lambda;
    j["alpha"] = cfg.alpha;
    j["beta"] = cfg.beta;
    j["gamma"] = cfg.gamma;
    j["mu"] = cfg.mu;
    j["mu_e"] = cfg.mu_e;
    j["economic_mode"] = cfg.economic_mode;
    j["delay_min"] = cfg.delay_min;
    j["epsilon_cut"] = cfg.epsilon_cut;
    j["rate_model"] = {{"lambda_max_per_hr", cfg.rate_model.lambda_max_per_hr},
                       {"kappa_trip", cfg.rate_model.kappa_trip}};
    j["convergence"] = {{"window", cfg.convergence.window},
                        {"rel_threshold", cfg.convergence.rel_threshold},
                        {"coverage_threshold", cfg.convergence.coverage_threshold}};
    j["attempt_budget"] = cfg.attempt_budget;
    j["seed"] = cfg.seed;
    j["n_tau"] = cfg.n_tau;
    j["redispatch_gen_weight"] = cfg.redispatch_gen_weight;
    j["enumeration_cap"] = cfg.enumeration_cap;
    j["matrix_cache_entries"] = cfg.matrix_cache_entries;
    j["terminal_log_offset"] = cfg.terminal_log_offset;
    j["candidate_floor_log_offset"] = cfg.candidate_floor_log_offset;
    return j.dump(2);
}

namespace {

std::string key_string(const StateKey& key) {
    std::ostringstream os;
    for (std::size_t i = 0; i < key.size(); ++i) {
        if (i) os << '-';
        os << key[i];
    }
    return os.str();
}

}  // namespace

void write_result_bundle(const std::string& out_dir, const AssessmentResult& result,
                         const AssessmentConfig& cfg, const std::vector<int>& initial_outages,
                         std::uint64_t seed, double wall_seconds) {
    std::filesystem::create_directories(out_dir);

    json summary;
    summary["risk_mw"] = result.risk;
    summary["c0_mw"] = result.c0;
    summary["coverage"] = result.coverage_trace.empty() ? (result.attempts == 0 ? 0.0 : 1.0)
                                                        : result.coverage_trace.back();
    summary["attempts"] = result.attempts;
    summary["converged"] = result.converged;
    summary["exhausted"] = result.exhausted;
    summary["seed"] = seed;
    summary["initial_outages"] = initial_outages;
    summary["states_stored"] = result.states_stored;
    summary["transitions_simulated"] = result.transitions_simulated;
    summary["wall_seconds"] = wall_seconds;
    summary["config"] = json::parse(config_to_json(cfg));
    open_out(out_dir + "/summary.json") << summary.dump(2) << "\n";

    auto curve = open_out(out_dir + "/risk_curve.csv");
    curve << "attempt,risk_mw,coverage\n";
    curve.precision(17);
    for (std::size_t i = 0; i < result.risk_trace.size(); ++i) {
        curve << (i + 1) << ',' << result.risk_trace[i] << ',' << result.coverage_trace[i]
              << '\n';
    }

    auto paths = open_out(out_dir + "/top_paths.csv");
    paths << "state_key,probability,total_cost_mw\n";
    paths.precision(17);
    for (const EnumerationPath& p : result.top_paths) {
        paths << key_string(p.key) << ',' << p.probability << ',' << p.total_cost_mw << '\n';
    }
}

void write_enumeration_report(const std::string& out_dir, const EnumerationResult& result,
                              double c0) {
    std::filesystem::create_directories(out_dir);
    json summary;
    summary["risk_mw"] = result.risk;
    summary["c0_mw"] = c0;
    summary["path_count"] = result.path_count;
    summary["coverage"] = result.coverage;
    open_out(out_dir + "/enumeration.json") << summary.dump(2) << "\n";

    auto paths = open_out(out_dir + "/paths.csv");
    paths << "state_key,probability,total_cost_mw\n";
    paths.precision(17);
    for (const EnumerationPath& p : result.paths) {
        paths << key_string(p.key) << ',' << p.probability << ',' << p.total_cost_mw << '\n';
    }
}

void write_mc_report(const std::string& out_dir, const McEstimate& est) {
    std::filesystem::create_directories(out_dir);
    json j;
    j["mean_mw"] = est.mean;
    if (est.std_error_valid) {
        j["std_error_mw"] = est.std_error;
    } else {
        j["std_error_mw"] = "not-applicable";
    }
    j["samples"] = est.samples;
    j["wall_seconds"] = est.wall_seconds;
    open_out(out_dir + "/mc.json") << j.dump(2) << "\n";
}

void write_sweep_csv(const std::string& path, const std::string& parameter,
                     const std::vector<SweepRow>& rows) {
    auto out = open_out(path);
    out << parameter << ",seed,attempts,risk_mw,phi,converged,error\n";
    out.precision(17);
    for (const SweepRow& r : rows) {
        out << r.value << ',' << r.seed << ',' << r.attempts << ',' << r.risk << ',' << r.phi
            << ',' << (r.converged ? 1 : 0) << ',' << r.error << '\n';
    }
}

}  // namespace casrisk
