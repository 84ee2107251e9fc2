#include "casrisk/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace casrisk {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!known.count(key)) {
            throw std::runtime_error("config: unknown key \"" + key + "\" in " + where);
        }
    }
}

double require_positive(double v, const std::string& key) {
    if (!(v > 0.0)) throw std::runtime_error("config: " + key + " must be > 0");
    return v;
}

}  // namespace

AssessmentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config: parse error in " + path + ": " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("config: top level must be an object");

    reject_unknown(j, {"tau_d_min", "t_max_min", "trust_lambda", "alpha", "beta", "gamma",
                       "mu", "mu_e", "economic_mode", "delay_min", "epsilon_cut", "rate_model",
                       "convergence", "attempt_budget", "seed", "n_tau",
                       "redispatch_gen_weight", "enumeration_cap", "matrix_cache_entries",
                       "terminal_log_offset", "candidate_floor_log_offset"},
                   path);

    AssessmentConfig cfg;
    if (j.contains("tau_d_min")) cfg.tau_d_min = require_positive(j["tau_d_min"], "tau_d_min");
    if (j.contains("t_max_min")) cfg.t_max_min = require_positive(j["t_max_min"], "t_max_min");
    if (j.contains("trust_lambda")) cfg.trust_lambda = j["trust_lambda"];
    if (j.contains("alpha")) cfg.alpha = j["alpha"];
    if (j.contains("beta")) cfg.beta = j["beta"];
    if (j.contains("gamma")) cfg.gamma = j["gamma"];
    if (j.contains("mu")) cfg.mu = j["mu"];
    if (j.contains("mu_e")) cfg.mu_e = j["mu_e"];
    if (j.contains("economic_mode")) cfg.economic_mode = j["economic_mode"];
    if (j.contains("delay_min")) cfg.delay_min = require_positive(j["delay_min"], "delay_min");
    if (j.contains("epsilon_cut")) cfg.epsilon_cut = require_positive(j["epsilon_cut"], "epsilon_cut");
    if (j.contains("attempt_budget")) cfg.attempt_budget = j["attempt_budget"];
    if (j.contains("seed")) cfg.seed = j["seed"];
    if (j.contains("n_tau")) cfg.n_tau = j["n_tau"];
    if (j.contains("redispatch_gen_weight")) cfg.redispatch_gen_weight = j["redispatch_gen_weight"];
    if (j.contains("enumeration_cap")) cfg.enumeration_cap = j["enumeration_cap"];
    if (j.contains("matrix_cache_entries"))
        cfg.matrix_cache_entries = j["matrix_cache_entries"].get<std::size_t>();
    if (j.contains("terminal_log_offset")) cfg.terminal_log_offset = j["terminal_log_offset"];
    if (j.contains("candidate_floor_log_offset"))
        cfg.candidate_floor_log_offset = j["candidate_floor_log_offset"];

    if (j.contains("rate_model")) {
        const json& r = j["rate_model"];
        if (!r.is_object()) throw std::runtime_error("config: rate_model must be an object");
        reject_unknown(r, {"lambda_max_per_hr", "kappa_trip"}, "rate_model");
        if (r.contains("lambda_max_per_hr"))
            cfg.rate_model.lambda_max_per_hr =
                require_positive(r["lambda_max_per_hr"], "rate_model.lambda_max_per_hr");
        if (r.contains("kappa_trip"))
            cfg.rate_model.kappa_trip = require_positive(r["kappa_trip"], "rate_model.kappa_trip");
        if (cfg.rate_model.kappa_trip <= 1.0)
            throw std::runtime_error("config: rate_model.kappa_trip must be > 1");
    }

    if (j.contains("convergence")) {
        const json& c = j["convergence"];
        if (!c.is_object()) throw std::runtime_error("config: convergence must be an object");
        reject_unknown(c, {"window", "rel_threshold", "coverage_threshold"}, "convergence");
        if (c.contains("window")) cfg.convergence.window = c["window"];
        if (c.contains("rel_threshold")) cfg.convergence.rel_threshold = c["rel_threshold"];
        if (c.contains("coverage_threshold"))
            cfg.convergence.coverage_threshold = c["coverage_threshold"];
        if (cfg.convergence.window < 1)
            throw std::runtime_error("config: convergence.window must be >= 1");
    }

    if (cfg.attempt_budget < 1) throw std::runtime_error("config: attempt_budget must be >= 1");
    if (cfg.n_tau < 1) throw std::runtime_error("config: n_tau must be >= 1");
    if (cfg.t_max_min < cfg.tau_d_min)
        throw std::runtime_error("config: t_max_min must be >= tau_d_min");
    return cfg;
}

}  // namespace casrisk
