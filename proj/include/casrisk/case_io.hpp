#pragma once

#include <string>
#include <vector>

#include "casrisk/config.hpp"
#include "casrisk/mc_baseline.hpp"
#include "casrisk/mt_search.hpp"
#include "casrisk/network_case.hpp"

namespace casrisk {

/// Parses and validates a case file. Unknown keys and dangling references
/// produce errors naming the offending field.
NetworkCase load_case(const std::string& path);

/// Writes a normalized case file; load_case on the output reproduces an
/// identical NetworkCase.
void save_case(const NetworkCase& net, const std::string& path);

/// Serializes the effective configuration (for the summary echo).
std::string config_to_json(const AssessmentConfig& cfg);

/// summary.json + risk_curve.csv + top_paths.csv under out_dir.
void write_result_bundle(const std::string& out_dir, const AssessmentResult& result,
                         const AssessmentConfig& cfg, const std::vector<int>& initial_outages,
                         std::uint64_t seed, double wall_seconds);

void write_enumeration_report(const std::string& out_dir, const EnumerationResult& result,
                              double c0);

void write_mc_report(const std::string& out_dir, const McEstimate& est);

struct SweepRow {
    double value = 0.0;
    std::uint64_t seed = 0;
    int attempts = 0;
    double risk = 0.0;
    double phi = 0.0;
    bool converged = false;
    std::string error;  // per-run failure note, empty on success
};

void write_sweep_csv(const std::string& path, const std::string& parameter,
                     const std::vector<SweepRow>& rows);

}  // namespace casrisk
