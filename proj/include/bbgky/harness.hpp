// Experiment configuration, check registry and reporting.

#pragma once

#include "bbgky/config_text.hpp"
#include "bbgky/hierarchy.hpp"
#include "bbgky/measures.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace bbgky {

struct ExperimentConfig {
    static constexpr int kSchemaVersion = 1;

    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string output = "report.jsonl";
    std::vector<std::string> checks;
    double k_sigma = 3.0;
    double degenerate_ceiling = 1e-3;
    DensitySpec density;
    std::map<std::string, ParticleBox> boxes;
    Json settings = Json::object(); ///< per-check tables, keyed by check id
    Json source = Json::object();   ///< the parsed file, for hashing

    /// Settings table of one check (empty object when absent).
    const Json& check_settings(const std::string& check) const;
    /// Single-particle Delta box by name; throws ConfigError if unknown.
    const ParticleBox& box(const std::string& name) const;
    /// FNV-1a of the canonical JSON dump of the effective configuration.
    std::string hash() const;
};

/// Builds and validates a configuration. Throws ConfigError.
ExperimentConfig parse_experiment(const Json& root);
ExperimentConfig load_experiment(const std::string& path);

struct CheckReport {
    std::string id;    ///< unique case id, "<check>/<case>"
    std::string check; ///< registry id
    double lhs = 0.0;
    double lhs_err = 0.0;
    double rhs = 0.0;
    double rhs_err = 0.0;
    double z = 0.0;
    bool deterministic = false;
    double tolerance = 0.0; ///< absolute tolerance for deterministic cases
    double k_sigma = 3.0;
    double degenerate_rate = 0.0;
    double degenerate_ceiling = 1e-3;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
    Json details = Json::object();
    bool pass = false;
    double runtime_seconds = 0.0; ///< shown in the table, never serialized
};

/// Fills z and pass from the estimates and thresholds.
void finalize(CheckReport& r);

Json to_json(const CheckReport& r);
CheckReport report_from_json(const Json& j);

/// One JSON object per line, keys sorted, no runtime fields.
void write_report_line(std::ostream& out, const CheckReport& r);
std::vector<CheckReport> read_reports(std::istream& in);

void print_table(std::ostream& out, std::span<const CheckReport> reports, bool with_runtime);

/// Check ids in their canonical order.
const std::vector<std::string>& known_checks();
bool is_known_check(const std::string& id);

/// Seed of one check, derived from the run seed and the check id.
std::uint64_t check_seed(std::uint64_t seed, const std::string& check);

/// Runs one registered check. Throws ConfigError for unknown ids.
std::vector<CheckReport> run_check(const std::string& check, const ExperimentConfig& cfg);

/// Runs the selected checks in order, streaming JSON lines to `jsonl` (if
/// given). Returns every report.
std::vector<CheckReport> run_all(const ExperimentConfig& cfg, std::ostream* jsonl);

} // namespace bbgky
