#ifndef LADDER_CONFIG_HPP
#define LADDER_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ladder/increments.hpp"

namespace ladder {

inline constexpr const char* kToolVersion = "laddertool 0.1.0";

/// Model serialization. Field names are part of the config format:
///   finite_lattice:   kind, pmf, k_min, span
///   lattice_pareto:   kind, alpha, p, q, k_tail, span
///   two_sided_pareto: kind, alpha, p, q, centered
std::string model_to_json(const IncrementModel& model);
IncrementModel model_from_json_text(const std::string& text);

struct ExperimentConfig {
    std::string model_json; // canonical model serialization
    std::string task = "series"; // exact | series | mc | verify-all | verify:<id>
    long N = 1024;
    std::vector<long> n_grid = {250, 500, 1000, 2000, 4000};
    uint64_t trials = 1000000;
    std::optional<uint64_t> seed; // mandatory for mc tasks
    uint32_t streams = 8;
    long j_max = 0;
    long x_max = 50;
    std::string out_dir = "out";

    IncrementModel model() const { return model_from_json_text(model_json); }
    void validate() const; // field-level messages
};

std::string config_to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const std::string& text);
uint64_t config_hash(const ExperimentConfig& c);

struct RunManifest {
    std::string config_hash_hex;
    std::string tool_version = kToolVersion;
    uint64_t seed = 0;
    uint32_t streams = 0;
    uint64_t seed_plan_hash = 0;
    std::vector<std::pair<std::string, double>> stage_seconds;
    std::map<std::string, std::string> artifact_digests; // file name -> fnv64 hex

    std::string to_json() const;
};

std::string hex64(uint64_t v);
uint64_t digest_file(const std::string& path);

} // namespace ladder

#endif
