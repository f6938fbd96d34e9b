#pragma once

// Run configuration shared by all commands: a JSON file (--config) merged
// with command-line flags, flags taking precedence.

#include "cwvote/regimes.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cwvote::cli {

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
    std::vector<std::int64_t> group_sizes;
    std::vector<double> couplings;
    std::optional<std::size_t> n;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> input;
    std::optional<std::string> input_format;
    std::optional<std::string> out;
    std::optional<double> b1;
    std::optional<double> b2;
    std::optional<double> d_high;
    std::optional<double> d_low;
    std::optional<double> epsilon;
    std::optional<double> level;
    std::optional<bool> exact_mle;
    std::optional<bool> raw_spins;
    // verify / study
    std::optional<std::size_t> replications;
    std::vector<std::size_t> sample_sizes;
    std::vector<std::string> targets;
    std::optional<double> tail_delta;
    std::optional<unsigned> threads;
    // calibrate
    std::vector<double> calibration_betas;
    std::optional<std::int64_t> n_max;
    std::optional<double> safety_factor;
};

// Strict: unknown keys and wrong types raise InputError.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

// Fields set in `over` replace those in `base`.
RunConfig merge(RunConfig base, const RunConfig& over);

struct ResolvedConstants {
    double d_high = 0.0;
    double d_low = 0.0;
    std::string source_high;
    std::string source_low;
};

// Flags/config, then the file named by CW_CONSTANTS, then the built-in defaults.
ResolvedConstants resolve_constants(const RunConfig& config, const char* env_path);

// {"schema_version": 1, "d_high": ..., "d_low": ...} plus optional provenance.
ErrorConstants load_constants_file(const std::string& path);
nlohmann::json constants_json(const CalibrationResult& result);

} // namespace cwvote::cli
