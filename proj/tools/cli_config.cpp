#include "cli_config.hpp"

#include "cli_io.hpp"

#include <set>

namespace cwvote::cli {

namespace {

using nlohmann::json;

template <class T>
T get_as(const json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InputError("config key '" + key + "' has the wrong type");
    }
}

template <class T>
void read_optional(const json& j, const std::string& key, std::optional<T>& slot) {
    if (j.contains(key)) slot = get_as<T>(j, key);
}

template <class T>
void read_vector(const json& j, const std::string& key, std::vector<T>& slot) {
    if (j.contains(key)) slot = get_as<std::vector<T>>(j, key);
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw InputError(where + ": unknown key '" + key + "'");
    }
}

void check_schema_version(const json& j, const std::string& where) {
    if (j.contains("schema_version") && get_as<int>(j, "schema_version") != kSchemaVersion) {
        throw InputError(where + ": unsupported schema_version");
    }
}

json parse_json_text(const std::string& text, const std::string& where) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(where + ": " + e.what());
    }
}

} // namespace

RunConfig parse_run_config(const json& j) {
    if (!j.is_object()) throw InputError("config must be a JSON object");
    static const std::set<std::string> allowed = {
        "schema_version", "group_sizes", "couplings",   "n",           "seed",         "input",
        "input_format",   "out",         "b1",          "b2",          "d_high",       "d_low",
        "epsilon",        "level",       "exact_mle",   "raw_spins",   "replications", "sample_sizes",
        "targets",        "tail_delta",  "threads",     "calibration_betas",           "n_max",
        "safety_factor"};
    reject_unknown(j, allowed, "config");
    check_schema_version(j, "config");
    RunConfig c;
    read_vector(j, "group_sizes", c.group_sizes);
    read_vector(j, "couplings", c.couplings);
    read_optional(j, "n", c.n);
    read_optional(j, "seed", c.seed);
    read_optional(j, "input", c.input);
    read_optional(j, "input_format", c.input_format);
    read_optional(j, "out", c.out);
    read_optional(j, "b1", c.b1);
    read_optional(j, "b2", c.b2);
    read_optional(j, "d_high", c.d_high);
    read_optional(j, "d_low", c.d_low);
    read_optional(j, "epsilon", c.epsilon);
    read_optional(j, "level", c.level);
    read_optional(j, "exact_mle", c.exact_mle);
    read_optional(j, "raw_spins", c.raw_spins);
    read_optional(j, "replications", c.replications);
    read_vector(j, "sample_sizes", c.sample_sizes);
    read_vector(j, "targets", c.targets);
    read_optional(j, "tail_delta", c.tail_delta);
    read_optional(j, "threads", c.threads);
    read_vector(j, "calibration_betas", c.calibration_betas);
    read_optional(j, "n_max", c.n_max);
    read_optional(j, "safety_factor", c.safety_factor);
    return c;
}

RunConfig load_run_config(const std::string& path) {
    try {
        return parse_run_config(parse_json_text(read_text_file(path), path));
    } catch (const InputError& e) {
        const std::string msg = e.what();
        if (msg.rfind(path, 0) == 0) throw;
        throw InputError(path + ": " + msg);
    }
}

RunConfig merge(RunConfig base, const RunConfig& over) {
    auto take = [](auto& dst, const auto& src) {
        if (src) dst = src;
    };
    auto take_vec = [](auto& dst, const auto& src) {
        if (!src.empty()) dst = src;
    };
    take_vec(base.group_sizes, over.group_sizes);
    take_vec(base.couplings, over.couplings);
    take(base.n, over.n);
    take(base.seed, over.seed);
    take(base.input, over.input);
    take(base.input_format, over.input_format);
    take(base.out, over.out);
    take(base.b1, over.b1);
    take(base.b2, over.b2);
    take(base.d_high, over.d_high);
    take(base.d_low, over.d_low);
    take(base.epsilon, over.epsilon);
    take(base.level, over.level);
    take(base.exact_mle, over.exact_mle);
    take(base.raw_spins, over.raw_spins);
    take(base.replications, over.replications);
    take_vec(base.sample_sizes, over.sample_sizes);
    take_vec(base.targets, over.targets);
    take(base.tail_delta, over.tail_delta);
    take(base.threads, over.threads);
    take_vec(base.calibration_betas, over.calibration_betas);
    take(base.n_max, over.n_max);
    take(base.safety_factor, over.safety_factor);
    return base;
}

ErrorConstants load_constants_file(const std::string& path) {
    const json j = parse_json_text(read_text_file(path), path);
    if (!j.is_object()) throw InputError(path + ": constants file must be a JSON object");
    reject_unknown(j, {"schema_version", "d_high", "d_low", "grid", "worst_high", "worst_low"}, path);
    check_schema_version(j, path);
    ErrorConstants c;
    if (j.contains("d_high") && !j.at("d_high").is_null()) c.d_high = get_as<double>(j, "d_high");
    if (j.contains("d_low") && !j.at("d_low").is_null()) c.d_low = get_as<double>(j, "d_low");
    return c;
}

ResolvedConstants resolve_constants(const RunConfig& config, const char* env_path) {
    const ErrorConstants builtin = default_constants();
    ResolvedConstants r{*builtin.d_high, *builtin.d_low, "default", "default"};
    if (env_path && *env_path) {
        const ErrorConstants env = load_constants_file(env_path);
        const std::string src = std::string("CW_CONSTANTS:") + env_path;
        if (env.d_high) {
            r.d_high = *env.d_high;
            r.source_high = src;
        }
        if (env.d_low) {
            r.d_low = *env.d_low;
            r.source_low = src;
        }
    }
    if (config.d_high) {
        r.d_high = *config.d_high;
        r.source_high = "user";
    }
    if (config.d_low) {
        r.d_low = *config.d_low;
        r.source_low = "user";
    }
    return r;
}

json constants_json(const CalibrationResult& result) {
    return {{"schema_version", kSchemaVersion},
            {"d_high", result.constants.d_high ? json(*result.constants.d_high) : json(nullptr)},
            {"d_low", result.constants.d_low ? json(*result.constants.d_low) : json(nullptr)},
            {"grid",
             {{"betas", result.grid.betas},
              {"n_min", result.grid.n_min},
              {"n_max", result.grid.n_max},
              {"safety_factor", result.grid.safety_factor}}},
            {"worst_high", {{"beta", result.worst_high_beta}, {"N", result.worst_high_n}}},
            {"worst_low", {{"beta", result.worst_low_beta}, {"N", result.worst_low_n}}}};
}

} // namespace cwvote::cli
