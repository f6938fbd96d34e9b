#pragma once

// Monte Carlo study harness: simulate many samples, estimate, and compare
// the empirical behaviour of the estimator with its predicted limits.

#include "cwvote/estimators.hpp"
#include "cwvote/model.hpp"
#include "cwvote/regimes.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cwvote {

enum class StudyTarget { Consistency, Coverage, Misid, Clt, Tails };

std::string to_string(StudyTarget target);
StudyTarget parse_study_target(const std::string& name);

struct StudyConfig {
    ModelSpec spec;
    std::size_t replications = 1000;
    std::vector<std::size_t> sample_sizes;
    std::uint64_t seed = 1;
    // Empty means every target.
    std::set<StudyTarget> targets;
    double b1 = kDefaultB1;
    double b2 = kDefaultB2;
    // Unset entries fall back to default_constants().
    ErrorConstants constants;
    double level = 0.95;
    double coverage_tolerance = 0.02;
    double variance_tolerance_high = 0.10;
    double variance_tolerance_low = 0.15;
    // Tail event: estimate >= beta~ + tail_delta.
    double tail_delta = 0.1;
    unsigned threads = 0;

    void validate() const;
    bool wants(StudyTarget t) const { return targets.empty() || targets.count(t) > 0; }
};

struct StudyCheck {
    StudyTarget target = StudyTarget::Consistency;
    std::string name;
    bool passed = false;
    double observed = 0.0;
    double reference = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct StudyCell {
    std::size_t group = 0;
    std::int64_t group_size = 0;
    double beta = 0.0;
    std::size_t n = 0;
    RegimeIntervals intervals;
    RegimeLabel true_regime = RegimeLabel::HighTemp;
    std::optional<double> beta_tilde;

    std::size_t count_high = 0;
    std::size_t count_low = 0;
    std::size_t count_inconclusive = 0;
    std::size_t count_atypical = 0;

    // Over conclusive, finite estimates.
    double mean = 0.0;
    double median = 0.0;
    double iqr = 0.0;
    double median_abs_deviation = 0.0; // median of |estimate - beta~|
    double scaled_variance = 0.0;      // n * sample variance
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    std::optional<double> predicted_scaled_variance;
    std::optional<double> coverage;
    std::optional<double> misid_frequency;
    std::optional<double> misid_bound;
    std::optional<double> tail_frequency;
    std::optional<double> tail_bound;

    std::vector<double> statistics;  // T per replication
    std::vector<Estimate> estimates; // per replication
    std::vector<StudyCheck> checks;
};

struct StudyReport {
    StudyConfig config;
    std::vector<StudyCell> cells;

    bool all_passed() const;
};

StudyReport run_study(const StudyConfig& config);

nlohmann::json to_json(const StudyReport& report);

// One row per replication: replication,group,n,T,kind,estimate.
void write_trace_csv(std::ostream& out, const StudyReport& report);

} // namespace cwvote
