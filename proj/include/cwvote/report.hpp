#pragma once

// Per-group estimation report assembled from the statistic T alone.

#include "cwvote/estimators.hpp"
#include "cwvote/large_deviations.hpp"
#include "cwvote/regimes.hpp"

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cwvote {

struct GroupEstimate {
    std::size_t group = 0;
    std::int64_t group_size = 0;
    double t = 0.0;
    RegimeIntervals intervals;
    Estimate estimate;
    std::optional<double> exact_mle;
    std::optional<double> beta_tilde;
    std::optional<ConfidenceInterval> ci;
    std::optional<double> weight;
    // Bound at the plug-in model (exact MLE of T); absent when that model
    // falls in I_c or is degenerate.
    std::optional<MisidBound> misid;
    std::vector<std::string> notes;
};

struct EstimationReport {
    std::size_t n = 0;
    double level = 0.95;
    std::vector<GroupEstimate> groups;
    AggregatedMisid aggregate;

    bool any_inconclusive() const;
};

struct ReportOptions {
    bool include_exact_mle = false;
    double level = 0.95;
    // When given, beta~ is reported per group.
    std::optional<std::vector<double>> true_couplings;
};

EstimationReport make_estimation_report(std::span<const double> t, std::size_t n,
                                        std::span<const RegimeIntervals> intervals,
                                        const ReportOptions& options = {});

// Extended reals as JSON: finite numbers, "inf", "-inf"; NaN as null.
nlohmann::json extended_real_json(double x);

nlohmann::json to_json(const EstimationReport& report);

} // namespace cwvote
