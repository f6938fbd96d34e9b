#pragma once

// Council votes of the groups, the democracy deficit E[(S_bar - sum w chi)^2]
// and the weights that minimize it.

#include "cwvote/model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cwvote {

// chi = 1 if S > 0, -1 otherwise (ties vote no).
std::vector<int> council_votes(std::span<const std::int64_t> margins);

struct CouncilOutcome {
    std::vector<int> chi;
    double weighted_vote = 0.0;
    double popular_margin = 0.0;
};

CouncilOutcome council_outcome(std::span<const std::int64_t> margins, std::span<const double> weights);

enum class WeightProvenance { Exact, Asymptotic, Estimated, DeficitMinimizing, Proportional, SquareRoot, Equal };

std::string to_string(WeightProvenance p);

struct WeightVector {
    std::vector<double> w;
    WeightProvenance provenance = WeightProvenance::Exact;

    std::size_t size() const noexcept { return w.size(); }
};

// Per-group expectations entering the deficit.
struct GroupMoments {
    double second = 0.0;    // E S^2
    double abs_first = 0.0; // E|S|
    double chi_mean = 0.0;  // E chi = -P(S = 0)
};

std::vector<GroupMoments> group_moments(const ModelSpec& spec);

double democracy_deficit(const ModelSpec& spec, std::span<const double> w);
double democracy_deficit(const ModelSpec& spec, const WeightVector& w);

// E|S| per group. Requires every coupling >= 0.
WeightVector optimal_weights_exact(const ModelSpec& spec);

// Minimizer of the exact quadratic deficit: A w = E|S| with A_ll = 1 and
// A_lm = E chi_l E chi_m. Coincides with E|S| when every N is odd.
WeightVector deficit_minimizing_weights(const ModelSpec& spec);

// psi_inf per group; rejects beta = 1 and beta < 0.
WeightVector optimal_weights_asymptotic(const ModelSpec& spec);

enum class BaselineKind { Proportional, SquareRoot, Equal };

std::string to_string(BaselineKind kind);
BaselineKind parse_baseline_kind(const std::string& name);

// N, sqrt(N) or 1 per group, scaled to the total of the exact weights.
WeightVector baseline_weights(const ModelSpec& spec, BaselineKind kind);

struct WeightReportRow {
    std::size_t group = 0;
    std::int64_t group_size = 0;
    double beta = 0.0;
    double w_exact = 0.0;
    std::optional<double> w_asymptotic;
    double w_deficit_minimizing = 0.0;
    double w_proportional = 0.0;
    double w_square_root = 0.0;
    double w_equal = 0.0;
};

struct WeightReport {
    std::vector<WeightReportRow> rows;
    double deficit_exact = 0.0;
    std::optional<double> deficit_asymptotic;
    double deficit_minimizing = 0.0;
    double deficit_proportional = 0.0;
    double deficit_square_root = 0.0;
    double deficit_equal = 0.0;
};

WeightReport weight_report(const ModelSpec& spec);

} // namespace cwvote
