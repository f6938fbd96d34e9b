#pragma once

// Estimation of the couplings from a sample of group margins.
//
// T_lambda = mean of S_lambda^2 over the observations is sufficient for beta.
// The large-N estimator inverts the asymptotic second moment: 1 - N/T when T
// falls in J_h, m^{-1}(sqrt(T)/N) when T falls in J_l, inconclusive in J_c.
// The exact MLE inverts beta -> E S^2 itself.

#include "cwvote/model.hpp"
#include "cwvote/regimes.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cwvote {

enum class EstimateKind { HighTemp, LowTemp, Inconclusive };

std::string to_string(EstimateKind kind);

struct Estimate {
    EstimateKind kind = EstimateKind::Inconclusive;
    // Extended real; NaN when inconclusive.
    double value = 0.0;

    bool conclusive() const noexcept { return kind != EstimateKind::Inconclusive; }
    // Negative or infinite values: legitimate but exponentially rare.
    bool atypical() const noexcept;
};

std::vector<double> statistic_T(const VotingSample& sample);

Estimate estimate_beta_inf(double t, const RegimeIntervals& intervals);

// Unique beta with E_beta S^2 = t; -inf at min Range(S^2), +inf at N^2.
// Throws OutOfRange outside [min Range(S^2), N^2] and OutOfDomain for N = 1,
// where S^2 carries no information about beta.
double exact_mle(double t, std::int64_t group_size);

// beta~ matching the exact second moment through the asymptotic formula of
// the true coupling's regime. Throws OutOfDomain for beta_true in I_c or
// outside [0, inf).
double pseudo_true_beta(double beta_true, const RegimeIntervals& intervals);

// psi_inf applied to the large-N estimate; nullopt when inconclusive.
std::optional<double> estimate_weight(double t, const RegimeIntervals& intervals);

// E|S| under the true coupling.
double pseudo_true_weight(double beta_true, std::int64_t group_size);

} // namespace cwvote
