#pragma once

// Cumulant generating functions and entropy functions (Legendre transforms)
// of finite-support laws, the closed-form rate functions of S/N and (S/N)^2,
// exponential misidentification bounds, asymptotic-normality confidence
// intervals, the sample-size planner, and the contracted rate functions of
// the coupling and weight estimators.

#include "cwvote/estimators.hpp"
#include "cwvote/model.hpp"
#include "cwvote/regimes.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cwvote {

// Law with finitely many atoms, held as sorted (value, log-probability) pairs.
// Atoms of probability zero are dropped, so min()/max() are the support hull.
class FiniteLaw {
public:
    FiniteLaw(std::vector<double> values, std::vector<double> log_probabilities);

    static FiniteLaw rademacher();
    // Law of S^2 (scale = 1) or of (S/N)^2 (scale = 1/N^2).
    static FiniteLaw of_square(const MagnetizationDistribution& law, double scale = 1.0);

    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> log_probabilities() const noexcept { return log_probs_; }
    double min() const noexcept { return values_.front(); }
    double max() const noexcept { return values_.back(); }
    double mean() const noexcept { return mean_; }
    bool degenerate() const noexcept { return values_.size() == 1; }

    // Lambda(t) = ln E exp(t Y).
    double cumulant(double t) const;
    // Lambda'(t), the mean of the exponentially tilted law.
    double cumulant_derivative(double t) const;
    // Lambda*(x) = sup_t { x t - Lambda(t) }; +inf outside the hull and
    // -ln P(endpoint) at the hull endpoints.
    double legendre(double x) const;
    // Maximizing t of the Legendre transform (0 at the mean); nullopt at or
    // outside the hull endpoints where the supremum is not attained.
    std::optional<double> legendre_argmax(double x) const;

private:
    double tilted_excess(double t, double x) const;

    std::vector<double> values_;
    std::vector<double> log_probs_;
    double mean_ = 0.0;
};

double cumulant(const FiniteLaw& law, double t);
double legendre(const FiniteLaw& law, double x);

// Entropy function of the fair +-1 law.
double rademacher_entropy(double x);

// Rate function of S/N under coupling beta >= 0; zero at +-m(beta).
double rate_I(double beta, double x);
// Rate function of (S/N)^2: rate_I(beta, sqrt(y)) on [0, 1].
double rate_J(double beta, double y);

// ============================================================================
// MISIDENTIFICATION BOUNDS
// ============================================================================

struct MisidBound {
    RegimeLabel true_regime = RegimeLabel::HighTemp;
    // inf over the opposite J interval of Lambda*_{S^2}.
    double eta = 0.0;
    // Endpoint of the opposite J interval nearest the mean.
    double target = 0.0;
    double mean_s2 = 0.0;

    // P{T lands in the opposite J interval} <= exp(-eta n).
    double probability_bound(std::size_t n) const;
};

// Bound for a single group with true coupling beta. Throws OutOfDomain for
// beta in I_c and DegenerateBound if the opposite interval reaches the mean.
MisidBound misid_bounds(const RegimeIntervals& intervals, double beta);

// theta = min{Lambda*(N), Lambda*(N^2)}: P{estimate negative or infinite}
// <= 2 exp(-theta n). Requires beta > 0; DegenerateBound otherwise.
double sign_error_theta(double beta, std::int64_t group_size);

struct AggregatedMisid {
    std::optional<double> eta2;  // min over groups with beta in I_h
    std::optional<double> eta3;  // min over groups with beta in I_l
};

AggregatedMisid aggregate_misid(std::span<const MisidBound> per_group);

// ============================================================================
// CONFIDENCE INTERVALS
// ============================================================================

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    double standard_error = 0.0;
    // Plug-in asymptotic variance of sqrt(n) (estimate - beta~).
    double variance = 0.0;
    // N -> inf limit of that variance: 2 (1 - beta)^2 (high) or 0 (low).
    double limiting_variance = 0.0;
};

// Delta-method variance of the large-N estimator evaluated at the model
// whose exact second moment equals the one implied by the estimate.
double estimator_variance(const Estimate& estimate, std::int64_t group_size);

// Throws InconclusiveEstimate for "u" and OutOfDomain for infinite estimates.
ConfidenceInterval confidence_interval(const Estimate& estimate, std::size_t n,
                                       std::int64_t group_size, double level);

// ============================================================================
// SAMPLE-SIZE PLANNING
// ============================================================================

struct SamplePlan {
    std::size_t n = 1;
    // Worst-case rates, evaluated at the boundary couplings b1 and b2.
    double eta_high = 0.0;
    double eta_low = 0.0;
    double bound = 1.0;
};

// Smallest n with max(exp(-eta_high n), exp(-eta_low n)) < epsilon.
SamplePlan plan_sample_size(const RegimeIntervals& intervals, double epsilon);

// ============================================================================
// RATE FUNCTIONS OF THE ESTIMATORS
// ============================================================================

// Whether b can be produced by the large-N estimator for these intervals.
bool in_estimator_codomain(double b, const RegimeIntervals& intervals);

// J(b) = Lambda*_{(S/N)^2}(theta(b)) under the true coupling; minimized at
// beta~. Throws OutOfDomain outside the estimator's codomain.
double estimator_rate(double beta, const RegimeIntervals& intervals, double b);

// Sum of the per-group rates.
double estimator_rate(std::span<const double> betas, std::span<const RegimeIntervals> intervals,
                      std::span<const double> bs);

// H(z) = inf{J(b) : psi(b) = z}; +inf where z is not attained by psi.
double weight_rate(double beta, const RegimeIntervals& intervals, double z);

struct RateProfile {
    std::string name;
    // The rate is +inf outside [domain_lower, domain_upper].
    double domain_lower = 0.0;
    double domain_upper = 0.0;
    std::vector<double> minimizers;
    double minimum = 0.0;
    std::function<double(double)> evaluate;

    std::vector<std::pair<double, double>> tabulate(std::span<const double> xs) const;
};

RateProfile rate_I_profile(double beta);
RateProfile rate_J_profile(double beta);
RateProfile estimator_rate_profile(double beta, const RegimeIntervals& intervals);
RateProfile weight_rate_profile(double beta, const RegimeIntervals& intervals);

// "x,rate" CSV; infinite rates are written as "inf".
void write_rate_csv(std::ostream& out, const RateProfile& profile, std::span<const double> xs);

} // namespace cwvote
