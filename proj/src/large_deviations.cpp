#include "cwvote/large_deviations.hpp"

#include "cwvote/curie_weiss.hpp"
#include "cwvote/errors.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace cwvote {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log_sum_exp(std::span<const double> xs) {
    double top = -kInf;
    for (double x : xs) top = std::max(top, x);
    if (top == -kInf) return -kInf;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - top);
    return top + std::log(acc);
}

double min_range_s2(std::int64_t n) { return (n % 2 == 0) ? 0.0 : 1.0; }

} // namespace

//==============================================================================
// FiniteLaw
//==============================================================================

FiniteLaw::FiniteLaw(std::vector<double> values, std::vector<double> log_probabilities) {
    if (values.size() != log_probabilities.size() || values.empty()) {
        throw std::invalid_argument("finite law needs matching, non-empty value/probability lists");
    }
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });

    for (auto i : order) {
        const double v = values[i];
        const double lp = log_probabilities[i];
        if (!std::isfinite(v) || std::isnan(lp)) {
            throw std::invalid_argument("finite law has a non-finite atom");
        }
        if (lp == -kInf) continue;
        if (!values_.empty() && values_.back() == v) {
            const double hi = std::max(log_probs_.back(), lp);
            log_probs_.back() = hi + std::log(std::exp(log_probs_.back() - hi) + std::exp(lp - hi));
        } else {
            values_.push_back(v);
            log_probs_.push_back(lp);
        }
    }
    if (values_.empty()) throw std::invalid_argument("finite law has no mass");

    const double total = log_sum_exp(log_probs_);
    for (double& lp : log_probs_) lp -= total;
    mean_ = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) mean_ += std::exp(log_probs_[i]) * values_[i];
    mean_ = std::clamp(mean_, values_.front(), values_.back());
}

FiniteLaw FiniteLaw::rademacher() {
    return FiniteLaw({-1.0, 1.0}, {std::log(0.5), std::log(0.5)});
}

FiniteLaw FiniteLaw::of_square(const MagnetizationDistribution& law, double scale) {
    std::vector<double> values;
    std::vector<double> log_probs;
    const std::size_t points = law.support_size();
    for (std::size_t j = points / 2; j < points; ++j) {
        const double s = static_cast<double>(law.value(j));
        double lp = law.log_weight(j) - law.log_partition();
        if (s > 0.0) lp += std::log(2.0);
        values.push_back(s * s * scale);
        log_probs.push_back(lp);
    }
    return FiniteLaw(std::move(values), std::move(log_probs));
}

double FiniteLaw::cumulant(double t) const {
    if (std::isnan(t)) throw std::invalid_argument("cumulant at NaN");
    if (t == 0.0) return 0.0;
    std::vector<double> terms(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) terms[i] = log_probs_[i] + t * values_[i];
    return log_sum_exp(terms);
}

// Lambda'(t) - x, evaluated with weights shifted by x so large t stays finite.
double FiniteLaw::tilted_excess(double t, double x) const {
    double top = -kInf;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        top = std::max(top, log_probs_[i] + t * (values_[i] - x));
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double w = std::exp(log_probs_[i] + t * (values_[i] - x) - top);
        num += w * (values_[i] - x);
        den += w;
    }
    return num / den;
}

double FiniteLaw::cumulant_derivative(double t) const {
    if (std::isnan(t)) throw std::invalid_argument("cumulant derivative at NaN");
    return tilted_excess(t, 0.0);
}

std::optional<double> FiniteLaw::legendre_argmax(double x) const {
    if (std::isnan(x)) throw std::invalid_argument("Legendre transform at NaN");
    if (degenerate() || x <= min() || x >= max()) return std::nullopt;
    if (x == mean_) return 0.0;

    const double dir = (x > mean_) ? 1.0 : -1.0;
    // Lambda'(0) - x has sign -dir; find the far end where the sign flips.
    double near = 0.0;
    double far = dir / (max() - min());
    while (dir * tilted_excess(far, x) < 0.0) {
        near = far;
        far *= 2.0;
        if (!std::isfinite(far)) return std::nullopt;
    }
    const double tol = 1e-12 * (max() - min());
    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (near + far);
        if (mid == near || mid == far) break;
        const double g = tilted_excess(mid, x);
        if (std::abs(g) <= tol) return mid;
        if (dir * g < 0.0) {
            near = mid;
        } else {
            far = mid;
        }
    }
    return 0.5 * (near + far);
}

double FiniteLaw::legendre(double x) const {
    if (std::isnan(x)) throw std::invalid_argument("Legendre transform at NaN");
    if (x < min() || x > max()) return kInf;
    if (degenerate()) return 0.0;
    if (x == min()) return -log_probs_.front();
    if (x == max()) return -log_probs_.back();
    const auto t = legendre_argmax(x);
    if (!t) return kInf;
    // x t - Lambda(t) = -ln E exp(t (Y - x)); no cancellation for large t.
    std::vector<double> terms(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) {
        terms[i] = log_probs_[i] + *t * (values_[i] - x);
    }
    return std::max(0.0, -log_sum_exp(terms));
}

double cumulant(const FiniteLaw& law, double t) { return law.cumulant(t); }
double legendre(const FiniteLaw& law, double x) { return law.legendre(x); }

//==============================================================================
// Closed-form rate functions
//==============================================================================

double rademacher_entropy(double x) {
    if (std::isnan(x)) throw std::invalid_argument("entropy at NaN");
    const double a = std::abs(x);
    if (a > 1.0) return kInf;
    if (a == 1.0) return std::log(2.0);
    return 0.5 * (1.0 - a) * std::log1p(-a) + 0.5 * (1.0 + a) * std::log1p(a);
}

namespace {

double rate_I_unshifted(double beta, double x) {
    return -0.5 * beta * x * x + rademacher_entropy(x);
}

void require_nonnegative_beta(double beta) {
    if (std::isnan(beta) || beta < 0.0) throw std::invalid_argument("rate function needs beta >= 0");
}

} // namespace

double rate_I(double beta, double x) {
    require_nonnegative_beta(beta);
    if (std::isnan(x)) throw std::invalid_argument("rate_I at NaN");
    if (std::abs(x) > 1.0) return kInf;
    const double psi = rate_I_unshifted(beta, m_of_beta(beta));
    return std::max(0.0, rate_I_unshifted(beta, std::abs(x)) - psi);
}

double rate_J(double beta, double y) {
    require_nonnegative_beta(beta);
    if (std::isnan(y)) throw std::invalid_argument("rate_J at NaN");
    if (y < 0.0 || y > 1.0) return kInf;
    return rate_I(beta, std::sqrt(y));
}

//==============================================================================
// Misidentification
//==============================================================================

double MisidBound::probability_bound(std::size_t n) const {
    return std::exp(-eta * static_cast<double>(n));
}

namespace {

MisidBound misid_from_law(const FiniteLaw& law, const RegimeIntervals& intervals, double beta) {
    MisidBound out;
    out.true_regime = intervals.coupling_regime(beta);
    out.mean_s2 = law.mean();
    switch (out.true_regime) {
    case RegimeLabel::HighTemp:
        out.target = intervals.j_l_lower;
        if (out.target <= out.mean_s2) {
            throw DegenerateBound("J_l reaches the mean of S^2 at this coupling");
        }
        break;
    case RegimeLabel::LowTemp:
        out.target = intervals.j_h_upper;
        if (out.target >= out.mean_s2) {
            throw DegenerateBound("J_h reaches the mean of S^2 at this coupling");
        }
        break;
    case RegimeLabel::Critical:
        throw OutOfDomain("no misidentification bound for a coupling in the critical interval");
    }
    out.eta = law.legendre(out.target);
    return out;
}

} // namespace

MisidBound misid_bounds(const RegimeIntervals& intervals, double beta) {
    if (!std::isfinite(beta)) throw std::invalid_argument("misid_bounds needs a finite coupling");
    const FiniteLaw law = FiniteLaw::of_square(MagnetizationDistribution(beta, intervals.group_size));
    return misid_from_law(law, intervals, beta);
}

double sign_error_theta(double beta, std::int64_t group_size) {
    if (std::isnan(beta) || beta <= 0.0) {
        throw DegenerateBound("theta needs beta > 0: Lambda*(N) vanishes at beta = 0");
    }
    if (group_size < 2) throw DegenerateBound("theta needs N >= 2");
    const FiniteLaw law = FiniteLaw::of_square(MagnetizationDistribution(beta, group_size));
    const double n = static_cast<double>(group_size);
    return std::min(law.legendre(n), law.legendre(n * n));
}

AggregatedMisid aggregate_misid(std::span<const MisidBound> per_group) {
    AggregatedMisid out;
    for (const auto& b : per_group) {
        auto& slot = (b.true_regime == RegimeLabel::HighTemp) ? out.eta2 : out.eta3;
        slot = slot ? std::min(*slot, b.eta) : b.eta;
    }
    return out;
}

//==============================================================================
// Confidence intervals
//==============================================================================

double estimator_variance(const Estimate& estimate, std::int64_t group_size) {
    if (!estimate.conclusive()) throw InconclusiveEstimate("no variance for an inconclusive estimate");
    if (!std::isfinite(estimate.value)) throw OutOfDomain("no variance for an infinite estimate");
    const double n = static_cast<double>(group_size);
    const double b = estimate.value;
    const bool high = estimate.kind == EstimateKind::HighTemp;

    const double m = high ? 0.0 : m_of_beta(b);
    const double implied = std::clamp(high ? n / (1.0 - b) : m * m * n * n,
                                      min_range_s2(group_size), n * n);
    const double model = exact_mle(implied, group_size);
    if (!std::isfinite(model)) throw OutOfDomain("estimate implies a degenerate model");
    const double v = variance_S2(model, group_size);

    if (high) {
        const double d = 1.0 - b;
        return d * d * d * d * v / (n * n);
    }
    const double slope = 2.0 * m * m_prime(b);
    return v / (n * n * n * n) / (slope * slope);
}

ConfidenceInterval confidence_interval(const Estimate& estimate, std::size_t n,
                                       std::int64_t group_size, double level) {
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
    if (n < 2) throw std::invalid_argument("confidence interval needs n >= 2");
    ConfidenceInterval ci;
    ci.variance = estimator_variance(estimate, group_size);
    ci.standard_error = std::sqrt(ci.variance / static_cast<double>(n));
    const boost::math::normal_distribution<> z_law;
    const double z = boost::math::quantile(z_law, 0.5 + 0.5 * level);
    ci.lower = estimate.value - z * ci.standard_error;
    ci.upper = estimate.value + z * ci.standard_error;
    if (estimate.kind == EstimateKind::HighTemp) {
        ci.limiting_variance = 2.0 * (1.0 - estimate.value) * (1.0 - estimate.value);
    }
    return ci;
}

//==============================================================================
// Sample-size planning
//==============================================================================

SamplePlan plan_sample_size(const RegimeIntervals& intervals, double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
    // Recheck separation: intervals may have been assembled by hand.
    if (!(intervals.j_h_upper < intervals.j_l_lower)) {
        throw SeparationViolated("J_h and J_l overlap");
    }
    SamplePlan plan;
    plan.eta_high = misid_bounds(intervals, intervals.b1).eta;
    plan.eta_low = misid_bounds(intervals, intervals.b2).eta;
    const double eta = std::min(plan.eta_high, plan.eta_low);
    if (eta <= 0.0) throw DegenerateBound("worst-case misidentification rate is zero");

    auto bound = [&](std::size_t n) {
        return std::max(std::exp(-plan.eta_high * static_cast<double>(n)),
                        std::exp(-plan.eta_low * static_cast<double>(n)));
    };
    std::size_t n = 1;
    if (std::isfinite(eta)) {
        const double q = std::log(1.0 / epsilon) / eta;
        n = static_cast<std::size_t>(std::max(0.0, std::floor(q))) + 1;
        while (n > 1 && bound(n - 1) < epsilon) --n;
        while (!(bound(n) < epsilon) && epsilon < 1.0) ++n;
    }
    plan.n = n;
    plan.bound = bound(n);
    return plan;
}

//==============================================================================
// Estimator and weight rates
//==============================================================================

bool in_estimator_codomain(double b, const RegimeIntervals& intervals) {
    if (std::isnan(b)) return false;
    if (std::isinf(b)) return true;
    const double n = static_cast<double>(intervals.group_size);
    if (b <= 1.0 - n / intervals.j_h_upper) return true;
    const double y = std::sqrt(intervals.j_l_lower) / n;
    if (y >= 1.0) return false;
    if (y <= 0.0) return b > 1.0;
    return b >= m_inverse(y);
}

namespace {

// Value of N^2 theta(b) on the branch b belongs to.
double link_statistic(double b, const RegimeIntervals& intervals) {
    const double n = static_cast<double>(intervals.group_size);
    if (b == -kInf) return 0.0;
    if (b == kInf) return n * n;
    if (b < 1.0) return n / (1.0 - b);
    const double m = m_of_beta(b);
    return m * m * n * n;
}

double estimator_rate_from_law(const FiniteLaw& law, const RegimeIntervals& intervals, double b) {
    if (!in_estimator_codomain(b, intervals)) {
        throw OutOfDomain("b lies outside the estimator's codomain");
    }
    return law.legendre(link_statistic(b, intervals));
}

double weight_rate_from_law(const FiniteLaw& law, const RegimeIntervals& intervals, double z) {
    if (std::isnan(z)) throw std::invalid_argument("weight_rate at NaN");
    const double n = static_cast<double>(intervals.group_size);
    if (z < 0.0 || z > n) return kInf;
    if (z == 0.0) return estimator_rate_from_law(law, intervals, -kInf);
    if (z <= std::sqrt(2.0 * intervals.j_h_upper / M_PI)) {
        return estimator_rate_from_law(law, intervals, 1.0 - 2.0 * n / (M_PI * z * z));
    }
    if (z * z >= intervals.j_l_lower) {
        const double b = (z == n) ? kInf : m_inverse(z / n);
        return estimator_rate_from_law(law, intervals, b);
    }
    return kInf;
}

FiniteLaw square_law(double beta, std::int64_t n) {
    if (!std::isfinite(beta)) throw std::invalid_argument("rate needs a finite coupling");
    return FiniteLaw::of_square(MagnetizationDistribution(beta, n));
}

} // namespace

double estimator_rate(double beta, const RegimeIntervals& intervals, double b) {
    return estimator_rate_from_law(square_law(beta, intervals.group_size), intervals, b);
}

double estimator_rate(std::span<const double> betas, std::span<const RegimeIntervals> intervals,
                      std::span<const double> bs) {
    if (betas.size() != intervals.size() || betas.size() != bs.size()) {
        throw std::invalid_argument("estimator_rate: per-group lists differ in length");
    }
    double total = 0.0;
    for (std::size_t g = 0; g < betas.size(); ++g) total += estimator_rate(betas[g], intervals[g], bs[g]);
    return total;
}

double weight_rate(double beta, const RegimeIntervals& intervals, double z) {
    return weight_rate_from_law(square_law(beta, intervals.group_size), intervals, z);
}

//==============================================================================
// Profiles
//==============================================================================

std::vector<std::pair<double, double>> RateProfile::tabulate(std::span<const double> xs) const {
    std::vector<std::pair<double, double>> out;
    out.reserve(xs.size());
    for (double x : xs) {
        try {
            out.emplace_back(x, evaluate(x));
        } catch (const OutOfDomain&) {
            // Gap between the branches: not part of the profile.
        }
    }
    return out;
}

RateProfile rate_I_profile(double beta) {
    require_nonnegative_beta(beta);
    const double m = m_of_beta(beta);
    RateProfile p;
    p.name = "I";
    p.domain_lower = -1.0;
    p.domain_upper = 1.0;
    p.minimizers = (m > 0.0) ? std::vector<double>{-m, m} : std::vector<double>{0.0};
    p.evaluate = [beta](double x) { return rate_I(beta, x); };
    return p;
}

RateProfile rate_J_profile(double beta) {
    require_nonnegative_beta(beta);
    const double m = m_of_beta(beta);
    RateProfile p;
    p.name = "J_beta";
    p.domain_lower = 0.0;
    p.domain_upper = 1.0;
    p.minimizers = {m * m};
    p.evaluate = [beta](double y) { return rate_J(beta, y); };
    return p;
}

RateProfile estimator_rate_profile(double beta, const RegimeIntervals& intervals) {
    auto law = std::make_shared<const FiniteLaw>(square_law(beta, intervals.group_size));
    RateProfile p;
    p.name = "J";
    p.domain_lower = -kInf;
    p.domain_upper = kInf;
    p.minimizers = {pseudo_true_beta(beta, intervals)};
    p.evaluate = [law, intervals](double b) { return estimator_rate_from_law(*law, intervals, b); };
    return p;
}

RateProfile weight_rate_profile(double beta, const RegimeIntervals& intervals) {
    auto law = std::make_shared<const FiniteLaw>(square_law(beta, intervals.group_size));
    const double es2 = law->mean();
    RateProfile p;
    p.name = "H";
    p.domain_lower = 0.0;
    p.domain_upper = static_cast<double>(intervals.group_size);
    const bool high = intervals.coupling_regime(beta) == RegimeLabel::HighTemp;
    pseudo_true_beta(beta, intervals); // rejects the critical interval
    p.minimizers = {high ? std::sqrt(2.0 * es2 / M_PI) : std::sqrt(es2)};
    p.evaluate = [law, intervals](double z) { return weight_rate_from_law(*law, intervals, z); };
    return p;
}

void write_rate_csv(std::ostream& out, const RateProfile& profile, std::span<const double> xs) {
    out << "x,rate\n";
    out.precision(17);
    for (const auto& [x, r] : profile.tabulate(xs)) {
        out << x << ',';
        if (std::isinf(r)) {
            out << "inf";
        } else {
            out << r;
        }
        out << '\n';
    }
}

} // namespace cwvote
