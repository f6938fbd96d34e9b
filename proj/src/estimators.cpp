#include "cwvote/estimators.hpp"

#include "cwvote/curie_weiss.hpp"
#include "cwvote/errors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cwvote {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// beta -> E_beta S^2 for one N, with the log binomials tabulated once so that
// root finding costs O(N) exp() calls per evaluation.
class SecondMomentCurve {
public:
    explicit SecondMomentCurve(std::int64_t n) : n_(n) {
        const double nd = static_cast<double>(n);
        const double log_n_fact = std::lgamma(nd + 1.0);
        // s = N - 2j for j = 0..floor(N/2); s >= 0.
        for (std::int64_t j = 0; 2 * j <= n; ++j) {
            const double jd = static_cast<double>(j);
            const double s = static_cast<double>(n - 2 * j);
            double lb = log_n_fact - std::lgamma(jd + 1.0) - std::lgamma(nd - jd + 1.0);
            if (s > 0.0) lb += std::log(2.0);
            s2_.push_back(s * s);
            log_mult_.push_back(lb);
        }
    }

    double operator()(double beta) const {
        const double scale = beta / (2.0 * static_cast<double>(n_));
        double top = -kInf;
        for (std::size_t i = 0; i < s2_.size(); ++i) {
            top = std::max(top, log_mult_[i] + scale * s2_[i]);
        }
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < s2_.size(); ++i) {
            const double w = std::exp(log_mult_[i] + scale * s2_[i] - top);
            num += w * s2_[i];
            den += w;
        }
        return num / den;
    }

private:
    std::int64_t n_;
    std::vector<double> s2_;
    std::vector<double> log_mult_;
};

double min_range_s2(std::int64_t n) { return (n % 2 == 0) ? 0.0 : 1.0; }

} // namespace

std::string to_string(EstimateKind kind) {
    switch (kind) {
    case EstimateKind::HighTemp: return "high";
    case EstimateKind::LowTemp: return "low";
    case EstimateKind::Inconclusive: return "u";
    }
    return "?";
}

bool Estimate::atypical() const noexcept {
    return conclusive() && (value < 0.0 || std::isinf(value));
}

std::vector<double> statistic_T(const VotingSample& sample) {
    const std::size_t n = sample.observations();
    if (n == 0) throw std::invalid_argument("statistic_T: empty sample");
    std::vector<double> t(sample.groups(), 0.0);
    for (std::size_t g = 0; g < sample.groups(); ++g) {
        const auto size = static_cast<std::uint64_t>(sample.group_sizes()[g]);
        // Integer accumulation keeps T independent of the observation order.
        const bool exact = size <= (1ULL << 31) &&
                           static_cast<double>(n) * static_cast<double>(size * size) < 9.0e18;
        if (exact) {
            std::uint64_t acc = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto s = static_cast<std::uint64_t>(std::llabs(sample.margin(i, g)));
                acc += s * s;
            }
            t[g] = static_cast<double>(acc) / static_cast<double>(n);
        } else {
            long double acc = 0.0L;
            for (std::size_t i = 0; i < n; ++i) {
                const auto s = static_cast<long double>(sample.margin(i, g));
                acc += s * s;
            }
            t[g] = static_cast<double>(acc / static_cast<long double>(n));
        }
    }
    return t;
}

Estimate estimate_beta_inf(double t, const RegimeIntervals& intervals) {
    if (std::isnan(t) || t < 0.0) throw std::invalid_argument("statistic must be >= 0");
    const double n = static_cast<double>(intervals.group_size);
    if (t > n * n) throw OutOfRange("statistic exceeds N^2");

    switch (intervals.statistic_regime(t)) {
    case RegimeLabel::HighTemp:
        return {EstimateKind::HighTemp, (t == 0.0) ? -kInf : 1.0 - n / t};
    case RegimeLabel::LowTemp:
        return {EstimateKind::LowTemp, (t >= n * n) ? kInf : m_inverse(std::sqrt(t) / n)};
    case RegimeLabel::Critical: break;
    }
    return {EstimateKind::Inconclusive, kNaN};
}

double exact_mle(double t, std::int64_t group_size) {
    if (group_size < 1) throw std::invalid_argument("group size must be >= 1");
    if (std::isnan(t)) throw std::invalid_argument("statistic is NaN");
    const double nd = static_cast<double>(group_size);
    const double lo_t = min_range_s2(group_size);
    const double hi_t = nd * nd;
    if (t < lo_t || t > hi_t) throw OutOfRange("statistic outside the hull of Range(S^2)");
    if (group_size == 1) throw OutOfDomain("S^2 is constant for N = 1; beta is not identifiable");
    if (t == lo_t) return -kInf;
    if (t == hi_t) return kInf;

    const SecondMomentCurve curve(group_size);
    double lo = -50.0;
    double hi = 50.0;
    // The curve is increasing; widen until it brackets t. Past |beta| ~ 1e12
    // the moment is within rounding of its limit, so report the limit.
    while (curve(lo) > t) {
        if (lo < -1e12) return -kInf;
        lo *= 2.0;
    }
    while (curve(hi) < t) {
        if (hi > 1e12) return kInf;
        hi *= 2.0;
    }
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= 1e-12 + 1e-14 * std::abs(mid) || mid == lo || mid == hi) break;
        if (curve(mid) < t) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double pseudo_true_beta(double beta_true, const RegimeIntervals& intervals) {
    if (!std::isfinite(beta_true) || beta_true < 0.0) {
        throw OutOfDomain("pseudo-true coupling needs a finite beta >= 0");
    }
    const double n = static_cast<double>(intervals.group_size);
    const double es2 = exact_moment(beta_true, intervals.group_size, 2);
    switch (intervals.coupling_regime(beta_true)) {
    case RegimeLabel::HighTemp: return 1.0 - n / es2;
    case RegimeLabel::LowTemp: return m_inverse(std::sqrt(es2) / n);
    case RegimeLabel::Critical: break;
    }
    throw OutOfDomain("pseudo-true coupling undefined for beta in the critical interval");
}

std::optional<double> estimate_weight(double t, const RegimeIntervals& intervals) {
    const Estimate e = estimate_beta_inf(t, intervals);
    if (!e.conclusive()) return std::nullopt;
    const double n = static_cast<double>(intervals.group_size);
    if (e.kind == EstimateKind::HighTemp) {
        if (e.value == -kInf) return 0.0;
        return std::sqrt(2.0 / M_PI) * std::sqrt(n / (1.0 - e.value));
    }
    if (e.value == kInf) return n;
    return m_of_beta(e.value) * n;
}

double pseudo_true_weight(double beta_true, std::int64_t group_size) {
    return exact_abs_moment(beta_true, group_size);
}

} // namespace cwvote
