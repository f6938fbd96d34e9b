#include "cwvote/model.hpp"

#include "cwvote/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cwvote {

namespace {

void require_group_size(std::int64_t n) {
    if (n < 1) {
        throw std::invalid_argument("group size must be >= 1, got " + std::to_string(n));
    }
}

void require_finite_beta(double beta) {
    if (!std::isfinite(beta)) {
        throw std::invalid_argument("coupling must be finite");
    }
}

double int_pow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

} // namespace

void ModelSpec::validate() const {
    if (group_sizes.empty()) throw std::invalid_argument("model spec has no groups");
    if (group_sizes.size() != couplings.size()) {
        throw std::invalid_argument("group_sizes and couplings differ in length");
    }
    for (auto n : group_sizes) require_group_size(n);
    for (auto b : couplings) require_finite_beta(b);
}

//==============================================================================
// MagnetizationDistribution
//==============================================================================

MagnetizationDistribution::MagnetizationDistribution(double beta, std::int64_t group_size)
    : beta_(beta), n_(group_size) {
    require_group_size(group_size);
    require_finite_beta(beta);

    const auto points = static_cast<std::size_t>(n_) + 1;
    log_weights_.resize(points);
    const double log_n_fact = std::lgamma(static_cast<double>(n_) + 1.0);
    const double scale = beta_ / (2.0 * static_cast<double>(n_));
    // Fill the lower half and mirror, so weight(s) == weight(-s) bit for bit.
    for (std::size_t j = 0; j <= points / 2; ++j) {
        const double jd = static_cast<double>(j);
        const double s = static_cast<double>(value(j));
        const double lw = log_n_fact - std::lgamma(jd + 1.0) -
                          std::lgamma(static_cast<double>(n_) - jd + 1.0) + scale * s * s;
        log_weights_[j] = lw;
        log_weights_[points - 1 - j] = lw;
    }

    const double top = *std::max_element(log_weights_.begin(), log_weights_.end());
    double acc = 0.0;
    for (double lw : log_weights_) acc += std::exp(lw - top);
    log_partition_ = top + std::log(acc);

    probabilities_.resize(points);
    for (std::size_t j = 0; j < points; ++j) {
        probabilities_[j] = std::exp(log_weights_[j] - log_partition_);
    }
}

double MagnetizationDistribution::pmf(std::int64_t s) const noexcept {
    if (s < -n_ || s > n_ || ((s + n_) % 2) != 0) return 0.0;
    return probabilities_[static_cast<std::size_t>((s + n_) / 2)];
}

double MagnetizationDistribution::moment(int k) const {
    if (k < 1) throw std::invalid_argument("moment order must be >= 1");
    if (k % 2 == 1) return 0.0;
    // Pair symmetric points; the sum runs over s >= 0 only.
    double acc = 0.0;
    const std::size_t points = support_size();
    for (std::size_t j = points / 2; j < points; ++j) {
        const double s = static_cast<double>(value(j));
        const double mult = (value(j) == 0) ? 1.0 : 2.0;
        acc += mult * probabilities_[j] * int_pow(s, k);
    }
    return acc;
}

double MagnetizationDistribution::abs_moment() const {
    double acc = 0.0;
    const std::size_t points = support_size();
    for (std::size_t j = points / 2; j < points; ++j) {
        const double s = static_cast<double>(value(j));
        acc += 2.0 * probabilities_[j] * s;
    }
    return acc;
}

double MagnetizationDistribution::variance_of_square() const {
    const double mean = moment(2);
    double acc = 0.0;
    for (std::size_t j = 0; j < support_size(); ++j) {
        const double s = static_cast<double>(value(j));
        const double d = s * s - mean;
        acc += probabilities_[j] * d * d;
    }
    return acc;
}

double log_partition(double beta, std::int64_t group_size) {
    return MagnetizationDistribution(beta, group_size).log_partition();
}

double exact_moment(double beta, std::int64_t group_size, int k) {
    return MagnetizationDistribution(beta, group_size).moment(k);
}

double exact_abs_moment(double beta, std::int64_t group_size) {
    return MagnetizationDistribution(beta, group_size).abs_moment();
}

double variance_S2(double beta, std::int64_t group_size) {
    return MagnetizationDistribution(beta, group_size).variance_of_square();
}

double log_partition(const ModelSpec& spec) {
    spec.validate();
    double total = 0.0;
    for (std::size_t g = 0; g < spec.groups(); ++g) {
        total += log_partition(spec.couplings[g], spec.group_sizes[g]);
    }
    return total;
}

//==============================================================================
// VotingSample
//==============================================================================

VotingSample::VotingSample(std::vector<std::int64_t> group_sizes, std::size_t observations)
    : sizes_(std::move(group_sizes)), n_(observations), margins_(n_ * sizes_.size(), 0) {}

VotingSample::VotingSample(std::vector<std::int64_t> group_sizes, std::size_t observations,
                           std::vector<std::int64_t> margins)
    : sizes_(std::move(group_sizes)), n_(observations), margins_(std::move(margins)) {
    if (margins_.size() != n_ * sizes_.size()) {
        throw std::invalid_argument("margin matrix has wrong size");
    }
}

void VotingSample::set_margin(std::size_t obs, std::size_t group, std::int64_t value) {
    margins_.at(obs * sizes_.size() + group) = value;
}

void VotingSample::validate() const {
    for (std::size_t t = 0; t < n_; ++t) {
        for (std::size_t g = 0; g < sizes_.size(); ++g) {
            const auto s = margin(t, g);
            const auto n = sizes_[g];
            if (s < -n || s > n || ((s + n) % 2) != 0) {
                std::ostringstream msg;
                msg << "observation " << t << ", group " << g << ": margin " << s
                    << " impossible for group size " << n;
                throw std::invalid_argument(msg.str());
            }
        }
    }
}

//==============================================================================
// Sampling
//==============================================================================

MarginSampler::MarginSampler(const ModelSpec& spec) : spec_(spec) {
    spec_.validate();
    cdfs_.reserve(spec_.groups());
    for (std::size_t g = 0; g < spec_.groups(); ++g) {
        MagnetizationDistribution law(spec_.couplings[g], spec_.group_sizes[g]);
        std::vector<double> cdf(law.support_size());
        std::partial_sum(law.probabilities().begin(), law.probabilities().end(), cdf.begin());
        const double total = cdf.back();
        for (double& c : cdf) c /= total;
        cdf.back() = 1.0;
        cdfs_.push_back(std::move(cdf));
    }
}

std::int64_t MarginSampler::draw(std::size_t group, double uniform) const {
    const auto& cdf = cdfs_[group];
    auto it = std::upper_bound(cdf.begin(), cdf.end(), uniform);
    if (it == cdf.end()) --it;
    const auto j = static_cast<std::int64_t>(it - cdf.begin());
    return -spec_.group_sizes[group] + 2 * j;
}

VotingSample sample(const MarginSampler& sampler, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample size must be >= 1");
    const auto& spec = sampler.spec();
    VotingSample out(spec.group_sizes, n);
    for (std::size_t t = 0; t < n; ++t) {
        SplitMix64 rng(derive_seed(seed, t));
        for (std::size_t g = 0; g < spec.groups(); ++g) {
            out.set_margin(t, g, sampler.draw(g, rng.uniform()));
        }
    }
    return out;
}

VotingSample sample(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
    return sample(MarginSampler(spec), n, seed);
}

std::vector<std::int8_t> materialize_spins(std::int64_t margin, std::int64_t group_size,
                                           std::uint64_t seed) {
    require_group_size(group_size);
    if (margin < -group_size || margin > group_size || ((margin + group_size) % 2) != 0) {
        throw std::invalid_argument("margin incompatible with group size");
    }
    const auto positives = static_cast<std::size_t>((group_size + margin) / 2);
    std::vector<std::int8_t> spins(static_cast<std::size_t>(group_size), -1);
    std::fill_n(spins.begin(), positives, std::int8_t{1});
    SplitMix64 rng(seed);
    std::shuffle(spins.begin(), spins.end(), rng);
    return spins;
}

std::int64_t margin_of(std::span<const std::int8_t> spins) {
    std::int64_t s = 0;
    for (auto x : spins) {
        if (x != 1 && x != -1) throw std::invalid_argument("spin values must be +1 or -1");
        s += x;
    }
    return s;
}

} // namespace cwvote
