#pragma once

// Exact single- and multi-group Curie-Weiss model.
//
// The Gibbs measure of one group of N voters with coupling beta assigns
// probability proportional to exp(beta * S^2 / (2N)) to each configuration,
// S being the sum of the +-1 votes. Spins are exchangeable, so the law of S is
// carried by the N+1 points {-N, -N+2, ..., N} with multiplicity
// C(N, (N+S)/2). Everything here works on that reduced law in log domain,
// O(N) per group.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cwvote {

struct ModelSpec {
    std::vector<std::int64_t> group_sizes;
    std::vector<double> couplings;

    std::size_t groups() const noexcept { return group_sizes.size(); }

    // Throws std::invalid_argument on empty spec, length mismatch, N < 1 or
    // non-finite couplings.
    void validate() const;
};

// Exact law of the group voting margin S.
class MagnetizationDistribution {
public:
    MagnetizationDistribution(double beta, std::int64_t group_size);

    double beta() const noexcept { return beta_; }
    std::int64_t group_size() const noexcept { return n_; }
    std::size_t support_size() const noexcept { return log_weights_.size(); }

    // Support point j in [0, N]: s = -N + 2j.
    std::int64_t value(std::size_t j) const noexcept {
        return -n_ + 2 * static_cast<std::int64_t>(j);
    }
    double log_weight(std::size_t j) const noexcept { return log_weights_[j]; }
    double log_partition() const noexcept { return log_partition_; }
    double probability(std::size_t j) const noexcept { return probabilities_[j]; }
    std::span<const double> probabilities() const noexcept { return probabilities_; }

    // P(S = s); zero off the support.
    double pmf(std::int64_t s) const noexcept;

    // E S^k, exactly zero for odd k.
    double moment(int k) const;
    double abs_moment() const;
    // Variance of S^2, accumulated as a central second moment.
    double variance_of_square() const;

private:
    double beta_;
    std::int64_t n_;
    std::vector<double> log_weights_;
    std::vector<double> probabilities_;
    double log_partition_ = 0.0;
};

double log_partition(double beta, std::int64_t group_size);
double exact_moment(double beta, std::int64_t group_size, int k);
double exact_abs_moment(double beta, std::int64_t group_size);
double variance_S2(double beta, std::int64_t group_size);

// Sum of log-partition functions of independent groups.
double log_partition(const ModelSpec& spec);

// ============================================================================
// SAMPLING
// ============================================================================

// n observations of the M group margins, stored row-major (n x M).
class VotingSample {
public:
    VotingSample(std::vector<std::int64_t> group_sizes, std::size_t observations);
    VotingSample(std::vector<std::int64_t> group_sizes, std::size_t observations,
                 std::vector<std::int64_t> margins);

    std::size_t observations() const noexcept { return n_; }
    std::size_t groups() const noexcept { return sizes_.size(); }
    const std::vector<std::int64_t>& group_sizes() const noexcept { return sizes_; }

    std::int64_t margin(std::size_t obs, std::size_t group) const noexcept {
        return margins_[obs * sizes_.size() + group];
    }
    void set_margin(std::size_t obs, std::size_t group, std::int64_t value);
    std::span<const std::int64_t> row(std::size_t obs) const noexcept {
        return {margins_.data() + obs * sizes_.size(), sizes_.size()};
    }

    // Throws std::invalid_argument naming the first offending observation if
    // |S| > N or S and N differ in parity.
    void validate() const;

private:
    std::vector<std::int64_t> sizes_;
    std::size_t n_;
    std::vector<std::int64_t> margins_;
};

// Inverse-CDF sampler over the exact margin laws of every group of a spec.
class MarginSampler {
public:
    explicit MarginSampler(const ModelSpec& spec);

    const ModelSpec& spec() const noexcept { return spec_; }
    std::int64_t draw(std::size_t group, double uniform) const;

private:
    ModelSpec spec_;
    std::vector<std::vector<double>> cdfs_;
};

// i.i.d. sample of n observations. Observation t is drawn from the substream
// derive_seed(seed, t), so the result is a pure function of (spec, n, seed).
VotingSample sample(const ModelSpec& spec, std::size_t n, std::uint64_t seed);
VotingSample sample(const MarginSampler& sampler, std::size_t n, std::uint64_t seed);

// Raw +-1 votes consistent with a margin: (N+S)/2 positive spins placed
// uniformly at random.
std::vector<std::int8_t> materialize_spins(std::int64_t margin, std::int64_t group_size,
                                           std::uint64_t seed);

// Margin of a raw vote vector. Throws on entries other than +-1.
std::int64_t margin_of(std::span<const std::int8_t> spins);

} // namespace cwvote
