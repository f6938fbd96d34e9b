#pragma once

// Independent reference computations: exhaustive enumeration over all 2^N
// spin configurations, the Hubbard-Stratonovich integral representation of
// the correlations, the exact hypergeometric correlation, and Monte Carlo
// estimates of the democracy deficit.

#include "cwvote/model.hpp"

#include <cstdint>
#include <span>

namespace cwvote {

inline constexpr std::int64_t kMaxBruteForceN = 20;

double brute_force_log_partition(double beta, std::int64_t group_size);
double brute_force_moment(double beta, std::int64_t group_size, int k);
double brute_force_abs_moment(double beta, std::int64_t group_size);

// E X_1 ... X_k from the law of S: given S, the first k spins are a draw
// without replacement from (N+S)/2 plus and (N-S)/2 minus signs.
double exact_correlation(double beta, std::int64_t group_size, int k);

// Ratio of integrals of exp(-N F(z)) tanh^k(z) and exp(-N F(z)) with
// F(z) = z^2/(2 beta) - ln cosh z. Requires beta > 0 and k even.
double hs_correlation(double beta, std::int64_t group_size, int k);

struct MonteCarloEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

// Average of (sum S - sum w chi)^2 over simulated elections.
MonteCarloEstimate monte_carlo_deficit(const ModelSpec& spec, std::span<const double> w,
                                       std::size_t draws, std::uint64_t seed);

} // namespace cwvote
