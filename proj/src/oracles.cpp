#include "cwvote/oracles.hpp"

#include "cwvote/curie_weiss.hpp"
#include "cwvote/errors.hpp"
#include "cwvote/voting_weights.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cwvote {

namespace {

void require_small(std::int64_t n) {
    if (n < 1 || n > kMaxBruteForceN) {
        throw std::invalid_argument("enumeration needs 1 <= N <= " + std::to_string(kMaxBruteForceN));
    }
}

// Visits every configuration, passing its margin. Bit i set = spin i is +1.
template <class F>
void for_each_configuration(std::int64_t n, F&& visit) {
    const std::uint32_t count = 1u << n;
    for (std::uint32_t c = 0; c < count; ++c) {
        visit(2 * static_cast<std::int64_t>(std::popcount(c)) - n);
    }
}

struct Enumerated {
    double log_z = 0.0;
    double shift = 0.0;
};

// Weighted sum of g(S) over configurations, with weights exp(beta S^2/(2N) - shift).
template <class G>
double enumerate_sum(double beta, std::int64_t n, double shift, G&& g) {
    double acc = 0.0;
    const double scale = beta / (2.0 * static_cast<double>(n));
    for_each_configuration(n, [&](std::int64_t s) {
        const double sd = static_cast<double>(s);
        acc += std::exp(scale * sd * sd - shift) * g(sd);
    });
    return acc;
}

double enumeration_shift(double beta, std::int64_t n) {
    return (beta > 0.0) ? 0.5 * beta * static_cast<double>(n) : 0.0;
}

double log_cosh(double z) {
    const double a = std::abs(z);
    return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

} // namespace

double brute_force_log_partition(double beta, std::int64_t group_size) {
    require_small(group_size);
    if (!std::isfinite(beta)) throw std::invalid_argument("coupling must be finite");
    const double shift = enumeration_shift(beta, group_size);
    return shift + std::log(enumerate_sum(beta, group_size, shift, [](double) { return 1.0; }));
}

double brute_force_moment(double beta, std::int64_t group_size, int k) {
    require_small(group_size);
    if (!std::isfinite(beta)) throw std::invalid_argument("coupling must be finite");
    if (k < 1) throw std::invalid_argument("moment order must be >= 1");
    const double shift = enumeration_shift(beta, group_size);
    const double z = enumerate_sum(beta, group_size, shift, [](double) { return 1.0; });
    const double num = enumerate_sum(beta, group_size, shift, [k](double s) { return std::pow(s, k); });
    return num / z;
}

double brute_force_abs_moment(double beta, std::int64_t group_size) {
    require_small(group_size);
    if (!std::isfinite(beta)) throw std::invalid_argument("coupling must be finite");
    const double shift = enumeration_shift(beta, group_size);
    const double z = enumerate_sum(beta, group_size, shift, [](double) { return 1.0; });
    const double num = enumerate_sum(beta, group_size, shift, [](double s) { return std::abs(s); });
    return num / z;
}

double exact_correlation(double beta, std::int64_t group_size, int k) {
    if (k < 1 || k > group_size) throw std::invalid_argument("correlation order must lie in [1, N]");
    const MagnetizationDistribution law(beta, group_size);
    const auto lchoose = [](double a, double b) {
        return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
    };
    const double nd = static_cast<double>(group_size);
    const double log_total = lchoose(nd, k);
    double acc = 0.0;
    for (std::size_t j = 0; j < law.support_size(); ++j) {
        const double plus = static_cast<double>((group_size + law.value(j)) / 2);
        const double minus = nd - plus;
        // Product of k spins drawn without replacement: (-1)^(#minus drawn).
        double cond = 0.0;
        for (int i = 0; i <= k; ++i) {
            const int drawn_minus = k - i;
            if (i > plus || drawn_minus > minus) continue;
            const double sign = (drawn_minus % 2 == 0) ? 1.0 : -1.0;
            cond += sign * std::exp(lchoose(plus, i) + lchoose(minus, drawn_minus) - log_total);
        }
        acc += law.probability(j) * cond;
    }
    return acc;
}

double hs_correlation(double beta, std::int64_t group_size, int k) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("hs_correlation needs beta > 0");
    if (group_size < 1) throw std::invalid_argument("group size must be >= 1");
    if (k < 0) throw std::invalid_argument("correlation order must be >= 0");
    if (k % 2 != 0) return 0.0;
    const double n = static_cast<double>(group_size);
    const auto f = [beta](double z) { return z * z / (2.0 * beta) - log_cosh(z); };
    const double z_min = (beta > 1.0) ? beta * m_of_beta(beta) : 0.0;
    const double f_min = f(z_min);

    // Truncate where exp(-N (F - F_min)) has dropped below e^-40.
    const double cut = f_min + 40.0 / n;
    double hi = std::max(1.0, 2.0 * z_min);
    while (f(hi) < cut) hi *= 2.0;
    double lo = z_min;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < cut ? lo : hi) = mid;
    }
    const double z_max = hi;

    using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
    constexpr double kTol = 1e-12;
    auto integrate = [&](auto&& g) {
        double total = 0.0;
        double err_total = 0.0;
        double l1_total = 0.0;
        const std::vector<double> cuts =
            (z_min > 0.0) ? std::vector<double>{0.0, z_min, z_max} : std::vector<double>{0.0, z_max};
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            double err = 0.0;
            double l1 = 0.0;
            total += Quad::integrate(g, cuts[i], cuts[i + 1], 20, kTol, &err, &l1);
            err_total += err;
            l1_total += l1;
        }
        if (!(err_total <= 1e-10 * l1_total) || !std::isfinite(total)) {
            throw QuadratureFailure("Hubbard-Stratonovich quadrature did not converge");
        }
        return total;
    };
    // Even integrands: integrate over [0, z_max]; the factor 2 cancels.
    const double den = integrate([&](double z) { return std::exp(-n * (f(z) - f_min)); });
    const double num = integrate([&](double z) {
        return std::exp(-n * (f(z) - f_min)) * std::pow(std::tanh(z), k);
    });
    return num / den;
}

MonteCarloEstimate monte_carlo_deficit(const ModelSpec& spec, std::span<const double> w,
                                       std::size_t draws, std::uint64_t seed) {
    if (w.size() != spec.groups()) throw std::invalid_argument("weight vector has the wrong length");
    if (draws < 2) throw std::invalid_argument("need at least two draws");
    const VotingSample s = sample(spec, draws, seed);
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t t = 0; t < draws; ++t) {
        const auto out = council_outcome(s.row(t), w);
        const double d = out.popular_margin - out.weighted_vote;
        const double x = d * d;
        const double delta = x - mean;
        mean += delta / static_cast<double>(t + 1);
        m2 += delta * (x - mean);
    }
    const double var = m2 / static_cast<double>(draws - 1);
    return {mean, std::sqrt(var / static_cast<double>(draws))};
}

} // namespace cwvote
