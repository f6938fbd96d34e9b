#include "cwvote/curie_weiss.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cwvote {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_nonnegative(double beta) {
    if (std::isnan(beta) || beta < 0.0) {
        throw std::invalid_argument("m(beta) requires beta >= 0");
    }
}

// sech^2(beta m) == 1 - m^2 on the solution branch; computed without the
// cancellation in 1 - m^2 once m is close to 1.
double one_minus_m_squared(double beta, double m) {
    const double c = std::cosh(beta * m);
    return 1.0 / (c * c);
}

} // namespace

double m_of_beta(double beta) {
    require_nonnegative(beta);
    if (beta <= 1.0) return 0.0;
    if (std::isinf(beta)) return 1.0;

    // g(x) = tanh(beta x) - x is concave on (0, inf), positive just right of
    // zero and negative at 1, so [eps, 1] brackets exactly the largest root.
    auto g = [beta](double x) { return std::tanh(beta * x) - x; };
    double lo = 1e-300;
    double hi = 1.0;
    if (g(lo) <= 0.0) return 0.0;
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (g(mid) > 0.0 ? lo : hi) = mid;
        if (hi - lo <= 1e-16 * hi) break;
    }
    double x = 0.5 * (lo + hi);
    // Newton polish, kept only while it stays inside the bracket.
    for (int it = 0; it < 3; ++it) {
        const double c = std::cosh(beta * x);
        const double slope = beta / (c * c) - 1.0;
        if (slope == 0.0) break;
        const double next = x - g(x) / slope;
        if (!(next >= lo && next <= hi)) break;
        x = next;
    }
    return x;
}

double m_prime(double beta) {
    if (std::isnan(beta) || beta <= 1.0) {
        throw std::invalid_argument("m'(beta) is only used for beta > 1");
    }
    if (std::isinf(beta)) return 0.0;
    const double m = m_of_beta(beta);
    const double q = one_minus_m_squared(beta, m);
    // 1 - beta (1 - m^2). Near criticality both terms of (1 - beta) + beta m^2
    // are small and exact enough; far from it 1 - beta q keeps q's precision.
    const double denom = (beta < 2.0) ? (1.0 - beta) + beta * m * m : 1.0 - beta * q;
    return m * q / denom;
}

double m_inverse(double y) {
    if (std::isnan(y) || y <= 0.0 || y >= 1.0) {
        throw std::invalid_argument("m_inverse requires y in (0, 1)");
    }
    if (y < 1e-4) {
        const double y2 = y * y;
        return 1.0 + y2 / 3.0 + y2 * y2 / 5.0;
    }
    return std::atanh(y) / y;
}

double magnetization_gap(double beta) {
    require_nonnegative(beta);
    if (beta <= 1.0) return 1.0;
    if (std::isinf(beta)) return 0.0;
    const double m = m_of_beta(beta);
    if (m < 0.5) return 1.0 - m;
    return one_minus_m_squared(beta, m) / (1.0 + m);
}

double m_inverse_from_gap(double gap) {
    if (std::isnan(gap) || gap <= 0.0 || gap >= 1.0) {
        throw std::invalid_argument("m_inverse_from_gap requires gap in (0, 1)");
    }
    if (gap > 0.5) return m_inverse(1.0 - gap);
    const double y = 1.0 - gap;
    // artanh(1 - g) = 0.5 ln((2 - g) / g)
    return 0.5 * std::log((2.0 - gap) / gap) / y;
}

} // namespace cwvote
