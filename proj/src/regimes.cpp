#include "cwvote/regimes.hpp"

#include "cwvote/curie_weiss.hpp"
#include "cwvote/errors.hpp"
#include "cwvote/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace cwvote {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double double_factorial(int k) {
    double r = 1.0;
    for (int i = k; i > 1; i -= 2) r *= i;
    return r;
}

void require_gap(double b1, double b2) {
    if (!(b1 > 0.0 && b1 < 1.0 && b2 > 1.0 && std::isfinite(b2))) {
        throw std::invalid_argument("regime bounds must satisfy 0 < b1 < 1 < b2");
    }
}

void require_group_size(std::int64_t n) {
    if (n < 1) throw std::invalid_argument("group size must be >= 1");
}

void reject_critical(double beta) {
    if (std::isnan(beta)) throw std::invalid_argument("coupling is NaN");
    if (beta == 1.0) throw OutOfDomain("asymptotic approximations are undefined at beta = 1");
}

double j_h_upper(double b1, double n, double d_high) {
    return n / (1.0 - b1) + d_high * std::sqrt(n);
}

double j_l_lower(double b2, double n, double d_low) {
    const double m = m_of_beta(b2);
    return m * m * n * n - d_low * std::pow(std::log(n), 1.5) * std::pow(n, 1.5);
}

bool separated(double b1, double b2, double d_high, double d_low, std::int64_t n) {
    const auto nd = static_cast<double>(n);
    return j_h_upper(b1, nd, d_high) < j_l_lower(b2, nd, d_low);
}

} // namespace

std::string to_string(RegimeLabel label) {
    switch (label) {
    case RegimeLabel::HighTemp: return "high";
    case RegimeLabel::Critical: return "critical";
    case RegimeLabel::LowTemp: return "low";
    }
    return "unknown";
}

RegimeLabel RegimeIntervals::coupling_regime(double beta) const {
    if (beta <= b1) return RegimeLabel::HighTemp;
    if (beta >= b2) return RegimeLabel::LowTemp;
    return RegimeLabel::Critical;
}

RegimeLabel RegimeIntervals::statistic_regime(double t) const {
    if (t <= j_h_upper) return RegimeLabel::HighTemp;
    if (t >= j_l_lower) return RegimeLabel::LowTemp;
    return RegimeLabel::Critical;
}

RegimeIntervals build_intervals(double b1, double b2, std::int64_t group_size, double d_high,
                                double d_low) {
    require_gap(b1, b2);
    require_group_size(group_size);
    if (!(d_high > 0.0) || !(d_low > 0.0) || !std::isfinite(d_high) || !std::isfinite(d_low)) {
        throw std::invalid_argument("envelope constants must be positive and finite");
    }
    const auto n = static_cast<double>(group_size);
    RegimeIntervals iv;
    iv.b1 = b1;
    iv.b2 = b2;
    iv.d_high = d_high;
    iv.d_low = d_low;
    iv.group_size = group_size;
    iv.j_h_lower = (group_size % 2 == 0) ? 0.0 : 1.0;
    iv.j_h_upper = j_h_upper(b1, n, d_high);
    iv.j_l_lower = j_l_lower(b2, n, d_low);
    if (!(iv.j_h_upper < iv.j_l_lower)) {
        std::ostringstream msg;
        msg << "separation violated for N=" << group_size << ", b1=" << b1 << ", b2=" << b2
            << ": J_h upper end " << iv.j_h_upper << " >= J_l lower end " << iv.j_l_lower;
        throw SeparationViolated(msg.str());
    }
    return iv;
}

std::optional<std::int64_t> separation_threshold(double b1, double b2, double d_high,
                                                 double d_low, std::int64_t start,
                                                 std::int64_t limit) {
    require_gap(b1, b2);
    std::int64_t lo = std::max<std::int64_t>(start, 1);
    if (separated(b1, b2, d_high, d_low, lo)) return lo;
    std::int64_t hi = lo;
    while (!separated(b1, b2, d_high, d_low, hi)) {
        if (hi >= limit) return std::nullopt;
        lo = hi;
        hi = std::min(limit, hi * 2);
    }
    // The gap between the two sides grows monotonically once it opens.
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        (separated(b1, b2, d_high, d_low, mid) ? hi : lo) = mid;
    }
    return hi;
}

//==============================================================================
// Asymptotic moments and correlations
//==============================================================================

double approx_moment(double beta, std::int64_t group_size, int k) {
    reject_critical(beta);
    require_group_size(group_size);
    if (k < 1) throw std::invalid_argument("moment order must be >= 1");
    const auto n = static_cast<double>(group_size);
    if (beta < 1.0) {
        return double_factorial(2 * k - 1) * std::pow(n / (1.0 - beta), k);
    }
    return std::pow(m_of_beta(beta) * n, 2 * k);
}

double approx_correlation(double beta, std::int64_t group_size, int k) {
    reject_critical(beta);
    require_group_size(group_size);
    if (k < 1) throw std::invalid_argument("correlation order must be >= 1");
    if (k % 2 == 1) return 0.0;
    const auto n = static_cast<double>(group_size);
    if (beta < 1.0) {
        return double_factorial(k - 1) * std::pow(beta / (1.0 - beta), k / 2) /
               std::pow(n, k / 2);
    }
    return std::pow(m_of_beta(beta), k);
}

double moment_error_envelope(double beta, std::int64_t group_size, int k,
                             const ErrorConstants& constants) {
    reject_critical(beta);
    require_group_size(group_size);
    if (k < 1) throw std::invalid_argument("moment order must be >= 1");
    const auto n = static_cast<double>(group_size);
    if (beta < 1.0) {
        if (!constants.d_high) throw ConstantsUncalibrated("D_high has not been calibrated");
        return *constants.d_high / std::sqrt(n);
    }
    if (!constants.d_low) throw ConstantsUncalibrated("D_low has not been calibrated");
    return *constants.d_low * std::pow(std::log(n), 1.5) / std::sqrt(n);
}

//==============================================================================
// Link functions
//==============================================================================

double theta_inf(double beta, std::int64_t group_size, double b1, double b2) {
    require_gap(b1, b2);
    require_group_size(group_size);
    if (std::isnan(beta)) throw std::invalid_argument("coupling is NaN");
    if (beta == -kInf) return 0.0;
    if (beta <= b1) return 1.0 / ((1.0 - beta) * static_cast<double>(group_size));
    if (beta >= b2) {
        const double m = m_of_beta(beta);
        return m * m;
    }
    throw OutOfDomain("theta_inf is undefined on the critical interval (b1, b2)");
}

double theta_inf(double beta, const RegimeIntervals& intervals) {
    return theta_inf(beta, intervals.group_size, intervals.b1, intervals.b2);
}

double theta_inf_inverse(double y, std::int64_t group_size, double b1, double b2) {
    require_gap(b1, b2);
    require_group_size(group_size);
    const double high_top = 1.0 / ((1.0 - b1) * static_cast<double>(group_size));
    const double m2 = m_of_beta(b2);
    const double low_bottom = m2 * m2;
    if (!(high_top < low_bottom)) {
        throw SeparationViolated("theta_inf branches overlap for this N; inverse undefined");
    }
    if (std::isnan(y) || y < 0.0 || y > 1.0) {
        throw OutOfDomain("theta_inf_inverse requires y in [0, 1]");
    }
    if (y == 0.0) return -kInf;
    if (y <= high_top) return 1.0 - 1.0 / (y * static_cast<double>(group_size));
    if (y == low_bottom) return b2;
    if (y > low_bottom) {
        if (y == 1.0) return kInf;
        return m_inverse(std::sqrt(y));
    }
    throw OutOfDomain("theta_inf_inverse is undefined on the gap between its branches");
}

double theta_inf_inverse(double y, const RegimeIntervals& intervals) {
    return theta_inf_inverse(y, intervals.group_size, intervals.b1, intervals.b2);
}

double theta_inf_inverse_derivative(double y, std::int64_t group_size, double b1, double b2) {
    const double beta = theta_inf_inverse(y, group_size, b1, b2);
    if (!std::isfinite(beta)) throw OutOfDomain("derivative undefined at the endpoints");
    if (beta <= b1) return 1.0 / (y * y * static_cast<double>(group_size));
    return 1.0 / (m_prime(beta) * 2.0 * std::sqrt(y));
}

double asymptotic_weight(double beta, std::int64_t group_size) {
    require_group_size(group_size);
    reject_critical(beta);
    const auto n = static_cast<double>(group_size);
    if (beta == -kInf) return 0.0;
    if (beta == kInf) return n;
    if (beta < 1.0) return std::sqrt(2.0 / std::numbers::pi) * std::sqrt(n / (1.0 - beta));
    return m_of_beta(beta) * n;
}

double psi_inf(double beta, std::int64_t group_size, double b1, double b2) {
    require_gap(b1, b2);
    if (std::isnan(beta)) throw std::invalid_argument("coupling is NaN");
    if (beta > b1 && beta < b2) {
        throw OutOfDomain("psi_inf is undefined on the critical interval (b1, b2)");
    }
    return asymptotic_weight(beta, group_size);
}

double psi_inf(double beta, const RegimeIntervals& intervals) {
    return psi_inf(beta, intervals.group_size, intervals.b1, intervals.b2);
}

//==============================================================================
// Calibration
//==============================================================================

CalibrationResult calibrate_constants(const CalibrationGrid& grid) {
    if (grid.n_min < 1 || grid.n_max < grid.n_min) {
        throw std::invalid_argument("calibration needs 1 <= n_min <= n_max");
    }
    if (!(grid.safety_factor >= 1.0)) {
        throw std::invalid_argument("safety factor must be >= 1");
    }
    CalibrationResult out;
    out.grid = grid;
    double worst_high = -1.0;
    double worst_low = -1.0;
    for (double beta : grid.betas) {
        reject_critical(beta);
        if (!std::isfinite(beta)) throw std::invalid_argument("calibration couplings must be finite");
        const bool high = beta < 1.0;
        const double target = high ? 1.0 / (1.0 - beta) : std::pow(m_of_beta(beta), 2);
        for (std::int64_t n = grid.n_min; n <= grid.n_max; ++n) {
            if (!high && n < 2) continue;
            const auto nd = static_cast<double>(n);
            const double es2 = exact_moment(beta, n, 2);
            double ratio;
            if (high) {
                ratio = std::abs(es2 / nd - target) * std::sqrt(nd);
            } else {
                ratio = std::abs(es2 / (nd * nd) - target) * std::sqrt(nd) /
                        std::pow(std::log(nd), 1.5);
            }
            if (high && ratio > worst_high) {
                worst_high = ratio;
                out.worst_high_beta = beta;
                out.worst_high_n = n;
            } else if (!high && ratio > worst_low) {
                worst_low = ratio;
                out.worst_low_beta = beta;
                out.worst_low_n = n;
            }
        }
    }
    if (worst_high > 0.0) out.constants.d_high = worst_high * grid.safety_factor;
    if (worst_low > 0.0) out.constants.d_low = worst_low * grid.safety_factor;
    return out;
}

CalibrationGrid default_calibration_grid() {
    CalibrationGrid g;
    g.betas = {0.0, 0.25, 0.5, 0.75, kDefaultB1, kDefaultB2, 1.5, 2.0, 3.0};
    g.n_min = 2;
    g.n_max = 2000;
    g.safety_factor = 1.0;
    return g;
}

ErrorConstants default_constants() {
    // Output of calibrate_constants(default_calibration_grid()); a unit test
    // recomputes and compares.
    ErrorConstants c;
    c.d_high = 8.2000016094284476;
    c.d_low = 0.6680769519226103;
    return c;
}

} // namespace cwvote
