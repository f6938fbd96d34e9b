#pragma once

// Regime intervals for the coupling (I_h, I_c, I_l) and for the statistic
// (J_h, J_c, J_l), the large-N moment and correlation approximations with
// their error envelopes, and the link functions theta_inf / psi_inf that map
// a coupling to its asymptotic (S/N)^2 moment and optimal weight.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cwvote {

enum class RegimeLabel { HighTemp, Critical, LowTemp };

std::string to_string(RegimeLabel label);

// Envelope constants for the moment approximations. Either may be missing
// until calibrated.
struct ErrorConstants {
    std::optional<double> d_high;
    std::optional<double> d_low;
};

struct RegimeIntervals {
    double b1 = 0.0;
    double b2 = 0.0;
    double d_high = 0.0;
    double d_low = 0.0;
    std::int64_t group_size = 0;

    // J_h = [j_h_lower, j_h_upper], J_c = (j_h_upper, j_l_lower),
    // J_l = [j_l_lower, inf). j_h_lower = min Range(S^2), i.e. 0 for even N
    // and 1 for odd N.
    double j_h_lower = 0.0;
    double j_h_upper = 0.0;
    double j_l_lower = 0.0;

    // Membership of a coupling in I_h = [0, b1] (negative couplings are
    // reported as HighTemp), I_c = (b1, b2), I_l = [b2, inf].
    RegimeLabel coupling_regime(double beta) const;
    // Membership of a statistic value in J_h / J_c / J_l; both outer
    // intervals are closed.
    RegimeLabel statistic_regime(double t) const;
};

// Throws std::invalid_argument unless 0 < b1 < 1 < b2 and constants > 0;
// throws SeparationViolated when j_h_upper >= j_l_lower.
RegimeIntervals build_intervals(double b1, double b2, std::int64_t group_size, double d_high,
                                double d_low);

// Smallest N >= start for which the separation condition holds, scanning
// upward to `limit`. Returns nullopt if none is found.
std::optional<std::int64_t> separation_threshold(double b1, double b2, double d_high, double d_low,
                                                 std::int64_t start = 2,
                                                 std::int64_t limit = 1'000'000'000);

// ============================================================================
// ASYMPTOTIC MOMENTS AND CORRELATIONS
// ============================================================================

// Large-N value of E S^{2k}: (2k-1)!! (N / (1 - beta))^k for beta < 1 and
// (m(beta) N)^{2k} for beta > 1. Throws OutOfDomain at beta = 1.
double approx_moment(double beta, std::int64_t group_size, int k);

// Large-N value of E X_1 ... X_k.
double approx_correlation(double beta, std::int64_t group_size, int k);

// D_high / sqrt(N) for beta < 1 and D_low (ln N)^{3/2} / sqrt(N) for beta > 1.
// Throws ConstantsUncalibrated if the needed constant is missing.
double moment_error_envelope(double beta, std::int64_t group_size, int k,
                             const ErrorConstants& constants);

// ============================================================================
// LINK FUNCTIONS
// ============================================================================

// theta_inf(beta) = 1 / ((1 - beta) N) for beta <= b1, m(beta)^2 for
// beta >= b2, 0 at -inf. OutOfDomain inside (b1, b2).
double theta_inf(double beta, std::int64_t group_size, double b1, double b2);
double theta_inf(double beta, const RegimeIntervals& intervals);

// Inverse of theta_inf on [0, 1] minus the open gap
// (1 / ((1 - b1) N), m(b2)^2). y = m(b2)^2 maps to b2.
double theta_inf_inverse(double y, std::int64_t group_size, double b1, double b2);
double theta_inf_inverse(double y, const RegimeIntervals& intervals);

// Derivative of theta_inf_inverse on the open branches.
double theta_inf_inverse_derivative(double y, std::int64_t group_size, double b1, double b2);

// Optimal-weight asymptotics for any beta != 1:
// sqrt(2/pi) sqrt(N / (1 - beta)) for beta < 1, m(beta) N for beta > 1,
// 0 at -inf and N at +inf.
double asymptotic_weight(double beta, std::int64_t group_size);

// asymptotic_weight restricted to [-inf, inf] minus I_c.
double psi_inf(double beta, std::int64_t group_size, double b1, double b2);
double psi_inf(double beta, const RegimeIntervals& intervals);

// ============================================================================
// CALIBRATION
// ============================================================================

struct CalibrationGrid {
    std::vector<double> betas;
    std::int64_t n_min = 2;
    std::int64_t n_max = 2000;
    double safety_factor = 1.0;
};

struct CalibrationResult {
    ErrorConstants constants;
    CalibrationGrid grid;
    // Where the envelope ratio peaked.
    double worst_high_beta = 0.0;
    std::int64_t worst_high_n = 0;
    double worst_low_beta = 0.0;
    std::int64_t worst_low_n = 0;
};

// Smallest d_high (resp. d_low) such that the k = 1 envelopes hold at every
// grid point with beta < 1 (resp. beta > 1), times the safety factor. N = 1
// is skipped for the low-temperature constant because (ln 1)^{3/2} = 0.
CalibrationResult calibrate_constants(const CalibrationGrid& grid);

// Grid and constants shipped as defaults (b1 = 0.8, b2 = 1.25).
CalibrationGrid default_calibration_grid();
ErrorConstants default_constants();

inline constexpr double kDefaultB1 = 0.8;
inline constexpr double kDefaultB2 = 1.25;

} // namespace cwvote
