#include "cwvote/curie_weiss.hpp"
#include "cwvote/errors.hpp"
#include "cwvote/model.hpp"
#include "cwvote/regimes.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

using namespace cwvote;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RegimeIntervals default_intervals(std::int64_t n) {
    const auto c = default_constants();
    return build_intervals(kDefaultB1, kDefaultB2, n, *c.d_high, *c.d_low);
}

} // namespace

TEST_CASE("interval endpoints", "[regimes]") {
    const auto iv = build_intervals(0.8, 1.25, 500, 8.0, 0.5);
    CHECK_THAT(iv.j_h_upper, WithinRel(500.0 / 0.2 + 8.0 * std::sqrt(500.0), 1e-14));
    const double m = m_of_beta(1.25);
    CHECK_THAT(iv.j_l_lower,
               WithinRel(m * m * 500.0 * 500.0 - 0.5 * std::pow(std::log(500.0), 1.5) * std::pow(500.0, 1.5), 1e-13));
    CHECK(iv.j_h_lower == 0.0);
    CHECK(build_intervals(0.8, 1.25, 501, 8.0, 0.5).j_h_lower == 1.0);
}

TEST_CASE("interval construction rejects bad inputs", "[regimes]") {
    CHECK_THROWS_AS(build_intervals(1.0, 1.25, 500, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_intervals(0.8, 1.0, 500, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_intervals(0.8, 1.25, 500, -1, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_intervals(0.8, 1.25, 0, 1, 1), std::invalid_argument);
    // Calibrated constants need larger groups.
    CHECK_THROWS_AS(default_intervals(200), SeparationViolated);
    CHECK_NOTHROW(default_intervals(500));
}

TEST_CASE("separation threshold is the first separated size", "[regimes]") {
    const auto c = default_constants();
    const auto n = separation_threshold(0.8, 1.25, *c.d_high, *c.d_low);
    REQUIRE(n);
    CHECK_NOTHROW(build_intervals(0.8, 1.25, *n, *c.d_high, *c.d_low));
    CHECK_THROWS_AS(build_intervals(0.8, 1.25, *n - 1, *c.d_high, *c.d_low), SeparationViolated);
    for (std::int64_t k = *n; k < *n + 200; ++k) CHECK_NOTHROW(build_intervals(0.8, 1.25, k, *c.d_high, *c.d_low));
}

TEST_CASE("regime membership is closed on the outer intervals", "[regimes]") {
    const auto iv = default_intervals(500);
    CHECK(iv.coupling_regime(-3.0) == RegimeLabel::HighTemp);
    CHECK(iv.coupling_regime(0.8) == RegimeLabel::HighTemp);
    CHECK(iv.coupling_regime(0.81) == RegimeLabel::Critical);
    CHECK(iv.coupling_regime(1.0) == RegimeLabel::Critical);
    CHECK(iv.coupling_regime(1.25) == RegimeLabel::LowTemp);
    CHECK(iv.coupling_regime(kInf) == RegimeLabel::LowTemp);

    CHECK(iv.statistic_regime(0.0) == RegimeLabel::HighTemp);
    CHECK(iv.statistic_regime(iv.j_h_upper) == RegimeLabel::HighTemp);
    CHECK(iv.statistic_regime(std::nextafter(iv.j_h_upper, kInf)) == RegimeLabel::Critical);
    CHECK(iv.statistic_regime(std::nextafter(iv.j_l_lower, 0.0)) == RegimeLabel::Critical);
    CHECK(iv.statistic_regime(iv.j_l_lower) == RegimeLabel::LowTemp);
    CHECK(iv.statistic_regime(500.0 * 500.0) == RegimeLabel::LowTemp);
    CHECK(to_string(RegimeLabel::Critical) == "critical");
}

TEST_CASE("asymptotic moments", "[regimes]") {
    CHECK_THAT(approx_moment(0.5, 100, 1), WithinRel(200.0, 1e-14));
    CHECK_THAT(approx_moment(0.5, 100, 2), WithinRel(3.0 * 200.0 * 200.0, 1e-14));
    CHECK_THAT(approx_moment(0.5, 100, 3), WithinRel(15.0 * std::pow(200.0, 3), 1e-14));
    const double m = m_of_beta(2.0);
    CHECK_THAT(approx_moment(2.0, 100, 2), WithinRel(std::pow(m * 100.0, 4), 1e-14));
    CHECK_THROWS_AS(approx_moment(1.0, 100, 1), OutOfDomain);

    CHECK_THAT(approx_correlation(2.0, 100, 2), WithinRel(m * m, 1e-14));
    CHECK_THAT(approx_correlation(0.5, 100, 4), WithinRel(3.0 / (100.0 * 100.0), 1e-12));
    CHECK(approx_correlation(0.5, 100, 3) == 0.0);
}

TEST_CASE("envelopes need calibrated constants", "[regimes]") {
    CHECK_THROWS_AS(moment_error_envelope(0.5, 100, 1, ErrorConstants{}), ConstantsUncalibrated);
    CHECK_THROWS_AS(moment_error_envelope(2.0, 100, 1, ErrorConstants{1.0, std::nullopt}), ConstantsUncalibrated);
    CHECK_THAT(moment_error_envelope(0.5, 100, 1, ErrorConstants{2.0, 1.0}), WithinRel(0.2, 1e-14));
}

TEST_CASE("second moments stay inside the calibrated envelopes", "[regimes]") {
    const auto c = default_constants();
    for (double beta : default_calibration_grid().betas) {
        for (std::int64_t n = 2; n <= 2000; n += 37) {
            const double nd = static_cast<double>(n);
            const double es2 = exact_moment(beta, n, 2);
            const double err = beta < 1.0 ? std::abs(es2 / nd - 1.0 / (1.0 - beta))
                                          : std::abs(es2 / (nd * nd) - std::pow(m_of_beta(beta), 2));
            CHECK(err <= moment_error_envelope(beta, n, 1, c) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("shipped constants are the calibration output", "[regimes]") {
    const auto fresh = calibrate_constants(default_calibration_grid());
    const auto shipped = default_constants();
    CHECK_THAT(*shipped.d_high, WithinRel(*fresh.constants.d_high, 1e-12));
    CHECK_THAT(*shipped.d_low, WithinRel(*fresh.constants.d_low, 1e-12));
    CHECK(fresh.worst_high_beta == 0.8);
    CHECK(fresh.worst_low_beta == 1.25);
}

TEST_CASE("calibration options", "[regimes]") {
    CalibrationGrid g{{0.5, 2.0}, 2, 300, 2.0};
    const auto doubled = calibrate_constants(g);
    g.safety_factor = 1.0;
    const auto plain = calibrate_constants(g);
    CHECK_THAT(*doubled.constants.d_high, WithinRel(2.0 * *plain.constants.d_high, 1e-14));
    CHECK_THAT(*doubled.constants.d_low, WithinRel(2.0 * *plain.constants.d_low, 1e-14));
    g.safety_factor = 0.5;
    CHECK_THROWS_AS(calibrate_constants(g), std::invalid_argument);
    CHECK_THROWS(calibrate_constants(CalibrationGrid{{1.0}, 2, 10, 1.0}));
    const auto only_high = calibrate_constants(CalibrationGrid{{0.5}, 2, 50, 1.0});
    CHECK(only_high.constants.d_high);
    CHECK_FALSE(only_high.constants.d_low);
}

TEST_CASE("link function and its inverse", "[regimes]") {
    const auto iv = default_intervals(1000);
    CHECK_THAT(theta_inf(0.5, iv), WithinRel(1.0 / 500.0, 1e-14));
    CHECK_THAT(theta_inf(2.0, iv), WithinRel(std::pow(m_of_beta(2.0), 2), 1e-14));
    CHECK(theta_inf(-kInf, iv) == 0.0);
    CHECK(theta_inf(kInf, iv) == 1.0);
    CHECK_THROWS_AS(theta_inf(1.0, iv), OutOfDomain);

    for (double beta : {-20.0, -1.0, 0.0, 0.3, 0.8, 1.25, 1.7, 3.0, 10.0}) {
        CHECK_THAT(theta_inf_inverse(theta_inf(beta, iv), iv), WithinAbs(beta, 1e-9 * std::max(1.0, std::abs(beta))));
    }
    CHECK(theta_inf_inverse(0.0, iv) == -kInf);
    CHECK(theta_inf_inverse(1.0, iv) == kInf);
    CHECK_THROWS_AS(theta_inf_inverse(0.2, iv), OutOfDomain);

    for (double y : {1e-4, 2e-3, 0.6, 0.9}) {
        const double h = 1e-7 * y;
        const double fd = (theta_inf_inverse(y + h, iv) - theta_inf_inverse(y - h, iv)) / (2.0 * h);
        CHECK_THAT(theta_inf_inverse_derivative(y, 1000, 0.8, 1.25), WithinRel(fd, 1e-5));
    }
}

TEST_CASE("link inverse needs separated branches", "[regimes]") {
    // 1/((1 - b1) N) >= m(b2)^2 for tiny N.
    CHECK_THROWS_AS(theta_inf_inverse(0.3, 1, 0.8, 1.25), SeparationViolated);
}

TEST_CASE("asymptotic weights", "[regimes]") {
    CHECK_THAT(asymptotic_weight(0.0, 10000), WithinRel(std::sqrt(2.0 / M_PI) * 100.0, 1e-14));
    CHECK_THAT(asymptotic_weight(2.0, 10000), WithinRel(m_of_beta(2.0) * 10000.0, 1e-14));
    CHECK(asymptotic_weight(-kInf, 100) == 0.0);
    CHECK(asymptotic_weight(kInf, 100) == 100.0);
    CHECK_THROWS_AS(asymptotic_weight(1.0, 100), OutOfDomain);
    const auto iv = default_intervals(1000);
    CHECK_THROWS_AS(psi_inf(1.1, iv), OutOfDomain);
    CHECK_THAT(psi_inf(0.5, iv), WithinRel(asymptotic_weight(0.5, 1000), 1e-15));
}
