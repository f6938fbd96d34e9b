#include "cwvote/curie_weiss.hpp"
#include "cwvote/errors.hpp"
#include "cwvote/estimators.hpp"
#include "cwvote/report.hpp"
#include "reference_values.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace cwvote;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Small constants keep J_h and J_l separated at N = 100.
RegimeIntervals loose_intervals(std::int64_t n) { return build_intervals(0.8, 1.25, n, 0.5, 0.05); }

} // namespace

TEST_CASE("large-N estimator on each branch", "[estimators]") {
    const auto iv = loose_intervals(100);
    const Estimate high = estimate_beta_inf(200.0, iv);
    CHECK(high.kind == EstimateKind::HighTemp);
    CHECK_THAT(high.value, WithinAbs(0.5, 1e-15));

    const double m = m_of_beta(2.0);
    const Estimate low = estimate_beta_inf(100.0 * 100.0 * m * m, iv);
    CHECK(low.kind == EstimateKind::LowTemp);
    CHECK_THAT(low.value, WithinAbs(2.0, 1e-8));

    const double gap_t = 0.5 * (iv.j_h_upper + iv.j_l_lower);
    const Estimate u = estimate_beta_inf(gap_t, iv);
    CHECK(u.kind == EstimateKind::Inconclusive);
    CHECK_FALSE(u.conclusive());
    CHECK(to_string(u.kind) == "u");
}

TEST_CASE("atypical estimates are reported, not clamped", "[estimators]") {
    const auto iv = loose_intervals(100);
    const Estimate neg = estimate_beta_inf(50.0, iv);
    CHECK(neg.value == -1.0);
    CHECK(neg.atypical());
    const Estimate zero = estimate_beta_inf(0.0, iv);
    CHECK(zero.value == -kInf);
    CHECK(zero.atypical());
    const Estimate top = estimate_beta_inf(1e4, iv);
    CHECK(top.kind == EstimateKind::LowTemp);
    CHECK(top.value == kInf);
    CHECK(top.atypical());
    CHECK_THROWS_AS(estimate_beta_inf(1e4 + 1, iv), OutOfRange);
    CHECK_THROWS_AS(estimate_beta_inf(-1.0, iv), std::invalid_argument);
}

TEST_CASE("estimate labels follow interval membership over Range(S^2)", "[estimators]") {
    for (std::int64_t n : {60, 101, 200}) {
        const auto iv = loose_intervals(n);
        for (std::int64_t s = n % 2; s <= n; s += 2) {
            const double t = static_cast<double>(s * s);
            const Estimate e = estimate_beta_inf(t, iv);
            switch (iv.statistic_regime(t)) {
            case RegimeLabel::HighTemp: CHECK(e.kind == EstimateKind::HighTemp); break;
            case RegimeLabel::LowTemp: CHECK(e.kind == EstimateKind::LowTemp); break;
            case RegimeLabel::Critical: CHECK(e.kind == EstimateKind::Inconclusive); break;
            }
        }
    }
}

TEST_CASE("exact MLE inverts the exact second moment", "[estimators]") {
    CHECK_THAT(exact_mle(exact_moment(0.5, 50, 2), 50), WithinAbs(0.5, 1e-8));
    CHECK_THAT(exact_mle(50.0, 50), WithinAbs(0.0, 1e-8));
    CHECK(exact_mle(2500.0, 50) == kInf);
    CHECK(exact_mle(0.0, 50) == -kInf);
    CHECK(exact_mle(1.0, 51) == -kInf);
    CHECK_THROWS_AS(exact_mle(0.5, 51), OutOfRange);
    CHECK_THROWS_AS(exact_mle(2501.0, 50), OutOfRange);
    CHECK_THROWS_AS(exact_mle(1.0, 1), OutOfDomain);
    for (std::int64_t n : {2, 7, 50, 400}) {
        for (double beta = -2.0; beta <= 3.0; beta += 0.125) {
            CHECK_THAT(exact_mle(exact_moment(beta, n, 2), n), WithinAbs(beta, 1e-8));
        }
    }
}

TEST_CASE("pseudo-true coupling", "[estimators]") {
    for (std::int64_t n : {10, 100, 1000}) {
        CHECK(pseudo_true_beta(0.0, loose_intervals(std::max<std::int64_t>(n, 60))) ==
              Catch::Approx(0.0).margin(1e-12));
    }
    CHECK_THAT(pseudo_true_beta(0.5, loose_intervals(100)), WithinRel(ref::pseudo_true_half_100, 1e-12));
    CHECK_THROWS_AS(pseudo_true_beta(1.0, loose_intervals(100)), OutOfDomain);
    CHECK_THROWS_AS(pseudo_true_beta(-0.5, loose_intervals(100)), OutOfDomain);

    for (double beta : {0.5, 2.0}) {
        double prev = kInf;
        for (std::int64_t n : {100, 1000, 10000}) {
            const double gap = std::abs(pseudo_true_beta(beta, loose_intervals(n)) - beta);
            CHECK(gap < prev);
            prev = gap;
        }
    }
}

TEST_CASE("weight estimate composes the link with the estimate", "[estimators]") {
    const auto iv = loose_intervals(100);
    CHECK_THAT(*estimate_weight(100.0, iv), WithinRel(std::sqrt(2.0 / M_PI) * 10.0, 1e-14));
    const double m = m_of_beta(2.0);
    CHECK_THAT(*estimate_weight(1e4 * m * m, iv), WithinRel(m * 100.0, 1e-12));
    CHECK_FALSE(estimate_weight(0.5 * (iv.j_h_upper + iv.j_l_lower), iv));
    CHECK(*estimate_weight(0.0, iv) == 0.0);
    CHECK(*estimate_weight(1e4, iv) == 100.0);
    CHECK_THAT(pseudo_true_weight(0.0, 3), WithinAbs(1.5, 1e-14));
}

TEST_CASE("equal statistics give identical reports", "[estimators]") {
    const std::vector<RegimeIntervals> iv{loose_intervals(100), loose_intervals(101)};
    const VotingSample a({100, 101}, 3, {10, 11, -10, -11, 0, 1});
    const VotingSample b({100, 101}, 3, {0, -1, 10, 11, -10, 11});
    const auto ta = statistic_T(a);
    const auto tb = statistic_T(b);
    REQUIRE(ta == tb);
    ReportOptions opt;
    opt.include_exact_mle = true;
    const auto ra = to_json(make_estimation_report(ta, 3, iv, opt));
    const auto rb = to_json(make_estimation_report(tb, 3, iv, opt));
    CHECK(ra == rb);
}

TEST_CASE("report fields agree with each other", "[estimators]") {
    const std::vector<RegimeIntervals> iv{loose_intervals(100)};
    const double m = m_of_beta(2.0);
    for (double t : {150.0, 200.0, 1e4 * m * m, 0.5 * (iv[0].j_h_upper + iv[0].j_l_lower)}) {
        ReportOptions opt;
        opt.true_couplings = std::vector<double>{0.5};
        const auto rep = make_estimation_report(std::vector<double>{t}, 50, iv, opt);
        const auto& g = rep.groups[0];
        const auto label = iv[0].statistic_regime(t);
        CHECK((label == RegimeLabel::Critical) == !g.estimate.conclusive());
        CHECK((label == RegimeLabel::HighTemp) == (g.estimate.kind == EstimateKind::HighTemp));
        CHECK(g.beta_tilde);
        CHECK(rep.any_inconclusive() == !g.estimate.conclusive());
        if (g.ci) CHECK((g.ci->lower <= g.estimate.value && g.estimate.value <= g.ci->upper));
    }
}
