#include "cwvote/curie_weiss.hpp"
#include "cwvote/errors.hpp"
#include "cwvote/large_deviations.hpp"
#include "cwvote/model.hpp"
#include "cwvote/rng.hpp"
#include "reference_values.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

using namespace cwvote;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

FiniteLaw s2_law(double beta, std::int64_t n) { return FiniteLaw::of_square(MagnetizationDistribution(beta, n)); }

RegimeIntervals loose_intervals(std::int64_t n) { return build_intervals(0.8, 1.25, n, 0.5, 0.05); }

RegimeIntervals default_intervals(std::int64_t n) {
    const auto c = default_constants();
    return build_intervals(kDefaultB1, kDefaultB2, n, *c.d_high, *c.d_low);
}

} // namespace

TEST_CASE("cumulant generating function", "[ldp]") {
    const FiniteLaw r = FiniteLaw::rademacher();
    CHECK(r.cumulant(0.0) == 0.0);
    CHECK_THAT(r.cumulant(0.7), WithinRel(std::log(std::cosh(0.7)), 1e-14));
    CHECK_THAT(r.cumulant_derivative(0.7), WithinRel(std::tanh(0.7), 1e-14));
    CHECK_THAT(r.cumulant(800.0), WithinRel(800.0 - std::log(2.0), 1e-14));

    const FiniteLaw law = s2_law(0.5, 30);
    CHECK_THAT(law.cumulant(0.0), WithinAbs(0.0, 1e-15));
    CHECK_THAT(law.mean(), WithinRel(exact_moment(0.5, 30, 2), 1e-12));
    // Convexity and monotone derivative on a grid.
    const double h = 1e-3;
    double prev = -kInf;
    for (double t = -0.05; t <= 0.05; t += h) {
        const double second = law.cumulant(t + h) - 2.0 * law.cumulant(t) + law.cumulant(t - h);
        CHECK(second >= -1e-9);
        const double d = law.cumulant_derivative(t);
        CHECK(d > prev);
        CHECK(d > law.min());
        CHECK(d < law.max());
        prev = d;
    }
}

TEST_CASE("Rademacher entropy", "[ldp]") {
    CHECK(rademacher_entropy(0.0) == 0.0);
    CHECK_THAT(rademacher_entropy(1.0), WithinRel(std::log(2.0), 1e-15));
    CHECK_THAT(rademacher_entropy(-1.0), WithinRel(std::log(2.0), 1e-15));
    CHECK(rademacher_entropy(1.5) == kInf);
    CHECK_THAT(rademacher_entropy(0.5), WithinRel(ref::rademacher_half, 1e-14));

    const FiniteLaw r = FiniteLaw::rademacher();
    CHECK(r.legendre(0.0) == 0.0);
    CHECK_THAT(r.legendre(1.0), WithinRel(std::log(2.0), 1e-15));
    CHECK_THAT(r.legendre(-1.0), WithinRel(std::log(2.0), 1e-15));
    CHECK_THAT(r.legendre(0.5), WithinRel(ref::rademacher_half, 1e-12));
    for (double x = -0.999; x < 1.0; x += 0.037) {
        CHECK_THAT(r.legendre(x), WithinAbs(rademacher_entropy(x), 1e-12));
    }
}

TEST_CASE("Legendre transform of S^2 laws", "[ldp]") {
    const FiniteLaw a = s2_law(0.5, 10);
    CHECK_THAT(a.legendre(30.0), WithinRel(ref::legendre_half_10_at_30, 1e-10));
    CHECK_THAT(a.legendre(5.0), WithinRel(ref::legendre_half_10_at_5, 1e-10));
    CHECK_THAT(s2_law(2.0, 20).legendre(200.0), WithinRel(ref::legendre_2_20_at_200, 1e-10));

    for (double beta : {-1.0, 0.0, 0.5, 2.0}) {
        for (std::int64_t n : {4, 15, 100}) {
            const FiniteLaw law = s2_law(beta, n);
            CHECK_THAT(law.legendre(law.mean()), WithinAbs(0.0, 1e-13));
            const double nd = static_cast<double>(n);
            CHECK(law.legendre(nd * nd + 1.0) == kInf);
            CHECK(law.legendre(-1.0) == kInf);
            const MagnetizationDistribution m(beta, n);
            CHECK_THAT(law.legendre(nd * nd), WithinRel(-std::log(2.0 * m.pmf(n)), 1e-10));

            const double lo = law.min();
            const double hi = law.max();
            const double step = (hi - lo) / 200.0;
            for (double x = lo + step; x < hi - step / 2; x += step) {
                const double v = law.legendre(x);
                if (std::abs(x - law.mean()) > 1e-6 * (hi - lo)) CHECK(v > 0.0);
                const double second = law.legendre(x + step / 4) - 2.0 * v + law.legendre(x - step / 4);
                CHECK(second >= -1e-9);
            }
        }
    }
}

TEST_CASE("degenerate law", "[ldp]") {
    const FiniteLaw one({3.0}, {0.0});
    CHECK(one.degenerate());
    CHECK(one.legendre(3.0) == 0.0);
    CHECK(one.legendre(3.1) == kInf);
    CHECK(s2_law(0.5, 1).legendre(1.0) == 0.0);
}

TEST_CASE("Chernoff bound holds for sums of a few squared margins", "[ldp]") {
    for (std::int64_t n : {3, 6, 12}) {
        const FiniteLaw law = s2_law(0.7, n);
        // Law of the sum of k independent copies, by convolution.
        std::map<double, double> sum{{0.0, 1.0}};
        for (int k = 1; k <= 4; ++k) {
            std::map<double, double> next;
            for (const auto& [v, p] : sum) {
                for (std::size_t i = 0; i < law.values().size(); ++i) {
                    next[v + law.values()[i]] += p * std::exp(law.log_probabilities()[i]);
                }
            }
            sum = next;
            for (int j = 1; j <= 20; ++j) {
                const double a = law.mean() + (law.max() - law.mean()) * j / 21.0;
                double tail = 0.0;
                for (const auto& [v, p] : sum) {
                    if (v / k >= a) tail += p;
                }
                CHECK(tail <= std::exp(-k * law.legendre(a)) * (1.0 + 1e-9));
            }
        }
    }
}

TEST_CASE("rate functions of S/N and (S/N)^2", "[ldp]") {
    CHECK(rate_I(0.0, 0.0) == 0.0);
    CHECK_THAT(rate_I(2.0, ref::m_2), WithinAbs(0.0, 1e-15));
    CHECK_THAT(rate_I(2.0, -ref::m_2), WithinAbs(0.0, 1e-15));
    CHECK_THAT(rate_J(0.0, 0.25), WithinRel(rademacher_entropy(0.5), 1e-14));
    CHECK(rate_I(0.5, 1.2) == kInf);
    CHECK(rate_J(0.5, -0.1) == kInf);
    CHECK_THROWS_AS(rate_I(-0.5, 0.1), std::invalid_argument);

    for (double beta : {0.0, 0.5, 1.0, 1.5, 3.0}) {
        const double m = m_of_beta(beta);
        for (double x = -1.0; x <= 1.0; x += 0.01) {
            CHECK(rate_I(beta, x) >= 0.0);
            if (std::abs(std::abs(x) - m) > 0.02) CHECK(rate_I(beta, x) > 0.0);
        }
        CHECK_THAT(rate_J(beta, m * m), WithinAbs(0.0, 1e-15));
    }
}

TEST_CASE("misidentification bounds", "[ldp]") {
    const auto iv = loose_intervals(200);
    const MisidBound b = misid_bounds(iv, 0.5);
    CHECK(b.true_regime == RegimeLabel::HighTemp);
    CHECK(b.eta > 0.0);
    CHECK(b.target == iv.j_l_lower);
    CHECK_THAT(b.eta, WithinRel(s2_law(0.5, 200).legendre(iv.j_l_lower), 1e-14));
    CHECK(b.probability_bound(10) < b.probability_bound(5));

    const MisidBound low = misid_bounds(iv, 2.0);
    CHECK(low.true_regime == RegimeLabel::LowTemp);
    CHECK(low.eta > 0.0);
    CHECK(low.target == iv.j_h_upper);

    CHECK_THROWS_AS(misid_bounds(iv, 1.0), OutOfDomain);

    // Intervals whose J_l reaches below the mean.
    RegimeIntervals bad = iv;
    bad.j_l_lower = 100.0;
    CHECK_THROWS_AS(misid_bounds(bad, 0.5), DegenerateBound);

    const std::vector<MisidBound> all{b, low, misid_bounds(iv, 0.2)};
    const auto agg = aggregate_misid(all);
    CHECK(*agg.eta2 == std::min(b.eta, all[2].eta));
    CHECK(*agg.eta3 == low.eta);
}

TEST_CASE("sign-error rate", "[ldp]") {
    CHECK_THROWS_AS(sign_error_theta(0.0, 100), DegenerateBound);
    CHECK_THROWS_AS(sign_error_theta(-1.0, 100), DegenerateBound);
    const double theta = sign_error_theta(0.5, 100);
    CHECK(theta > 0.0);
    const FiniteLaw law = s2_law(0.5, 100);
    CHECK(theta == std::min(law.legendre(100.0), law.legendre(1e4)));
}

TEST_CASE("confidence intervals", "[ldp]") {
    const Estimate high{EstimateKind::HighTemp, 0.5};
    const auto ci = confidence_interval(high, 1000, 20000, 0.95);
    const double z = 1.959963984540054;
    CHECK_THAT(ci.upper - high.value, WithinRel(z * std::sqrt(2.0) * 0.5 / std::sqrt(1000.0), 0.02));
    CHECK_THAT(ci.limiting_variance, WithinRel(0.5, 1e-14));
    CHECK(ci.lower < 0.5);

    double prev = kInf;
    for (std::int64_t n : {100, 1000, 10000}) {
        const auto lci = confidence_interval(Estimate{EstimateKind::LowTemp, 2.0}, 50, n, 0.95);
        const double half = lci.upper - 2.0;
        CHECK(half < prev);
        CHECK(lci.limiting_variance == 0.0);
        prev = half;
    }
    CHECK(prev < 0.01);

    CHECK_THROWS_AS(confidence_interval(Estimate{}, 100, 100, 0.95), InconclusiveEstimate);
    CHECK_THROWS_AS(confidence_interval(Estimate{EstimateKind::LowTemp, kInf}, 100, 100, 0.95), OutOfDomain);
    CHECK_THROWS_AS(confidence_interval(high, 1, 100, 0.95), std::invalid_argument);
    CHECK_THROWS_AS(confidence_interval(high, 10, 100, 1.0), std::invalid_argument);
}

TEST_CASE("sample-size planning", "[ldp]") {
    const auto iv = default_intervals(500);
    CHECK(plan_sample_size(iv, 1.0).n == 1);
    const auto p3 = plan_sample_size(iv, 1e-3);
    CHECK(p3.bound < 1e-3);
    CHECK(std::max(std::exp(-p3.eta_high * (p3.n - 1.0)), std::exp(-p3.eta_low * (p3.n - 1.0))) >= 1e-3);
    const auto p6 = plan_sample_size(iv, 0.5e-3);
    const double eta = std::min(p3.eta_high, p3.eta_low);
    CHECK(std::abs(static_cast<double>(p6.n) - static_cast<double>(p3.n) - std::log(2.0) / eta) <= 1.0);
    CHECK_THROWS_AS(plan_sample_size(iv, 0.0), std::invalid_argument);

    RegimeIntervals overlap = iv;
    overlap.j_l_lower = overlap.j_h_upper;
    CHECK_THROWS_AS(plan_sample_size(overlap, 0.1), SeparationViolated);
}

TEST_CASE("rate function of the coupling estimator", "[ldp]") {
    const auto iv = loose_intervals(200);
    const double bt = pseudo_true_beta(0.5, iv);
    CHECK_THAT(estimator_rate(0.5, iv, bt), WithinAbs(0.0, 1e-12));
    for (double b = -3.0; b <= 0.7; b += 0.05) CHECK(estimator_rate(0.5, iv, b) >= 0.0);
    for (double b = 1.3; b <= 6.0; b += 0.1) CHECK(estimator_rate(0.5, iv, b) > 0.0);
    CHECK_THROWS_AS(estimator_rate(0.5, iv, 1.0), OutOfDomain);
    CHECK_FALSE(in_estimator_codomain(1.0, iv));
    CHECK(in_estimator_codomain(kInf, iv));

    const double bl = pseudo_true_beta(2.0, iv);
    CHECK_THAT(estimator_rate(2.0, iv, bl), WithinAbs(0.0, 1e-12));

    const std::vector<double> betas{0.5, 2.0};
    const std::vector<RegimeIntervals> ivs{iv, iv};
    const std::vector<double> bs{0.6, 2.2};
    CHECK_THAT(estimator_rate(betas, ivs, bs),
               WithinRel(estimator_rate(0.5, iv, 0.6) + estimator_rate(2.0, iv, 2.2), 1e-14));
}

TEST_CASE("rate function of the weight estimator", "[ldp]") {
    const auto iv = loose_intervals(200);
    const auto prof = weight_rate_profile(0.5, iv);
    REQUIRE(prof.minimizers.size() == 1);
    const double z0 = prof.minimizers[0];
    CHECK_THAT(weight_rate(0.5, iv, z0), WithinAbs(0.0, 1e-12));
    CHECK(weight_rate(0.5, iv, -1.0) == kInf);
    CHECK(weight_rate(0.5, iv, 201.0) == kInf);
    // Between the two branch images.
    const double gap_z = 0.5 * (std::sqrt(2.0 * iv.j_h_upper / M_PI) + std::sqrt(iv.j_l_lower));
    CHECK(weight_rate(0.5, iv, gap_z) == kInf);
    double prev = 0.0;
    for (double z = z0; z <= std::sqrt(2.0 * iv.j_h_upper / M_PI); z += 0.25) {
        const double h = weight_rate(0.5, iv, z);
        CHECK(h >= prev - 1e-12);
        prev = h;
    }
}

TEST_CASE("rate profiles export as CSV", "[ldp]") {
    const auto prof = rate_I_profile(2.0);
    CHECK(prof.minimizers.size() == 2);
    const std::vector<double> xs{-1.5, -ref::m_2, 0.0, 1.0};
    std::ostringstream out;
    write_rate_csv(out, prof, xs);
    const std::string csv = out.str();
    CHECK(csv.rfind("x,rate\n", 0) == 0);
    CHECK(csv.find("-1.5,inf\n") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

    const auto ep = estimator_rate_profile(0.5, loose_intervals(200));
    const std::vector<double> grid{0.0, 0.5, 1.0, 2.0};
    CHECK(ep.tabulate(grid).size() == 3); // 1.0 lies in the gap
    CHECK(rate_J_profile(0.0).minimizers[0] == 0.0);
}

TEST_CASE("tail frequency of the estimator against its rate", "[ldp]") {
    // -(1/n) ln P{estimate >= beta~ + delta} stays above J and closes in on it.
    const auto iv = loose_intervals(200);
    const double bt = pseudo_true_beta(0.5, iv);
    const double delta = 0.1;
    const double a = 200.0 / (1.0 - (bt + delta));
    const double rate = estimator_rate(0.5, iv, bt + delta);
    const MarginSampler sampler(ModelSpec{{200}, {0.5}});
    std::vector<double> excess;
    for (std::size_t n : {25, 50, 100}) {
        const std::size_t reps = 40000;
        std::size_t hits = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            const auto s = sample(sampler, n, derive_seed(31337 + n, r));
            hits += statistic_T(s)[0] >= a ? 1 : 0;
        }
        REQUIRE(hits > 0);
        const double p = static_cast<double>(hits) / reps;
        CHECK(p <= std::exp(-static_cast<double>(n) * rate) + 3.0 * std::sqrt(p * (1 - p) / reps));
        excess.push_back(-std::log(p) / static_cast<double>(n) - rate);
    }
    CHECK(excess[0] > excess[2]);
}
