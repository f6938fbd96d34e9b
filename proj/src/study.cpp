#include "cwvote/study.hpp"

#include "cwvote/curie_weiss.hpp"
#include "cwvote/errors.hpp"
#include "cwvote/large_deviations.hpp"
#include "cwvote/rng.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace cwvote {

namespace {

// Runs body(i) for i in [0, count) over worker threads. Each index writes to
// its own slot, so results do not depend on scheduling.
template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
    unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

double quantile_sorted(const std::vector<double>& xs, double q) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

bool label_matches(EstimateKind kind, RegimeLabel truth) {
    return (truth == RegimeLabel::HighTemp && kind == EstimateKind::HighTemp) ||
           (truth == RegimeLabel::LowTemp && kind == EstimateKind::LowTemp);
}

double binomial_se(double p, std::size_t reps) {
    return std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
}

void summarize(StudyCell& cell) {
    std::vector<double> xs;
    for (const auto& e : cell.estimates) {
        switch (e.kind) {
        case EstimateKind::HighTemp: ++cell.count_high; break;
        case EstimateKind::LowTemp: ++cell.count_low; break;
        case EstimateKind::Inconclusive: ++cell.count_inconclusive; break;
        }
        if (e.atypical()) ++cell.count_atypical;
        if (e.conclusive() && std::isfinite(e.value)) xs.push_back(e.value);
    }
    if (xs.empty()) return;
    const double k = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= k;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= k;
    m3 /= k;
    m4 /= k;
    cell.mean = mean;
    cell.scaled_variance = (xs.size() > 1) ? static_cast<double>(cell.n) * m2 * k / (k - 1.0) : 0.0;
    cell.skewness = (m2 > 0.0) ? m3 / std::pow(m2, 1.5) : 0.0;
    cell.excess_kurtosis = (m2 > 0.0) ? m4 / (m2 * m2) - 3.0 : 0.0;

    std::sort(xs.begin(), xs.end());
    cell.median = quantile_sorted(xs, 0.5);
    cell.iqr = quantile_sorted(xs, 0.75) - quantile_sorted(xs, 0.25);
    if (cell.beta_tilde) {
        std::vector<double> dev;
        for (double x : xs) dev.push_back(std::abs(x - *cell.beta_tilde));
        std::sort(dev.begin(), dev.end());
        cell.median_abs_deviation = quantile_sorted(dev, 0.5);
    }
}

void add_check(StudyCell& cell, StudyTarget target, std::string name, bool passed, double observed,
               double reference, double tolerance, std::string detail = {}) {
    cell.checks.push_back({target, std::move(name), passed, observed, reference, tolerance, std::move(detail)});
}

void evaluate_targets(StudyCell& cell, const StudyConfig& cfg) {
    const std::size_t reps = cell.estimates.size();
    const std::size_t conclusive = cell.count_high + cell.count_low;

    if (!cell.beta_tilde) {
        add_check(cell, StudyTarget::Consistency, "targets", false, 0, 0, 0,
                  "true coupling lies in the critical interval; no pseudo-true value");
        return;
    }
    const double bt = *cell.beta_tilde;

    if (cfg.wants(StudyTarget::Consistency) && conclusive > 1) {
        const double tol_med = 3.0 * cell.iqr / std::sqrt(static_cast<double>(reps));
        add_check(cell, StudyTarget::Consistency, "median", std::abs(cell.median - bt) <= tol_med,
                  cell.median, bt, tol_med);
        const double se = std::sqrt(cell.scaled_variance / static_cast<double>(cell.n) /
                                     static_cast<double>(conclusive));
        add_check(cell, StudyTarget::Consistency, "mean", std::abs(cell.mean - bt) <= 3.0 * se, cell.mean,
                  bt, 3.0 * se);
    }

    if (cfg.wants(StudyTarget::Clt) && conclusive > 1) {
        try {
            const Estimate at_truth{cell.true_regime == RegimeLabel::HighTemp ? EstimateKind::HighTemp
                                                                              : EstimateKind::LowTemp,
                                    bt};
            cell.predicted_scaled_variance = estimator_variance(at_truth, cell.group_size);
            const double tol = (cell.true_regime == RegimeLabel::HighTemp) ? cfg.variance_tolerance_high
                                                                           : cfg.variance_tolerance_low;
            const double rel = std::abs(cell.scaled_variance / *cell.predicted_scaled_variance - 1.0);
            add_check(cell, StudyTarget::Clt, "variance", rel <= tol, cell.scaled_variance,
                      *cell.predicted_scaled_variance, tol, "relative error");
        } catch (const Error& e) {
            add_check(cell, StudyTarget::Clt, "variance", false, 0, 0, 0, e.what());
        }
        // Normal reference: 0.1 / 0.2, widened to 4 standard errors for small studies.
        const double k = static_cast<double>(conclusive);
        const double skew_tol = std::max(0.1, 4.0 * std::sqrt(6.0 / k));
        const double kurt_tol = std::max(0.2, 4.0 * std::sqrt(24.0 / k));
        add_check(cell, StudyTarget::Clt, "skewness", std::abs(cell.skewness) <= skew_tol, cell.skewness,
                  0.0, skew_tol);
        add_check(cell, StudyTarget::Clt, "excess_kurtosis", std::abs(cell.excess_kurtosis) <= kurt_tol,
                  cell.excess_kurtosis, 0.0, kurt_tol);
    }

    if (cfg.wants(StudyTarget::Coverage) && cell.n >= 2) {
        std::size_t covered = 0;
        for (const auto& e : cell.estimates) {
            if (!e.conclusive() || !std::isfinite(e.value)) continue;
            try {
                const auto ci = confidence_interval(e, cell.n, cell.group_size, cfg.level);
                if (ci.lower <= bt && bt <= ci.upper) ++covered;
            } catch (const Error&) {
                // No interval: counts as not covering.
            }
        }
        cell.coverage = static_cast<double>(covered) / static_cast<double>(reps);
        add_check(cell, StudyTarget::Coverage, "coverage",
                  std::abs(*cell.coverage - cfg.level) <= cfg.coverage_tolerance, *cell.coverage, cfg.level,
                  cfg.coverage_tolerance);
    }

    if (cfg.wants(StudyTarget::Misid)) {
        try {
            const auto bound = misid_bounds(cell.intervals, cell.beta);
            std::size_t wrong = 0;
            for (const auto& e : cell.estimates) wrong += label_matches(e.kind, cell.true_regime) ? 0 : 1;
            const double p = static_cast<double>(wrong) / static_cast<double>(reps);
            cell.misid_frequency = p;
            cell.misid_bound = bound.probability_bound(cell.n);
            const double tol = 3.0 * binomial_se(p, reps);
            add_check(cell, StudyTarget::Misid, "misid", p <= *cell.misid_bound + tol, p, *cell.misid_bound,
                      tol);
        } catch (const Error& e) {
            add_check(cell, StudyTarget::Misid, "misid", false, 0, 0, 0, e.what());
        }
    }

    if (cfg.wants(StudyTarget::Tails)) {
        const double b = bt + cfg.tail_delta;
        if (!in_estimator_codomain(b, cell.intervals)) {
            add_check(cell, StudyTarget::Tails, "upper_tail", false, 0, 0, 0,
                      "beta~ + delta falls in the gap between the branches");
        } else {
            // {estimate >= b} = {T >= N^2 theta(b)}, counting inconclusive samples
            // above the gap as well.
            const double nd = static_cast<double>(cell.group_size);
            const double a = (b < 1.0) ? nd / (1.0 - b) : std::pow(m_of_beta(b) * nd, 2);
            std::size_t hits = 0;
            for (double t : cell.statistics) hits += (t >= a) ? 1 : 0;
            const double p = static_cast<double>(hits) / static_cast<double>(reps);
            const double rate = estimator_rate(cell.beta, cell.intervals, b);
            cell.tail_frequency = p;
            cell.tail_bound = std::exp(-static_cast<double>(cell.n) * rate);
            const double tol = 3.0 * binomial_se(p, reps);
            add_check(cell, StudyTarget::Tails, "upper_tail", p <= *cell.tail_bound + tol, p, *cell.tail_bound,
                      tol);
        }
    }
}

} // namespace

std::string to_string(StudyTarget target) {
    switch (target) {
    case StudyTarget::Consistency: return "consistency";
    case StudyTarget::Coverage: return "coverage";
    case StudyTarget::Misid: return "misid";
    case StudyTarget::Clt: return "clt";
    case StudyTarget::Tails: return "tails";
    }
    return "?";
}

StudyTarget parse_study_target(const std::string& name) {
    for (auto t : {StudyTarget::Consistency, StudyTarget::Coverage, StudyTarget::Misid, StudyTarget::Clt,
                   StudyTarget::Tails}) {
        if (to_string(t) == name) return t;
    }
    throw std::invalid_argument("unknown study target '" + name + "'");
}

void StudyConfig::validate() const {
    spec.validate();
    if (replications < 1) throw std::invalid_argument("replications must be >= 1");
    if (sample_sizes.empty()) throw std::invalid_argument("study needs at least one sample size");
    for (auto n : sample_sizes) {
        if (n < 1) throw std::invalid_argument("sample sizes must be >= 1");
    }
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
    if (!(b1 < 1.0 && b2 > 1.0)) throw std::invalid_argument("need b1 < 1 < b2");
}

bool StudyReport::all_passed() const {
    for (const auto& c : cells) {
        for (const auto& chk : c.checks) {
            if (!chk.passed) return false;
        }
    }
    return true;
}

StudyReport run_study(const StudyConfig& config) {
    config.validate();
    const ErrorConstants defaults = default_constants();
    const double d_high = config.constants.d_high.value_or(*defaults.d_high);
    const double d_low = config.constants.d_low.value_or(*defaults.d_low);

    StudyReport report;
    report.config = config;
    const MarginSampler sampler(config.spec);
    const std::size_t groups = config.spec.groups();

    for (std::size_t ni = 0; ni < config.sample_sizes.size(); ++ni) {
        const std::size_t n = config.sample_sizes[ni];
        // T[r][g]
        std::vector<std::vector<double>> stats(config.replications);
        const std::uint64_t n_seed = derive_seed(config.seed, ni);
        parallel_for(config.replications, config.threads, [&](std::size_t r) {
            stats[r] = statistic_T(sample(sampler, n, derive_seed(n_seed, r)));
        });

        for (std::size_t g = 0; g < groups; ++g) {
            StudyCell cell;
            cell.group = g;
            cell.group_size = config.spec.group_sizes[g];
            cell.beta = config.spec.couplings[g];
            cell.n = n;
            cell.intervals = build_intervals(config.b1, config.b2, cell.group_size, d_high, d_low);
            cell.true_regime = cell.intervals.coupling_regime(cell.beta);
            if (cell.true_regime != RegimeLabel::Critical && cell.beta >= 0.0) {
                cell.beta_tilde = pseudo_true_beta(cell.beta, cell.intervals);
            }
            cell.statistics.reserve(config.replications);
            cell.estimates.reserve(config.replications);
            for (std::size_t r = 0; r < config.replications; ++r) {
                cell.statistics.push_back(stats[r][g]);
                cell.estimates.push_back(estimate_beta_inf(stats[r][g], cell.intervals));
            }
            summarize(cell);
            evaluate_targets(cell, config);
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

namespace {

nlohmann::json number_or_null(const std::optional<double>& x) {
    if (!x || !std::isfinite(*x)) return nullptr;
    return *x;
}

nlohmann::json finite_or_string(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

} // namespace

nlohmann::json to_json(const StudyReport& report) {
    using nlohmann::json;
    const auto& cfg = report.config;
    json targets = json::array();
    for (auto t : {StudyTarget::Consistency, StudyTarget::Coverage, StudyTarget::Misid, StudyTarget::Clt,
                   StudyTarget::Tails}) {
        if (cfg.wants(t)) targets.push_back(to_string(t));
    }
    json out = {
        {"schema_version", 1},
        {"config",
         {{"group_sizes", cfg.spec.group_sizes},
          {"couplings", cfg.spec.couplings},
          {"replications", cfg.replications},
          {"sample_sizes", cfg.sample_sizes},
          {"seed", cfg.seed},
          {"targets", targets},
          {"b1", cfg.b1},
          {"b2", cfg.b2},
          {"level", cfg.level},
          {"tail_delta", cfg.tail_delta}}},
        {"all_passed", report.all_passed()},
    };
    json cells = json::array();
    for (const auto& c : report.cells) {
        json checks = json::array();
        for (const auto& k : c.checks) {
            checks.push_back({{"target", to_string(k.target)},
                              {"name", k.name},
                              {"passed", k.passed},
                              {"observed", finite_or_string(k.observed)},
                              {"reference", finite_or_string(k.reference)},
                              {"tolerance", finite_or_string(k.tolerance)},
                              {"detail", k.detail}});
        }
        cells.push_back({
            {"group", c.group},
            {"N", c.group_size},
            {"beta", c.beta},
            {"n", c.n},
            {"true_regime", to_string(c.true_regime)},
            {"beta_tilde", number_or_null(c.beta_tilde)},
            {"intervals",
             {{"j_h_lower", c.intervals.j_h_lower},
              {"j_h_upper", c.intervals.j_h_upper},
              {"j_l_lower", c.intervals.j_l_lower}}},
            {"counts",
             {{"high", c.count_high},
              {"low", c.count_low},
              {"inconclusive", c.count_inconclusive},
              {"atypical", c.count_atypical}}},
            {"mean", c.mean},
            {"median", c.median},
            {"iqr", c.iqr},
            {"median_abs_deviation", c.median_abs_deviation},
            {"scaled_variance", c.scaled_variance},
            {"predicted_scaled_variance", number_or_null(c.predicted_scaled_variance)},
            {"skewness", c.skewness},
            {"excess_kurtosis", c.excess_kurtosis},
            {"coverage", number_or_null(c.coverage)},
            {"misid_frequency", number_or_null(c.misid_frequency)},
            {"misid_bound", number_or_null(c.misid_bound)},
            {"tail_frequency", number_or_null(c.tail_frequency)},
            {"tail_bound", number_or_null(c.tail_bound)},
            {"checks", checks},
        });
    }
    out["cells"] = cells;
    return out;
}

void write_trace_csv(std::ostream& out, const StudyReport& report) {
    out << "replication,group,n,T,kind,estimate\n";
    out.precision(17);
    for (const auto& c : report.cells) {
        for (std::size_t r = 0; r < c.estimates.size(); ++r) {
            const auto& e = c.estimates[r];
            out << r << ',' << c.group << ',' << c.n << ',' << c.statistics[r] << ',' << to_string(e.kind) << ',';
            if (e.conclusive()) {
                if (std::isinf(e.value)) {
                    out << (e.value > 0 ? "inf" : "-inf");
                } else {
                    out << e.value;
                }
            }
            out << '\n';
        }
    }
}

} // namespace cwvote
