#include "cwvote/report.hpp"

#include "cwvote/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace cwvote {

bool EstimationReport::any_inconclusive() const {
    for (const auto& g : groups) {
        if (!g.estimate.conclusive()) return true;
    }
    return false;
}

EstimationReport make_estimation_report(std::span<const double> t, std::size_t n,
                                        std::span<const RegimeIntervals> intervals,
                                        const ReportOptions& options) {
    if (t.size() != intervals.size()) throw std::invalid_argument("one set of intervals per group required");
    if (options.true_couplings && options.true_couplings->size() != t.size()) {
        throw std::invalid_argument("true couplings list has the wrong length");
    }
    EstimationReport rep;
    rep.n = n;
    rep.level = options.level;
    std::vector<MisidBound> bounds;
    for (std::size_t g = 0; g < t.size(); ++g) {
        GroupEstimate ge;
        ge.group = g;
        ge.group_size = intervals[g].group_size;
        ge.t = t[g];
        ge.intervals = intervals[g];
        ge.estimate = estimate_beta_inf(t[g], intervals[g]);
        ge.weight = estimate_weight(t[g], intervals[g]);
        if (ge.estimate.atypical()) ge.notes.push_back("atypical estimate (negative or infinite)");

        std::optional<double> mle;
        try {
            mle = exact_mle(t[g], ge.group_size);
        } catch (const Error& e) {
            ge.notes.push_back(std::string("exact MLE unavailable: ") + e.what());
        }
        if (options.include_exact_mle) ge.exact_mle = mle;

        if (options.true_couplings) {
            try {
                ge.beta_tilde = pseudo_true_beta((*options.true_couplings)[g], intervals[g]);
            } catch (const Error& e) {
                ge.notes.push_back(std::string("pseudo-true value unavailable: ") + e.what());
            }
        }

        if (ge.estimate.conclusive() && std::isfinite(ge.estimate.value) && n >= 2) {
            try {
                ge.ci = confidence_interval(ge.estimate, n, ge.group_size, options.level);
            } catch (const Error& e) {
                ge.notes.push_back(std::string("no confidence interval: ") + e.what());
            }
        }

        if (mle && std::isfinite(*mle)) {
            try {
                ge.misid = misid_bounds(intervals[g], *mle);
                bounds.push_back(*ge.misid);
            } catch (const Error& e) {
                ge.notes.push_back(std::string("no misidentification bound: ") + e.what());
            }
        }
        rep.groups.push_back(std::move(ge));
    }
    rep.aggregate = aggregate_misid(bounds);
    return rep;
}

nlohmann::json extended_real_json(double x) {
    if (std::isnan(x)) return nullptr;
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

nlohmann::json to_json(const EstimationReport& report) {
    using nlohmann::json;
    json groups = json::array();
    for (const auto& g : report.groups) {
        json item = {
            {"group", g.group},
            {"N", g.group_size},
            {"T", g.t},
            {"intervals",
             {{"b1", g.intervals.b1},
              {"b2", g.intervals.b2},
              {"d_high", g.intervals.d_high},
              {"d_low", g.intervals.d_low},
              {"j_h", {g.intervals.j_h_lower, g.intervals.j_h_upper}},
              {"j_l", {g.intervals.j_l_lower, static_cast<double>(g.group_size) * g.group_size}}}},
            {"regime", to_string(g.estimate.kind)},
            {"estimate", g.estimate.conclusive() ? extended_real_json(g.estimate.value) : json("u")},
            {"atypical", g.estimate.atypical()},
            {"weight", g.weight ? extended_real_json(*g.weight) : json("u")},
        };
        if (g.exact_mle) item["exact_mle"] = extended_real_json(*g.exact_mle);
        if (g.beta_tilde) item["beta_tilde"] = *g.beta_tilde;
        if (g.ci) {
            item["confidence_interval"] = {{"level", report.level},
                                           {"lower", g.ci->lower},
                                           {"upper", g.ci->upper},
                                           {"standard_error", g.ci->standard_error},
                                           {"variance", g.ci->variance},
                                           {"limiting_variance", g.ci->limiting_variance}};
        }
        if (g.misid) {
            item["misid"] = {{"true_regime", to_string(g.misid->true_regime)},
                             {"eta", extended_real_json(g.misid->eta)},
                             {"bound", g.misid->probability_bound(report.n)}};
        }
        if (!g.notes.empty()) item["notes"] = g.notes;
        groups.push_back(item);
    }
    json agg = json::object();
    agg["eta2"] = report.aggregate.eta2 ? extended_real_json(*report.aggregate.eta2) : json(nullptr);
    agg["eta3"] = report.aggregate.eta3 ? extended_real_json(*report.aggregate.eta3) : json(nullptr);
    return {{"n", report.n}, {"groups", groups}, {"aggregate_misid", agg},
            {"any_inconclusive", report.any_inconclusive()}};
}

} // namespace cwvote
