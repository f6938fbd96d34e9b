#include "cwvote/voting_weights.hpp"

#include "cwvote/errors.hpp"
#include "cwvote/regimes.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cwvote {

std::vector<int> council_votes(std::span<const std::int64_t> margins) {
    std::vector<int> chi(margins.size());
    for (std::size_t i = 0; i < margins.size(); ++i) chi[i] = (margins[i] > 0) ? 1 : -1;
    return chi;
}

CouncilOutcome council_outcome(std::span<const std::int64_t> margins, std::span<const double> weights) {
    if (margins.size() != weights.size()) {
        throw std::invalid_argument("council_outcome: margins and weights differ in length");
    }
    CouncilOutcome out;
    out.chi = council_votes(margins);
    for (std::size_t i = 0; i < margins.size(); ++i) {
        out.weighted_vote += weights[i] * out.chi[i];
        out.popular_margin += static_cast<double>(margins[i]);
    }
    return out;
}

std::string to_string(WeightProvenance p) {
    switch (p) {
    case WeightProvenance::Exact: return "exact";
    case WeightProvenance::Asymptotic: return "asymptotic";
    case WeightProvenance::Estimated: return "estimated";
    case WeightProvenance::DeficitMinimizing: return "deficit-minimizing";
    case WeightProvenance::Proportional: return "proportional";
    case WeightProvenance::SquareRoot: return "square-root";
    case WeightProvenance::Equal: return "equal";
    }
    return "?";
}

std::vector<GroupMoments> group_moments(const ModelSpec& spec) {
    spec.validate();
    std::vector<GroupMoments> out(spec.groups());
    for (std::size_t g = 0; g < spec.groups(); ++g) {
        const MagnetizationDistribution law(spec.couplings[g], spec.group_sizes[g]);
        out[g].second = law.moment(2);
        out[g].abs_first = law.abs_moment();
        out[g].chi_mean = -law.pmf(0);
    }
    return out;
}

namespace {

double deficit_from_moments(std::span<const GroupMoments> mom, std::span<const double> w) {
    if (mom.size() != w.size()) throw std::invalid_argument("weight vector has the wrong length");
    double diag = 0.0;
    double cross_sum = 0.0;
    double cross_sq = 0.0;
    for (std::size_t g = 0; g < mom.size(); ++g) {
        diag += mom[g].second - 2.0 * w[g] * mom[g].abs_first + w[g] * w[g];
        const double a = w[g] * mom[g].chi_mean;
        cross_sum += a;
        cross_sq += a * a;
    }
    // sum_{l != m} a_l a_m = (sum a)^2 - sum a^2
    return diag + cross_sum * cross_sum - cross_sq;
}

void require_nonnegative_couplings(const ModelSpec& spec) {
    for (double b : spec.couplings) {
        if (b < 0.0) throw OutOfDomain("optimal weights need couplings >= 0");
    }
}

} // namespace

double democracy_deficit(const ModelSpec& spec, std::span<const double> w) {
    const auto mom = group_moments(spec);
    return deficit_from_moments(mom, w);
}

double democracy_deficit(const ModelSpec& spec, const WeightVector& w) {
    return democracy_deficit(spec, std::span<const double>(w.w));
}

WeightVector optimal_weights_exact(const ModelSpec& spec) {
    spec.validate();
    require_nonnegative_couplings(spec);
    WeightVector out{{}, WeightProvenance::Exact};
    for (std::size_t g = 0; g < spec.groups(); ++g) {
        out.w.push_back(exact_abs_moment(spec.couplings[g], spec.group_sizes[g]));
    }
    return out;
}

WeightVector deficit_minimizing_weights(const ModelSpec& spec) {
    const auto mom = group_moments(spec);
    const auto m = static_cast<Eigen::Index>(mom.size());
    Eigen::MatrixXd a(m, m);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        rhs(i) = mom[static_cast<std::size_t>(i)].abs_first;
        for (Eigen::Index j = 0; j < m; ++j) {
            a(i, j) = (i == j) ? 1.0
                               : mom[static_cast<std::size_t>(i)].chi_mean *
                                     mom[static_cast<std::size_t>(j)].chi_mean;
        }
    }
    // A = I - diag(c^2) + c c^T is symmetric positive definite since |c| < 1.
    const Eigen::VectorXd sol = a.llt().solve(rhs);
    WeightVector out{{}, WeightProvenance::DeficitMinimizing};
    out.w.assign(sol.data(), sol.data() + sol.size());
    return out;
}

WeightVector optimal_weights_asymptotic(const ModelSpec& spec) {
    spec.validate();
    require_nonnegative_couplings(spec);
    WeightVector out{{}, WeightProvenance::Asymptotic};
    for (std::size_t g = 0; g < spec.groups(); ++g) {
        if (spec.couplings[g] == 1.0) throw OutOfDomain("asymptotic weight undefined at beta = 1");
        out.w.push_back(asymptotic_weight(spec.couplings[g], spec.group_sizes[g]));
    }
    return out;
}

std::string to_string(BaselineKind kind) {
    switch (kind) {
    case BaselineKind::Proportional: return "proportional";
    case BaselineKind::SquareRoot: return "square-root";
    case BaselineKind::Equal: return "equal";
    }
    return "?";
}

BaselineKind parse_baseline_kind(const std::string& name) {
    if (name == "proportional") return BaselineKind::Proportional;
    if (name == "square-root" || name == "sqrt") return BaselineKind::SquareRoot;
    if (name == "equal") return BaselineKind::Equal;
    throw std::invalid_argument("unknown baseline '" + name + "'");
}

WeightVector baseline_weights(const ModelSpec& spec, BaselineKind kind) {
    const WeightVector exact = optimal_weights_exact(spec);
    const double target = std::accumulate(exact.w.begin(), exact.w.end(), 0.0);
    WeightVector out;
    for (auto n : spec.group_sizes) {
        const double nd = static_cast<double>(n);
        switch (kind) {
        case BaselineKind::Proportional: out.w.push_back(nd); break;
        case BaselineKind::SquareRoot: out.w.push_back(std::sqrt(nd)); break;
        case BaselineKind::Equal: out.w.push_back(1.0); break;
        }
    }
    switch (kind) {
    case BaselineKind::Proportional: out.provenance = WeightProvenance::Proportional; break;
    case BaselineKind::SquareRoot: out.provenance = WeightProvenance::SquareRoot; break;
    case BaselineKind::Equal: out.provenance = WeightProvenance::Equal; break;
    }
    const double total = std::accumulate(out.w.begin(), out.w.end(), 0.0);
    for (double& x : out.w) x *= target / total;
    return out;
}

WeightReport weight_report(const ModelSpec& spec) {
    const auto mom = group_moments(spec);
    const auto exact = optimal_weights_exact(spec);
    const auto minimizing = deficit_minimizing_weights(spec);
    const auto prop = baseline_weights(spec, BaselineKind::Proportional);
    const auto sqrt_w = baseline_weights(spec, BaselineKind::SquareRoot);
    const auto equal = baseline_weights(spec, BaselineKind::Equal);
    std::optional<WeightVector> asym;
    try {
        asym = optimal_weights_asymptotic(spec);
    } catch (const OutOfDomain&) {
        // beta = 1 somewhere: no asymptotic weights.
    }

    WeightReport rep;
    for (std::size_t g = 0; g < spec.groups(); ++g) {
        WeightReportRow row;
        row.group = g;
        row.group_size = spec.group_sizes[g];
        row.beta = spec.couplings[g];
        row.w_exact = exact.w[g];
        if (asym) row.w_asymptotic = asym->w[g];
        row.w_deficit_minimizing = minimizing.w[g];
        row.w_proportional = prop.w[g];
        row.w_square_root = sqrt_w.w[g];
        row.w_equal = equal.w[g];
        rep.rows.push_back(row);
    }
    rep.deficit_exact = deficit_from_moments(mom, exact.w);
    if (asym) rep.deficit_asymptotic = deficit_from_moments(mom, asym->w);
    rep.deficit_minimizing = deficit_from_moments(mom, minimizing.w);
    rep.deficit_proportional = deficit_from_moments(mom, prop.w);
    rep.deficit_square_root = deficit_from_moments(mom, sqrt_w.w);
    rep.deficit_equal = deficit_from_moments(mom, equal.w);
    return rep;
}

} // namespace cwvote
