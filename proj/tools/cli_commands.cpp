#include "cli_commands.hpp"

#include "cli_config.hpp"
#include "cli_io.hpp"

#include "cwvote/curie_weiss.hpp"
#include "cwvote/errors.hpp"
#include "cwvote/estimators.hpp"
#include "cwvote/large_deviations.hpp"
#include "cwvote/model.hpp"
#include "cwvote/oracles.hpp"
#include "cwvote/regimes.hpp"
#include "cwvote/report.hpp"
#include "cwvote/rng.hpp"
#include "cwvote/study.hpp"
#include "cwvote/voting_weights.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>

namespace cwvote::cli {

namespace {

using nlohmann::json;

// Stream id mixed into the seed for spin materialization, so it does not
// reuse the substreams that drew the margins.
constexpr std::uint64_t kSpinStream = 0x5350494e53ULL;

struct Flags {
    std::optional<std::string> config;
    RunConfig cli;
    bool exact_mle = false;
    bool raw_spins = false;
};

ModelSpec model_from(const RunConfig& c) {
    if (c.group_sizes.empty()) throw InputError("group sizes required (--sizes or config group_sizes)");
    if (c.couplings.empty()) throw InputError("couplings required (--betas or config couplings)");
    ModelSpec spec{c.group_sizes, c.couplings};
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    return spec;
}

std::vector<RegimeIntervals> intervals_for(const RunConfig& c, const std::vector<std::int64_t>& sizes,
                                           const ResolvedConstants& k) {
    std::vector<RegimeIntervals> out;
    for (auto n : sizes) {
        out.push_back(build_intervals(c.b1.value_or(kDefaultB1), c.b2.value_or(kDefaultB2), n, k.d_high, k.d_low));
    }
    return out;
}

json constants_provenance(const ResolvedConstants& k) {
    return {{"d_high", k.d_high}, {"d_low", k.d_low}, {"source_high", k.source_high}, {"source_low", k.source_low}};
}

void emit(std::ostream& out, const RunConfig& c, const std::string& file, const json& doc) {
    const std::string text = doc.dump(2) + "\n";
    out << text;
    if (c.out) {
        std::filesystem::create_directories(*c.out);
        write_text_file((std::filesystem::path(*c.out) / file).string(), text);
    }
}

VotingSample load_input(const RunConfig& c) {
    if (!c.input) throw InputError("input file required (--input or config input)");
    return read_sample_file(*c.input, c.input_format.value_or("margins"), c.group_sizes);
}

//==============================================================================
// Commands
//==============================================================================

int cmd_simulate(const RunConfig& c, std::ostream& out) {
    const ModelSpec spec = model_from(c);
    if (!c.n || *c.n < 1) throw InputError("simulate needs a sample size n >= 1 (--n)");
    const std::uint64_t seed = c.seed.value_or(1);
    const VotingSample s = sample(spec, *c.n, seed);

    const std::filesystem::path dir = c.out.value_or(".");
    std::filesystem::create_directories(dir);
    std::ostringstream margins;
    write_margins_csv(margins, s);
    write_text_file((dir / "margins.csv").string(), margins.str());
    json files = {(dir / "margins.csv").string()};
    if (c.raw_spins.value_or(false)) {
        std::ostringstream spins;
        write_spins_csv(spins, s, derive_seed(seed, kSpinStream));
        write_text_file((dir / "spins.csv").string(), spins.str());
        files.push_back((dir / "spins.csv").string());
    }

    json groups = json::array();
    for (std::size_t g = 0; g < spec.groups(); ++g) {
        groups.push_back({{"group", g},
                          {"N", spec.group_sizes[g]},
                          {"beta", spec.couplings[g]},
                          {"exact_E_S2", exact_moment(spec.couplings[g], spec.group_sizes[g], 2)}});
    }
    out << json{{"schema_version", kSchemaVersion}, {"command", "simulate"}, {"n", *c.n},
                {"seed", seed},  {"groups", groups},  {"files", files}}
               .dump(2)
        << "\n";
    return kExitOk;
}

int cmd_estimate(const RunConfig& c, std::ostream& out) {
    const VotingSample s = load_input(c);
    if (!c.group_sizes.empty() && c.group_sizes != s.group_sizes()) {
        throw InputError("group sizes in the input differ from the configured ones");
    }
    const auto k = resolve_constants(c, std::getenv("CW_CONSTANTS"));
    const auto intervals = intervals_for(c, s.group_sizes(), k);
    const auto t = statistic_T(s);

    ReportOptions opt;
    opt.include_exact_mle = c.exact_mle.value_or(false);
    opt.level = c.level.value_or(0.95);
    if (!c.couplings.empty()) {
        if (c.couplings.size() != s.groups()) throw InputError("couplings list has the wrong length");
        opt.true_couplings = c.couplings;
    }
    const EstimationReport rep = make_estimation_report(t, s.observations(), intervals, opt);

    json doc = {{"schema_version", kSchemaVersion}, {"command", "estimate"},
                {"constants", constants_provenance(k)}, {"report", to_json(rep)}};
    emit(out, c, "estimate.json", doc);
    return rep.any_inconclusive() ? kExitInconclusive : kExitOk;
}

int cmd_plan(const RunConfig& c, std::ostream& out) {
    if (c.group_sizes.empty()) throw InputError("plan needs group sizes (--sizes)");
    if (!c.epsilon) throw InputError("plan needs --epsilon");
    const auto k = resolve_constants(c, std::getenv("CW_CONSTANTS"));
    const auto intervals = intervals_for(c, c.group_sizes, k);
    json groups = json::array();
    std::size_t n = 1;
    for (std::size_t g = 0; g < intervals.size(); ++g) {
        const SamplePlan p = plan_sample_size(intervals[g], *c.epsilon);
        n = std::max(n, p.n);
        groups.push_back({{"group", g},
                          {"N", intervals[g].group_size},
                          {"n", p.n},
                          {"eta_high", extended_real_json(p.eta_high)},
                          {"eta_low", extended_real_json(p.eta_low)},
                          {"bound", p.bound}});
    }
    json doc = {{"schema_version", kSchemaVersion}, {"command", "plan"}, {"epsilon", *c.epsilon},
                {"constants", constants_provenance(k)}, {"n", n}, {"groups", groups}};
    emit(out, c, "plan.json", doc);
    return kExitOk;
}

json optional_json(const std::optional<double>& x) { return x ? extended_real_json(*x) : json(nullptr); }

int weights_from_couplings(const RunConfig& c, std::ostream& out) {
    const ModelSpec spec = model_from(c);
    const WeightReport rep = weight_report(spec);
    json rows = json::array();
    std::ostringstream csv;
    csv.precision(17);
    csv << "group,N,beta,w_exact,w_asymptotic,w_deficit_minimizing,w_proportional,w_square_root,w_equal\n";
    for (const auto& r : rep.rows) {
        rows.push_back({{"group", r.group},
                        {"N", r.group_size},
                        {"beta", r.beta},
                        {"w_exact", r.w_exact},
                        {"w_asymptotic", optional_json(r.w_asymptotic)},
                        {"w_deficit_minimizing", r.w_deficit_minimizing},
                        {"w_proportional", r.w_proportional},
                        {"w_square_root", r.w_square_root},
                        {"w_equal", r.w_equal}});
        csv << r.group << ',' << r.group_size << ',' << r.beta << ',' << r.w_exact << ',';
        if (r.w_asymptotic) csv << *r.w_asymptotic;
        csv << ',' << r.w_deficit_minimizing << ',' << r.w_proportional << ',' << r.w_square_root << ','
            << r.w_equal << '\n';
    }
    json deficits = {{"exact", rep.deficit_exact},
                     {"asymptotic", optional_json(rep.deficit_asymptotic)},
                     {"deficit_minimizing", rep.deficit_minimizing},
                     {"proportional", rep.deficit_proportional},
                     {"square_root", rep.deficit_square_root},
                     {"equal", rep.deficit_equal}};
    json doc = {{"schema_version", kSchemaVersion}, {"command", "weights"}, {"source", "couplings"},
                {"groups", rows}, {"deficits", deficits}};
    emit(out, c, "weights.json", doc);
    if (c.out) write_text_file((std::filesystem::path(*c.out) / "weights.csv").string(), csv.str());
    return kExitOk;
}

int weights_from_data(const RunConfig& c, std::ostream& out) {
    const VotingSample s = load_input(c);
    const auto k = resolve_constants(c, std::getenv("CW_CONSTANTS"));
    const auto intervals = intervals_for(c, s.group_sizes(), k);
    const auto t = statistic_T(s);

    json rows = json::array();
    bool inconclusive = false;
    std::vector<double> plug_in;
    std::vector<double> estimated;
    for (std::size_t g = 0; g < s.groups(); ++g) {
        const Estimate e = estimate_beta_inf(t[g], intervals[g]);
        const auto w = estimate_weight(t[g], intervals[g]);
        inconclusive = inconclusive || !w;
        std::optional<double> mle;
        try {
            mle = exact_mle(t[g], s.group_sizes()[g]);
        } catch (const Error&) {
        }
        json row = {{"group", g},
                    {"N", s.group_sizes()[g]},
                    {"T", t[g]},
                    {"regime", to_string(e.kind)},
                    {"estimate", e.conclusive() ? extended_real_json(e.value) : json("u")},
                    {"w_estimated", w ? extended_real_json(*w) : json("u")},
                    {"exact_mle", optional_json(mle)}};
        if (mle && std::isfinite(*mle)) {
            row["w_exact_plug_in"] = exact_abs_moment(*mle, s.group_sizes()[g]);
            plug_in.push_back(*mle);
        }
        if (w) estimated.push_back(*w);
        rows.push_back(row);
    }
    json doc = {{"schema_version", kSchemaVersion}, {"command", "weights"}, {"source", "data"},
                {"n", s.observations()}, {"constants", constants_provenance(k)}, {"groups", rows}};
    // Deficits under the fitted model, when every group has a finite fit.
    if (plug_in.size() == s.groups() && estimated.size() == s.groups()) {
        const ModelSpec fitted{s.group_sizes(), plug_in};
        doc["deficits_under_fitted_model"] = {
            {"estimated", democracy_deficit(fitted, estimated)},
            {"exact", democracy_deficit(fitted, optimal_weights_exact(fitted))},
            {"square_root", democracy_deficit(fitted, baseline_weights(fitted, BaselineKind::SquareRoot))}};
    }
    emit(out, c, "weights.json", doc);
    return inconclusive ? kExitInconclusive : kExitOk;
}

int cmd_weights(const RunConfig& c, std::ostream& out) {
    if (c.input) return weights_from_data(c, out);
    return weights_from_couplings(c, out);
}

struct VerifyCheck {
    std::string name;
    bool passed;
    std::string detail;
};

std::vector<double> verify_betas(const RunConfig& c) {
    return c.calibration_betas.empty() ? default_calibration_grid().betas : c.calibration_betas;
}

VerifyCheck check_envelopes(const RunConfig& c, const ResolvedConstants& k) {
    const std::int64_t n_max = c.n_max.value_or(2000);
    std::size_t violations = 0;
    std::string first;
    for (double beta : verify_betas(c)) {
        if (beta == 1.0) continue;
        const bool high = beta < 1.0;
        const double target = high ? 1.0 / (1.0 - beta) : std::pow(m_of_beta(beta), 2);
        for (std::int64_t n = 2; n <= n_max; ++n) {
            const double nd = static_cast<double>(n);
            const double es2 = exact_moment(beta, n, 2);
            const double err = high ? std::abs(es2 / nd - target) : std::abs(es2 / (nd * nd) - target);
            const double env = high ? k.d_high / std::sqrt(nd) : k.d_low * std::pow(std::log(nd), 1.5) / std::sqrt(nd);
            if (err > env) {
                if (violations++ == 0) {
                    first = "beta=" + std::to_string(beta) + " N=" + std::to_string(n);
                }
            }
        }
    }
    return {"moment_envelopes", violations == 0,
            violations == 0 ? "ok" : std::to_string(violations) + " violations, first at " + first};
}

VerifyCheck check_enumeration() {
    double worst = 0.0;
    for (double beta : {-1.0, 0.0, 0.5, 1.0, 1.5, 2.0}) {
        for (std::int64_t n = 1; n <= 12; ++n) {
            const double lz = log_partition(beta, n);
            worst = std::max(worst, std::abs(lz - brute_force_log_partition(beta, n)) / std::max(1.0, std::abs(lz)));
            for (int k = 2; k <= 6; k += 2) {
                const double m = exact_moment(beta, n, k);
                worst = std::max(worst, std::abs(m - brute_force_moment(beta, n, k)) / std::abs(m));
            }
        }
    }
    return {"enumeration", worst <= 1e-10, "max relative error " + std::to_string(worst)};
}

VerifyCheck check_quadrature() {
    double worst = 0.0;
    for (double beta : {0.5, 2.0}) {
        for (std::int64_t n : {10, 50, 200}) {
            const double es2 = exact_moment(beta, n, 2);
            const double nd = static_cast<double>(n);
            const double pair = (es2 - nd) / (nd * (nd - 1.0));
            worst = std::max(worst, std::abs(hs_correlation(beta, n, 2) - pair));
        }
    }
    return {"quadrature", worst <= 1e-8, "max absolute error " + std::to_string(worst)};
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
    const auto k = resolve_constants(c, std::getenv("CW_CONSTANTS"));
    std::vector<VerifyCheck> checks;
    checks.push_back(check_envelopes(c, k));
    checks.push_back(check_enumeration());
    checks.push_back(check_quadrature());

    json study_json = nullptr;
    if (!c.group_sizes.empty() && !c.couplings.empty() && !c.sample_sizes.empty()) {
        StudyConfig sc;
        sc.spec = model_from(c);
        sc.replications = c.replications.value_or(200);
        sc.sample_sizes = c.sample_sizes;
        sc.seed = c.seed.value_or(1);
        for (const auto& name : c.targets) {
            try {
                sc.targets.insert(parse_study_target(name));
            } catch (const std::invalid_argument& e) {
                throw InputError(e.what());
            }
        }
        sc.b1 = c.b1.value_or(kDefaultB1);
        sc.b2 = c.b2.value_or(kDefaultB2);
        sc.constants = {k.d_high, k.d_low};
        sc.level = c.level.value_or(0.95);
        sc.tail_delta = c.tail_delta.value_or(sc.tail_delta);
        sc.threads = c.threads.value_or(0);
        const StudyReport rep = run_study(sc);
        study_json = to_json(rep);
        for (const auto& cell : rep.cells) {
            for (const auto& chk : cell.checks) {
                checks.push_back({"study/" + to_string(chk.target) + "/" + chk.name + "/group" +
                                      std::to_string(cell.group) + "/n" + std::to_string(cell.n),
                                  chk.passed, chk.detail});
            }
        }
    }

    json list = json::array();
    json failures = json::array();
    bool ok = true;
    for (const auto& chk : checks) {
        list.push_back({{"name", chk.name}, {"passed", chk.passed}, {"detail", chk.detail}});
        if (!chk.passed) {
            failures.push_back(chk.name);
            ok = false;
        }
    }
    json doc = {{"schema_version", kSchemaVersion}, {"command", "verify"}, {"passed", ok},
                {"constants", constants_provenance(k)}, {"checks", list}, {"failures", failures}};
    if (!study_json.is_null()) doc["study"] = study_json;
    emit(out, c, "verify.json", doc);
    return ok ? kExitOk : kExitValidation;
}

int cmd_calibrate(const RunConfig& c, std::ostream& out) {
    CalibrationGrid grid = default_calibration_grid();
    if (!c.calibration_betas.empty()) grid.betas = c.calibration_betas;
    if (c.n_max) grid.n_max = *c.n_max;
    if (c.safety_factor) grid.safety_factor = *c.safety_factor;
    CalibrationResult res;
    try {
        res = calibrate_constants(grid);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    const json doc = constants_json(res);
    const std::filesystem::path dir = c.out.value_or(".");
    std::filesystem::create_directories(dir);
    write_text_file((dir / "constants.json").string(), doc.dump(2) + "\n");
    out << doc.dump(2) << "\n";
    return kExitOk;
}

//==============================================================================
// Argument parsing
//==============================================================================

void add_common_options(CLI::App& sub, Flags& f) {
    auto& c = f.cli;
    sub.add_option("--config", f.config, "JSON run configuration");
    sub.add_option("--seed", c.seed, "Random seed (u64)");
    sub.add_option("--out", c.out, "Output directory");
    sub.add_option("--b1", c.b1, "Upper end of the high-temperature coupling interval");
    sub.add_option("--b2", c.b2, "Lower end of the low-temperature coupling interval");
    sub.add_option("--d-high", c.d_high, "High-temperature error constant");
    sub.add_option("--d-low", c.d_low, "Low-temperature error constant");
    sub.add_option("--epsilon", c.epsilon, "Target misidentification probability");
    sub.add_flag("--exact-mle", f.exact_mle, "Also report the exact-moment MLE");
    sub.add_option("--input", c.input, "Sample file");
    sub.add_option("--format", c.input_format, "Sample file format: margins or spins");
    sub.add_option("--sizes", c.group_sizes, "Group sizes")->delimiter(',');
    sub.add_option("--betas", c.couplings, "Couplings")->delimiter(',');
    sub.add_option("--n", c.n, "Number of observations");
    sub.add_option("--level", c.level, "Confidence level");
    sub.add_flag("--raw-spins", f.raw_spins, "Also write raw spin configurations");
    sub.add_option("--replications", c.replications, "Study replications");
    sub.add_option("--sample-sizes", c.sample_sizes, "Study sample sizes")->delimiter(',');
    sub.add_option("--targets", c.targets, "Study targets")->delimiter(',');
    sub.add_option("--tail-delta", c.tail_delta, "Offset of the tail event");
    sub.add_option("--threads", c.threads, "Worker threads (0 = all cores)");
    sub.add_option("--calibration-betas", c.calibration_betas, "Couplings of the calibration grid")->delimiter(',');
    sub.add_option("--n-max", c.n_max, "Largest N of the calibration grid");
    sub.add_option("--safety-factor", c.safety_factor, "Multiplier applied to calibrated constants");
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Estimate Curie-Weiss voting couplings and optimal council weights"};
    app.require_subcommand(1);
    Flags flags;
    using Handler = std::function<int(const RunConfig&, std::ostream&)>;
    const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
        {"simulate", "Draw a sample of group margins", cmd_simulate},
        {"estimate", "Estimate the couplings from a sample", cmd_estimate},
        {"plan", "Sample size for a misidentification target", cmd_plan},
        {"weights", "Optimal council weights and democracy deficits", cmd_weights},
        {"verify", "Run oracle, envelope and Monte Carlo checks", cmd_verify},
        {"calibrate", "Calibrate the moment error constants", cmd_calibrate},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, help, handler] : commands) {
        auto* sub = app.add_subcommand(name, help);
        add_common_options(*sub, flags);
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        RunConfig config = flags.config ? load_run_config(*flags.config) : RunConfig{};
        if (flags.exact_mle) flags.cli.exact_mle = true;
        if (flags.raw_spins) flags.cli.raw_spins = true;
        config = merge(config, flags.cli);
        for (std::size_t i = 0; i < subs.size(); ++i) {
            if (subs[i]->parsed()) return std::get<2>(commands[i])(config, out);
        }
        return kExitInput;
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const OutOfRange& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const Error& e) {
        err << "validation failure: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    }
}

} // namespace cwvote::cli
