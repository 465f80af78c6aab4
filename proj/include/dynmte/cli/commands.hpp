#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dynmte/core/config_io.hpp"
#include "dynmte/core/error.hpp"
#include "dynmte/core/panel_io.hpp"
#include "dynmte/core/parallel.hpp"
#include "dynmte/core/random.hpp"
#include "dynmte/core/types.hpp"
#include "dynmte/dgp/dgp.hpp"
#include "dynmte/diagnostics/baseline.hpp"
#include "dynmte/diagnostics/liv.hpp"
#include "dynmte/harness/curve.hpp"
#include "dynmte/harness/mc.hpp"
#include "dynmte/mtr/bootstrap.hpp"
#include "dynmte/mtr/pipeline.hpp"
#include "dynmte/version.hpp"

namespace dynmte::cli {

enum ExitCode : int { kOk = 0, kValidation = 2, kNumerical = 3 };

namespace detail {

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Manifest written next to `out` as `<out>.manifest.json`. The configuration
/// hash covers the canonical dump of `config`, which also records every
/// input the command read.
inline void write_manifest(const std::string& out, const std::string& command, const json& config, std::uint64_t seed,
                           const std::vector<std::string>& outputs) {
    const std::string canonical = config.dump();
    json m{{"command", command},
           {"config", config},
           {"config_hash", hex64(fnv1a(canonical))},
           {"seed", seed},
           {"outputs", outputs},
           {"versions", {{"dynmte", kVersion}, {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                                             std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                                             std::to_string(EIGEN_MINOR_VERSION)},
                         {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
    dynmte::detail::write_text_file(out + ".manifest.json", m.dump(2) + "\n");
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Path with its extension replaced (or appended).
inline std::string with_extension(const std::string& path, const std::string& ext) {
    return std::filesystem::path(path).replace_extension(ext).string();
}

inline dgp::DgpSpec dgp_from(const std::string& path) { return path.empty() ? dgp::DgpSpec{} : dgp::load_dgp_spec(path); }

inline EstimationConfig estimation_from(const std::string& path) {
    return path.empty() ? EstimationConfig{} : load_estimation_config(path);
}

inline std::array<double, 2> point_from(const std::vector<double>& v, const char* flag) {
    if (v.size() != 2) throw ValidationError("cli", std::string(flag) + " takes two values, e.g. 0.25,0.75");
    return {v[0], v[1]};
}

inline Covariates covariates_from(const std::vector<double>& x, const Covariates& fallback) {
    if (x.empty()) return fallback;
    if (x.size() != 3) throw ValidationError("cli", "--x takes three values, e.g. 0.5,0.6,5");
    return {x[0], x[1], x[2]};
}

inline std::vector<Contrast> contrasts_from(const std::vector<std::string>& texts) {
    std::vector<Contrast> out;
    for (const auto& t : texts) out.push_back(Contrast::parse(t));
    if (out.empty()) throw ValidationError("cli", "at least one --contrast is required");
    return out;
}

inline Covariates sample_mean_x(const PanelDataset& data) {
    Covariates m{0, 0, 0};
    for (const auto& x : data.x()) {
        for (int k = 0; k < 3; ++k) m[k] += x[k];
    }
    for (auto& v : m) v /= static_cast<double>(std::max<std::size_t>(1, data.n()));
    return m;
}

}  // namespace detail

struct SimulateArgs {
    std::string config, out;
    std::uint64_t seed = 0;
    long n = -1;
};

inline void cmd_simulate(const SimulateArgs& a, std::ostream& log) {
    auto spec = detail::dgp_from(a.config);
    if (a.n >= 0) spec.n = static_cast<std::size_t>(a.n);
    const PanelDataset data = dgp::simulate(spec, substream(a.seed, 0));
    save_panel(data, a.out);
    detail::write_manifest(a.out, "simulate", {{"dgp", dgp::to_json(spec)}}, a.seed, {a.out});
    log << "simulate: wrote " << data.n() << " rows to " << a.out << "\n";
}

struct OracleArgs {
    std::string config, out, kind = "ate";
    std::vector<std::string> contrasts;
    std::vector<double> v, x;
    std::size_t draws = dgp::kMinAteDraws;
    std::uint64_t seed = harness::kTruthSeed;
    int threads = 0;
};

/// Writes CSV (contrast,value,se) when the output ends in .csv, JSON otherwise.
inline void cmd_oracle(const OracleArgs& a, std::ostream& log) {
    const auto spec = detail::dgp_from(a.config);
    const auto contrasts = detail::contrasts_from(a.contrasts);
    const auto kind = mtr::parse_kind(a.kind);
    const Covariates x = detail::covariates_from(a.x, spec.x_mean());
    std::vector<dgp::OracleRecord> records;
    for (std::size_t k = 0; k < contrasts.size(); ++k) {
        const auto& c = contrasts[k];
        const std::uint64_t s = derive_seed(a.seed, k);
        dgp::OracleValue o;
        switch (kind) {
            case mtr::EffectKind::Mte:
                o = dgp::oracle_mte(spec, c, x, detail::point_from(a.v.empty() ? std::vector<double>{0.5, 0.5} : a.v, "--v"),
                                    a.draws, s, a.threads);
                break;
            case mtr::EffectKind::AteAtX:
                o = dgp::oracle_ate_at(spec, c, x, a.draws, s, a.threads);
                break;
            case mtr::EffectKind::AteMarginal:
                o = dgp::oracle_ate(spec, c, a.draws, s, a.threads);
                break;
        }
        records.push_back({c.str(), o});
        log << "oracle " << a.kind << " " << c.str() << ": " << o.value << " (se " << o.se << ")\n";
    }
    if (detail::ends_with(a.out, ".csv")) {
        dynmte::detail::write_text_file(a.out, dgp::oracle_csv(records));
    } else {
        dynmte::detail::write_text_file(a.out, dgp::oracle_json(records).dump(2) + "\n");
    }
    detail::write_manifest(a.out, "oracle",
                           {{"dgp", dgp::to_json(spec)}, {"contrasts", a.contrasts}, {"kind", a.kind},
                            {"x", x}, {"v", a.v}, {"draws", a.draws}},
                           a.seed, {a.out});
}

struct EstimateArgs {
    std::string data, config, kind = "ate", out, grid_out;
    std::vector<std::string> contrasts;
    std::vector<double> v, x;
    int grid = 0;
    int threads = 0;
};

/// JSON array of effect records. With --grid G and kind mte, also the MTE on a
/// G x G grid over [0.05, 0.95]^2 of the first contrast, as CSV.
inline void cmd_estimate(const EstimateArgs& a, std::ostream& log) {
    const PanelDataset data = load_panel(a.data);
    const auto config = detail::estimation_from(a.config);
    const auto contrasts = detail::contrasts_from(a.contrasts);
    const auto kind = mtr::parse_kind(a.kind);
    const Covariates x = detail::covariates_from(a.x, detail::sample_mean_x(data));
    const auto v = detail::point_from(a.v.empty() ? std::vector<double>{0.5, 0.5} : a.v, "--v");
    std::vector<mtr::EffectTarget> targets;
    for (const auto& c : contrasts) targets.push_back({c, kind, x, v});
    const unsigned threads = resolve_threads(a.threads);
    const auto est = mtr::bootstrap_targets(data, targets, config, config.seed, threads);
    json records = json::array();
    for (const auto& e : est) {
        records.push_back(e.to_json());
        log << "estimate " << e.target.label() << ": " << e.point << " [" << e.ci_lo << ", " << e.ci_hi << "]\n";
    }
    dynmte::detail::write_text_file(a.out, records.dump(2) + "\n");
    std::vector<std::string> outputs{a.out};
    if (a.grid > 0) {
        if (kind != mtr::EffectKind::Mte) throw ValidationError("cli", "--grid needs --kind mte");
        const auto axis = harness::curve_abscissae(a.grid);
        std::vector<mtr::EffectTarget> cells;
        for (double v1 : axis) {
            for (double v2 : axis) cells.push_back({contrasts.front(), kind, x, {v1, v2}});
        }
        const auto grid = mtr::bootstrap_targets(data, cells, config, config.seed, threads);
        const std::string path = a.grid_out.empty() ? detail::with_extension(a.out, ".grid.csv") : a.grid_out;
        dynmte::detail::write_text_file(path, harness::mte_grid_csv(grid));
        outputs.push_back(path);
    }
    detail::write_manifest(a.out, "estimate",
                           {{"data", a.data}, {"config", to_json(config)}, {"contrasts", a.contrasts},
                            {"kind", a.kind}, {"x", x}, {"v", v}, {"grid", a.grid}},
                           config.seed, outputs);
}

struct CurveArgs {
    std::string dgp, config, contrast = "11:00", out, oracle_out;
    int axis = 1;
    double fixed = 0.5;
    int grid = 19;
    std::uint64_t seed = 0;
    std::size_t oracle_draws = 0;
    int threads = 0;
};

inline void cmd_curve(const CurveArgs& a, std::ostream& log) {
    const auto spec = detail::dgp_from(a.dgp);
    const auto config = detail::estimation_from(a.config);
    const auto contrast = Contrast::parse(a.contrast);
    const auto grid = harness::run_curve(spec, contrast, a.axis, a.fixed, a.grid, config, a.seed, a.threads);
    dynmte::detail::write_text_file(a.out, harness::curve_csv(grid));
    std::vector<std::string> outputs{a.out};
    if (a.oracle_draws > 0) {
        const auto oracle = harness::oracle_curve(spec, contrast, a.axis, a.fixed, a.grid, a.oracle_draws,
                                                  harness::kTruthSeed, a.threads);
        const std::string path = a.oracle_out.empty() ? detail::with_extension(a.out, ".oracle.json") : a.oracle_out;
        dynmte::detail::write_text_file(path, harness::oracle_curve_json(grid, oracle).dump(2) + "\n");
        outputs.push_back(path);
    }
    log << "curve: slope " << grid.slope() << " over " << grid.points.size() << " points\n";
    detail::write_manifest(a.out, "curve",
                           {{"dgp", dgp::to_json(spec)}, {"config", to_json(config)}, {"contrast", a.contrast},
                            {"axis", a.axis}, {"fixed", a.fixed}, {"grid", a.grid}, {"oracle_draws", a.oracle_draws}},
                           a.seed, outputs);
}

struct MonteCarloArgs {
    std::string dgp, config, out, table = "2";
    std::size_t reps = 500;
    std::uint64_t seed = 0;
    std::size_t truth_draws = harness::kTruthDraws;
    bool no_bootstrap = false;
    int threads = 0;
};

/// Table 1 (MTE cells), 2 (ATEs) or "all". CSV plus a `.json` sidecar.
inline void cmd_montecarlo(const MonteCarloArgs& a, std::ostream& log) {
    const auto spec = detail::dgp_from(a.dgp);
    auto config = detail::estimation_from(a.config);
    std::vector<mtr::EffectTarget> targets;
    if (a.table == "1" || a.table == "all") {
        const auto t1 = harness::table1_targets(spec);
        targets.insert(targets.end(), t1.begin(), t1.end());
    }
    if (a.table == "2" || a.table == "all") {
        const auto t2 = harness::table2_targets();
        targets.insert(targets.end(), t2.begin(), t2.end());
    }
    if (targets.empty()) throw ValidationError("cli", "--table must be 1, 2 or all");
    const auto truths = harness::with_truths(spec, targets, a.truth_draws, harness::kTruthSeed, a.threads);
    const harness::McOptions opt{a.reps, a.seed, a.threads};
    const auto rep = harness::run_mc(spec, truths, harness::theorem1_estimator(targets, config, !a.no_bootstrap), opt);
    dynmte::detail::write_text_file(a.out, harness::mc_csv(rep));
    const std::string sidecar = detail::with_extension(a.out, ".json");
    dynmte::detail::write_text_file(sidecar, harness::mc_sidecar(rep, spec, config, opt).dump(2) + "\n");
    log << "montecarlo: " << rep.completed << " of " << rep.reps << " replicates completed\n";
    detail::write_manifest(a.out, "montecarlo",
                           {{"dgp", dgp::to_json(spec)}, {"config", to_json(config)}, {"table", a.table},
                            {"reps", a.reps}, {"truth_draws", a.truth_draws}, {"bootstrap", !a.no_bootstrap}},
                           a.seed, {a.out, sidecar});
}

struct LivArgs {
    std::string config, out;
    std::size_t n = 1000000;
    std::vector<double> v{0.25, 0.75};
    int y1 = 1;
    int degree = 2;
    bool degenerate = false;
    std::uint64_t seed = 0;
    int threads = 0;
};

inline void cmd_liv(const LivArgs& a, std::ostream& log) {
    auto spec = detail::dgp_from(a.config);
    if (a.degenerate) spec = dgp::degenerate(spec);
    diagnostics::LivOptions opt;
    opt.point = detail::point_from(a.v, "--v");
    opt.y1 = a.y1;
    opt.basis_degree = a.degree;
    const auto d = diagnostics::liv_decompose(spec, a.n, opt, a.seed, a.threads);
    dynmte::detail::write_text_file(a.out, d.to_json().dump(2) + "\n");
    log << d.table();
    detail::write_manifest(a.out, "liv",
                           {{"dgp", dgp::to_json(spec)}, {"n", a.n}, {"v", a.v}, {"y1", a.y1}, {"degree", a.degree}},
                           a.seed, {a.out});
}

struct BaselineArgs {
    std::string data, config, out;
    std::vector<std::string> contrasts{"11:00", "10:00", "01:00", "10:01"};
    std::size_t forward_draws = 0;
    int threads = 0;
};

inline void cmd_baseline(const BaselineArgs& a, std::ostream& log) {
    const PanelDataset data = load_panel(a.data);
    const auto config = detail::estimation_from(a.config);
    const auto contrasts = detail::contrasts_from(a.contrasts);
    diagnostics::BaselineOptions opt;
    opt.forward_draws = a.forward_draws;
    const auto rep = diagnostics::baseline_gformula(data, contrasts, config, opt, resolve_threads(a.threads));
    dynmte::detail::write_text_file(a.out, rep.to_json().dump(2) + "\n");
    for (std::size_t k = 0; k < rep.contrasts.size(); ++k) {
        log << "baseline ATE(" << rep.contrasts[k].str() << "): " << rep.ate[k] << " [" << rep.ci_lo[k] << ", "
            << rep.ci_hi[k] << "]\n";
    }
    detail::write_manifest(a.out, "baseline",
                           {{"data", a.data}, {"config", to_json(config)}, {"contrasts", a.contrasts},
                            {"forward_draws", a.forward_draws}},
                           config.seed, {a.out});
}

/// Parses argv and runs one command. Returns 0 on success, 2 on invalid input
/// and 3 on numerical failure; messages go to `err`.
inline int run(int argc, const char* const* argv, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Dynamic marginal and average treatment effects with instruments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Simulate a two-period panel from the DGP");
    s->add_option("--config", sim.config, "DGP spec JSON (defaults when omitted)");
    s->add_option("--seed", sim.seed, "Seed");
    s->add_option("--n", sim.n, "Override the sample size");
    s->add_option("--out", sim.out, "Output CSV")->required();

    OracleArgs ora;
    auto* o = app.add_subcommand("oracle", "Brute-force oracle effects of the DGP");
    o->add_option("--config", ora.config, "DGP spec JSON");
    o->add_option("--contrast", ora.contrasts, "Contrast such as 11:00 (repeatable)")->required();
    o->add_option("--kind", ora.kind, "ate | ate-x | mte");
    o->add_option("--v", ora.v, "Resistance point v1,v2 for mte")->delimiter(',');
    o->add_option("--x", ora.x, "Covariates x1,x2,x3 (default: population mean)")->delimiter(',');
    o->add_option("--draws", ora.draws, "Simulation draws");
    o->add_option("--seed", ora.seed, "Seed");
    o->add_option("--threads", ora.threads, "Worker threads (0: $DYNMTE_THREADS or all cores)");
    o->add_option("--out", ora.out, "Output .json or .csv")->required();

    EstimateArgs est;
    auto* e = app.add_subcommand("estimate", "Estimate effects with bootstrap intervals");
    e->add_option("--data", est.data, "Panel CSV")->required();
    e->add_option("--config", est.config, "Estimation config JSON");
    e->add_option("--contrast", est.contrasts, "Contrast such as 11:00 (repeatable)")->required();
    e->add_option("--kind", est.kind, "ate | ate-x | mte");
    e->add_option("--v", est.v, "Resistance point v1,v2 for mte")->delimiter(',');
    e->add_option("--x", est.x, "Covariates x1,x2,x3 (default: sample mean)")->delimiter(',');
    e->add_option("--grid", est.grid, "Also write the MTE on a G x G grid");
    e->add_option("--grid-out", est.grid_out, "Grid CSV path");
    e->add_option("--threads", est.threads, "Worker threads");
    e->add_option("--out", est.out, "Output JSON")->required();

    CurveArgs cur;
    auto* c = app.add_subcommand("curve", "MTE curve along one resistance axis");
    c->add_option("--dgp", cur.dgp, "DGP spec JSON");
    c->add_option("--config", cur.config, "Estimation config JSON");
    c->add_option("--contrast", cur.contrast, "Contrast");
    c->add_option("--axis", cur.axis, "Swept axis (1 or 2)");
    c->add_option("--fixed", cur.fixed, "Value of the other resistance");
    c->add_option("--grid", cur.grid, "Grid points");
    c->add_option("--seed", cur.seed, "Seed");
    c->add_option("--oracle-draws", cur.oracle_draws, "Also write the oracle curve with this many draws");
    c->add_option("--oracle-out", cur.oracle_out, "Oracle curve JSON path");
    c->add_option("--threads", cur.threads, "Worker threads");
    c->add_option("--out", cur.out, "Output CSV")->required();

    MonteCarloArgs mc;
    auto* m = app.add_subcommand("montecarlo", "Monte Carlo bias, RMSE and coverage");
    m->add_option("--dgp", mc.dgp, "DGP spec JSON");
    m->add_option("--config", mc.config, "Estimation config JSON");
    m->add_option("--table", mc.table, "1, 2 or all");
    m->add_option("--reps", mc.reps, "Replications");
    m->add_option("--seed", mc.seed, "Seed");
    m->add_option("--truth-draws", mc.truth_draws, "Oracle draws per truth");
    m->add_flag("--no-bootstrap", mc.no_bootstrap, "Skip intervals");
    m->add_option("--threads", mc.threads, "Worker threads");
    m->add_option("--out", mc.out, "Output CSV")->required();

    LivArgs liv;
    auto* l = app.add_subcommand("liv", "Dynamic LIV estimand and its decomposition");
    l->add_option("--config", liv.config, "DGP spec JSON");
    l->add_option("--n", liv.n, "Draws");
    l->add_option("--v", liv.v, "Evaluation point v1,v2")->delimiter(',');
    l->add_option("--y1", liv.y1, "Conditioning value of Y1");
    l->add_option("--degree", liv.degree, "Sieve degree");
    l->add_flag("--degenerate", liv.degenerate, "Zero every V-slope of the outcome errors");
    l->add_option("--seed", liv.seed, "Seed");
    l->add_option("--threads", liv.threads, "Worker threads");
    l->add_option("--out", liv.out, "Output JSON")->required();

    BaselineArgs base;
    auto* b = app.add_subcommand("baseline", "Parametric g-formula baseline");
    b->add_option("--data", base.data, "Panel CSV")->required();
    b->add_option("--config", base.config, "Estimation config JSON");
    b->add_option("--contrast", base.contrasts, "Contrast (repeatable)");
    b->add_option("--forward-draws", base.forward_draws, "Forward-simulation paths per individual (0: exact)");
    b->add_option("--threads", base.threads, "Worker threads");
    b->add_option("--out", base.out, "Output JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        std::ostringstream o_out, o_err;
        const int code = app.exit(ex, o_out, o_err);
        log << o_out.str();
        err << o_err.str();
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (*s) cmd_simulate(sim, log);
        if (*o) cmd_oracle(ora, log);
        if (*e) cmd_estimate(est, log);
        if (*c) cmd_curve(cur, log);
        if (*m) cmd_montecarlo(mc, log);
        if (*l) cmd_liv(liv, log);
        if (*b) cmd_baseline(base, log);
    } catch (const ValidationError& ex) {
        err << "error: " << ex.what() << "\n";
        return kValidation;
    } catch (const NumericalError& ex) {
        err << "error: " << ex.what() << "\n";
        return kNumerical;
    }
    return kOk;
}

}  // namespace dynmte::cli
