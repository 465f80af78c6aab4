#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dynmte/core/config_io.hpp"
#include "dynmte/core/error.hpp"
#include "dynmte/core/panel_io.hpp"
#include "dynmte/core/parallel.hpp"
#include "dynmte/core/random.hpp"
#include "dynmte/core/types.hpp"
#include "dynmte/dgp/dgp.hpp"
#include "dynmte/mtr/bootstrap.hpp"
#include "dynmte/mtr/pipeline.hpp"

namespace dynmte::harness {

/// Seed of the oracle runs that fix the truths of a target list.
inline constexpr std::uint64_t kTruthSeed = 20240101;
inline constexpr std::size_t kTruthDraws = 1000000;

struct McTarget {
    mtr::EffectTarget target;
    double truth = 0.0;
    double truth_se = 0.0;
};

/// The four contrasts reported in the MTE and ATE tables.
inline std::vector<Contrast> table_contrasts() {
    return {Contrast::parse("11:00"), Contrast::parse("10:00"), Contrast::parse("01:00"), Contrast::parse("10:01")};
}

inline std::vector<std::array<double, 2>> table_points() { return {{0.5, 0.5}, {0.25, 0.75}, {0.75, 0.25}}; }

/// MTE cells at the population mean of X: 4 contrasts x 3 resistance points.
inline std::vector<mtr::EffectTarget> table1_targets(const dgp::DgpSpec& spec) {
    std::vector<mtr::EffectTarget> out;
    for (const auto& c : table_contrasts()) {
        for (const auto& v : table_points()) out.push_back({c, mtr::EffectKind::Mte, spec.x_mean(), v});
    }
    return out;
}

/// Marginal ATEs of the 4 table contrasts.
inline std::vector<mtr::EffectTarget> table2_targets() {
    std::vector<mtr::EffectTarget> out;
    for (const auto& c : table_contrasts()) out.push_back({c, mtr::EffectKind::AteMarginal, {}, {0.5, 0.5}});
    return out;
}

/// Attaches oracle truths to targets: oracle_mte for MTE cells, oracle_ate_at
/// for ATEs at x and the population oracle_ate for marginal ATEs.
inline std::vector<McTarget> with_truths(const dgp::DgpSpec& spec, std::span<const mtr::EffectTarget> targets,
                                         std::size_t draws = kTruthDraws, std::uint64_t seed = kTruthSeed,
                                         int threads = 0) {
    std::vector<McTarget> out;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        const auto& t = targets[k];
        const std::uint64_t s = derive_seed(seed, k);
        dgp::OracleValue o;
        switch (t.kind) {
            case mtr::EffectKind::Mte:
                o = dgp::oracle_mte(spec, t.contrast, t.x, t.v, draws, s, threads);
                break;
            case mtr::EffectKind::AteAtX:
                o = dgp::oracle_ate_at(spec, t.contrast, t.x, draws, s, threads);
                break;
            case mtr::EffectKind::AteMarginal:
                o = dgp::oracle_ate(spec, t.contrast, draws, s, threads);
                break;
        }
        out.push_back({t, o.value, o.se});
    }
    return out;
}

/// Per-target output of one replicate.
struct ReplicateEstimates {
    std::vector<double> point;
    std::vector<double> ci_lo;
    std::vector<double> ci_hi;
};

/// Estimator under study: data and the replicate's bootstrap seed in, one
/// estimate per target out. May throw NumericalError to mark a failed replicate.
using McEstimator = std::function<ReplicateEstimates(const PanelDataset&, std::uint64_t)>;

/// The Theorem-1 estimator; with `bootstrap` false the CIs are NaN.
inline McEstimator theorem1_estimator(std::vector<mtr::EffectTarget> targets, EstimationConfig config,
                                      bool bootstrap = true) {
    return [targets = std::move(targets), config, bootstrap](const PanelDataset& data, std::uint64_t boot_seed) {
        ReplicateEstimates r;
        if (!bootstrap) {
            r.point = mtr::estimate_targets(data, targets, config);
            r.ci_lo.assign(r.point.size(), std::numeric_limits<double>::quiet_NaN());
            r.ci_hi = r.ci_lo;
            return r;
        }
        for (const auto& e : mtr::bootstrap_targets(data, targets, config, boot_seed, 1)) {
            r.point.push_back(e.point);
            r.ci_lo.push_back(e.ci_lo);
            r.ci_hi.push_back(e.ci_hi);
        }
        return r;
    };
}

struct McRow {
    std::string target;
    double truth = 0.0;
    double truth_se = 0.0;
    double avg_bias = 0.0;
    double med_bias = 0.0;
    double rmse = 0.0;
    double coverage = 0.0;
    double ci_length = 0.0;
};

struct McReport {
    std::vector<McRow> rows;
    std::size_t reps = 0;
    std::size_t completed = 0;
    std::size_t failures = 0;
    std::vector<std::string> failure_messages;
    /// Point estimates by target then replicate (completed replicates only).
    std::vector<std::vector<double>> estimates;

    double failure_rate() const { return reps == 0 ? 0.0 : static_cast<double>(failures) / static_cast<double>(reps); }

    const McRow& row(const std::string& target) const {
        for (const auto& r : rows) {
            if (r.target == target) return r;
        }
        throw ValidationError("mc-harness", "no row for target '" + target + "'");
    }
};

inline constexpr double kMaxFailureRate = 0.02;

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Bias, RMSE, coverage and mean CI length of each target over the completed
/// replicates. Coverage counts ci_lo <= truth <= ci_hi; it and the CI length
/// are NaN when the estimator reports no intervals.
inline McReport aggregate(std::span<const McTarget> targets, const std::vector<std::optional<ReplicateEstimates>>& results,
                          std::vector<std::string> failure_messages = {}) {
    McReport rep;
    rep.reps = results.size();
    rep.failure_messages = std::move(failure_messages);
    for (const auto& r : results) {
        if (r) {
            ++rep.completed;
        } else {
            ++rep.failures;
        }
    }
    for (std::size_t k = 0; k < targets.size(); ++k) {
        McRow row;
        row.target = targets[k].target.label();
        row.truth = targets[k].truth;
        row.truth_se = targets[k].truth_se;
        std::vector<double> bias, est;
        double covered = 0.0, length = 0.0;
        bool have_ci = true;
        for (const auto& r : results) {
            if (!r) continue;
            const double b = r->point.at(k) - row.truth;
            bias.push_back(b);
            est.push_back(r->point[k]);
            const double lo = r->ci_lo.at(k), hi = r->ci_hi.at(k);
            if (std::isnan(lo) || std::isnan(hi)) {
                have_ci = false;
            } else {
                covered += (lo <= row.truth && row.truth <= hi) ? 1.0 : 0.0;
                length += hi - lo;
            }
        }
        const double m = static_cast<double>(bias.size());
        if (bias.empty()) {
            row.avg_bias = row.med_bias = row.rmse = row.coverage = row.ci_length =
                std::numeric_limits<double>::quiet_NaN();
        } else {
            double s = 0.0, sq = 0.0;
            for (double b : bias) {
                s += b;
                sq += b * b;
            }
            row.avg_bias = s / m;
            row.med_bias = median(bias);
            // max() absorbs rounding; mathematically rmse >= |avg_bias| already.
            row.rmse = std::max(std::sqrt(sq / m), std::abs(row.avg_bias));
            row.coverage = have_ci ? covered / m : std::numeric_limits<double>::quiet_NaN();
            row.ci_length = have_ci ? length / m : std::numeric_limits<double>::quiet_NaN();
        }
        rep.rows.push_back(row);
        rep.estimates.push_back(std::move(est));
    }
    return rep;
}

struct McOptions {
    std::size_t reps = 500;
    std::uint64_t seed = 0;
    int threads = 0;
};

/// Replicate r simulates from substream(seed, r) and bootstraps from
/// derive_seed(seed, r); replicates run in parallel and are aggregated by index.
/// Failed replicates are excluded; a failure rate above 2% is an error.
inline McReport run_mc(const dgp::DgpSpec& spec, std::span<const McTarget> targets, const McEstimator& estimator,
                       const McOptions& opt) {
    spec.validate();
    if (opt.reps == 0) throw ValidationError("mc-harness", "reps must be >= 1");
    std::vector<std::optional<ReplicateEstimates>> results(opt.reps);
    std::vector<std::string> errors(opt.reps);
    parallel_for(opt.reps, resolve_threads(opt.threads), [&](std::size_t r) {
        const PanelDataset data = dgp::simulate(spec, substream(opt.seed, r));
        try {
            results[r] = estimator(data, derive_seed(opt.seed, r));
        } catch (const NumericalError& e) {
            errors[r] = e.what();
        }
    });
    std::vector<std::string> messages;
    for (std::size_t r = 0; r < opt.reps; ++r) {
        if (!results[r]) messages.push_back("replicate " + std::to_string(r) + ": " + errors[r]);
    }
    McReport rep = aggregate(targets, results, std::move(messages));
    if (rep.failure_rate() > kMaxFailureRate) {
        throw NumericalError("mc-harness", std::to_string(rep.failures) + " of " + std::to_string(rep.reps) +
                                               " replicates failed (limit 2%); first: " + rep.failure_messages.front());
    }
    return rep;
}

inline void write_mc_csv(std::ostream& out, const McReport& rep) {
    out << "target,avg_bias,med_bias,rmse,coverage,ci_length\n";
    for (const auto& r : rep.rows) {
        out << r.target << ',' << dynmte::detail::format_real(r.avg_bias) << ','
            << dynmte::detail::format_real(r.med_bias) << ',' << dynmte::detail::format_real(r.rmse) << ','
            << dynmte::detail::format_real(r.coverage) << ',' << dynmte::detail::format_real(r.ci_length) << '\n';
    }
}

inline std::string mc_csv(const McReport& rep) {
    std::ostringstream s;
    write_mc_csv(s, rep);
    return s.str();
}

/// Sidecar with truths and failure counts.
inline json mc_sidecar(const McReport& rep, const dgp::DgpSpec& spec, const EstimationConfig& config,
                       const McOptions& opt) {
    json truths = json::array();
    for (const auto& r : rep.rows) truths.push_back({{"target", r.target}, {"truth", r.truth}, {"se", r.truth_se}});
    return json{{"reps", rep.reps},
                {"completed", rep.completed},
                {"failures", rep.failures},
                {"failure_rate", rep.failure_rate()},
                {"failure_messages", rep.failure_messages},
                {"seed", opt.seed},
                {"truths", truths},
                {"dgp", dgp::to_json(spec)},
                {"config", to_json(config)}};
}

}  // namespace dynmte::harness
