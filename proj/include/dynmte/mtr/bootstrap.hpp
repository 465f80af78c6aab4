#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dynmte/core/config_io.hpp"
#include "dynmte/core/error.hpp"
#include "dynmte/core/parallel.hpp"
#include "dynmte/core/random.hpp"
#include "dynmte/core/types.hpp"
#include "dynmte/mtr/pipeline.hpp"

namespace dynmte::mtr {

/// 1-based ranks of the 95% percentile interval among B sorted replicates:
/// ceil(0.025 (B + 1)) and floor(0.975 (B + 1)), kept inside [1, B].
inline std::pair<std::size_t, std::size_t> percentile_ranks(std::size_t reps) {
    if (reps == 0) throw ValidationError("mtr-effects", "percentile interval needs at least one replicate");
    std::size_t lo = (25 * (reps + 1) + 999) / 1000;
    std::size_t hi = (975 * (reps + 1)) / 1000;
    lo = std::clamp<std::size_t>(lo, 1, reps);
    hi = std::clamp<std::size_t>(hi, 1, reps);
    return {lo, hi};
}

inline std::pair<double, double> percentile_interval(std::vector<double> values) {
    const auto [lo, hi] = percentile_ranks(values.size());
    std::sort(values.begin(), values.end());
    return {values[lo - 1], values[hi - 1]};
}

/// Replicate statistics of a nonparametric bootstrap, one row per replicate.
struct BootstrapDraws {
    std::vector<std::vector<double>> values;
    long attempts = 0;
    long failures = 0;

    std::vector<double> column(std::size_t k) const {
        std::vector<double> out;
        out.reserve(values.size());
        for (const auto& row : values) out.push_back(row.at(k));
        return out;
    }
};

/// Resamples individuals with replacement and applies `statistic` to each
/// resample. Attempt k of replicate b draws its rows from substream(seed, b + k B);
/// an attempt whose statistic raises NumericalError is redrawn. More than 4B
/// failed attempts in total (5B attempts) raise BootstrapFailure.
inline BootstrapDraws bootstrap(const PanelDataset& data, std::size_t reps, std::uint64_t seed, unsigned threads,
                                const std::function<std::vector<double>(const PanelDataset&)>& statistic) {
    if (reps == 0) throw ValidationError("mtr-effects", "bootstrap needs at least one replicate");
    if (data.n() == 0) throw ValidationError("mtr-effects", "cannot bootstrap an empty panel");
    const long budget = 4 * static_cast<long>(reps);
    std::atomic<long> failures{0};
    std::vector<long> attempts(reps, 0);
    BootstrapDraws out;
    out.values.resize(reps);

    parallel_for(reps, threads, [&](std::size_t b) {
        std::vector<std::size_t> rows(data.n());
        for (std::uint64_t k = 0;; ++k) {
            if (failures.load() > budget) return;
            RandomStream rng = substream(seed, b + k * reps);
            for (auto& r : rows) r = static_cast<std::size_t>(rng.below(data.n()));
            ++attempts[b];
            try {
                out.values[b] = statistic(data.select(rows));
                return;
            } catch (const NumericalError&) {
                ++failures;
            }
        }
    });

    out.failures = failures.load();
    for (long a : attempts) out.attempts += a;
    if (out.failures > budget) {
        throw BootstrapFailure("bootstrap gave up after " + std::to_string(out.attempts) + " attempts with " +
                                   std::to_string(out.failures) + " failed replicates (limit " +
                                   std::to_string(budget) + ")",
                               out.attempts, out.failures);
    }
    return out;
}

/// Point estimate with bootstrap replicates and 95% percentile interval.
struct EffectEstimate {
    EffectTarget target;
    double point = 0.0;
    std::vector<double> boot;
    double ci_lo = 0.0;
    double ci_hi = 0.0;

    /// Record {contrast, kind, x, v, point, ci_lo, ci_hi, n_boot}; x is null for
    /// the marginal ATE and v is null for both ATE kinds.
    json to_json() const {
        json j{{"contrast", target.contrast.str()},
               {"kind", kind_name(target.kind)},
               {"x", nullptr},
               {"v", nullptr},
               {"point", point},
               {"ci_lo", ci_lo},
               {"ci_hi", ci_hi},
               {"n_boot", boot.size()}};
        if (target.kind != EffectKind::AteMarginal) j["x"] = target.x;
        if (target.kind == EffectKind::Mte) j["v"] = target.v;
        return j;
    }
};

/// Point estimates of all targets on `data`, with replicates shared across targets.
inline std::vector<EffectEstimate> bootstrap_targets(const PanelDataset& data, std::span<const EffectTarget> targets,
                                                     const EstimationConfig& config, std::uint64_t boot_seed,
                                                     unsigned threads) {
    config.validate();
    const auto points = estimate_targets(data, targets, config);
    const std::vector<EffectTarget> owned(targets.begin(), targets.end());
    const auto draws = bootstrap(data, static_cast<std::size_t>(config.bootstrap_reps), boot_seed, threads,
                                 [&](const PanelDataset& resample) { return estimate_targets(resample, owned, config); });
    std::vector<EffectEstimate> out;
    for (std::size_t k = 0; k < owned.size(); ++k) {
        EffectEstimate e;
        e.target = owned[k];
        e.point = points[k];
        e.boot = draws.column(k);
        std::tie(e.ci_lo, e.ci_hi) = percentile_interval(e.boot);
        out.push_back(std::move(e));
    }
    return out;
}

/// Single-target form; replicates are drawn from substreams of config.seed.
inline EffectEstimate bootstrap_effect(const PanelDataset& data, const EffectTarget& target,
                                       const EstimationConfig& config, unsigned threads = 1) {
    const std::vector<EffectTarget> one{target};
    return bootstrap_targets(data, one, config, config.seed, threads).front();
}

}  // namespace dynmte::mtr
