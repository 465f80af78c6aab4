#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dynmte/core/config_io.hpp"
#include "dynmte/core/error.hpp"
#include "dynmte/core/random.hpp"
#include "dynmte/core/types.hpp"
#include "dynmte/firststage/firststage.hpp"
#include "dynmte/mtr/bootstrap.hpp"
#include "dynmte/numkit/logistic.hpp"

namespace dynmte::diagnostics {

struct BaselineOptions {
    /// 0 sums over the two values of Y1 exactly; a positive count simulates
    /// Y1 and then Y2 forward that many times per individual.
    std::size_t forward_draws = 0;
};

/// Parametric g-formula under sequential randomization:
///   E[Y2(d1, d2)] = mean_i sum_y1 P(Y1 = y1 | d1, x_i) P(Y2 = 1 | d2, d1, y1, x_i)
/// with both laws logistic.
struct GFormulaFit {
    firststage::NamedLogit y1_model;  // (1, d1, x1, x2, x3)
    firststage::NamedLogit y2_model;  // (1, d2, d1, y1, x1, x2, x3)
    std::vector<Covariates> xs;

    double p_y1(int d1, const Covariates& x) const {
        Eigen::RowVectorXd r(5);
        r << 1.0, static_cast<double>(d1), x[0], x[1], x[2];
        return y1_model.predict(r);
    }

    double p_y2(int d1, int d2, int y1, const Covariates& x) const {
        Eigen::RowVectorXd r(7);
        r << 1.0, static_cast<double>(d2), static_cast<double>(d1), static_cast<double>(y1), x[0], x[1], x[2];
        return y2_model.predict(r);
    }

    /// E[Y2(seq)] by exact enumeration over Y1.
    double arm_mean(const TreatmentSequence& seq) const {
        double s = 0.0;
        for (const auto& x : xs) {
            const double w1 = p_y1(seq[0], x);
            s += (1.0 - w1) * p_y2(seq[0], seq[1], 0, x) + w1 * p_y2(seq[0], seq[1], 1, x);
        }
        return s / static_cast<double>(xs.size());
    }

    /// E[Y2(seq)] by forward simulation, `draws` paths per individual.
    double arm_mean_simulated(const TreatmentSequence& seq, std::size_t draws, RandomStream& rng) const {
        double s = 0.0;
        for (const auto& x : xs) {
            const double w1 = p_y1(seq[0], x);
            const double q0 = p_y2(seq[0], seq[1], 0, x);
            const double q1 = p_y2(seq[0], seq[1], 1, x);
            std::size_t hits = 0;
            for (std::size_t k = 0; k < draws; ++k) {
                const bool y1 = rng.uniform() < w1;
                hits += rng.uniform() < (y1 ? q1 : q0) ? 1 : 0;
            }
            s += static_cast<double>(hits) / static_cast<double>(draws);
        }
        return s / static_cast<double>(xs.size());
    }
};

inline GFormulaFit fit_gformula(const PanelDataset& data) {
    if (data.t_max() < 2) throw ValidationError("diagnostics", "g-formula baseline needs a two-period panel");
    const auto n = static_cast<Eigen::Index>(data.n());
    Eigen::MatrixXd d1(n, 5), d2(n, 7);
    Eigen::VectorXd r1(n), r2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        const auto& x = data.x(row);
        const double t1 = data.d(1)[row], t2 = data.d(2)[row], y1 = data.y(1)[row];
        d1.row(i) << 1.0, t1, x[0], x[1], x[2];
        d2.row(i) << 1.0, t2, t1, y1, x[0], x[1], x[2];
        r1[i] = y1;
        r2[i] = data.y(2)[row];
    }
    GFormulaFit fit;
    fit.y1_model = firststage::detail::fit_named_logit(d1, r1, {"intercept", "d1", "x1", "x2", "x3"}, "g-formula Y1 model");
    fit.y2_model = firststage::detail::fit_named_logit(d2, r2, {"intercept", "d2", "d1", "y1", "x1", "x2", "x3"},
                                                       "g-formula Y2 model");
    fit.xs.assign(data.x().begin(), data.x().end());
    return fit;
}

/// Point ATEs of the g-formula baseline, one per contrast.
inline std::vector<double> gformula_ates(const PanelDataset& data, std::span<const Contrast> contrasts,
                                         const BaselineOptions& opt, std::uint64_t sim_seed) {
    const GFormulaFit fit = fit_gformula(data);
    std::vector<double> out;
    RandomStream rng = substream(sim_seed, 0);
    for (const auto& c : contrasts) {
        if (c.a.size() != 2 || c.b.size() != 2) throw ValidationError("diagnostics", "contrast must cover two periods");
        if (c.a == c.b) {
            out.push_back(0.0);
        } else if (opt.forward_draws == 0) {
            out.push_back(fit.arm_mean(c.a) - fit.arm_mean(c.b));
        } else {
            const double ma = fit.arm_mean_simulated(c.a, opt.forward_draws, rng);
            const double mb = fit.arm_mean_simulated(c.b, opt.forward_draws, rng);
            out.push_back(ma - mb);
        }
    }
    return out;
}

struct BaselineReport {
    std::string method = "parametric-gformula";
    std::vector<Contrast> contrasts;
    std::vector<double> ate;
    std::vector<double> ci_lo;
    std::vector<double> ci_hi;
    std::size_t n_boot = 0;

    json to_json() const {
        json rows = json::array();
        for (std::size_t k = 0; k < contrasts.size(); ++k) {
            rows.push_back({{"contrast", contrasts[k].str()}, {"ate", ate[k]}, {"ci_lo", ci_lo[k]}, {"ci_hi", ci_hi[k]}});
        }
        return json{{"method", method}, {"n_boot", n_boot}, {"estimates", rows}};
    }
};

/// Baseline ATEs with percentile bootstrap intervals from config.bootstrap_reps
/// replicates drawn from substreams of config.seed.
inline BaselineReport baseline_gformula(const PanelDataset& data, std::span<const Contrast> contrasts,
                                        const EstimationConfig& config, const BaselineOptions& opt = {},
                                        unsigned threads = 1) {
    config.validate();
    const std::uint64_t sim_seed = derive_seed(config.seed, 0x6766);
    BaselineReport rep;
    rep.contrasts.assign(contrasts.begin(), contrasts.end());
    rep.ate = gformula_ates(data, contrasts, opt, sim_seed);
    const std::vector<Contrast> owned(contrasts.begin(), contrasts.end());
    const auto draws = mtr::bootstrap(data, static_cast<std::size_t>(config.bootstrap_reps), config.seed, threads,
                                      [&](const PanelDataset& resample) { return gformula_ates(resample, owned, opt, sim_seed); });
    rep.n_boot = draws.values.size();
    for (std::size_t k = 0; k < owned.size(); ++k) {
        const auto [lo, hi] = mtr::percentile_interval(draws.column(k));
        rep.ci_lo.push_back(lo);
        rep.ci_hi.push_back(hi);
    }
    return rep;
}

}  // namespace dynmte::diagnostics
