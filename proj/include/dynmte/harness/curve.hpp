#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dynmte/core/config_io.hpp"
#include "dynmte/core/error.hpp"
#include "dynmte/core/panel_io.hpp"
#include "dynmte/core/random.hpp"
#include "dynmte/core/types.hpp"
#include "dynmte/dgp/dgp.hpp"
#include "dynmte/mtr/bootstrap.hpp"

namespace dynmte::harness {

struct CurvePoint {
    double v = 0.0;
    double estimate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

/// MTE estimates along one resistance axis with the other held at fixed_v.
struct CurveGrid {
    Contrast contrast;
    int axis = 1;
    double fixed_v = 0.5;
    std::vector<CurvePoint> points;

    /// Ordinary least-squares slope of the estimates on v.
    double slope() const {
        double mv = 0.0, me = 0.0;
        for (const auto& p : points) {
            mv += p.v;
            me += p.estimate;
        }
        mv /= static_cast<double>(points.size());
        me /= static_cast<double>(points.size());
        double sxy = 0.0, sxx = 0.0;
        for (const auto& p : points) {
            sxy += (p.v - mv) * (p.estimate - me);
            sxx += (p.v - mv) * (p.v - mv);
        }
        return sxy / sxx;
    }
};

/// grid equally spaced values on [0.05, 0.95].
inline std::vector<double> curve_abscissae(int grid) {
    if (grid < 2) throw ValidationError("mc-harness", "curve grid needs at least 2 points");
    std::vector<double> v(static_cast<std::size_t>(grid));
    for (int k = 0; k < grid; ++k) v[static_cast<std::size_t>(k)] = 0.05 + 0.9 * k / (grid - 1);
    return v;
}

inline std::array<double, 2> curve_point(int axis, double v, double fixed_v) {
    return axis == 1 ? std::array<double, 2>{v, fixed_v} : std::array<double, 2>{fixed_v, v};
}

inline void check_curve_args(int axis, double fixed_v) {
    if (axis != 1 && axis != 2) throw ValidationError("mc-harness", "curve axis must be 1 or 2");
    if (!(fixed_v > 0.0 && fixed_v < 1.0)) throw ValidationError("mc-harness", "fixed resistance must lie in (0, 1)");
}

/// One dataset simulated from substream(seed, 0) at spec.n; MTEs at the
/// population mean of X on the grid; one set of bootstrap replicates drawn from
/// derive_seed(seed, 0) serves every grid point.
inline CurveGrid run_curve(const dgp::DgpSpec& spec, const Contrast& contrast, int axis, double fixed_v, int grid,
                           const EstimationConfig& config, std::uint64_t seed, int threads = 0) {
    check_curve_args(axis, fixed_v);
    const auto vs = curve_abscissae(grid);
    std::vector<mtr::EffectTarget> targets;
    for (double v : vs) targets.push_back({contrast, mtr::EffectKind::Mte, spec.x_mean(), curve_point(axis, v, fixed_v)});
    const PanelDataset data = dgp::simulate(spec, substream(seed, 0));
    const auto est = mtr::bootstrap_targets(data, targets, config, derive_seed(seed, 0), resolve_threads(threads));
    CurveGrid out{contrast, axis, fixed_v, {}};
    for (std::size_t k = 0; k < vs.size(); ++k) out.points.push_back({vs[k], est[k].point, est[k].ci_lo, est[k].ci_hi});
    return out;
}

/// Oracle MTE on the same grid.
inline std::vector<dgp::OracleValue> oracle_curve(const dgp::DgpSpec& spec, const Contrast& contrast, int axis,
                                                  double fixed_v, int grid, std::size_t draws, std::uint64_t seed,
                                                  int threads = 0) {
    check_curve_args(axis, fixed_v);
    std::vector<dgp::OracleValue> out;
    const auto vs = curve_abscissae(grid);
    for (std::size_t k = 0; k < vs.size(); ++k) {
        out.push_back(dgp::oracle_mte(spec, contrast, spec.x_mean(), curve_point(axis, vs[k], fixed_v), draws,
                                      derive_seed(seed, k), threads));
    }
    return out;
}

inline void write_curve_csv(std::ostream& out, const CurveGrid& g) {
    out << "v,estimate,ci_lo,ci_hi\n";
    for (const auto& p : g.points) {
        out << dynmte::detail::format_real(p.v) << ',' << dynmte::detail::format_real(p.estimate) << ','
            << dynmte::detail::format_real(p.ci_lo) << ',' << dynmte::detail::format_real(p.ci_hi) << '\n';
    }
}

inline std::string curve_csv(const CurveGrid& g) {
    std::ostringstream s;
    write_curve_csv(s, g);
    return s.str();
}

/// MTE grid in two-coordinate form: v1,v2,estimate,ci_lo,ci_hi.
inline std::string mte_grid_csv(std::span<const mtr::EffectEstimate> estimates) {
    std::string out = "v1,v2,estimate,ci_lo,ci_hi\n";
    for (const auto& e : estimates) {
        out += dynmte::detail::format_real(e.target.v[0]) + "," + dynmte::detail::format_real(e.target.v[1]) + "," +
               dynmte::detail::format_real(e.point) + "," + dynmte::detail::format_real(e.ci_lo) + "," +
               dynmte::detail::format_real(e.ci_hi) + "\n";
    }
    return out;
}

inline json oracle_curve_json(const CurveGrid& g, const std::vector<dgp::OracleValue>& oracle) {
    json v = json::array(), value = json::array(), se = json::array();
    for (std::size_t k = 0; k < g.points.size(); ++k) {
        v.push_back(g.points[k].v);
        value.push_back(oracle.at(k).value);
        se.push_back(oracle[k].se);
    }
    return json{{"contrast", g.contrast.str()}, {"axis", g.axis}, {"fixed_v", g.fixed_v},
                {"v", v},                       {"value", value}, {"se", se}};
}

}  // namespace dynmte::harness
