#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dynmte/core/config_io.hpp"
#include "dynmte/core/error.hpp"
#include "dynmte/core/parallel.hpp"
#include "dynmte/core/random.hpp"
#include "dynmte/core/types.hpp"
#include "dynmte/dgp/dgp.hpp"
#include "dynmte/numkit/least_squares.hpp"
#include "dynmte/numkit/poly_basis.hpp"

namespace dynmte::diagnostics {

inline constexpr std::size_t kMinLivDraws = 100000;

/// The dynamic LIV estimand and its decomposition at one resistance point p,
/// for individuals with Y1 = y1 at covariates x.
///
/// With P(pi1) = P(Y1 = y1 | pi1) and G_{d1 d2}(v) = E[Y2(d1, d2) 1{Y1(d1) = y1} | v],
///   liv = d^2/dpi1 dpi2 E[Y2 | Y1 = y1, pi] = term_a + term_b + term_c,
///   term_a = h(p) / P,                 h = E[(Y2(1,1) - Y2(1,0) - Y2(0,1) + Y2(0,0)) 1{Y1(1) = y1} | V = p],
///   term_b = -P' H / P^2,              H = int_0^{p1} h(v1, p2) dv1,
///   term_c = (C' P - C P') / P^2,      C = int_0^1 E[(Y2(0,1) - Y2(0,0)) 1{Y1(D1(v1)) = y1} | v1, p2] dv1,
///                                      C' = E[(Y2(0,1) - Y2(0,0)) (1{Y1(1) = y1} - 1{Y1(0) = y1}) | V = p],
/// and P' = P(Y1(1) = y1 | V1 = p1) - P(Y1(0) = y1 | V1 = p1). Only term_a
/// involves the four-arm contrast; term_b and term_c vanish when V does not
/// shift the potential outcomes.
struct LivDecomposition {
    double liv_value = 0.0;
    double liv_se = 0.0;
    double target_mte = 0.0;
    double target_se = 0.0;
    double term_a = 0.0;
    double term_b = 0.0;
    double term_c = 0.0;
    std::array<double, 2> point{0.25, 0.75};
    int y1 = 1;
    std::size_t n = 0;
    std::size_t subsample = 0;

    double terms_sum() const { return term_a + term_b + term_c; }

    json to_json() const {
        return json{{"liv_value", liv_value}, {"liv_se", liv_se}, {"target_mte", target_mte},
                    {"target_se", target_se}, {"term_a", term_a}, {"term_b", term_b},
                    {"term_c", term_c},       {"terms_sum", terms_sum()}, {"point", point},
                    {"y1", y1},               {"n", n},           {"subsample", subsample}};
    }

    /// Labeled four-number table.
    std::string table() const {
        char buf[512];
        std::snprintf(buf, sizeof buf,
                      "quantity      value\n"
                      "liv       %9.5f  (se %.5f)\n"
                      "term_a    %9.5f\n"
                      "term_b    %9.5f\n"
                      "term_c    %9.5f\n"
                      "a+b+c     %9.5f\n"
                      "mte       %9.5f  (se %.5f)\n",
                      liv_value, liv_se, term_a, term_b, term_c, terms_sum(), target_mte, target_se);
        return buf;
    }
};

struct LivOptions {
    std::array<double, 2> point{0.25, 0.75};
    int y1 = 1;
    /// Range of the exogenous propensity scores.
    double pi_lo = 0.0;
    double pi_hi = 1.0;
    int basis_degree = 2;
};

namespace detail {

/// Y2(d1, d2) in the period-ordered notation used above.
inline double y2(const dgp::DgpSpec& s, const Covariates& x, const dgp::Latents& l, int d1, int d2) {
    return dgp::y2_potential(s, x, l, d2, d1);
}

inline double is(int a, int b) { return a == b ? 1.0 : 0.0; }

/// P(Y2(d1, d2) = 1 | V, e1): the period-two innovation integrated out.
inline double y2_prob(const dgp::DgpSpec& s, const Covariates& x, const dgp::Latents& l, int d1, int d2) {
    const double slope = d2 ? s.u_slopes[2] : s.u_slopes[3];
    const double index = dot(s.beta, x) + s.theta * dgp::y1_potential(s, x, l, d1) - slope * (l.v2 - 0.5) -
                         dgp::u1(s, l, d1);
    return 0.5 * std::erfc(-index / std::sqrt(2.0));
}

}  // namespace detail

/// Evaluates the decomposition at x = the population mean of X. Propensities
/// are drawn independently of everything else as pi_t ~ U(pi_lo, pi_hi), and
/// D_t = 1{pi_t >= V_t}. The LIV is the cross-partial of a sieve regression of
/// Y2 on the Y1 = y1 subsample, with the period-two innovation integrated out of
/// the response (same regression function, less noise); each term is a simulation average over n draws
/// with V held where the formula fixes it.
inline LivDecomposition liv_decompose(const dgp::DgpSpec& spec, std::size_t n, const LivOptions& opt,
                                      std::uint64_t seed, int threads = 0) {
    spec.validate();
    if (n < kMinLivDraws) throw ValidationError("diagnostics", "liv_decompose needs n >= " + std::to_string(kMinLivDraws));
    if (opt.y1 != 0 && opt.y1 != 1) throw ValidationError("diagnostics", "y1 must be 0 or 1");
    if (!(opt.pi_lo >= 0.0 && opt.pi_lo < opt.pi_hi && opt.pi_hi <= 1.0)) {
        throw ValidationError("diagnostics", "propensity range must satisfy 0 <= lo < hi <= 1");
    }
    const auto p = opt.point;
    if (!(p[0] > opt.pi_lo && p[0] < opt.pi_hi && p[1] > opt.pi_lo && p[1] < opt.pi_hi)) {
        throw ValidationError("diagnostics", "evaluation point must lie inside the propensity range");
    }
    const Covariates x = spec.x_mean();
    const int y1 = opt.y1;

    LivDecomposition out;
    out.point = p;
    out.y1 = y1;
    out.n = n;

    // Observational sample with exogenous propensities.
    const numkit::PolyBasis basis(opt.basis_degree, 2);
    const std::array<numkit::Direction, 2> tt{numkit::Direction::Treated, numkit::Direction::Treated};
    const int top = opt.basis_degree + 1;
    std::vector<std::array<double, 2>> pis;
    std::vector<double> ys;
    {
        RandomStream rng = substream(seed, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double pi1 = rng.uniform(opt.pi_lo, opt.pi_hi);
            const double pi2 = rng.uniform(opt.pi_lo, opt.pi_hi);
            const double v1 = rng.uniform();
            const double v2 = rng.uniform();
            const dgp::Latents l = dgp::draw_innovations(rng, v1, v2);
            const int d1 = pi1 >= v1 ? 1 : 0;
            const int d2 = pi2 >= v2 ? 1 : 0;
            if (dgp::y1_potential(spec, x, l, d1) != y1) continue;
            pis.push_back({pi1, pi2});
            ys.push_back(detail::y2_prob(spec, x, l, d1, d2));
        }
    }
    out.subsample = ys.size();
    const auto width = static_cast<Eigen::Index>(1 + 2 * top + basis.size());
    if (static_cast<Eigen::Index>(ys.size()) < width + 20) {
        throw InsufficientSupportError("diagnostics", "too few individuals with Y1 = " + std::to_string(y1));
    }
    Eigen::MatrixXd design(static_cast<Eigen::Index>(ys.size()), width);
    Eigen::VectorXd response = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
    std::vector<double> phi(basis.size());
    for (Eigen::Index r = 0; r < design.rows(); ++r) {
        const auto& pi = pis[static_cast<std::size_t>(r)];
        Eigen::Index c = 0;
        design(r, c++) = 1.0;
        for (int j = 1; j <= top; ++j) design(r, c++) = std::pow(pi[0], j);
        for (int j = 1; j <= top; ++j) design(r, c++) = std::pow(pi[1], j);
        basis.antideriv_into(pi, tt, phi.data());
        for (double f : phi) design(r, c++) = f;
    }
    const auto ls = numkit::solve_least_squares(design, response);
    const Eigen::VectorXd resid = response - design * ls.coef;
    const Eigen::MatrixXd cov = numkit::robust_covariance(design, resid);
    const auto offset = static_cast<Eigen::Index>(1 + 2 * top);
    const auto k = static_cast<Eigen::Index>(basis.size());
    const Eigen::VectorXd phi_p = basis.eval(p);
    out.liv_value = phi_p.dot(ls.coef.segment(offset, k));
    out.liv_se = std::sqrt(std::max(0.0, phi_p.dot(cov.block(offset, offset, k, k) * phi_p)));

    // Population terms by simulation at fixed resistances.
    struct Sums {
        double P = 0, dP = 0, h = 0, H = 0, C = 0, dC = 0;
    };
    const std::size_t chunk = std::size_t{1} << 16;
    const std::size_t chunks = (n + chunk - 1) / chunk;
    std::vector<Sums> parts(chunks);
    const std::uint64_t term_seed = derive_seed(seed, 1);
    parallel_for(chunks, resolve_threads(threads), [&](std::size_t c) {
        RandomStream rng = substream(term_seed, c);
        Sums s;
        const std::size_t end = std::min(n, (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i) {
            {   // P: V1 uniform, Y1 of the realized first-period arm.
                const double v1 = rng.uniform();
                const dgp::Latents l = dgp::draw_innovations(rng, v1, 0.5);
                s.P += detail::is(dgp::y1_potential(spec, x, l, p[0] >= v1 ? 1 : 0), y1);
            }
            {   // P', h and C' at V = p.
                const dgp::Latents l = dgp::draw_innovations(rng, p[0], p[1]);
                const double i1 = detail::is(dgp::y1_potential(spec, x, l, 1), y1);
                const double i0 = detail::is(dgp::y1_potential(spec, x, l, 0), y1);
                const double late0 = detail::y2(spec, x, l, 0, 1) - detail::y2(spec, x, l, 0, 0);
                const double late1 = detail::y2(spec, x, l, 1, 1) - detail::y2(spec, x, l, 1, 0);
                s.dP += i1 - i0;
                s.h += (late1 - late0) * i1;
                s.dC += late0 * (i1 - i0);
            }
            {   // H: V1 ~ U(0, p1), V2 = p2.
                const double v1 = p[0] * rng.uniform();
                const dgp::Latents l = dgp::draw_innovations(rng, v1, p[1]);
                const double i1 = detail::is(dgp::y1_potential(spec, x, l, 1), y1);
                const double late0 = detail::y2(spec, x, l, 0, 1) - detail::y2(spec, x, l, 0, 0);
                const double late1 = detail::y2(spec, x, l, 1, 1) - detail::y2(spec, x, l, 1, 0);
                s.H += p[0] * (late1 - late0) * i1;
            }
            {   // C: V1 uniform, V2 = p2.
                const double v1 = rng.uniform();
                const dgp::Latents l = dgp::draw_innovations(rng, v1, p[1]);
                const int d1 = p[0] >= v1 ? 1 : 0;
                const double ind = detail::is(dgp::y1_potential(spec, x, l, d1), y1);
                s.C += (detail::y2(spec, x, l, 0, 1) - detail::y2(spec, x, l, 0, 0)) * ind;
            }
        }
        parts[c] = s;
    });
    Sums tot;
    for (const auto& s : parts) {
        tot.P += s.P;
        tot.dP += s.dP;
        tot.h += s.h;
        tot.H += s.H;
        tot.C += s.C;
        tot.dC += s.dC;
    }
    const double nd = static_cast<double>(n);
    const double P = tot.P / nd, dP = tot.dP / nd, h = tot.h / nd, H = tot.H / nd, C = tot.C / nd, dC = tot.dC / nd;
    if (!(P > 0.0)) throw NumericalError("diagnostics", "P(Y1 = y1) is zero at the evaluation point");
    out.term_a = h / P;
    out.term_b = -dP * H / (P * P);
    out.term_c = (dC * P - C * dP) / (P * P);

    const Contrast c{TreatmentSequence{1, 1}, TreatmentSequence{0, 0}};
    const auto mte = dgp::oracle_mte(spec, c, x, p, std::max(n, dgp::kMinMtrDraws), derive_seed(seed, 2), threads);
    out.target_mte = mte.value;
    out.target_se = mte.se;
    return out;
}

}  // namespace dynmte::diagnostics
