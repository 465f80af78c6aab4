#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dynmte/core/config_io.hpp"
#include "dynmte/core/error.hpp"
#include "dynmte/core/types.hpp"
#include "dynmte/firststage/firststage.hpp"
#include "dynmte/numkit/least_squares.hpp"
#include "dynmte/numkit/poly_basis.hpp"

namespace dynmte::mtr {

/// Extra rows beyond the design width that a sequence must have to be fitted.
inline constexpr std::size_t kSupportMargin = 20;

/// Working model of E[Y2(seq) | X = x, Y1 = y1, V = v]:
///   m(x, y1, v) = beta_x'x + theta y1 + phi(v)'gamma.
///
/// It is fitted through the identity
///   E[1{D = seq} Y2 | x, y1, pi] = q_seq(pi) (beta_x'x + theta y1) + Phi_seq(pi)'gamma,
/// where q_seq and Phi_seq integrate 1 and phi over the box of resistances
/// compatible with seq (treated: 0 -> pi_t, untreated: pi_t -> 1). The signed
/// cross-partial sign * d^2/dpi1 dpi2 of the right-hand side is m itself.
struct ConditionalMtrFit {
    TreatmentSequence seq;
    numkit::PolyBasis basis{0};
    Eigen::VectorXd gamma;
    Covariates beta_x{};
    double theta_y1 = 0.0;
    int sign = 1;
    std::size_t support = 0;
    bool rank_deficient = false;

    double eval(const Covariates& x, double y1, std::array<double, 2> v) const {
        return dot(beta_x, x) + theta_y1 * y1 + basis.eval(v).dot(gamma);
    }

    /// Fitted regression function q(pi)(beta_x'x + theta y1) + Phi(pi)'gamma.
    double regression_function(const Covariates& x, double y1, std::array<double, 2> pi) const {
        const auto dirs = numkit::directions_of(seq);
        return box_mass(pi) * (dot(beta_x, x) + theta_y1 * y1) + basis.antideriv(pi, dirs).dot(gamma);
    }

    /// Analytic cross-partial of regression_function in (pi1, pi2).
    double regression_cross_partial(const Covariates& x, double y1, std::array<double, 2> pi) const {
        const auto dirs = numkit::directions_of(seq);
        return sign * (dot(beta_x, x) + theta_y1 * y1) + basis.antideriv_cross_partial(pi, dirs).dot(gamma);
    }

    /// q_seq(pi): probability mass of the resistance box compatible with seq.
    double box_mass(std::array<double, 2> pi) const {
        double q = 1.0;
        for (std::size_t t = 0; t < 2; ++t) q *= seq[t] ? pi[t] : 1.0 - pi[t];
        return q;
    }

    json to_json() const {
        return json{{"seq", seq.str()},   {"basis_degree", basis.degree()},
                    {"gamma", std::vector<double>(gamma.data(), gamma.data() + gamma.size())},
                    {"beta_x", beta_x},   {"theta_y1", theta_y1},
                    {"sign", sign},       {"support", support},
                    {"rank_deficient", rank_deficient}};
    }
};

/// Least-squares fit of the working model for `seq`. The period 2 propensity
/// of every row is evaluated at the lagged treatment seq.d1, the history the
/// potential outcome Y2(seq) refers to.
inline ConditionalMtrFit fit_conditional_mtr(const PanelDataset& data, const TreatmentSequence& seq,
                                             const firststage::PropensityModel& p1,
                                             const firststage::PropensityModel& p2, const EstimationConfig& config) {
    config.validate();
    if (seq.size() != 2 || data.t_max() < 2) {
        throw ValidationError("mtr-effects", "conditional MTR fit needs a two-period panel and sequence");
    }
    if (p1.period() != 1 || p2.period() != 2) throw ValidationError("mtr-effects", "propensities passed out of order");

    ConditionalMtrFit fit;
    fit.seq = seq;
    fit.basis = numkit::PolyBasis(config.basis_degree, 2);
    fit.sign = seq.sign();
    const auto dirs = numkit::directions_of(seq);
    const std::size_t width = 4 + fit.basis.size();

    for (std::size_t i = 0; i < data.n(); ++i) fit.support += data.follows(i, seq) ? 1 : 0;
    if (fit.support < width + kSupportMargin) {
        throw InsufficientSupportError("mtr-effects", "sequence " + seq.str() + " has " + std::to_string(fit.support) +
                                                          " followers; at least " +
                                                          std::to_string(width + kSupportMargin) + " are needed");
    }

    const auto n = static_cast<Eigen::Index>(data.n());
    Eigen::MatrixXd design(n, static_cast<Eigen::Index>(width));
    Eigen::VectorXd response(n);
    std::vector<double> phi(fit.basis.size());
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto i = static_cast<std::size_t>(r);
        const std::array<double, 2> pi{p1.fitted(i), p2.predict(data, i, seq[0])};
        const double q = fit.box_mass(pi);
        const auto& x = data.x(i);
        design(r, 0) = q * x[0];
        design(r, 1) = q * x[1];
        design(r, 2) = q * x[2];
        design(r, 3) = q * data.y(1)[i];
        fit.basis.antideriv_into(pi, dirs, phi.data());
        for (std::size_t k = 0; k < phi.size(); ++k) design(r, static_cast<Eigen::Index>(4 + k)) = phi[k];
        response[r] = data.follows(i, seq) ? static_cast<double>(data.y(2)[i]) : 0.0;
    }

    const auto ls = numkit::solve_least_squares(design, response);
    fit.beta_x = {ls.coef[0], ls.coef[1], ls.coef[2]};
    fit.theta_y1 = ls.coef[3];
    fit.gamma = ls.coef.tail(static_cast<Eigen::Index>(fit.basis.size()));
    fit.rank_deficient = ls.rank_deficient;
    return fit;
}

}  // namespace dynmte::mtr
