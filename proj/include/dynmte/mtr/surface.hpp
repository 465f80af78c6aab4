#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dynmte/core/error.hpp"
#include "dynmte/core/types.hpp"
#include "dynmte/firststage/firststage.hpp"
#include "dynmte/mtr/conditional.hpp"
#include "dynmte/numkit/logistic.hpp"
#include "dynmte/numkit/quadrature.hpp"

namespace dynmte::mtr {

/// Unconditional MTR m(x, v) = sum_y1 m(x, y1, v) w_y1(seq.d1, v1, x). The
/// conditional surface is affine in y1, so this is beta_x'x + theta w1 + phi(v)'gamma.
/// Values are never clipped here.
class MtrSurface {
public:
    MtrSurface() = default;
    MtrSurface(ConditionalMtrFit fit, std::shared_ptr<const firststage::MixingModel> mixing)
        : fit_(std::move(fit)), mixing_(std::move(mixing)) {
        if (!mixing_) throw ValidationError("mtr-effects", "MTR surface needs a mixing model");
    }

    const TreatmentSequence& seq() const noexcept { return fit_.seq; }
    const ConditionalMtrFit& conditional() const noexcept { return fit_; }
    const firststage::MixingModel& mixing() const { return *mixing_; }

    double w1(double v1, const Covariates& x) const { return mixing_->prob_y1(fit_.seq[0], v1, x); }

    double eval(const Covariates& x, std::array<double, 2> v) const {
        return dot(fit_.beta_x, x) + fit_.theta_y1 * w1(v[0], x) + fit_.basis.eval(v).dot(fit_.gamma);
    }

    /// Integral of w1 over v1 in [0, 1].
    double integrated_w1(const Covariates& x) const {
        const auto [a, b] = mixing_->index_line(fit_.seq[0], x);
        if (std::abs(b) < 1e-7) return numkit::logistic(a + 0.5 * b);
        return (numkit::softplus(a + b) - numkit::softplus(a)) / b;
    }

    /// Integral of m(x, v) over the unit square, closed form.
    double integrated(const Covariates& x) const {
        return dot(fit_.beta_x, x) + fit_.theta_y1 * integrated_w1(x) + fit_.basis.unit_integral().dot(fit_.gamma);
    }

    /// Integral of m(x, v) over the unit square by tensor Gauss-Legendre.
    double integrated_quadrature(const Covariates& x, const numkit::QuadratureRule& rule) const {
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
                s += rule.weights[i] * rule.weights[j] * eval(x, {rule.nodes[i], rule.nodes[j]});
            }
        }
        return s;
    }

private:
    ConditionalMtrFit fit_;
    std::shared_ptr<const firststage::MixingModel> mixing_;
};

inline MtrSurface mix_out_y1(ConditionalMtrFit fit, std::shared_ptr<const firststage::MixingModel> mixing) {
    return MtrSurface(std::move(fit), std::move(mixing));
}

inline MtrSurface mix_out_y1(ConditionalMtrFit fit, const firststage::MixingModel& mixing) {
    return MtrSurface(std::move(fit), std::make_shared<const firststage::MixingModel>(mixing));
}

namespace detail {

inline void check_pair(const MtrSurface& a, const MtrSurface& b) {
    if (a.seq().size() != b.seq().size()) {
        throw ValidationError("mtr-effects", "surfaces cover different numbers of periods (" + a.seq().str() + " vs " +
                                                 b.seq().str() + ")");
    }
}

}  // namespace detail

/// MTE(a, b; x, v) = m_a(x, v) - m_b(x, v).
inline double mte(const MtrSurface& a, const MtrSurface& b, const Covariates& x, std::array<double, 2> v) {
    detail::check_pair(a, b);
    if (!(v[0] >= 0.0 && v[0] <= 1.0 && v[1] >= 0.0 && v[1] <= 1.0)) {
        throw ValidationError("mtr-effects", "MTE point must lie in the unit square");
    }
    return a.eval(x, v) - b.eval(x, v);
}

/// ATE(a, b; x): the MTE integrated over the unit square.
inline double ate_at(const MtrSurface& a, const MtrSurface& b, const Covariates& x) {
    detail::check_pair(a, b);
    return a.integrated(x) - b.integrated(x);
}

inline double ate_at_quadrature(const MtrSurface& a, const MtrSurface& b, const Covariates& x, int nodes) {
    detail::check_pair(a, b);
    const auto rule = numkit::gauss_legendre(nodes);
    return a.integrated_quadrature(x, rule) - b.integrated_quadrature(x, rule);
}

/// ATE averaged over the empirical distribution of `xs`.
inline double ate_marginal(const MtrSurface& a, const MtrSurface& b, std::span<const Covariates> xs) {
    detail::check_pair(a, b);
    if (xs.empty()) throw ValidationError("mtr-effects", "marginal ATE needs a non-empty covariate sample");
    double s = 0.0;
    for (const auto& x : xs) s += a.integrated(x) - b.integrated(x);
    return s / static_cast<double>(xs.size());
}

/// ate_marginal with the v-integral done by tensor Gauss-Legendre.
inline double ate_marginal_quadrature(const MtrSurface& a, const MtrSurface& b, std::span<const Covariates> xs,
                                      int nodes) {
    detail::check_pair(a, b);
    if (xs.empty()) throw ValidationError("mtr-effects", "marginal ATE needs a non-empty covariate sample");
    const auto rule = numkit::gauss_legendre(nodes);
    double s = 0.0;
    for (const auto& x : xs) s += a.integrated_quadrature(x, rule) - b.integrated_quadrature(x, rule);
    return s / static_cast<double>(xs.size());
}

}  // namespace dynmte::mtr
