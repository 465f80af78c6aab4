#pragma once

// Reference computations used as test oracles. None of them goes through the
// library's own numerics: integrals are done by composite Simpson rules, least
// squares by normal equations, derivatives by central differences.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dynmte/core/types.hpp"
#include "dynmte/dgp/dgp.hpp"

namespace oracle {

inline double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }
inline double normal_pdf(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); }
inline double expit(double t) { return 1.0 / (1.0 + std::exp(-t)); }

/// Composite Simpson on [a, b] with m (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int m = 4000) {
    const double h = (b - a) / m;
    double s = f(a) + f(b);
    for (int k = 1; k < m; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return s * h / 3.0;
}

/// E[Y2(d1, d2) | X = x, V = v] of the threshold DGP by integrating the
/// first-period innovation; the second-period innovation is integrated by the
/// normal CDF in closed form.
inline double mtr(const dynmte::dgp::DgpSpec& s, int d1, int d2, const dynmte::Covariates& x, double v1, double v2) {
    const double b = s.beta[0] * x[0] + s.beta[1] * x[1] + s.beta[2] * x[2];
    const double m1 = (d1 ? s.u_slopes[0] : s.u_slopes[1]) * (v1 - 0.5);
    const double m2 = (d2 ? s.u_slopes[2] : s.u_slopes[3]) * (v2 - 0.5);
    // U1 = m1 + e; Y1 = 1{b >= U1}; Y2 = 1{b + theta Y1 >= m2 + U1 + e2}.
    const auto integrand = [&](double e) {
        const double u1 = m1 + e;
        const double y1 = b >= u1 ? 1.0 : 0.0;
        return normal_pdf(e) * normal_cdf(b + s.theta * y1 - m2 - u1);
    };
    // Split at the kink e = b - m1.
    const double kink = b - m1;
    return simpson(integrand, -12.0, kink) + simpson(integrand, kink, 12.0);
}

/// P(Y1(d1) = 1 | X = x, V1 = v1).
inline double y1_prob(const dynmte::dgp::DgpSpec& s, int d1, const dynmte::Covariates& x, double v1) {
    const double b = s.beta[0] * x[0] + s.beta[1] * x[1] + s.beta[2] * x[2];
    return normal_cdf(b - (d1 ? s.u_slopes[0] : s.u_slopes[1]) * (v1 - 0.5));
}

/// MTE via two closed-form MTRs.
inline double mte(const dynmte::dgp::DgpSpec& s, const dynmte::Contrast& c, const dynmte::Covariates& x, double v1,
                  double v2) {
    return mtr(s, c.a[0], c.a[1], x, v1, v2) - mtr(s, c.b[0], c.b[1], x, v1, v2);
}

/// Least squares through the normal equations.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    return (X.transpose() * X).ldlt().solve(X.transpose() * y);
}

/// Central difference of f along `axis` at `p`.
inline double central_difference(const std::function<double(std::array<double, 2>)>& f, std::array<double, 2> p,
                                 std::size_t axis, double h = 1e-5) {
    auto lo = p, hi = p;
    lo[axis] -= h;
    hi[axis] += h;
    return (f(hi) - f(lo)) / (2.0 * h);
}

/// Mixed second central difference.
inline double cross_difference(const std::function<double(std::array<double, 2>)>& f, std::array<double, 2> p,
                               double h = 1e-4) {
    auto at = [&](double a, double b) { return f({p[0] + a, p[1] + b}); };
    return (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
}

/// Integral of v1^a v2^b over [0,1]^2.
inline double monomial_unit_integral(int a, int b) { return 1.0 / ((a + 1.0) * (b + 1.0)); }

/// Panel from a model in which the working MTR model is exactly true:
/// Y1 independent of V, Y2(d) = 1{W <= m_d(x, y1, v)} with W uniform and m_d
/// linear in v. Propensities are logistic with the library's design.
struct WellSpecified {
    // m_d(x, y1, v) = base + bx'x + theta y1 + g1[d] (v1 - .5) + g2[d] (v2 - .5)
    double base = 0.45;
    dynmte::Covariates bx{0.05, -0.05, 0.1};
    double theta = 0.08;
    std::array<double, 4> g1{0.1, -0.12, 0.15, -0.08};
    std::array<double, 4> g2{-0.1, 0.12, 0.06, 0.14};

    double m(std::size_t seq_index, const dynmte::Covariates& x, int y1, double v1, double v2) const {
        return base + bx[0] * x[0] + bx[1] * x[1] + bx[2] * x[2] + theta * y1 + g1[seq_index] * (v1 - 0.5) +
               g2[seq_index] * (v2 - 0.5);
    }

    dynmte::PanelDataset simulate(std::size_t n, std::uint64_t seed) const {
        std::mt19937_64 gen(seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::normal_distribution<double> norm(0.0, 1.0);
        std::vector<dynmte::Covariates> xs;
        std::vector<std::vector<double>> z(2);
        std::vector<std::vector<std::uint8_t>> d(2), y(2);
        for (std::size_t i = 0; i < n; ++i) {
            const dynmte::Covariates x{unif(gen) < 0.5 ? 1.0 : 0.0, unif(gen) < 0.6 ? 1.0 : 0.0, unif(gen)};
            const double z1 = 1.5 * norm(gen), z2 = 1.5 * norm(gen);
            const double v1 = unif(gen), v2 = unif(gen);
            const int y1 = unif(gen) < 0.3 + 0.2 * x[0] ? 1 : 0;
            const double pi1 = expit(z1 + 0.2 * x[0] - 0.1 * x[1] + 0.3 * x[2]);
            const int d1 = pi1 >= v1 ? 1 : 0;
            const double pi2 = expit(z1 + z2 - 0.1 * x[0] + 0.2 * x[1] - 0.2 * x[2] + 0.5 * d1 - 0.4 * y1);
            const int d2 = pi2 >= v2 ? 1 : 0;
            const std::size_t k = static_cast<std::size_t>(2 * d1 + d2);
            const int y2 = unif(gen) <= m(k, x, y1, v1, v2) ? 1 : 0;
            xs.push_back(x);
            z[0].push_back(z1);
            z[1].push_back(z2);
            d[0].push_back(static_cast<std::uint8_t>(d1));
            d[1].push_back(static_cast<std::uint8_t>(d2));
            y[0].push_back(static_cast<std::uint8_t>(y1));
            y[1].push_back(static_cast<std::uint8_t>(y2));
        }
        return dynmte::PanelDataset(std::move(xs), std::move(z), std::move(d), std::move(y));
    }
};

}  // namespace oracle
