#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dynmte/core/error.hpp"
#include "dynmte/core/types.hpp"

namespace dynmte::numkit {

/// Integration direction of one axis of a directional antiderivative:
/// Treated integrates 0 -> p, Untreated integrates p -> 1.
enum class Direction { Treated, Untreated };

inline std::vector<Direction> directions_of(const TreatmentSequence& seq) {
    std::vector<Direction> dirs;
    for (std::size_t t = 0; t < seq.size(); ++t) dirs.push_back(seq[t] ? Direction::Treated : Direction::Untreated);
    return dirs;
}

/// Full tensor-product monomial basis prod_t v_t^{a_t}, 0 <= a_t <= degree, on [0,1]^dims.
/// Terms are ordered lexicographically with the first axis most significant.
///
/// Every operation is closed form. For a direction pattern, the antiderivative of
/// a term is prod_t F_t with F = p^{a+1}/(a+1) (treated) or (1 - p^{a+1})/(a+1)
/// (untreated), and dF/dp = +p^a or -p^a; the cross-partial over all axes is thus
/// (-1)^{#untreated} times the term itself.
class PolyBasis {
public:
    explicit PolyBasis(int degree, std::size_t dims = 2) : degree_(degree), dims_(dims) {
        if (degree < 0) throw ValidationError("numkit", "basis degree must be >= 0");
        if (dims == 0) throw ValidationError("numkit", "basis needs at least one dimension");
        std::size_t count = 1;
        for (std::size_t t = 0; t < dims; ++t) count *= static_cast<std::size_t>(degree + 1);
        terms_.resize(count, std::vector<int>(dims));
        for (std::size_t k = 0; k < count; ++k) {
            std::size_t rest = k;
            for (std::size_t t = dims; t-- > 0;) {
                terms_[k][t] = static_cast<int>(rest % static_cast<std::size_t>(degree + 1));
                rest /= static_cast<std::size_t>(degree + 1);
            }
        }
    }

    int degree() const noexcept { return degree_; }
    std::size_t dims() const noexcept { return dims_; }
    std::size_t size() const noexcept { return terms_.size(); }
    const std::vector<int>& exponents(std::size_t term) const { return terms_.at(term); }

    Eigen::VectorXd eval(std::span<const double> point) const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
        fill(point, {}, Mode::Value, 0, out.data());
        return out;
    }

    /// d/dv_axis of each term.
    Eigen::VectorXd partial(std::span<const double> point, std::size_t axis) const {
        if (axis >= dims_) throw ValidationError("numkit", "partial axis out of range");
        Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
        fill(point, {}, Mode::Partial, axis, out.data());
        return out;
    }

    /// Directional antiderivative of each term over the box spanned by `limits`.
    Eigen::VectorXd antideriv(std::span<const double> limits, std::span<const Direction> dirs) const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
        antideriv_into(limits, dirs, out.data());
        return out;
    }

    void antideriv_into(std::span<const double> limits, std::span<const Direction> dirs, double* out) const {
        check_dirs(dirs);
        fill(limits, dirs, Mode::Antiderivative, 0, out);
    }

    /// Partial derivative of the directional antiderivative with respect to the
    /// axes flagged in `differentiate` (one flag per axis), evaluated at `limits`.
    Eigen::VectorXd antideriv_partial(std::span<const double> limits, std::span<const Direction> dirs,
                                      std::span<const bool> differentiate) const {
        check_dirs(dirs);
        if (differentiate.size() != dims_) throw ValidationError("numkit", "one differentiation flag per axis");
        const auto pw = powers(limits, degree_ + 1);
        Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
        for (std::size_t k = 0; k < size(); ++k) {
            double v = 1.0;
            for (std::size_t t = 0; t < dims_; ++t) {
                const int a = terms_[k][t];
                const bool treated = dirs[t] == Direction::Treated;
                if (differentiate[t]) {
                    v *= treated ? pw[t][a] : -pw[t][a];
                } else {
                    v *= treated ? pw[t][a + 1] / (a + 1) : (1.0 - pw[t][a + 1]) / (a + 1);
                }
            }
            out[static_cast<Eigen::Index>(k)] = v;
        }
        return out;
    }

    /// Mixed partial over every axis of the directional antiderivative.
    Eigen::VectorXd antideriv_cross_partial(std::span<const double> limits, std::span<const Direction> dirs) const {
        const std::unique_ptr<bool[]> all(new bool[dims_]);
        std::fill_n(all.get(), dims_, true);
        return antideriv_partial(limits, dirs, std::span<const bool>(all.get(), dims_));
    }

    /// Integral of each term over the unit cube.
    Eigen::VectorXd unit_integral() const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
        for (std::size_t k = 0; k < size(); ++k) {
            double v = 1.0;
            for (int a : terms_[k]) v /= (a + 1);
            out[static_cast<Eigen::Index>(k)] = v;
        }
        return out;
    }

    /// Integral of each term over the unit cube in every axis except `kept`,
    /// left as a function of the kept coordinate `v`.
    Eigen::VectorXd partial_integral(std::size_t kept, double v) const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
        for (std::size_t k = 0; k < size(); ++k) {
            double s = 1.0;
            for (std::size_t t = 0; t < dims_; ++t) {
                const int a = terms_[k][t];
                s *= t == kept ? std::pow(v, a) : 1.0 / (a + 1);
            }
            out[static_cast<Eigen::Index>(k)] = s;
        }
        return out;
    }

private:
    enum class Mode { Value, Partial, Antiderivative };

    void check_dirs(std::span<const Direction> dirs) const {
        if (dirs.size() != dims_) throw ValidationError("numkit", "one direction per basis axis");
    }

    std::vector<std::vector<double>> powers(std::span<const double> point, int top) const {
        if (point.size() != dims_) throw ValidationError("numkit", "point dimension does not match the basis");
        std::vector<std::vector<double>> pw(dims_, std::vector<double>(static_cast<std::size_t>(top) + 1));
        for (std::size_t t = 0; t < dims_; ++t) {
            pw[t][0] = 1.0;
            for (int k = 1; k <= top; ++k) pw[t][k] = pw[t][k - 1] * point[t];
        }
        return pw;
    }

    void fill(std::span<const double> point, std::span<const Direction> dirs, Mode mode, std::size_t axis,
              double* out) const {
        const auto pw = powers(point, degree_ + 1);
        for (std::size_t k = 0; k < size(); ++k) {
            double v = 1.0;
            for (std::size_t t = 0; t < dims_; ++t) {
                const int a = terms_[k][t];
                switch (mode) {
                    case Mode::Value:
                        v *= pw[t][a];
                        break;
                    case Mode::Partial:
                        v *= t == axis ? (a == 0 ? 0.0 : a * pw[t][a - 1]) : pw[t][a];
                        break;
                    case Mode::Antiderivative:
                        v *= dirs[t] == Direction::Treated ? pw[t][a + 1] / (a + 1) : (1.0 - pw[t][a + 1]) / (a + 1);
                        break;
                }
            }
            out[k] = v;
        }
    }

    int degree_;
    std::size_t dims_;
    std::vector<std::vector<int>> terms_;
};

}  // namespace dynmte::numkit
