#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dynmte/core/error.hpp"

namespace dynmte {

/// Baseline covariates (x1, x2 binary indicators; x3 a real score).
using Covariates = std::array<double, 3>;

inline double dot(const Covariates& a, const Covariates& b) noexcept {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

/// An ordered binary treatment history (d_1, ..., d_t).
class TreatmentSequence {
public:
    TreatmentSequence() = default;

    explicit TreatmentSequence(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
        if (bits_.empty()) throw ValidationError("core-data", "treatment sequence must have length >= 1");
        for (auto b : bits_) {
            if (b > 1) throw ValidationError("core-data", "treatment sequence entries must be 0 or 1");
        }
    }

    TreatmentSequence(std::initializer_list<int> bits) {
        for (int b : bits) {
            if (b != 0 && b != 1) throw ValidationError("core-data", "treatment sequence entries must be 0 or 1");
            bits_.push_back(static_cast<std::uint8_t>(b));
        }
        if (bits_.empty()) throw ValidationError("core-data", "treatment sequence must have length >= 1");
    }

    /// Parses the compact form "d1d2...", e.g. "10".
    static TreatmentSequence parse(std::string_view text) {
        std::vector<std::uint8_t> bits;
        for (char c : text) {
            if (c != '0' && c != '1') {
                throw ValidationError("core-data", "invalid treatment sequence '" + std::string(text) + "'");
            }
            bits.push_back(static_cast<std::uint8_t>(c - '0'));
        }
        return TreatmentSequence(std::move(bits));
    }

    std::size_t size() const noexcept { return bits_.size(); }
    int operator[](std::size_t t) const { return bits_.at(t); }
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    int untreated_count() const noexcept {
        int zeros = 0;
        for (auto b : bits_) zeros += (b == 0);
        return zeros;
    }

    /// (-1)^{number of untreated periods}.
    int sign() const noexcept { return untreated_count() % 2 == 0 ? 1 : -1; }

    /// Index of the sequence in {0,1}^t read as a binary number with d_1 most significant.
    std::size_t index() const noexcept {
        std::size_t k = 0;
        for (auto b : bits_) k = 2 * k + b;
        return k;
    }

    std::string str() const {
        std::string s;
        for (auto b : bits_) s.push_back(static_cast<char>('0' + b));
        return s;
    }

    friend bool operator==(const TreatmentSequence&, const TreatmentSequence&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

/// Every sequence in {0,1}^t, ordered by index().
inline std::vector<TreatmentSequence> all_sequences(std::size_t t) {
    std::vector<TreatmentSequence> out;
    for (std::size_t k = 0; k < (std::size_t{1} << t); ++k) {
        std::vector<std::uint8_t> bits(t);
        for (std::size_t j = 0; j < t; ++j) bits[t - 1 - j] = static_cast<std::uint8_t>((k >> j) & 1U);
        out.emplace_back(std::move(bits));
    }
    return out;
}

/// A pair of sequences compared by an effect, written "d:d'" (e.g. "11:00").
struct Contrast {
    TreatmentSequence a;
    TreatmentSequence b;

    static Contrast parse(std::string_view text) {
        auto colon = text.find(':');
        if (colon == std::string_view::npos) {
            throw ValidationError("core-data", "contrast must look like '11:00', got '" + std::string(text) + "'");
        }
        Contrast c{TreatmentSequence::parse(text.substr(0, colon)), TreatmentSequence::parse(text.substr(colon + 1))};
        if (c.a.size() != c.b.size()) {
            throw ValidationError("core-data", "contrast sequences differ in length: '" + std::string(text) + "'");
        }
        return c;
    }

    std::string str() const { return a.str() + ":" + b.str(); }

    friend bool operator==(const Contrast&, const Contrast&) = default;
};

/// Balanced panel of n individuals over t_max periods. Immutable once built.
class PanelDataset {
public:
    PanelDataset() = default;

    /// Per-period vectors are indexed [period - 1][individual].
    PanelDataset(std::vector<Covariates> x, std::vector<std::vector<double>> z,
                 std::vector<std::vector<std::uint8_t>> d, std::vector<std::vector<std::uint8_t>> y)
        : x_(std::move(x)), z_(std::move(z)), d_(std::move(d)), y_(std::move(y)) {
        validate();
    }

    std::size_t n() const noexcept { return x_.size(); }
    std::size_t t_max() const noexcept { return z_.size(); }

    std::span<const Covariates> x() const noexcept { return x_; }
    const Covariates& x(std::size_t i) const { return x_[i]; }

    /// Period is 1-based.
    std::span<const double> z(std::size_t period) const { return z_.at(period - 1); }
    std::span<const std::uint8_t> d(std::size_t period) const { return d_.at(period - 1); }
    std::span<const std::uint8_t> y(std::size_t period) const { return y_.at(period - 1); }

    /// True when individual i followed `seq` over its periods.
    bool follows(std::size_t i, const TreatmentSequence& seq) const {
        for (std::size_t t = 0; t < seq.size(); ++t) {
            if (d_[t][i] != seq[t]) return false;
        }
        return true;
    }

    /// Dataset formed from the given rows (repeats allowed), in the given order.
    PanelDataset select(std::span<const std::size_t> rows) const {
        PanelDataset out;
        out.x_.reserve(rows.size());
        for (auto r : rows) out.x_.push_back(x_.at(r));
        out.z_.assign(t_max(), {});
        out.d_.assign(t_max(), {});
        out.y_.assign(t_max(), {});
        for (std::size_t t = 0; t < t_max(); ++t) {
            out.z_[t].reserve(rows.size());
            out.d_[t].reserve(rows.size());
            out.y_[t].reserve(rows.size());
            for (auto r : rows) {
                out.z_[t].push_back(z_[t][r]);
                out.d_[t].push_back(d_[t][r]);
                out.y_[t].push_back(y_[t][r]);
            }
        }
        return out;
    }

    friend bool operator==(const PanelDataset&, const PanelDataset&) = default;

private:
    void validate() const {
        if (z_.size() != d_.size() || z_.size() != y_.size()) {
            throw ValidationError("core-data", "z, d and y must cover the same number of periods");
        }
        if (z_.empty()) throw ValidationError("core-data", "panel needs at least one period");
        for (std::size_t t = 0; t < z_.size(); ++t) {
            if (z_[t].size() != n() || d_[t].size() != n() || y_[t].size() != n()) {
                throw ValidationError("core-data", "period " + std::to_string(t + 1) + " arrays must have length n");
            }
            for (std::size_t i = 0; i < n(); ++i) {
                if (d_[t][i] > 1 || y_[t][i] > 1) {
                    throw ValidationError("core-data", "row " + std::to_string(i + 1) + ": d and y must be 0 or 1");
                }
            }
        }
    }

    std::vector<Covariates> x_;
    std::vector<std::vector<double>> z_;
    std::vector<std::vector<std::uint8_t>> d_;
    std::vector<std::vector<std::uint8_t>> y_;
};

/// Knobs of the estimation pipeline. Serialized as JSON with exactly these names.
struct EstimationConfig {
    int basis_degree = 2;
    std::string mixing_model = "logistic";
    int quadrature_nodes = 64;
    int bootstrap_reps = 999;
    double trim = 0.001;
    std::uint64_t seed = 0;

    void validate() const {
        if (basis_degree < 0) throw ValidationError("core-data", "basis_degree must be >= 0");
        if (mixing_model != "logistic") {
            throw ValidationError("core-data", "unknown mixing_model '" + mixing_model + "' (supported: logistic)");
        }
        if (quadrature_nodes < 1) throw ValidationError("core-data", "quadrature_nodes must be >= 1");
        if (bootstrap_reps < 1) throw ValidationError("core-data", "bootstrap_reps must be >= 1");
        if (!(trim >= 0.0 && trim < 0.5)) throw ValidationError("core-data", "trim must lie in [0, 0.5)");
    }

    friend bool operator==(const EstimationConfig&, const EstimationConfig&) = default;
};

}  // namespace dynmte
