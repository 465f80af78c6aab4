#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dynmte/core/config_io.hpp"
#include "dynmte/core/error.hpp"
#include "dynmte/core/types.hpp"
#include "dynmte/numkit/logistic.hpp"

namespace dynmte::firststage {

/// Logistic fit over a named design. Non-intercept columns that are constant
/// on the sample carry no information beside the intercept; they are left out
/// of the fit and get coefficient 0.
struct NamedLogit {
    std::vector<std::string> predictors;
    Eigen::VectorXd coef;
    std::vector<bool> dropped;
    numkit::LogisticFit fit;

    double linear_predictor(const Eigen::Ref<const Eigen::RowVectorXd>& row) const { return row.dot(coef); }
    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
        return numkit::logistic(linear_predictor(row));
    }
};

namespace detail {

/// Column 0 must be the intercept.
inline NamedLogit fit_named_logit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                  std::vector<std::string> predictors, const std::string& label) {
    const Eigen::Index p = design.cols();
    std::vector<bool> dropped(static_cast<std::size_t>(p), false);
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto col = design.col(j);
        const bool constant = design.rows() == 0 || (col.array() == col[0]).all();
        if (j > 0 && constant) {
            dropped[static_cast<std::size_t>(j)] = true;
        } else {
            kept.push_back(j);
        }
    }
    Eigen::MatrixXd reduced(design.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) reduced.col(static_cast<Eigen::Index>(k)) = design.col(kept[k]);

    NamedLogit out;
    try {
        out.fit = numkit::fit_logistic(reduced, response);
    } catch (const SeparationError& e) {
        throw SeparationError("firststage", label + ": " + e.what());
    } catch (const RankError& e) {
        throw RankError("firststage", label + ": " + e.what());
    }
    out.coef = Eigen::VectorXd::Zero(p);
    for (std::size_t k = 0; k < kept.size(); ++k) out.coef[kept[k]] = out.fit.coef[static_cast<Eigen::Index>(k)];
    out.predictors = std::move(predictors);
    out.dropped = std::move(dropped);
    return out;
}

inline json named_logit_json(const NamedLogit& m) {
    json coef = json::object();
    for (std::size_t j = 0; j < m.predictors.size(); ++j) coef[m.predictors[j]] = m.coef[static_cast<Eigen::Index>(j)];
    json dropped = json::array();
    for (std::size_t j = 0; j < m.predictors.size(); ++j) {
        if (m.dropped[j]) dropped.push_back(m.predictors[j]);
    }
    return json{{"predictors", m.predictors},
                {"coef", coef},
                {"dropped", dropped},
                {"converged", m.fit.converged},
                {"iterations", m.fit.iterations},
                {"loglik", m.fit.loglik}};
}

inline double clamp_prob(double p, double trim) { return std::clamp(p, trim, 1.0 - trim); }

}  // namespace detail

/// Predictors of the period-t propensity score, in design order.
inline std::vector<std::string> propensity_predictors(int period) {
    if (period == 1) return {"intercept", "z1", "x1", "x2", "x3"};
    if (period == 2) return {"intercept", "z1", "z2", "x1", "x2", "x3", "d1", "y1"};
    throw ValidationError("firststage", "propensity period must be 1 or 2");
}

/// Design row of the period-t propensity for individual i; for period 2 the
/// lagged treatment is `d1` rather than the observed one.
inline Eigen::RowVectorXd propensity_row(const PanelDataset& data, int period, std::size_t i, int d1) {
    const auto& x = data.x(i);
    if (period == 1) {
        Eigen::RowVectorXd r(5);
        r << 1.0, data.z(1)[i], x[0], x[1], x[2];
        return r;
    }
    Eigen::RowVectorXd r(8);
    r << 1.0, data.z(1)[i], data.z(2)[i], x[0], x[1], x[2], static_cast<double>(d1), static_cast<double>(data.y(1)[i]);
    return r;
}

/// Logistic propensity score of one period with per-row fitted values on the
/// estimation sample, clamped to [trim, 1 - trim].
class PropensityModel {
public:
    PropensityModel() = default;
    PropensityModel(int period, NamedLogit model, double trim, std::vector<double> fitted)
        : period_(period), model_(std::move(model)), trim_(trim), fitted_(std::move(fitted)) {}

    int period() const noexcept { return period_; }
    double trim() const noexcept { return trim_; }
    const NamedLogit& model() const noexcept { return model_; }
    const numkit::LogisticFit& fit() const noexcept { return model_.fit; }

    /// Clamped fitted propensity of row i with its observed history.
    double fitted(std::size_t i) const { return fitted_.at(i); }
    std::span<const double> fitted() const noexcept { return fitted_; }

    /// Clamped propensity of row i of `data` with the lagged treatment set to d1
    /// (period 2) or as observed (period 1).
    double predict(const PanelDataset& data, std::size_t i, int d1) const {
        return detail::clamp_prob(model_.predict(propensity_row(data, period_, i, d1)), trim_);
    }

    json to_json() const {
        json j = detail::named_logit_json(model_);
        j["period"] = period_;
        j["trim"] = trim_;
        return j;
    }

private:
    int period_ = 1;
    NamedLogit model_;
    double trim_ = 0.0;
    std::vector<double> fitted_;
};

inline PropensityModel fit_propensity(const PanelDataset& data, int period, const EstimationConfig& config) {
    config.validate();
    if (period != 1 && period != 2) throw ValidationError("firststage", "propensity period must be 1 or 2");
    if (data.t_max() < static_cast<std::size_t>(period)) {
        throw ValidationError("firststage", "panel has no period " + std::to_string(period));
    }
    const auto n = static_cast<Eigen::Index>(data.n());
    const auto names = propensity_predictors(period);
    Eigen::MatrixXd design(n, static_cast<Eigen::Index>(names.size()));
    Eigen::VectorXd response(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        design.row(i) = propensity_row(data, period, row, period == 2 ? data.d(1)[row] : 0);
        response[i] = data.d(static_cast<std::size_t>(period))[row];
    }
    NamedLogit model =
        detail::fit_named_logit(design, response, names, "period " + std::to_string(period) + " propensity");
    std::vector<double> fitted(data.n());
    for (Eigen::Index i = 0; i < n; ++i) {
        fitted[static_cast<std::size_t>(i)] = detail::clamp_prob(model.predict(design.row(i)), config.trim);
    }
    return PropensityModel(period, std::move(model), config.trim, std::move(fitted));
}

/// P(Y1 = 1 | d1, pi1, x) as a logistic model in (1, d1, pi1, x1, x2, x3).
class MixingModel {
public:
    MixingModel() = default;
    explicit MixingModel(NamedLogit model) : model_(std::move(model)) {}

    const NamedLogit& model() const noexcept { return model_; }
    const Eigen::VectorXd& coef() const noexcept { return model_.coef; }

    /// Index c0 + c1 d1 + c2 v1 + c3'x.
    double index(int d1, double v1, const Covariates& x) const {
        const auto& c = model_.coef;
        return c[0] + c[1] * d1 + c[2] * v1 + c[3] * x[0] + c[4] * x[1] + c[5] * x[2];
    }

    /// Index at v1 = 0 and its slope in v1.
    std::pair<double, double> index_line(int d1, const Covariates& x) const { return {index(d1, 0.0, x), model_.coef[2]}; }

    double prob_y1(int d1, double v1, const Covariates& x) const { return numkit::logistic(index(d1, v1, x)); }

    json to_json() const { return detail::named_logit_json(model_); }

private:
    NamedLogit model_;
};

inline const std::vector<std::string>& mixing_predictors() {
    static const std::vector<std::string> names{"intercept", "d1", "pi1", "x1", "x2", "x3"};
    return names;
}

inline MixingModel fit_mixing(const PanelDataset& data, const PropensityModel& p1, const EstimationConfig& config) {
    config.validate();
    if (p1.period() != 1) throw ValidationError("firststage", "mixing model needs the period 1 propensity");
    if (p1.fitted().size() != data.n()) throw ValidationError("firststage", "propensity was fitted on another sample");
    const auto n = static_cast<Eigen::Index>(data.n());
    Eigen::MatrixXd design(n, 6);
    Eigen::VectorXd response(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        const auto& x = data.x(row);
        design.row(i) << 1.0, static_cast<double>(data.d(1)[row]), p1.fitted(row), x[0], x[1], x[2];
        response[i] = data.y(1)[row];
    }
    return MixingModel(detail::fit_named_logit(design, response, mixing_predictors(), "Y1 mixing model"));
}

/// Mixture weights (w0, w1) = (P(Y1 = 0 | ...), P(Y1 = 1 | ...)) at pi1 = v1.
inline std::pair<double, double> mixture_weights(const MixingModel& model, int d1, double v1, const Covariates& x) {
    const double w1 = model.prob_y1(d1, v1, x);
    return {1.0 - w1, w1};
}

/// All first-stage objects of the two-period pipeline.
struct FirstStage {
    PropensityModel pi1;
    PropensityModel pi2;
    MixingModel mixing;

    json to_json() const { return json{{"pi1", pi1.to_json()}, {"pi2", pi2.to_json()}, {"mixing", mixing.to_json()}}; }
};

inline FirstStage fit_first_stage(const PanelDataset& data, const EstimationConfig& config) {
    FirstStage fs;
    fs.pi1 = fit_propensity(data, 1, config);
    fs.pi2 = fit_propensity(data, 2, config);
    fs.mixing = fit_mixing(data, fs.pi1, config);
    return fs;
}

}  // namespace dynmte::firststage
