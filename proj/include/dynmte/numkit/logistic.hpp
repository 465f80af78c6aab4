#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dynmte/core/error.hpp"

namespace dynmte::numkit {

inline double logistic(double t) noexcept {
    if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

/// log(1 + e^t) without overflow.
inline double softplus(double t) noexcept { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

struct LogisticFit {
    Eigen::VectorXd coef;
    bool converged = false;
    int iterations = 0;
    double loglik = 0.0;
    /// Log-likelihood after each accepted iteration, starting from the zero vector.
    std::vector<double> loglik_path;

    double linear_predictor(const Eigen::Ref<const Eigen::RowVectorXd>& row) const { return row.dot(coef); }
    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const { return logistic(linear_predictor(row)); }
};

struct LogisticOptions {
    int max_iter = 100;
    /// Convergence when the max-norm of the average score X'(y - p) / n drops to this.
    double tol = 1e-8;
    /// Coefficients on the scale-standardized design beyond this are treated as divergence.
    double separation_bound = 30.0;
};

namespace detail {

inline double bernoulli_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - softplus(eta[i]);
    return ll;
}

}  // namespace detail

/// Logistic regression by iteratively reweighted least squares (Newton steps on
/// the Bernoulli log-likelihood) with step halving whenever a full step lowers
/// the log-likelihood. Columns are scaled to unit standard deviation internally;
/// constant columns are scaled by their magnitude.
inline LogisticFit fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                const LogisticOptions& opt = {}) {
    const Eigen::Index n = design.rows();
    const Eigen::Index p = design.cols();
    if (n != response.size()) throw ValidationError("numkit", "design rows and response length differ");
    if (n == 0 || p == 0) throw ValidationError("numkit", "logistic regression needs a non-empty design");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (response[i] != 0.0 && response[i] != 1.0) throw ValidationError("numkit", "logistic response must be binary");
    }

    Eigen::VectorXd scale(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto col = design.col(j);
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(n));
        if (sd > 0) {
            scale[j] = sd;
        } else if (mean != 0) {
            scale[j] = std::abs(mean);
        } else {
            throw ValidationError("numkit", "design column " + std::to_string(j) + " is identically zero");
        }
    }
    const Eigen::MatrixXd xs = design * scale.cwiseInverse().asDiagonal();

    const double ones = response.sum();
    if (ones == 0.0 || ones == static_cast<double>(n)) {
        throw SeparationError("numkit", "response is constant; logistic coefficients diverge");
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
    double ll = detail::bernoulli_loglik(eta, response);

    LogisticFit fit;
    fit.loglik_path.push_back(ll);
    for (int iter = 0; iter <= opt.max_iter; ++iter) {
        Eigen::VectorXd prob(n), weight(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            prob[i] = logistic(eta[i]);
            weight[i] = prob[i] * (1.0 - prob[i]);
        }
        const Eigen::VectorXd score = xs.transpose() * (response - prob);
        const double grad_norm = (score.cwiseQuotient(scale)).cwiseAbs().maxCoeff() / static_cast<double>(n);
        fit.iterations = iter;
        if (grad_norm <= opt.tol) {
            fit.converged = true;
            break;
        }
        if (iter == opt.max_iter) break;

        const Eigen::MatrixXd hessian = xs.transpose() * (xs.array().colwise() * weight.array()).matrix();
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(hessian);
        qr.setThreshold(1e-12);
        if (qr.rank() < p) {
            throw RankError("numkit", "weighted normal equations are singular (rank " + std::to_string(qr.rank()) +
                                          " of " + std::to_string(p) + ")");
        }
        const Eigen::VectorXd step = qr.solve(score);

        double t = 1.0;
        Eigen::VectorXd trial = beta + step;
        Eigen::VectorXd trial_eta = xs * trial;
        double trial_ll = detail::bernoulli_loglik(trial_eta, response);
        for (int halving = 0; halving < 40 && trial_ll < ll; ++halving) {
            t *= 0.5;
            trial = beta + t * step;
            trial_eta = xs * trial;
            trial_ll = detail::bernoulli_loglik(trial_eta, response);
        }
        if (trial_ll < ll) break;  // no ascent direction left at working precision
        beta = std::move(trial);
        eta = std::move(trial_eta);
        ll = trial_ll;
        fit.loglik_path.push_back(ll);

        if (beta.cwiseAbs().maxCoeff() > opt.separation_bound) {
            throw SeparationError("numkit", "coefficients diverge (|coef| > " + std::to_string(opt.separation_bound) +
                                                " on the standardized design); the classes look separable");
        }
    }
    fit.coef = beta.cwiseQuotient(scale);
    fit.loglik = ll;
    return fit;
}

}  // namespace dynmte::numkit
