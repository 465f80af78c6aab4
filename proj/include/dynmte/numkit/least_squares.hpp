#pragma once

#include <Eigen/Dense>

#include "dynmte/core/error.hpp"

namespace dynmte::numkit {

struct LeastSquaresFit {
    Eigen::VectorXd coef;
    Eigen::Index rank = 0;
    /// Set when the design has fewer independent columns than columns; `coef`
    /// is then the minimum-norm solution.
    bool rank_deficient = false;
};

/// Minimum-norm least squares via complete orthogonal decomposition.
inline LeastSquaresFit solve_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
    if (design.rows() != response.size()) {
        throw ValidationError("numkit", "design rows and response length differ");
    }
    if (design.rows() < design.cols()) {
        throw ValidationError("numkit", "least squares needs rows >= columns");
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
    LeastSquaresFit fit;
    fit.coef = cod.solve(response);
    fit.rank = cod.rank();
    fit.rank_deficient = fit.rank < design.cols();
    return fit;
}

/// Heteroskedasticity-robust (HC0) covariance of least-squares coefficients:
/// (X'X)^+ X' diag(r^2) X (X'X)^+.
inline Eigen::MatrixXd robust_covariance(const Eigen::MatrixXd& design, const Eigen::VectorXd& residuals) {
    const Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::MatrixXd bread = gram.completeOrthogonalDecomposition().pseudoInverse();
    const Eigen::MatrixXd scaled = design.array().colwise() * residuals.array();
    const Eigen::MatrixXd meat = scaled.transpose() * scaled;
    return bread * meat * bread;
}

}  // namespace dynmte::numkit
