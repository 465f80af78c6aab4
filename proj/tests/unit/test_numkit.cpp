#include <array>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dynmte/dgp/dgp.hpp"
#include "dynmte/numkit/least_squares.hpp"
#include "dynmte/numkit/logistic.hpp"
#include "dynmte/numkit/poly_basis.hpp"
#include "dynmte/numkit/quadrature.hpp"
#include "support/oracles.hpp"

using namespace dynmte;
using numkit::Direction;

TEST(Logistic, InterceptOnlyHalfOnesGivesZero) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(10, 1);
    Eigen::VectorXd y(10);
    y << 1, 0, 1, 0, 1, 0, 1, 0, 1, 0;
    const auto fit = numkit::fit_logistic(X, y);
    EXPECT_TRUE(fit.converged);
    EXPECT_NEAR(fit.coef[0], 0.0, 1e-12);
}

TEST(Logistic, ConstantResponseIsSeparation) {
    Eigen::MatrixXd X(4, 2);
    X << 1, 0.1, 1, 0.5, 1, -0.2, 1, 0.9;
    EXPECT_THROW(numkit::fit_logistic(X, Eigen::VectorXd::Ones(4)), SeparationError);
}

TEST(Logistic, SeparableClassesAreSeparation) {
    Eigen::MatrixXd X(6, 2);
    X << 1, -3, 1, -2, 1, -1, 1, 1, 1, 2, 1, 3;
    Eigen::VectorXd y(6);
    y << 0, 0, 0, 1, 1, 1;
    EXPECT_THROW(numkit::fit_logistic(X, y), SeparationError);
}

TEST(Logistic, ZeroColumnIsRejected) {
    Eigen::MatrixXd X(4, 2);
    X << 1, 0, 1, 0, 1, 0, 1, 0;
    Eigen::VectorXd y(4);
    y << 0, 1, 0, 1;
    EXPECT_THROW(numkit::fit_logistic(X, y), ValidationError);
}

TEST(Logistic, DuplicateColumnsAreRankError) {
    Eigen::MatrixXd X(6, 3);
    X << 1, 0.2, 0.2, 1, -1, -1, 1, 0.5, 0.5, 1, 1.5, 1.5, 1, -0.3, -0.3, 1, 0.9, 0.9;
    Eigen::VectorXd y(6);
    y << 0, 1, 0, 1, 1, 0;
    EXPECT_THROW(numkit::fit_logistic(X, y), RankError);
}

TEST(Logistic, RecoversFirstPeriodCoefficientsAtOneHundredThousand) {
    dgp::DgpSpec spec;
    spec.n = 100000;
    const auto data = dgp::simulate(spec, substream(2024, 0));
    Eigen::MatrixXd X(spec.n, 5);
    Eigen::VectorXd y(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const auto& x = data.x(i);
        X.row(static_cast<Eigen::Index>(i)) << 1.0, data.z(1)[i], x[0], x[1], x[2];
        y[static_cast<Eigen::Index>(i)] = data.d(1)[i];
    }
    const auto fit = numkit::fit_logistic(X, y);
    ASSERT_TRUE(fit.converged);
    const std::array<double, 5> truth{0.0, 1.0, -0.25, -0.15, 0.4};
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(fit.coef[k], truth[k], 0.05) << "coefficient " << k;

    for (std::size_t k = 1; k < fit.loglik_path.size(); ++k) {
        EXPECT_GE(fit.loglik_path[k], fit.loglik_path[k - 1]) << "iteration " << k;
    }
    // Converged means the mean score is below tolerance.
    Eigen::VectorXd p(spec.n);
    for (Eigen::Index i = 0; i < X.rows(); ++i) p[i] = oracle::expit(X.row(i).dot(fit.coef));
    const double grad = (X.transpose() * (y - p)).cwiseAbs().maxCoeff() / static_cast<double>(spec.n);
    EXPECT_LE(grad, 1e-8);
}

TEST(LeastSquares, IdentityDesign) {
    const auto fit = numkit::solve_least_squares(Eigen::MatrixXd::Identity(3, 3), Eigen::Vector3d(1, 2, 3));
    EXPECT_FALSE(fit.rank_deficient);
    EXPECT_NEAR((fit.coef - Eigen::Vector3d(1, 2, 3)).norm(), 0.0, 1e-14);
}

TEST(LeastSquares, CollinearColumnFlagsRankAndKeepsProjection) {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd X(40, 3);
    Eigen::VectorXd y(40);
    for (int i = 0; i < 40; ++i) {
        const double a = nd(gen), b = nd(gen);
        X.row(i) << a, b, a;
        y[i] = nd(gen);
    }
    const auto fit = numkit::solve_least_squares(X, y);
    EXPECT_TRUE(fit.rank_deficient);
    EXPECT_EQ(fit.rank, 2);
    Eigen::MatrixXd reduced = X.leftCols(2);
    const Eigen::VectorXd proj = reduced * oracle::normal_equations(reduced, y);
    EXPECT_LE((X * fit.coef - proj).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LeastSquares, MatchesNormalEquationsAndResidualIsOrthogonal) {
    std::mt19937_64 gen(17);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd X(100, 5);
    Eigen::VectorXd y(100);
    for (int i = 0; i < 100; ++i) {
        for (int j = 0; j < 5; ++j) X(i, j) = nd(gen);
        y[i] = nd(gen);
    }
    const auto fit = numkit::solve_least_squares(X, y);
    EXPECT_LE((fit.coef - oracle::normal_equations(X, y)).cwiseAbs().maxCoeff(), 1e-8);
    const Eigen::VectorXd r = y - X * fit.coef;
    EXPECT_LE((X.transpose() * r).cwiseAbs().maxCoeff(), 1e-8 * X.cwiseAbs().maxCoeff() * y.cwiseAbs().maxCoeff() * 100);
}

TEST(LeastSquares, TooFewRowsIsRejected) {
    EXPECT_THROW(numkit::solve_least_squares(Eigen::MatrixXd::Ones(2, 3), Eigen::VectorXd::Ones(2)), ValidationError);
}

TEST(Quadrature, ConstantAndLinear) {
    const auto one = numkit::gauss_legendre(1);
    EXPECT_NEAR(one.integrate([](double) { return 1.0; }), 1.0, 1e-15);
    const auto two = numkit::gauss_legendre(2);
    EXPECT_NEAR(two.integrate([](double v) { return v; }), 0.5, 1e-14);
}

TEST(Quadrature, DegreeSevenWithFourNodes) {
    const auto rule = numkit::gauss_legendre(4);
    EXPECT_NEAR(rule.integrate([](double v) { return std::pow(v, 7); }), 0.125, 1e-12);
}

TEST(Quadrature, ExactUpToDegreeTwoNMinusOne) {
    for (int n : {1, 2, 3, 5, 8, 16, 64}) {
        const auto rule = numkit::gauss_legendre(n);
        double wsum = 0.0;
        for (double w : rule.weights) wsum += w;
        EXPECT_NEAR(wsum, 1.0, 1e-13) << n;
        for (int d = 0; d <= 2 * n - 1; ++d) {
            const double got = rule.integrate([d](double v) { return std::pow(v, d); });
            EXPECT_NEAR(got, 1.0 / (d + 1), 1e-12) << "n=" << n << " degree=" << d;
        }
    }
    const auto shifted = numkit::gauss_legendre(3, -1.0, 2.0);
    EXPECT_NEAR(shifted.integrate([](double v) { return v * v; }), 3.0, 1e-13);
}

TEST(Quadrature, RejectsBadArguments) {
    EXPECT_THROW(numkit::gauss_legendre(0), ValidationError);
    EXPECT_THROW(numkit::gauss_legendre(3, 1.0, 1.0), ValidationError);
}

TEST(PolyBasis, TermCountAndOrder) {
    const numkit::PolyBasis b(2);
    EXPECT_EQ(b.size(), 9U);
    EXPECT_EQ(b.exponents(0), (std::vector<int>{0, 0}));
    EXPECT_EQ(b.exponents(1), (std::vector<int>{0, 1}));
    EXPECT_EQ(b.exponents(3), (std::vector<int>{1, 0}));
    EXPECT_EQ(b.exponents(8), (std::vector<int>{2, 2}));
}

TEST(PolyBasis, ConstantTermAntiderivatives) {
    const numkit::PolyBasis b(1);
    const std::array<double, 2> pi{0.3, 0.8};
    const std::array<Direction, 2> tt{Direction::Treated, Direction::Treated};
    const std::array<Direction, 2> ut{Direction::Untreated, Direction::Treated};
    EXPECT_NEAR(b.antideriv(pi, tt)[0], 0.3 * 0.8, 1e-15);
    EXPECT_NEAR(b.antideriv(pi, ut)[0], 0.7 * 0.8, 1e-15);
}

TEST(PolyBasis, PartialMatchesFiniteDifference) {
    const numkit::PolyBasis b(1);
    const std::size_t term = 3;  // v1 v2
    ASSERT_EQ(b.exponents(term), (std::vector<int>{1, 1}));
    const std::array<double, 2> p{0.5, 0.5};
    const double analytic = b.partial(p, 0)[term];
    EXPECT_DOUBLE_EQ(analytic, 0.5);
    const double fd = oracle::central_difference([&](std::array<double, 2> q) { return b.eval(q)[term]; }, p, 0);
    EXPECT_LE(std::abs(analytic - fd) / std::abs(analytic), 1e-8);
}

TEST(PolyBasis, PartialsOfEveryTermMatchFiniteDifferences) {
    const numkit::PolyBasis b(3);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    for (int rep = 0; rep < 10; ++rep) {
        const std::array<double, 2> p{u(gen), u(gen)};
        for (std::size_t axis = 0; axis < 2; ++axis) {
            const auto analytic = b.partial(p, axis);
            for (std::size_t k = 0; k < b.size(); ++k) {
                const double fd =
                    oracle::central_difference([&](std::array<double, 2> q) { return b.eval(q)[k]; }, p, axis);
                const double scale = std::max(1.0, std::abs(analytic[k]));
                EXPECT_LE(std::abs(analytic[k] - fd) / scale, 1e-8) << "term " << k << " axis " << axis;
            }
        }
    }
}

TEST(PolyBasis, CrossPartialOfAntiderivativeRecoversTerm) {
    const numkit::PolyBasis b(3);
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& dirs : {std::array<Direction, 2>{Direction::Treated, Direction::Treated},
                             std::array<Direction, 2>{Direction::Treated, Direction::Untreated},
                             std::array<Direction, 2>{Direction::Untreated, Direction::Treated},
                             std::array<Direction, 2>{Direction::Untreated, Direction::Untreated}}) {
        const double sign = (dirs[0] == Direction::Untreated ? -1.0 : 1.0) * (dirs[1] == Direction::Untreated ? -1.0 : 1.0);
        for (int rep = 0; rep < 10; ++rep) {
            const std::array<double, 2> p{u(gen), u(gen)};
            const auto cross = b.antideriv_cross_partial(p, dirs);
            const auto value = b.eval(p);
            for (std::size_t k = 0; k < b.size(); ++k) {
                const double want = sign * value[k];
                EXPECT_LE(std::abs(cross[k] - want), 1e-10)
                    << "term " << k;
            }
            // The antiderivative itself against Simpson integration.
            const auto anti = b.antideriv(p, dirs);
            for (std::size_t k = 0; k < b.size(); ++k) {
                const auto& e = b.exponents(k);
                auto axis_integral = [&](int t) {
                    const auto f = [&](double v) { return std::pow(v, e[t]); };
                    return dirs[t] == Direction::Treated ? oracle::simpson(f, 0.0, p[t], 200)
                                                         : oracle::simpson(f, p[t], 1.0, 200);
                };
                EXPECT_NEAR(anti[k], axis_integral(0) * axis_integral(1), 1e-12) << "term " << k;
            }
        }
    }
}

TEST(PolyBasis, QuadratureDoubleIntegralMatchesClosedForm) {
    const numkit::PolyBasis b(3);
    const auto rule = numkit::gauss_legendre(8);
    const auto closed = b.unit_integral();
    for (std::size_t k = 0; k < b.size(); ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
                s += rule.weights[i] * rule.weights[j] * b.eval(std::array<double, 2>{rule.nodes[i], rule.nodes[j]})[k];
            }
        }
        const auto& e = b.exponents(k);
        EXPECT_NEAR(s, closed[k], 1e-12);
        EXPECT_NEAR(closed[k], oracle::monomial_unit_integral(e[0], e[1]), 1e-15);
    }
}

TEST(PolyBasis, MixedDifferentiationMask) {
    const numkit::PolyBasis b(2);
    const std::array<double, 2> p{0.4, 0.7};
    const std::array<Direction, 2> dirs{Direction::Untreated, Direction::Treated};
    const std::array<bool, 2> only_second{false, true};
    const auto analytic = b.antideriv_partial(p, dirs, only_second);
    for (std::size_t k = 0; k < b.size(); ++k) {
        const double fd = oracle::central_difference(
            [&](std::array<double, 2> q) { return b.antideriv(q, dirs)[k]; }, p, 1);
        EXPECT_NEAR(analytic[k], fd, 1e-8);
    }
}
