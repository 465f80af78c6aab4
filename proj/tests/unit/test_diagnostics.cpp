#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dynmte/dgp/dgp.hpp"
#include "dynmte/diagnostics/baseline.hpp"
#include "dynmte/diagnostics/liv.hpp"

using namespace dynmte;

TEST(Liv, TermsSumToTheEstimand) {
    const dgp::DgpSpec spec;
    const auto d = diagnostics::liv_decompose(spec, 400000, diagnostics::LivOptions{}, 7);
    EXPECT_LE(std::abs(d.liv_value - d.terms_sum()), 0.03) << d.table();
    EXPECT_GT(d.subsample, 0U);
    EXPECT_LT(d.subsample, d.n);
}

TEST(Liv, DegenerateDgpLeavesOnlyTheFourArmTerm) {
    const auto spec = dgp::degenerate(dgp::DgpSpec{});
    const auto d = diagnostics::liv_decompose(spec, 400000, diagnostics::LivOptions{}, 8);
    EXPECT_NEAR(d.term_b, 0.0, 0.02) << d.table();
    EXPECT_NEAR(d.term_c, 0.0, 0.02) << d.table();
    EXPECT_NEAR(d.liv_value, d.term_a, 0.02) << d.table();
}

TEST(Liv, RejectsSmallSamplesAndOutsidePoints) {
    const dgp::DgpSpec spec;
    EXPECT_THROW(diagnostics::liv_decompose(spec, 99999, {}, 1), ValidationError);
    diagnostics::LivOptions opt;
    opt.pi_lo = 0.3;
    EXPECT_THROW(diagnostics::liv_decompose(spec, 100000, opt, 1), ValidationError);
    opt = {};
    opt.y1 = 2;
    EXPECT_THROW(diagnostics::liv_decompose(spec, 100000, opt, 1), ValidationError);
}

TEST(Liv, DeterministicAcrossThreads) {
    const dgp::DgpSpec spec;
    const auto a = diagnostics::liv_decompose(spec, 150000, {}, 3, 1);
    const auto b = diagnostics::liv_decompose(spec, 150000, {}, 3, 3);
    EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
}

TEST(Liv, TableListsEveryQuantity) {
    diagnostics::LivDecomposition d;
    const auto t = d.table();
    for (const char* row : {"liv", "term_a", "term_b", "term_c", "a+b+c", "mte"}) {
        EXPECT_NE(t.find(row), std::string::npos) << row;
    }
}

TEST(Baseline, ConsistentUnderSequentialRandomization) {
    auto spec = dgp::randomized(dgp::DgpSpec{});
    spec.n = 100000;
    const auto data = dgp::simulate(spec, substream(12, 0));
    const auto contrasts = std::vector<Contrast>{Contrast::parse("11:00"), Contrast::parse("10:00"),
                                                 Contrast::parse("01:00"), Contrast::parse("10:01")};
    const auto est = diagnostics::gformula_ates(data, contrasts, {}, 0);
    for (std::size_t k = 0; k < contrasts.size(); ++k) {
        const auto truth = dgp::oracle_ate(spec, contrasts[k], 1000000, 40 + k);
        EXPECT_NEAR(est[k], truth.value, 0.03) << contrasts[k].str();
    }
}

TEST(Baseline, BiasedUpwardForAlwaysVersusNeverUnderSelection) {
    dgp::DgpSpec spec;
    spec.n = 100000;
    const auto data = dgp::simulate(spec, substream(13, 0));
    const std::vector<Contrast> c{Contrast::parse("11:00")};
    const double est = diagnostics::gformula_ates(data, c, {}, 0)[0];
    const auto truth = dgp::oracle_ate(spec, c[0], 1000000, 20240101);
    EXPECT_GT(est - truth.value, 0.05) << "estimate " << est << " truth " << truth.value;
}

TEST(Baseline, ForwardSimulationAgreesWithEnumeration) {
    dgp::DgpSpec spec;
    spec.n = 400;
    const auto data = dgp::simulate(spec, substream(14, 0));
    const std::vector<Contrast> c{Contrast::parse("10:01"), Contrast::parse("11:11")};
    const auto exact = diagnostics::gformula_ates(data, c, {}, 0);
    const auto sim = diagnostics::gformula_ates(data, c, {10000}, 5);
    EXPECT_NEAR(sim[0], exact[0], 0.005);
    EXPECT_EQ(exact[1], 0.0);
    EXPECT_EQ(sim[1], 0.0);
}

TEST(Baseline, FixedSeedIsDeterministic) {
    dgp::DgpSpec spec;
    spec.n = 891;
    const auto data = dgp::simulate(spec, substream(15, 0));
    EstimationConfig config;
    config.bootstrap_reps = 30;
    config.seed = 4;
    const std::vector<Contrast> c{Contrast::parse("11:00"), Contrast::parse("01:00")};
    const auto a = diagnostics::baseline_gformula(data, c, config, {}, 1);
    const auto b = diagnostics::baseline_gformula(data, c, config, {}, 3);
    EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
    EXPECT_EQ(a.method, "parametric-gformula");
    EXPECT_EQ(a.n_boot, 30U);
    for (std::size_t k = 0; k < c.size(); ++k) {
        EXPECT_TRUE(std::isfinite(a.ate[k]));
        EXPECT_LE(a.ci_lo[k], a.ci_hi[k]);
    }
}
