#include <gtest/gtest.h>

#include <cmath>

#include "rtfs/closed_form_bs.hpp"
#include "rtfs/cva.hpp"

using namespace rtfs;

TEST(Cva, DefaultProbability) {
    EXPECT_NEAR(default_probability(ConstantHazard{0.1}, 0.0, 2.0), 1.0 - std::exp(-0.2), 1e-15);
    DeterministicHazard h{[](double s) { return 0.05 + 0.05 * s; }};
    EXPECT_NEAR(default_probability(h, 0.0, 2.0), 1.0 - std::exp(-(0.1 + 0.1)), 1e-12);
}

TEST(Cva, Factorization) {
    const auto in = cva_inputs(0.4, ConstantHazard{0.1}, 0.0, 2.0, 6.6457);
    EXPECT_NEAR(unilateral_cva_rtfs(in), 0.6 * (1.0 - std::exp(-0.2)) * 6.6457, 1e-14);
    EXPECT_DOUBLE_EQ(unilateral_cva_fs(in), unilateral_cva_rtfs(in));
    EXPECT_DOUBLE_EQ(unilateral_cva_rtfs(cva_inputs(1.0, ConstantHazard{0.1}, 0.0, 2.0, 5.0)), 0.0);
    EXPECT_DOUBLE_EQ(unilateral_cva_rtfs(cva_inputs(0.4, ConstantHazard{0.0}, 0.0, 2.0, 5.0)), 0.0);
}

TEST(Cva, InputValidation) {
    EXPECT_THROW(unilateral_cva_rtfs(CvaInputs{1.5, 0.1, 1.0}), DomainError);
    EXPECT_THROW(unilateral_cva_rtfs(CvaInputs{0.4, -0.1, 1.0}), DomainError);
    EXPECT_THROW(unilateral_cva_rtfs(CvaInputs{0.4, 0.1, -1.0}), DomainError);
}

TEST(Cva, CoincidentTimes) {
    const auto co = unilateral_cva_coincident(0.4, 10.0);
    EXPECT_DOUBLE_EQ(co.cva, 6.0);
    EXPECT_DOUBLE_EQ(co.defaultable_price, 4.0);
}

TEST(Cva, MonteCarloMatchesFactorization) {
    RTFSContract c{0.0, 2.0, 1.0, 100.0, Unrealized{}};
    McConfig cfg;
    cfg.n_paths = 200000;
    for (double lc : {0.05, 0.5}) {
        const double clean = bs_rtfs_price(c, 0.75, 0.2, 0.0).value;
        const double target = unilateral_cva_rtfs(cva_inputs(0.4, ConstantHazard{lc}, 0.0, 2.0, clean));
        const auto mc = mc_unilateral_cva_rtfs(c, BlackScholesParams{}, 0.75, lc, 0.4, cfg);
        EXPECT_NEAR(mc.value, target, 3.0 * *mc.ci95_halfwidth()) << lc;
    }
    EXPECT_THROW(mc_unilateral_cva_rtfs(c, BlackScholesParams{}, 0.75, -1.0, 0.4, cfg), DomainError);
}
