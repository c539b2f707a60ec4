#include <gtest/gtest.h>

#include <cmath>

#include "rtfs/closed_form_bs.hpp"
#include "rtfs/core.hpp"

using namespace rtfs;

TEST(Contract, ValidatesInvariants) {
    RTFSContract c;
    EXPECT_NO_THROW(c.validate());
    c.alpha = 0.0;
    EXPECT_THROW(c.validate(), DomainError);
    c.alpha = 1.2;
    EXPECT_THROW(c.validate(), DomainError);
    c = RTFSContract{};
    c.T = c.t;
    EXPECT_THROW(c.validate(), DomainError);
    c = RTFSContract{};
    c.spot = -1.0;
    EXPECT_THROW(c.validate(), DomainError);
}

TEST(Contract, RealizedState) {
    RTFSContract c{0.5, 2.0, 1.0, 100.0, Realized{0.3, 95.0}};
    EXPECT_TRUE(c.realized());
    EXPECT_DOUBLE_EQ(c.realization().spot_at_tau, 95.0);
    c.tau_state = Realized{0.7, 95.0};  // tau after t
    EXPECT_THROW(c.validate(), DomainError);
    RTFSContract u;
    EXPECT_THROW(u.realization(), StateError);
}

TEST(Models, ParameterValidation) {
    EXPECT_THROW(validate(BlackScholesParams{0.0, 0.0}), DomainError);
    EXPECT_THROW(validate(MertonParams{0.2, 0.0, -1.0, 0.0, 0.1}), DomainError);
    VarianceGammaParams vg;
    vg.c = -0.1;
    EXPECT_THROW(validate(vg), DomainError);
    HestonParams h;
    h.rho = 1.0;
    EXPECT_THROW(validate(h), DomainError);
    EXPECT_NO_THROW(validate(ModelParams{HestonParams{}}));
    EXPECT_EQ(model_name(ModelParams{VarianceGammaParams{}}), "vg");
}

TEST(Models, OmegaIsMartingaleCorrection) {
    VarianceGammaParams p;
    EXPECT_NEAR(p.omega(), std::log(1.0 - p.b * p.mu - 0.5 * p.mu * p.c * p.c) / p.mu, 1e-15);
    MertonParams m{0.2, 0.0, 0.5, -0.1, 0.15};
    EXPECT_NEAR(m.jump_mean(), std::exp(-0.1 + 0.5 * 0.15 * 0.15) - 1.0, 1e-15);
}

TEST(Hazard, ConstantSurvival) {
    EXPECT_NEAR(survival(ConstantHazard{0.5}, 0.0, 2.0), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(integrated_hazard(ConstantHazard{0.3}, 1.0, 3.0), 0.6, 1e-15);
    EXPECT_THROW(survival(ConstantHazard{-0.1}, 0.0, 1.0), DomainError);
}

TEST(Hazard, DeterministicSurvival) {
    DeterministicHazard h{[](double s) { return 0.5 + 0.2 * s; }};
    EXPECT_NEAR(integrated_hazard(h, 0.0, 2.0), 0.5 * 2.0 + 0.1 * 4.0, 1e-12);
    DeterministicHazard neg{[](double) { return -1.0; }};
    EXPECT_THROW(integrated_hazard(neg, 0.0, 1.0), DomainError);
    EXPECT_THROW(survival(AffineHazard{}, 0.0, 1.0), DomainError);
}

TEST(Hazard, Discount) { EXPECT_NEAR(discount(0.05, 1.0, 3.0), std::exp(-0.1), 1e-15); }

TEST(PriceEstimate, ConfidenceInterval) {
    PriceEstimate e{1.0, 0.01, Method::MonteCarlo};
    EXPECT_NEAR(*e.ci95_halfwidth(), 1.96 * 0.01, 1e-12);
    EXPECT_NEAR(*e.ci95_length(), 2.0 * 1.96 * 0.01, 1e-12);
    EXPECT_FALSE(PriceEstimate{}.ci95_length().has_value());
}

TEST(TauLaw, ConstantMoments) {
    const HazardModel h = ConstantHazard{0.75};
    const double T = 2.0;
    EXPECT_NEAR(integrate_over_tau_law(h, 0.0, T, [](double) { return 1.0; }), 1.0 - std::exp(-1.5), 1e-13);
    // int_0^T u lambda e^{-lambda u} du
    const double l = 0.75;
    const double mean = (1.0 - std::exp(-l * T) * (1.0 + l * T)) / l;
    EXPECT_NEAR(integrate_over_tau_law(h, 0.0, T, [](double u) { return u; }), mean, 1e-12);
}

TEST(TauLaw, DeterministicIntensity) {
    DeterministicHazard h{[](double s) { return 0.5 + 0.2 * s; }};
    const double F = 1.0 - std::exp(-(0.5 * 2.0 + 0.1 * 4.0));
    EXPECT_NEAR(integrate_over_tau_law(h, 0.0, 2.0, [](double) { return 1.0; }), F, 1e-10);
    // f(u) = lambda(u)^{-1} d/du(...) is awkward; use sqrt(T - u), the shape of FS prices near T
    ConstantHazard c{0.5};
    auto f = [](double u) { return std::sqrt(2.0 - u); };
    // constant hazard as a deterministic function must give the same answer
    DeterministicHazard d{[](double) { return 0.5; }};
    EXPECT_NEAR(integrate_over_tau_law(c, 0.0, 2.0, f), integrate_over_tau_law(d, 0.0, 2.0, f), 1e-10);
}

TEST(TauLaw, ConvergesForSqrtEndpoint) {
    // G(u) = sqrt(T - u) against Exp(1) on [0, 1]: reference by a fine panel count
    ConstantHazard h{1.0};
    auto f = [](double u) { return std::sqrt(1.0 - u); };
    const double ref = integrate_over_tau_law(h, 0.0, 1.0, f, 4096);
    EXPECT_NEAR(integrate_over_tau_law(h, 0.0, 1.0, f), ref, 1e-11);
}

TEST(Skeleton, QuadratureMatchesClosedFormBS) {
    RTFSContract c{0.0, 2.0, 1.0, 100.0, Unrealized{}};
    for (double lambda : {0.25, 0.75, 1.25, 1.75}) {
        const auto est = rtfs_price_by_quadrature(c, ConstantHazard{lambda},
                                                  [&](double u) { return bs_unit_fs_price(2.0 - u, 1.0, 0.2, 0.0); });
        const auto cf = bs_a1_a2(0.0, 2.0, lambda, 0.2, 0.0);
        EXPECT_NEAR(est.value, 100.0 * (cf.a1 - cf.a2), 1e-9) << lambda;
        EXPECT_EQ(est.method, Method::Quadrature);
    }
}

TEST(Skeleton, GuaranteedTermForAlphaBelowOne) {
    // f = 0: only (1 - alpha) S e^{-lambda (T - t)} survives
    RTFSContract c{0.0, 2.0, 0.8, 100.0, Unrealized{}};
    const auto est = rtfs_price_by_quadrature(c, ConstantHazard{0.5}, [](double) { return 0.0; });
    EXPECT_NEAR(est.value, 20.0 * std::exp(-1.0), 1e-12);
}

TEST(Skeleton, Errors) {
    RTFSContract c;
    auto f = [](double) { return 0.0; };
    EXPECT_THROW(rtfs_price_by_quadrature(c, ConstantHazard{1.0}, f, 1), ConfigError);
    c.tau_state = Realized{0.0, 100.0};
    EXPECT_THROW(rtfs_price_by_quadrature(c, ConstantHazard{1.0}, f), StateError);
    EXPECT_THROW(integrate_over_tau_law(AffineHazard{}, 0.0, 1.0, f), DomainError);
}

TEST(Skeleton, RealizedBranch) {
    RTFSContract c{0.5, 2.0, 0.9, 105.0, Realized{0.2, 100.0}};
    const double v = realized_branch_price(c, [](double t, double S, double K, double T) {
        return bs_call(t, S, K, 0.2, 0.01, T);
    });
    EXPECT_NEAR(v, bs_call(0.5, 105.0, 90.0, 0.2, 0.01, 2.0), 1e-14);
}
