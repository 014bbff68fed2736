#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bele/fusion.hpp"

using namespace bele;

namespace
{

std::vector<FusionSample> affine_samples(std::size_t n, unsigned seed, double d0, double de, double dt)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> e(0.0, 80.0), t(10.0, 50.0);
    std::vector<FusionSample> s(n);
    for (FusionSample& x : s)
    {
        x.e = e(rng);
        x.t = t(rng);
        x.dmos = d0 + de * x.e + dt * x.t;
    }
    return s;
}

double max_coef_error(const FusionCoefficients& c, double d0, double de, double dt)
{
    return std::max({std::abs(c.d0 - d0), std::abs(c.d1_e - de), std::abs(c.d1_t - dt)});
}

} // namespace

TEST(FitFusion, ExactRecovery)
{
    const auto s = affine_samples(50, 1, 5.0, 0.9, -0.4);
    const FusionCoefficients c = fit_fusion(s);
    EXPECT_LT(max_coef_error(c, 5.0, 0.9, -0.4), 1e-9);
    EXPECT_LT(c.residual_rmse, 1e-9);
    EXPECT_EQ(c.n_samples, 50u);
}

TEST(FitFusion, HuberResistsOutlier)
{
    auto s = affine_samples(50, 2, 5.0, 0.9, -0.4);
    s[17].dmos += 50.0;
    EXPECT_LT(max_coef_error(fit_fusion(s), 5.0, 0.9, -0.4), 1e-2);
    EXPECT_GT(max_coef_error(fit_fusion_ols(s), 5.0, 0.9, -0.4), 5e-2);
}

TEST(FitFusion, HuberWithNoiseAndOutlier)
{
    auto s = affine_samples(200, 3, 5.0, 0.9, -0.4);
    std::mt19937 rng(9);
    std::normal_distribution<double> noise(0.0, 0.5);
    for (FusionSample& x : s)
        x.dmos += noise(rng);
    s[3].dmos += 60.0;
    const FusionCoefficients h = fit_fusion(s);
    const FusionCoefficients o = fit_fusion_ols(s);
    EXPECT_LT(std::abs(h.d0 - 5.0), std::abs(o.d0 - 5.0));
    EXPECT_GT(h.iterations, 0);
}

TEST(FitFusion, RankDeficiency)
{
    auto s = affine_samples(20, 4, 1.0, 1.0, 1.0);
    for (FusionSample& x : s)
        x.t = 30.0;
    EXPECT_THROW(fit_fusion(s), RankDeficiencyError);
    auto c = affine_samples(20, 5, 1.0, 1.0, 1.0);
    for (FusionSample& x : c)
        x.t = 2.0 * x.e + 1.0;
    EXPECT_THROW(fit_fusion(c), RankDeficiencyError);
}

TEST(FitFusion, TooFewOrNonFinite)
{
    auto s = affine_samples(2, 6, 1.0, 1.0, 1.0);
    EXPECT_THROW(fit_fusion(s), DegenerateInputError);
    s = affine_samples(5, 6, 1.0, 1.0, 1.0);
    s[0].t = std::nan("");
    EXPECT_THROW(fit_fusion(s), DomainError);
}

TEST(FitFusion, AffineEquivarianceAndRefit)
{
    auto s = affine_samples(40, 7, 3.0, 0.7, 0.2);
    std::mt19937 rng(1);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (FusionSample& x : s)
        x.dmos += noise(rng);
    const FusionCoefficients a = fit_fusion(s);
    auto shifted = s;
    for (FusionSample& x : shifted)
        x.dmos += 12.5;
    const FusionCoefficients b = fit_fusion(shifted);
    EXPECT_NEAR(b.d0, a.d0 + 12.5, 1e-9);
    EXPECT_NEAR(b.d1_e, a.d1_e, 1e-9);
    EXPECT_NEAR(b.d1_t, a.d1_t, 1e-9);

    auto own = s;
    for (FusionSample& x : own)
        x.dmos = a.d0 + a.d1_e * x.e + a.d1_t * x.t;
    EXPECT_LT(max_coef_error(fit_fusion(own), a.d0, a.d1_e, a.d1_t), 1e-6);
}

TEST(Predict, Examples)
{
    EXPECT_DOUBLE_EQ(predict({0.0, 1.0, 0.0}, 42.0, 17.0).value, 42.0);
    EXPECT_DOUBLE_EQ(predict({10.0, 0.0, 0.0}, 3.0, -9.0).value, 10.0);
    EXPECT_NEAR(predict({5.0, 0.9, -0.4}, 50.0, 20.0).value, 42.0, 1e-12);
    EXPECT_EQ(predict({5.0, 3.0, 0.0}, 50.0, 0.0).value, 100.0);
    EXPECT_EQ(predict({-5.0, 0.0, 0.0}, 50.0, 0.0).value, 0.0);
    EXPECT_THROW(predict({}, std::nan(""), 0.0), DomainError);
}

TEST(CrossSensitivity, AffineVersusInteraction)
{
    const auto s = affine_samples(60, 8, 5.0, 0.9, -0.4);
    const CrossSensitivityReport a = cross_sensitivity_report(s);
    EXPECT_LT(a.interaction_ratio, 1e-9);
    EXPECT_EQ(a.n_samples, 60u);

    auto w = s;
    for (FusionSample& x : w)
        x.dmos += x.e * x.t;
    const CrossSensitivityReport b = cross_sensitivity_report(w);
    EXPECT_GT(b.interaction_ratio, 0.01);
    EXPECT_NEAR(b.interaction_coefficient, 1.0, 1e-8);
    EXPECT_THROW(cross_sensitivity_report(std::span(s).first(9)), DegenerateInputError);
}

TEST(FusionJson, RoundTrip)
{
    FusionCoefficients c{1.5, 0.25, -0.125, 0.75, 12, 3};
    const nlohmann::json j = c;
    for (const char* k : {"d0", "d1_e", "d1_t", "residual_rmse", "n_samples"})
        EXPECT_TRUE(j.contains(k)) << k;
    const auto back = j.get<FusionCoefficients>();
    EXPECT_EQ(back.d0, 1.5);
    EXPECT_EQ(back.d1_e, 0.25);
    EXPECT_EQ(back.d1_t, -0.125);
    EXPECT_EQ(back.n_samples, 12u);
}
