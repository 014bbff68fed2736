#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "bele/synthetic.hpp"
#include "oracles.hpp"
#include "bele/vrf.hpp"

using namespace bele;

namespace
{

LuminanceImage random_image(int w, int h, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(w * h));
    for (double& x : v)
        x = u(rng);
    return LuminanceImage(w, h, std::move(v));
}

LuminanceImage step_image(int w, int h, bool vertical_edge)
{
    std::vector<double> v(static_cast<std::size_t>(w * h));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            v[static_cast<std::size_t>(y * w + x)] = (vertical_edge ? x >= w / 2 : y >= h / 2) ? 1.0 : 0.0;
    return LuminanceImage(w, h, std::move(v));
}

double mean_energy(const LuminanceImage& img, double sigma)
{
    const VisualMap m = visual_map(img, KernelSpec::from_sigma(sigma));
    const RealField l = gradient_energy(m, default_window(sigma));
    double s = 0.0;
    for (double v : l.values())
        s += v;
    return s / static_cast<double>(l.size());
}

} // namespace

TEST(KernelSigma, Examples)
{
    EXPECT_DOUBLE_EQ(kernel_sigma({1.0, 60.0, 2.5}), 2.5);
    EXPECT_DOUBLE_EQ(kernel_sigma({2.0, 60.0, 2.5}), 10.0);
    EXPECT_NEAR(kernel_sigma({1.3, 32.0, 2.5}), 32.0 * (2.5 / 60.0) * 1.69, 1e-12);
    EXPECT_NEAR(kernel_sigma({1.3, 32.0, 2.5}), 2.2533, 1e-4);
    EXPECT_THROW(kernel_sigma({0.0, 60.0, 2.5}), DomainError);
}

TEST(KernelSpec, Validation)
{
    EXPECT_EQ(KernelSpec::from_sigma(2.5).radius, 8);
    EXPECT_THROW(KernelSpec::from_sigma(0.0), DomainError);
    EXPECT_THROW((KernelSpec{2.5, 7}.validate()), DomainError);
}

TEST(VisualMap, ConstantImageIsZero)
{
    const LuminanceImage img(32, 32, std::vector<double>(32 * 32, 0.37));
    for (auto path : {ConvolutionPath::direct, ConvolutionPath::frequency})
    {
        const VisualMap m = visual_map(img, KernelSpec::from_sigma(2.0), path);
        EXPECT_EQ(m.width(), 32);
        EXPECT_EQ(m.height(), 32);
        for (const auto& v : m.values.values())
            EXPECT_LT(std::abs(v), 1e-12);
    }
}

TEST(VisualMap, VerticalStepIsRealDominant)
{
    const LuminanceImage img = step_image(32, 32, true);
    const VisualMap m = visual_map(img, KernelSpec::from_sigma(2.0));
    double max_real = 0.0;
    for (const auto& v : m.values.values())
        max_real = std::max(max_real, std::abs(v.real()));
    ASSERT_GT(max_real, 0.1);
    for (int y = 7; y < 25; ++y)
        for (int x = 7; x < 25; ++x)
            EXPECT_LE(std::abs(m.values(x, y).imag()), 1e-9 * max_real);
    // Response column centred on the edge, phase constant along it.
    const double phase = std::arg(m.values(16, 16));
    for (int y = 0; y < 32; ++y)
        EXPECT_NEAR(std::arg(m.values(16, y)), phase, 1e-9);
    EXPECT_GT(std::abs(m.values(16, 10)), std::abs(m.values(20, 10)));
}

TEST(VisualMap, MatchesBruteForceOracle)
{
    for (int n : {16, 32})
    {
        const LuminanceImage img = random_image(n, n, 100u + static_cast<unsigned>(n));
        const auto ref = oracle::visual_map(img, 2.0);
        for (auto path : {ConvolutionPath::direct, ConvolutionPath::frequency})
            EXPECT_LT(oracle::relative_frobenius(visual_map(img, KernelSpec::from_sigma(2.0), path), ref), 1e-6);
    }
    const LuminanceImage big = random_image(64, 64, 5u);
    const auto ref = oracle::visual_map(big, 9.0);
    EXPECT_LT(oracle::relative_frobenius(visual_map(big, KernelSpec::from_sigma(9.0)), ref), 1e-6);
}

TEST(VisualMap, FrequencyPathEnergyMatchesOracle)
{
    for (int n : {16, 32})
    {
        const LuminanceImage img = random_image(n, n, 7u + static_cast<unsigned>(n));
        const auto ref = oracle::visual_map(img, 1.5);
        const VisualMap m = visual_map(img, KernelSpec::from_sigma(1.5), ConvolutionPath::frequency);
        double a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i)
        {
            a += std::norm(m.values[i]);
            b += std::norm(ref[i]);
        }
        EXPECT_LT(std::abs(a - b) / b, 1e-6);
    }
}

TEST(VisualMap, RadiusTooLargeIsDimensionError)
{
    const LuminanceImage img = random_image(16, 16, 1u);
    EXPECT_THROW(visual_map(img, KernelSpec::from_sigma(3.0)), DimensionError);
}

TEST(VisualMap, Linearity)
{
    const LuminanceImage a = random_image(32, 32, 11u), b = random_image(32, 32, 12u);
    const double ca = 0.3, cb = 0.6;
    std::vector<double> mix(a.size());
    for (std::size_t i = 0; i < mix.size(); ++i)
        mix[i] = ca * a[i] + cb * b[i];
    const LuminanceImage c(32, 32, mix);
    const KernelSpec k = KernelSpec::from_sigma(2.0);
    const VisualMap ma = visual_map(a, k), mb = visual_map(b, k), mc = visual_map(c, k);
    for (std::size_t i = 0; i < mix.size(); ++i)
        EXPECT_LT(std::abs(mc.values[i] - (ca * ma.values[i] + cb * mb.values[i])), 1e-9);
}

TEST(VisualMap, RotationCovariance)
{
    const KernelSpec k = KernelSpec::from_sigma(2.0);
    const VisualMap v = visual_map(step_image(32, 32, true), k);
    const VisualMap h = visual_map(step_image(32, 32, false), k);
    for (int t = 8; t < 24; ++t)
    {
        const double dphi = std::arg(h.values(t, 16)) - std::arg(v.values(16, t));
        EXPECT_NEAR(dphi, std::numbers::pi / 2.0, 1e-3);
    }
}

TEST(VisualMap, UnitRampResponse)
{
    std::vector<double> v(32 * 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            v[static_cast<std::size_t>(y * 32 + x)] = x / 64.0;
    const VisualMap m = visual_map(LuminanceImage(32, 32, v), KernelSpec::from_sigma(2.0));
    EXPECT_NEAR(m.values(16, 16).real(), 1.0 / 64.0, 1e-12);
    EXPECT_NEAR(m.values(16, 16).imag(), 0.0, 1e-12);
}

TEST(GaussianBlur, ZeroSpreadIsIdentity)
{
    const LuminanceImage img = random_image(20, 20, 3u);
    EXPECT_EQ(gaussian_blur(img, 0.0), img);
    EXPECT_THROW(gaussian_blur(img, -1.0), DomainError);
}

TEST(GaussianBlur, ImpulseGivesSampledGaussian)
{
    std::vector<double> v(33 * 33, 0.0);
    v[16 * 33 + 16] = 1.0;
    const double s = 2.0;
    const LuminanceImage out = gaussian_blur(LuminanceImage(33, 33, v), s);
    double sum = 0.0;
    for (int k = -6; k <= 6; ++k)
        sum += std::exp(-k * k / (2.0 * s * s));
    EXPECT_NEAR(out(16, 16), 1.0 / (sum * sum), 1e-14);
    EXPECT_NEAR(out(18, 15), std::exp(-5.0 / (2.0 * s * s)) / (sum * sum), 1e-14);
}

TEST(GaussianBlur, MeanPreservedAndRangeKept)
{
    const LuminanceImage img = random_image(48, 40, 9u);
    for (double s : {0.7, 3.0, 9.0})
    {
        const LuminanceImage out = gaussian_blur(img, s);
        double m0 = 0.0, m1 = 0.0;
        for (std::size_t i = 0; i < img.size(); ++i)
        {
            m0 += img[i];
            m1 += out[i];
            EXPECT_GE(out[i], 0.0);
            EXPECT_LE(out[i], 1.0);
        }
        EXPECT_NEAR(m0 / img.size(), m1 / img.size(), 1e-6) << s;
    }
}

TEST(GaussianBlur, Cascade)
{
    const LuminanceImage img = random_image(64, 64, 21u);
    const LuminanceImage twice = gaussian_blur(gaussian_blur(img, 2.0), 2.0);
    const LuminanceImage once = gaussian_blur(img, std::sqrt(8.0));
    double se = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i)
        se += (twice[i] - once[i]) * (twice[i] - once[i]);
    EXPECT_LT(std::sqrt(se / img.size()), 1e-3);
}

TEST(GaussianBlur, PathsAgree)
{
    const LuminanceImage img = random_image(64, 64, 2u);
    const LuminanceImage a = gaussian_blur(img, 3.0, ConvolutionPath::direct);
    const LuminanceImage b = gaussian_blur(img, 3.0, ConvolutionPath::frequency);
    for (std::size_t i = 0; i < img.size(); ++i)
        EXPECT_NEAR(a[i], b[i], 1e-10);
}

TEST(Window, NormalizedForEveryShape)
{
    for (const WindowSpec& w : {WindowSpec::gaussian(2.0), WindowSpec::boxcar(3), WindowSpec::raised_cosine(4)})
    {
        EXPECT_NEAR(w.sum_of_squares(), 1.0, 1e-12);
        EXPECT_NO_THROW(w.validate());
    }
    EXPECT_EQ(default_window(2.5).radius, 8);
}

TEST(GradientEnergy, ZeroAndUnitMaps)
{
    VisualMap m{ComplexField(24, 24), 1.0};
    for (const WindowSpec& w : {WindowSpec::gaussian(1.5), WindowSpec::boxcar(2), WindowSpec::raised_cosine(3)})
    {
        const RealField l = gradient_energy(m, w);
        for (double v : l.values())
            EXPECT_EQ(v, 0.0);
    }
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> phase(-3.0, 3.0);
    for (auto& v : m.values.storage())
        v = std::polar(1.0, phase(rng));
    for (const WindowSpec& w : {WindowSpec::gaussian(1.5), WindowSpec::boxcar(2), WindowSpec::raised_cosine(3)})
    {
        const RealField l = gradient_energy(m, w);
        for (double v : l.values())
            EXPECT_NEAR(v, 1.0, 1e-12);
    }
}

TEST(GradientEnergy, SpikeGivesSquaredStencil)
{
    VisualMap m{ComplexField(8, 8), 1.0};
    m.values(4, 4) = Complex(0.6, 0.8);
    const WindowSpec w = WindowSpec::gaussian(1.0);
    ASSERT_EQ(w.radius, 3);
    const RealField l = gradient_energy(m, w);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
        {
            const int qx = x - 4, qy = y - 4;
            const double expect = (std::abs(qx) <= 3 && std::abs(qy) <= 3)
                                      ? std::pow(w.profile[qx + 3] * w.profile[qy + 3], 2)
                                      : 0.0;
            EXPECT_NEAR(l(x, y), expect, 1e-15) << x << "," << y;
        }
}

TEST(GradientEnergy, WindowTooLarge)
{
    VisualMap m{ComplexField(8, 8), 1.0};
    EXPECT_THROW(gradient_energy(m, WindowSpec::boxcar(5)), DimensionError);
}

// White noise has a flat spectrum, so the derivative kernel weights it by
// rho^2 and the energy ratio is the square of the natural-image law. The
// truncated kernels leak some high-frequency energy, hence the wider band.
TEST(BlurEnergyLaw, WhiteNoiseFollowsSquaredRatio)
{
    const double sg = 2.5;
    const LuminanceImage img = synthetic::white_noise(256, 256, 77u);
    const double base = mean_energy(img, sg);
    for (double k : {0.5, 1.0, 2.0})
    {
        const double ratio = mean_energy(gaussian_blur(img, k * sg), sg) / base;
        const double law = pfi_blur_ratio(sg, k * sg);
        EXPECT_NEAR(ratio / (law * law), 1.0, 0.15) << k;
        EXPECT_LT(ratio, 0.9 * law) << k;
    }
}

// A 1/f amplitude spectrum cancels the rho^2 weight and gives the ratio itself.
TEST(BlurEnergyLaw, NaturalNoiseFollowsRatio)
{
    const double sg = 2.5;
    const RealField z = synthetic::pink_noise(256, 256, 78u);
    std::vector<double> v(z.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = 0.5 + 0.01 * z[i];
    const LuminanceImage img(256, 256, v);
    const double base = mean_energy(img, sg);
    for (double k : {0.5, 1.0, 2.0})
    {
        const double ratio = mean_energy(gaussian_blur(img, k * sg), sg) / base;
        EXPECT_NEAR(ratio / pfi_blur_ratio(sg, k * sg), 1.0, 0.1) << k;
    }
}

TEST(Luma, Rec709Weights)
{
    EXPECT_NEAR(rec709_luma(1.0, 1.0, 1.0), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(rec709_luma(0.0, 1.0, 0.0), 0.7152);
}
