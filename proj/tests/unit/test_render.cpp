#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bele/render.hpp"

using namespace bele;
using render::HueClass;

namespace
{

double hue_of(RgbImage::Pixel p)
{
    const double r = p.r / 255.0, g = p.g / 255.0, b = p.b / 255.0;
    const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
    const double c = mx - mn;
    if (c == 0.0)
        return -1.0;
    double h;
    if (mx == r)
        h = std::fmod((g - b) / c, 6.0);
    else if (mx == g)
        h = (b - r) / c + 2.0;
    else
        h = (r - g) / c + 4.0;
    h *= 60.0;
    return h < 0.0 ? h + 360.0 : h;
}

double circular_distance(double a, double b)
{
    const double d = std::abs(a - b);
    return std::min(d, 360.0 - d);
}

HueClass class_of(RgbImage::Pixel p)
{
    if (p == render::neutral_gray)
        return HueClass::invalid;
    const double h = hue_of(p);
    const double dr = circular_distance(h, 0.0), dc = circular_distance(h, 180.0), dp = circular_distance(h, 280.0);
    if (dr < dc && dr < dp)
        return HueClass::below;
    return dc < dp ? HueClass::at : HueClass::above;
}

double lightness_code(RgbImage::Pixel p)
{
    return (std::max({p.r, p.g, p.b}) + std::min({p.r, p.g, p.b})) / 2.0;
}

CertaintyMap map_of(int w, int h, double v)
{
    return CertaintyMap{RealField(w, h, v), Grid<std::uint8_t>(w, h, std::uint8_t{1})};
}

} // namespace

TEST(Palette, Classify)
{
    render::IsoluminancePalette p;
    p.threshold = 0.7;
    EXPECT_EQ(p.classify(0.3), HueClass::below);
    EXPECT_EQ(p.classify(0.7), HueClass::at);
    EXPECT_EQ(p.classify(0.715), HueClass::at);
    EXPECT_EQ(p.classify(0.75), HueClass::above);
    p.threshold = 0.0;
    EXPECT_THROW(p.validate(), DomainError);
}

TEST(RenderCertainty, UniformMaps)
{
    render::IsoluminancePalette p;
    p.threshold = 0.7;
    const RealField weight(10, 8, 1.0);
    for (const auto& [m, expect] : {std::pair{1.0, HueClass::above}, std::pair{0.7, HueClass::at}})
    {
        const auto r = render::render_certainty(map_of(10, 8, m), p, weight);
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 10; ++x)
                EXPECT_EQ(class_of(r.image(x + r.map_offset, y)), expect);
    }
}

TEST(RenderCertainty, CheckerboardAndInvalidPixels)
{
    render::IsoluminancePalette p;
    p.threshold = 0.7;
    CertaintyMap m = map_of(12, 12, 0.0);
    RealField weight(12, 12);
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 12; ++x)
        {
            m.values(x, y) = (x + y) % 2 == 0 ? 0.3 : 0.95;
            weight(x, y) = (x * 7 + y * 3) % 11;
        }
    m.valid_mask(3, 4) = 0;
    const auto r = render::render_certainty(m, p, weight);
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 12; ++x)
        {
            const HueClass expect = m.valid_mask(x, y) == 0 ? HueClass::invalid
                                    : (x + y) % 2 == 0     ? HueClass::below
                                                           : HueClass::above;
            EXPECT_EQ(class_of(r.image(x + r.map_offset, y)), expect) << x << "," << y;
        }
}

TEST(RenderCertainty, IsoluminanceAcrossClassesAndWeights)
{
    render::IsoluminancePalette p;
    p.threshold = 0.6;
    CertaintyMap m = map_of(30, 3, 0.0);
    RealField weight(30, 3);
    for (int x = 0; x < 30; ++x)
        for (int y = 0; y < 3; ++y)
        {
            m.values(x, y) = y == 0 ? 0.2 : (y == 1 ? 0.6 : 1.2);
            weight(x, y) = x;
        }
    const auto r = render::render_certainty(m, p, weight);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 30; ++x)
            EXPECT_NEAR(lightness_code(r.image(x + r.map_offset, y)), 127.5, 1.0);
}

TEST(RenderCertainty, ColorbarMarkers)
{
    render::IsoluminancePalette p;
    p.threshold = std::sqrt(0.5);
    const auto r = render::render_certainty(map_of(16, 64, 1.0), p, RealField(16, 64, 1.0), DmosScore(50.0),
                                            CanonicalParams{1.0, 1.0});
    EXPECT_EQ(r.map_offset, render::colorbar_width + render::colorbar_gap);
    const int expect_t = static_cast<int>(std::lround((1.0 - p.threshold / r.bar_max) * 63));
    EXPECT_EQ(r.threshold_row, expect_t);
    const int expect_d = static_cast<int>(std::lround((1.0 - 0.5 / r.bar_max) * 63));
    EXPECT_EQ(r.dmos_row, expect_d);
    EXPECT_EQ(r.image(1, r.dmos_row), (RgbImage::Pixel{20, 20, 20}));
}

TEST(RenderCertainty, DimensionMismatch)
{
    EXPECT_THROW(render::render_certainty(map_of(4, 4, 1.0), {}, RealField(5, 4, 1.0)), DimensionError);
}

TEST(RenderScatter, IdentityPointsLieOnDiagonal)
{
    const std::vector<double> v{10.0, 35.0, 60.0, 90.0};
    const std::vector<std::string> labels{"a", "b", "a", "b"};
    const render::ScatterPlot plot = render::render_scatter(v, v, labels, "t");
    const auto& L = plot.layout;
    const double x0 = L.px(L.lo), y0 = L.py(L.lo), x1 = L.px(L.hi), y1 = L.py(L.hi);
    for (double d : v)
    {
        const double x = L.px(d), y = L.py(d);
        const double cross = (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0);
        EXPECT_LT(std::abs(cross) / std::hypot(x1 - x0, y1 - y0), 1e-9);
        const RgbImage::Pixel c = plot.image(L.ipx(d), L.ipy(d));
        EXPECT_FALSE(c == (RgbImage::Pixel{255, 255, 255}));
    }
    EXPECT_EQ(plot.legend, (std::vector<std::string>{"a", "b"}));
    EXPECT_NE(plot.svg.find("<svg"), std::string::npos);
    EXPECT_NE(plot.svg.find("predicted DMOS"), std::string::npos);
}

TEST(RenderScatter, EmptyInputAndMismatch)
{
    const std::vector<double> none;
    const std::vector<std::string> no_labels;
    EXPECT_NO_THROW(render::render_scatter(none, none, no_labels));
    const std::vector<double> a{1.0, 2.0}, b{1.0};
    const std::vector<std::string> l{"x", "y"};
    EXPECT_THROW(render::render_scatter(a, b, l), DimensionError);
}

TEST(RenderScatter, NonFinitePointsDropped)
{
    const std::vector<double> pred{1.0, std::nan(""), 3.0}, dmos{1.0, 2.0, 3.0};
    const std::vector<std::string> l{"x", "y", "x"};
    EXPECT_EQ(render::render_scatter(pred, dmos, l).legend, (std::vector<std::string>{"x"}));
}
