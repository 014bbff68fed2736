#ifndef BELE_RENDER_HPP
#define BELE_RENDER_HPP

// Isoluminance rendering of certainty maps and prediction-vs-DMOS
// scatterplots (raster and SVG).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "bele/core_model.hpp"
#include "bele/edge_index.hpp"
#include "bele/error.hpp"
#include "bele/image.hpp"

namespace bele::render
{

enum class HueClass
{
    below,   // red
    at,      // cyan
    above,   // purple
    invalid, // gray
};

struct IsoluminancePalette
{
    double threshold = 1.0;
    double tol = 0.02;
    double hue_below = 0.0;
    double hue_at = 180.0;
    double hue_above = 280.0;
    double lightness = 0.5;
    /// Saturation at zero weight; keeps the hue recoverable everywhere.
    double min_saturation = 0.25;

    void validate() const
    {
        if (!(threshold > 0.0 && std::isfinite(threshold)))
            throw DomainError("IsoluminancePalette: threshold must be finite and > 0");
        if (!(tol >= 0.0 && std::isfinite(tol)))
            throw DomainError("IsoluminancePalette: tol must be finite and >= 0");
        if (!(lightness > 0.0 && lightness < 1.0))
            throw DomainError("IsoluminancePalette: lightness must be in (0,1)");
        if (!(min_saturation > 0.0 && min_saturation <= 1.0))
            throw DomainError("IsoluminancePalette: min_saturation must be in (0,1]");
    }

    HueClass classify(double m) const noexcept
    {
        if (std::abs(m - threshold) <= tol)
            return HueClass::at;
        return m < threshold ? HueClass::below : HueClass::above;
    }

    double hue(HueClass c) const noexcept
    {
        switch (c)
        {
        case HueClass::below: return hue_below;
        case HueClass::at: return hue_at;
        default: return hue_above;
        }
    }
};

inline constexpr RgbImage::Pixel neutral_gray{128, 128, 128};

/// HSL to 8-bit RGB; hue in degrees, s and l in [0, 1].
inline RgbImage::Pixel hsl_to_rgb(double hue, double s, double l) noexcept
{
    const double c = (1.0 - std::abs(2.0 * l - 1.0)) * s;
    const double hp = std::fmod(std::fmod(hue, 360.0) + 360.0, 360.0) / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1)
        r = c, g = x;
    else if (hp < 2)
        r = x, g = c;
    else if (hp < 3)
        g = c, b = x;
    else if (hp < 4)
        g = x, b = c;
    else if (hp < 5)
        r = x, b = c;
    else
        r = c, b = x;
    const double m = l - 0.5 * c;
    auto q = [](double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
    return {q(r + m), q(g + m), q(b + m)};
}

struct CertaintyRendering
{
    RgbImage image;
    /// Width of the colorbar strip on the left; map pixel (x, y) is at
    /// image column x + map_offset.
    int map_offset = 0;
    /// Certainty value at the top of the colorbar (bottom is 0).
    double bar_max = 1.5;
    int threshold_row = -1;
    int dmos_row = -1;
};

inline constexpr int colorbar_width = 16;
inline constexpr int colorbar_gap = 4;

namespace detail
{

inline int bar_row(double m, double bar_max, int height) noexcept
{
    const double u = std::clamp(m / bar_max, 0.0, 1.0);
    return static_cast<int>(std::lround((1.0 - u) * (height - 1)));
}

} // namespace detail

/// Hue from the sign of M - threshold (cyan band of half-width tol),
/// saturation from the weight normalized to its maximum over valid pixels,
/// constant HSL lightness. A colorbar with a dotted purple threshold line
/// and an optional dark dotted DMOS marker occupies the left strip; the DMOS
/// marker sits at M = certainty_threshold(equivalent_blur(dmos)).
inline CertaintyRendering render_certainty(const CertaintyMap& cmap, const IsoluminancePalette& palette,
                                           const RealField& weight, std::optional<DmosScore> dmos_marker = {},
                                           const CanonicalParams& params = {})
{
    palette.validate();
    if (!cmap.values.same_shape(weight) || !cmap.values.same_shape(cmap.valid_mask))
        throw DimensionError("render_certainty: certainty map and weight differ in size");
    const int w = cmap.width();
    const int h = cmap.height();

    double wmax = 0.0;
    for (std::size_t i = 0; i < weight.size(); ++i)
        if (cmap.valid(i) && std::isfinite(weight[i]))
            wmax = std::max(wmax, weight[i]);

    CertaintyRendering out;
    out.map_offset = colorbar_width + colorbar_gap;
    out.bar_max = std::max(1.5, palette.threshold + 2.0 * palette.tol);
    out.image = RgbImage(w + out.map_offset, h, RgbImage::Pixel{255, 255, 255});

    for (int y = 0; y < h; ++y)
    {
        for (int x = 0; x < w; ++x)
        {
            const std::size_t i = cmap.values.index(x, y);
            RgbImage::Pixel p = neutral_gray;
            if (cmap.valid(i))
            {
                const double wn = wmax > 0.0 ? std::clamp(weight[i] / wmax, 0.0, 1.0) : 0.0;
                const double s = palette.min_saturation + (1.0 - palette.min_saturation) * wn;
                p = hsl_to_rgb(palette.hue(palette.classify(cmap.values[i])), s, palette.lightness);
            }
            out.image(x + out.map_offset, y) = p;
        }
    }

    for (int y = 0; y < h; ++y)
    {
        const double m = out.bar_max * (1.0 - static_cast<double>(y) / std::max(1, h - 1));
        const RgbImage::Pixel p = hsl_to_rgb(palette.hue(palette.classify(m)), 1.0, palette.lightness);
        for (int x = 0; x < colorbar_width; ++x)
            out.image(x, y) = p;
    }

    const RgbImage::Pixel purple = hsl_to_rgb(palette.hue_above, 1.0, 0.35);
    out.threshold_row = detail::bar_row(palette.threshold, out.bar_max, h);
    for (int x = 0; x < colorbar_width; x += 2)
        out.image(x, out.threshold_row) = purple;

    if (dmos_marker)
    {
        const NormalizedBlur xi = equivalent_blur_clamped(*dmos_marker, params);
        out.dmos_row = detail::bar_row(certainty_threshold(xi), out.bar_max, h);
        for (int x = 1; x < colorbar_width; x += 2)
            out.image(x, out.dmos_row) = RgbImage::Pixel{20, 20, 20};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scatterplots

namespace font
{

struct Glyph
{
    char c;
    std::array<std::uint8_t, 7> rows;
};

// 5x7 bitmap glyphs, bit 4 is the leftmost column.
inline constexpr std::array<Glyph, 48> glyphs{{
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}}, {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}}, {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}}, {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}}, {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}}, {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}}, {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}}, {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
    {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}}, {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
    {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}}, {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}}, {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
    {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}}, {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
    {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}}, {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
    {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}}, {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}}, {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}}, {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}}, {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}}, {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
    {'Y', {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}}, {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}}, {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}}, {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
    {'/', {0x00, 0x01, 0x02, 0x04, 0x08, 0x10, 0x00}}, {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
    {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}}, {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}},
    {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}}, {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
    {'?', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x00, 0x04}}, {',', {0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08}},
}};

inline const Glyph& lookup(char c) noexcept
{
    const char u = (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
    for (const Glyph& g : glyphs)
        if (g.c == u)
            return g;
    return glyphs[46];
}

inline constexpr int advance = 6;

inline void draw_text(RgbImage& img, int x, int y, const std::string& text, RgbImage::Pixel color)
{
    for (char c : text)
    {
        const Glyph& g = lookup(c);
        for (int r = 0; r < 7; ++r)
            for (int col = 0; col < 5; ++col)
                if (g.rows[static_cast<std::size_t>(r)] & (0x10 >> col))
                    img.set(x + col, y + r, color);
        x += advance;
    }
}

/// Text rotated 90 degrees counter-clockwise, reading bottom to top from (x, y).
inline void draw_text_vertical(RgbImage& img, int x, int y, const std::string& text, RgbImage::Pixel color)
{
    for (char c : text)
    {
        const Glyph& g = lookup(c);
        for (int r = 0; r < 7; ++r)
            for (int col = 0; col < 5; ++col)
                if (g.rows[static_cast<std::size_t>(r)] & (0x10 >> col))
                    img.set(x + r, y - col, color);
        y -= advance;
    }
}

} // namespace font

inline constexpr std::array<RgbImage::Pixel, 10> group_colors{{
    {31, 119, 180},
    {255, 127, 14},
    {44, 160, 44},
    {214, 39, 40},
    {148, 103, 189},
    {140, 86, 75},
    {227, 119, 194},
    {127, 127, 127},
    {188, 189, 34},
    {23, 190, 207},
}};

/// Square plot area with shared axis range, so the identity line is the
/// diagonal of the plot box.
struct ScatterLayout
{
    int width = 560;
    int height = 480;
    int left = 64;
    int right = 16;
    int top = 16;
    int bottom = 48;
    double lo = 0.0;
    double hi = 100.0;

    int plot_size() const noexcept { return std::min(width - left - right, height - top - bottom); }

    double px(double v) const noexcept { return left + (v - lo) / (hi - lo) * (plot_size() - 1); }
    double py(double v) const noexcept { return top + (plot_size() - 1) - (v - lo) / (hi - lo) * (plot_size() - 1); }
    int ipx(double v) const noexcept { return static_cast<int>(std::lround(px(v))); }
    int ipy(double v) const noexcept { return static_cast<int>(std::lround(py(v))); }
};

struct ScatterPlot
{
    RgbImage image;
    std::string svg;
    ScatterLayout layout;
    std::vector<std::string> legend;
};

namespace detail
{

inline std::string format_tick(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline std::string svg_escape(const std::string& s)
{
    std::string out;
    for (char c : s)
    {
        switch (c)
        {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string svg_color(RgbImage::Pixel p)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", p.r, p.g, p.b);
    return buf;
}

inline void draw_line(RgbImage& img, int x0, int y0, int x1, int y1, RgbImage::Pixel c)
{
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;)
    {
        img.set(x0, y0, c);
        if (x0 == x1 && y0 == y1)
            break;
        const int e2 = 2 * err;
        if (e2 >= dy)
            err += dy, x0 += sx;
        if (e2 <= dx)
            err += dx, y0 += sy;
    }
}

} // namespace detail

/// Predicted (x) against DMOS (y), colored by group label, with the identity
/// line. Non-finite points are dropped; groups left without points are not
/// listed in the legend.
inline ScatterPlot render_scatter(std::span<const double> pred, std::span<const double> dmos,
                                  std::span<const std::string> labels, const std::string& title = {})
{
    if (pred.size() != dmos.size() || pred.size() != labels.size())
        throw DimensionError("render_scatter: pred, dmos and labels must have equal lengths");

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (std::isfinite(pred[i]) && std::isfinite(dmos[i]))
            keep.push_back(i);

    ScatterPlot plot;
    ScatterLayout& L = plot.layout;
    if (!keep.empty())
    {
        double lo = pred[keep[0]], hi = lo;
        for (std::size_t i : keep)
        {
            lo = std::min({lo, pred[i], dmos[i]});
            hi = std::max({hi, pred[i], dmos[i]});
        }
        const double pad = hi > lo ? 0.05 * (hi - lo) : 1.0;
        L.lo = lo - pad;
        L.hi = hi + pad;
    }

    std::map<std::string, std::size_t> group_index;
    for (std::size_t i : keep)
        group_index.emplace(labels[i], 0);
    for (auto& [name, idx] : group_index)
    {
        idx = plot.legend.size();
        plot.legend.push_back(name);
    }

    const RgbImage::Pixel white{255, 255, 255}, black{0, 0, 0}, grid{200, 200, 200};
    plot.image = RgbImage(L.width, L.height, white);
    RgbImage& img = plot.image;
    const int s = L.plot_size();
    const int x0 = L.left, y0 = L.top, x1 = L.left + s - 1, y1 = L.top + s - 1;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << L.width << "\" height=\"" << L.height
        << "\" viewBox=\"0 0 " << L.width << ' ' << L.height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (int k = 0; k <= 4; ++k)
    {
        const double v = L.lo + (L.hi - L.lo) * k / 4.0;
        const int gx = L.ipx(v), gy = L.ipy(v);
        for (int t = y0; t <= y1; t += 3)
            img.set(gx, t, grid);
        for (int t = x0; t <= x1; t += 3)
            img.set(t, gy, grid);
        const std::string label = detail::format_tick(v);
        font::draw_text(img, gx - static_cast<int>(label.size()) * font::advance / 2, y1 + 6, label, black);
        font::draw_text(img, x0 - 6 - static_cast<int>(label.size()) * font::advance, gy - 3, label, black);
        svg << "<line x1=\"" << gx << "\" y1=\"" << y0 << "\" x2=\"" << gx << "\" y2=\"" << y1
            << "\" stroke=\"#c8c8c8\" stroke-dasharray=\"1,2\"/>\n";
        svg << "<line x1=\"" << x0 << "\" y1=\"" << gy << "\" x2=\"" << x1 << "\" y2=\"" << gy
            << "\" stroke=\"#c8c8c8\" stroke-dasharray=\"1,2\"/>\n";
        svg << "<text x=\"" << gx << "\" y=\"" << y1 + 16 << "\" font-size=\"10\" text-anchor=\"middle\">"
            << label << "</text>\n";
        svg << "<text x=\"" << x0 - 6 << "\" y=\"" << gy + 3 << "\" font-size=\"10\" text-anchor=\"end\">" << label
            << "</text>\n";
    }

    detail::draw_line(img, x0, y1, x1, y0, RgbImage::Pixel{120, 120, 120});
    svg << "<line x1=\"" << L.px(L.lo) << "\" y1=\"" << L.py(L.lo) << "\" x2=\"" << L.px(L.hi) << "\" y2=\""
        << L.py(L.hi) << "\" stroke=\"#787878\"/>\n";

    detail::draw_line(img, x0, y0, x1, y0, black);
    detail::draw_line(img, x0, y1, x1, y1, black);
    detail::draw_line(img, x0, y0, x0, y1, black);
    detail::draw_line(img, x1, y0, x1, y1, black);
    svg << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << s - 1 << "\" height=\"" << s - 1
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    const std::string xlabel = "predicted DMOS";
    const std::string ylabel = "DMOS";
    font::draw_text(img, x0 + s / 2 - static_cast<int>(xlabel.size()) * font::advance / 2, y1 + 22, xlabel, black);
    font::draw_text_vertical(img, 6, y0 + s / 2 + static_cast<int>(ylabel.size()) * font::advance / 2, ylabel, black);
    svg << "<text x=\"" << x0 + s / 2 << "\" y=\"" << y1 + 36
        << "\" font-size=\"12\" text-anchor=\"middle\">predicted DMOS</text>\n";
    svg << "<text x=\"14\" y=\"" << y0 + s / 2 << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << y0 + s / 2 << ")\">DMOS</text>\n";
    if (!title.empty())
    {
        font::draw_text(img, x0 + 4, 4, title, black);
        svg << "<text x=\"" << x0 + 4 << "\" y=\"12\" font-size=\"12\">" << detail::svg_escape(title) << "</text>\n";
    }

    for (std::size_t i : keep)
    {
        const RgbImage::Pixel c = group_colors[group_index[labels[i]] % group_colors.size()];
        const int cx = L.ipx(pred[i]), cy = L.ipy(dmos[i]);
        for (int dy = -2; dy <= 2; ++dy)
            for (int dx = -2; dx <= 2; ++dx)
                if (dx * dx + dy * dy <= 5)
                    img.set(cx + dx, cy + dy, c);
        svg << "<circle cx=\"" << L.px(pred[i]) << "\" cy=\"" << L.py(dmos[i]) << "\" r=\"2.5\" fill=\""
            << detail::svg_color(c) << "\"/>\n";
    }

    const int lx = x0 + 8;
    int ly = y0 + 8;
    for (std::size_t g = 0; g < plot.legend.size(); ++g)
    {
        const RgbImage::Pixel c = group_colors[g % group_colors.size()];
        for (int dy = 0; dy < 7; ++dy)
            for (int dx = 0; dx < 7; ++dx)
                img.set(lx + dx, ly + dy, c);
        font::draw_text(img, lx + 10, ly, plot.legend[g], black);
        svg << "<rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"7\" height=\"7\" fill=\"" << detail::svg_color(c)
            << "\"/>\n";
        svg << "<text x=\"" << lx + 10 << "\" y=\"" << ly + 7 << "\" font-size=\"10\">"
            << detail::svg_escape(plot.legend[g]) << "</text>\n";
        ly += 11;
    }
    svg << "</svg>\n";
    plot.svg = svg.str();
    return plot;
}

} // namespace bele::render

#endif // BELE_RENDER_HPP
