#ifndef BELE_SYNTHETIC_HPP
#define BELE_SYNTHETIC_HPP

// Deterministic synthetic test images: piecewise-constant shapes over an
// optional 1/f texture, plus white and 1/f noise fields.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "bele/convolve.hpp"
#include "bele/error.hpp"
#include "bele/image.hpp"

namespace bele::synthetic
{

/// Zero-mean, unit-variance noise with power spectrum ~ 1/rho^(2*exponent)
/// (exponent 1 gives amplitude ~ 1/rho, the natural-image law).
inline RealField pink_noise(int width, int height, std::uint64_t seed, double exponent = 1.0)
{
    if (width <= 0 || height <= 0)
        throw DimensionError("pink_noise: empty size");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    auto buf = detail::fftw_buffer(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        buf[i][0] = normal(rng);
        buf[i][1] = 0.0;
    }
    {
        detail::FftwPlan fwd(height, width, buf.get(), buf.get(), FFTW_FORWARD);
        fwd.execute();
    }
    for (int y = 0; y < height; ++y)
    {
        const double fy = (y <= height / 2 ? y : y - height) / static_cast<double>(height);
        for (int x = 0; x < width; ++x)
        {
            const double fx = (x <= width / 2 ? x : x - width) / static_cast<double>(width);
            const double rho = std::hypot(fx, fy);
            const double g = rho > 0.0 ? std::pow(rho, -exponent) : 0.0;
            const std::size_t i = static_cast<std::size_t>(y) * width + x;
            buf[i][0] *= g;
            buf[i][1] *= g;
        }
    }
    {
        detail::FftwPlan inv(height, width, buf.get(), buf.get(), FFTW_BACKWARD);
        inv.execute();
    }
    RealField out(width, height);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        out[i] = buf[i][0];
        mean += out[i];
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double& v : out.storage())
    {
        v -= mean;
        var += v * v;
    }
    const double sd = std::sqrt(var / static_cast<double>(n));
    if (sd > 0.0)
        for (double& v : out.storage())
            v /= sd;
    return out;
}

/// Uniform white noise in [0, 1].
inline LuminanceImage white_noise(int width, int height, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    for (double& x : v)
        x = u(rng);
    return LuminanceImage(width, height, std::move(v));
}

/// 1/f noise mapped to 0.5 + 0.15 * z and clipped to [0, 1].
inline LuminanceImage natural_noise(int width, int height, std::uint64_t seed)
{
    const RealField z = pink_noise(width, height, seed);
    std::vector<double> v(z.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = 0.5 + 0.15 * z[i];
    return LuminanceImage::clamped(width, height, std::move(v));
}

struct SceneOptions
{
    int width = 128;
    int height = 128;
    int rectangles = 4;
    int disks = 3;
    /// Amplitude of the additive 1/f texture (0 disables it).
    double texture = 0.03;
};

/// Random rectangles and disks of random gray levels on a random
/// background, with optional 1/f texture, clipped to [0, 1].
inline LuminanceImage edge_scene(std::uint64_t seed, const SceneOptions& o = {})
{
    if (o.width <= 0 || o.height <= 0)
        throw DimensionError("edge_scene: empty size");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> level(0.1, 0.9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double w = o.width, h = o.height;

    RealField img(o.width, o.height, level(rng));
    for (int k = 0; k < o.rectangles; ++k)
    {
        const double x0 = unit(rng) * 0.7 * w, y0 = unit(rng) * 0.7 * h;
        const double x1 = x0 + (0.15 + 0.35 * unit(rng)) * w, y1 = y0 + (0.15 + 0.35 * unit(rng)) * h;
        const double g = level(rng);
        for (int y = 0; y < o.height; ++y)
            for (int x = 0; x < o.width; ++x)
                if (x >= x0 && x < x1 && y >= y0 && y < y1)
                    img(x, y) = g;
    }
    for (int k = 0; k < o.disks; ++k)
    {
        const double cx = (0.15 + 0.7 * unit(rng)) * w, cy = (0.15 + 0.7 * unit(rng)) * h;
        const double r = (0.06 + 0.14 * unit(rng)) * std::min(w, h);
        const double g = level(rng);
        for (int y = 0; y < o.height; ++y)
            for (int x = 0; x < o.width; ++x)
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r)
                    img(x, y) = g;
    }
    if (o.texture > 0.0)
    {
        const RealField t = pink_noise(o.width, o.height, seed ^ 0x9e3779b97f4a7c15ULL);
        for (std::size_t i = 0; i < img.size(); ++i)
            img[i] += o.texture * t[i];
    }
    return LuminanceImage::clamped(o.width, o.height, std::move(img.storage()));
}

} // namespace bele::synthetic

#endif // BELE_SYNTHETIC_HPP
