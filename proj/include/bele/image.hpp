#ifndef BELE_IMAGE_HPP
#define BELE_IMAGE_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bele/error.hpp"

namespace bele
{

using Complex = std::complex<double>;

/// Dense row-major 2-D array.
template <typename T>
class Grid
{
public:
    using value_type = T;

    Grid() = default;

    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height)
    {
        if (width < 0 || height < 0)
            throw DimensionError("Grid: negative dimensions");
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    Grid(int width, int height, std::vector<T> data)
        : width_(width), height_(height), data_(std::move(data))
    {
        if (width < 0 || height < 0)
            throw DimensionError("Grid: negative dimensions");
        if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
            throw DimensionError("Grid: sample count does not match width*height");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }
    std::vector<T>& storage() noexcept { return data_; }
    const std::vector<T>& storage() const noexcept { return data_; }

    std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    template <typename U>
    bool same_shape(const Grid<U>& other) const noexcept
    {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Grid& a, const Grid& b) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using RealField = Grid<double>;
using ComplexField = Grid<Complex>;

/// Real luminance field with samples in [0, 1].
class LuminanceImage
{
public:
    LuminanceImage() = default;

    LuminanceImage(int width, int height, std::vector<double> samples)
        : grid_(width, height, std::move(samples))
    {
        for (double v : grid_.values())
        {
            if (!std::isfinite(v) || v < 0.0 || v > 1.0)
                throw DomainError("LuminanceImage: samples must be finite and in [0,1]");
        }
    }

    /// Clamps every sample into [0,1]; NaN is rejected.
    static LuminanceImage clamped(int width, int height, std::vector<double> samples)
    {
        for (double& v : samples)
        {
            if (std::isnan(v))
                throw DomainError("LuminanceImage: NaN sample");
            v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        }
        return LuminanceImage(width, height, std::move(samples));
    }

    int width() const noexcept { return grid_.width(); }
    int height() const noexcept { return grid_.height(); }
    std::size_t size() const noexcept { return grid_.size(); }
    double operator()(int x, int y) const noexcept { return grid_(x, y); }
    double operator[](std::size_t i) const noexcept { return grid_[i]; }
    std::span<const double> samples() const noexcept { return grid_.values(); }
    const RealField& field() const noexcept { return grid_; }

    friend bool operator==(const LuminanceImage&, const LuminanceImage&) = default;

private:
    RealField grid_;
};

/// Complex output of the VRF filter: magnitude is edge strength, phase is
/// gradient orientation.
struct VisualMap
{
    ComplexField values;
    double sigma_pixels = 0.0;

    int width() const noexcept { return values.width(); }
    int height() const noexcept { return values.height(); }
};

/// 8-bit RGB raster.
class RgbImage
{
public:
    struct Pixel
    {
        std::uint8_t r = 0, g = 0, b = 0;
        friend bool operator==(const Pixel&, const Pixel&) = default;
    };

    RgbImage() = default;
    RgbImage(int width, int height) : grid_(width, height, Pixel{}) {}
    RgbImage(int width, int height, Pixel fill) : grid_(width, height, fill) {}

    int width() const noexcept { return grid_.width(); }
    int height() const noexcept { return grid_.height(); }
    Pixel& operator()(int x, int y) noexcept { return grid_(x, y); }
    const Pixel& operator()(int x, int y) const noexcept { return grid_(x, y); }

    bool contains(int x, int y) const noexcept
    {
        return x >= 0 && y >= 0 && x < width() && y < height();
    }

    void set(int x, int y, Pixel p) noexcept
    {
        if (contains(x, y))
            grid_(x, y) = p;
    }

private:
    Grid<Pixel> grid_;
};

} // namespace bele

#endif // BELE_IMAGE_HPP
