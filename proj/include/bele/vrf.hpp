#ifndef BELE_VRF_HPP
#define BELE_VRF_HPP

// Virtual receptive field: complex visual maps, Gaussian blur and smoothed
// gradient energy.
//
// The VRF is the complex derivative-of-Gaussian h = (d/dx + j d/dy) g_sigma,
// the spatial counterpart of H(rho, theta) = j 2 pi rho e^{j theta} e^{-s^2 rho^2}.
// Kernels are truncated at ceil(3 sigma) and renormalized; boundaries use
// half-sample symmetric reflection.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "bele/convolve.hpp"
#include "bele/core_model.hpp"
#include "bele/error.hpp"
#include "bele/image.hpp"

namespace bele
{

/// Spread above which convolutions switch to the frequency domain.
inline constexpr double direct_sigma_limit = 8.0;

enum class ConvolutionPath
{
    automatic,
    direct,
    frequency,
};

struct KernelSpec
{
    double sigma_pixels = 1.0;
    int radius = 3;

    static KernelSpec from_sigma(double sigma)
    {
        if (!(std::isfinite(sigma) && sigma > 0.0))
            throw DomainError("KernelSpec: sigma must be finite and > 0");
        return KernelSpec{sigma, truncation_radius(sigma)};
    }

    void validate() const
    {
        if (!(std::isfinite(sigma_pixels) && sigma_pixels > 0.0))
            throw DomainError("KernelSpec: sigma must be finite and > 0");
        if (radius < truncation_radius(sigma_pixels))
            throw DomainError("KernelSpec: radius must be >= ceil(3 sigma)");
    }
};

/// Separable sampling window w(qx, qy) = profile(qx) * profile(qy), scaled
/// so that sum w^2 = 1 (a unit-magnitude map then has unit energy).
struct WindowSpec
{
    enum class Shape
    {
        gaussian,
        boxcar,
        raised_cosine,
    };

    Shape shape = Shape::gaussian;
    int radius = 0;
    std::vector<double> profile;

    double weight(int qx, int qy) const noexcept
    {
        return profile[static_cast<std::size_t>(qx + radius)] * profile[static_cast<std::size_t>(qy + radius)];
    }

    double sum_of_squares() const noexcept
    {
        double s = 0.0;
        for (double v : profile)
            s += v * v;
        return s * s;
    }

    void validate() const
    {
        if (radius < 0 || profile.size() != static_cast<std::size_t>(2 * radius + 1))
            throw DomainError("WindowSpec: profile size must be 2*radius+1");
        for (double v : profile)
            if (!(std::isfinite(v) && v >= 0.0))
                throw DomainError("WindowSpec: taps must be finite and nonnegative");
        if (std::abs(sum_of_squares() - 1.0) > 1e-9)
            throw DomainError("WindowSpec: sum of squared taps must be 1");
    }

    static WindowSpec gaussian(double sigma)
    {
        const Kernel1D g = gaussian_kernel(sigma, truncation_radius(sigma));
        return normalized(Shape::gaussian, g.radius, g.taps);
    }

    static WindowSpec boxcar(int radius)
    {
        return normalized(Shape::boxcar, radius, std::vector<double>(static_cast<std::size_t>(2 * radius + 1), 1.0));
    }

    static WindowSpec raised_cosine(int radius)
    {
        std::vector<double> p(static_cast<std::size_t>(2 * radius + 1));
        for (int i = -radius; i <= radius; ++i)
            p[static_cast<std::size_t>(i + radius)] =
                0.5 * (1.0 + std::cos(std::numbers::pi * i / (radius + 1.0)));
        return normalized(Shape::raised_cosine, radius, std::move(p));
    }

private:
    static WindowSpec normalized(Shape shape, int radius, std::vector<double> p)
    {
        if (radius < 0)
            throw DomainError("WindowSpec: negative radius");
        double s = 0.0;
        for (double v : p)
            s += v * v;
        const double k = 1.0 / std::sqrt(s);
        for (double& v : p)
            v *= k;
        return WindowSpec{shape, radius, std::move(p)};
    }
};

/// VRF spread in pixels for a viewer: s_g_pixels * tau^2
/// (kernel scaling gamma = 1/tau, sigma = sigma_initial / gamma^2).
inline double kernel_sigma(const ViewerGeometry& geometry)
{
    geometry.validate();
    const double s = geometry.s_g_pixels() * geometry.tau * geometry.tau;
    if (!(std::isfinite(s) && s > 0.0))
        throw DomainError("kernel_sigma: non-finite spread");
    return s;
}

namespace detail
{

inline bool use_frequency_path(ConvolutionPath path, double sigma) noexcept
{
    return path == ConvolutionPath::frequency ||
           (path == ConvolutionPath::automatic && sigma > direct_sigma_limit);
}

inline void require_fits(int radius, int width, int height, const char* where)
{
    if (2 * radius > std::min(width, height))
        throw DimensionError(std::string(where) + ": radius " + std::to_string(radius) +
                             " exceeds half the image size " + std::to_string(width) + "x" +
                             std::to_string(height));
}

} // namespace detail

inline VisualMap visual_map(const LuminanceImage& image, const KernelSpec& kernel,
                            ConvolutionPath path = ConvolutionPath::automatic)
{
    kernel.validate();
    detail::require_fits(kernel.radius, image.width(), image.height(), "visual_map");

    const Kernel1D g = gaussian_kernel(kernel.sigma_pixels, kernel.radius);
    const Kernel1D d = gaussian_derivative_kernel(kernel.sigma_pixels, kernel.radius);

    VisualMap out;
    out.sigma_pixels = kernel.sigma_pixels;
    if (detail::use_frequency_path(path, kernel.sigma_pixels))
    {
        ComplexField k = outer_kernel(d, g);
        const ComplexField ky = outer_kernel(g, d, Complex(0.0, 1.0));
        for (std::size_t i = 0; i < k.size(); ++i)
            k[i] += ky[i];
        out.values = fft_convolve(image.field(), k);
    }
    else
    {
        const RealField gx = separable_convolve(image.field(), d, g);
        const RealField gy = separable_convolve(image.field(), g, d);
        out.values = ComplexField(image.width(), image.height());
        for (std::size_t i = 0; i < gx.size(); ++i)
            out.values[i] = Complex(gx[i], gy[i]);
    }
    return out;
}

inline VisualMap visual_map(const LuminanceImage& image, const ViewerGeometry& geometry,
                            ConvolutionPath path = ConvolutionPath::automatic)
{
    return visual_map(image, KernelSpec::from_sigma(kernel_sigma(geometry)), path);
}

/// Isotropic Gaussian blur with spread s_b pixels (OTF e^{-s_b^2 rho^2} up to
/// the spread convention shared with the VRF).
inline LuminanceImage gaussian_blur(const LuminanceImage& image, double s_b_pixels,
                                    ConvolutionPath path = ConvolutionPath::automatic)
{
    if (!(std::isfinite(s_b_pixels) && s_b_pixels >= 0.0))
        throw DomainError("gaussian_blur: spread must be finite and >= 0");
    if (s_b_pixels == 0.0)
        return image;

    const Kernel1D g = gaussian_kernel(s_b_pixels, truncation_radius(s_b_pixels));
    std::vector<double> out(image.size());
    if (detail::use_frequency_path(path, s_b_pixels))
    {
        const ComplexField y = fft_convolve(image.field(), outer_kernel(g, g));
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = y[i].real();
    }
    else
    {
        const RealField y = separable_convolve(image.field(), g, g);
        out = y.storage();
    }
    return LuminanceImage::clamped(image.width(), image.height(), std::move(out));
}

/// lambda(p) = sum_q w(q)^2 |y(p - q)|^2.
inline RealField gradient_energy(const VisualMap& map, const WindowSpec& window)
{
    window.validate();
    detail::require_fits(window.radius, map.width(), map.height(), "gradient_energy");

    RealField energy(map.width(), map.height());
    for (std::size_t i = 0; i < energy.size(); ++i)
        energy[i] = std::norm(map.values[i]);

    Kernel1D sq{window.radius, window.profile};
    for (double& v : sq.taps)
        v *= v;
    return separable_convolve(energy, sq, sq);
}

/// Window matched to a VRF spread.
inline WindowSpec default_window(double sigma_pixels)
{
    return WindowSpec::gaussian(sigma_pixels);
}

/// Rec. 709 luma from normalized R'G'B'.
inline double rec709_luma(double r, double g, double b) noexcept
{
    return 0.2126 * r + 0.7152 * g + 0.0722 * b;
}

} // namespace bele

#endif // BELE_VRF_HPP
