#ifndef BELE_CONVOLVE_HPP
#define BELE_CONVOLVE_HPP

// Convolution kernels and the two convolution engines used by the VRF:
// direct separable summation and an FFTW-backed frequency-domain path.
// Both pad the input with half-sample symmetric reflection.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "bele/error.hpp"
#include "bele/image.hpp"

namespace bele
{

/// Symmetric extension about the half-sample point: ... b a | a b c ... c | c b ...
/// Periodic with period 2n, so it is valid for any offset.
inline int reflect_index(int i, int n) noexcept
{
    const int period = 2 * n;
    int m = i % period;
    if (m < 0)
        m += period;
    return m < n ? m : period - 1 - m;
}

/// Odd-length 1-D kernel h(k), k in [-radius, radius], stored as taps[k + radius].
struct Kernel1D
{
    int radius = 0;
    std::vector<double> taps;

    double at(int k) const noexcept { return taps[static_cast<std::size_t>(k + radius)]; }
};

inline int truncation_radius(double sigma) noexcept
{
    return static_cast<int>(std::ceil(3.0 * sigma));
}

/// Sampled Gaussian, truncated at `radius` and renormalized to unit sum.
inline Kernel1D gaussian_kernel(double sigma, int radius)
{
    if (!(std::isfinite(sigma) && sigma > 0.0))
        throw DomainError("gaussian_kernel: sigma must be > 0");
    if (radius < 0)
        throw DomainError("gaussian_kernel: negative radius");
    Kernel1D k{radius, std::vector<double>(static_cast<std::size_t>(2 * radius + 1))};
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i)
    {
        const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k.taps[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : k.taps)
        v /= sum;
    return k;
}

/// First derivative of a Gaussian, d/dx g. Taps are scaled so that the
/// response to the unit ramp f(x) = x is exactly 1.
inline Kernel1D gaussian_derivative_kernel(double sigma, int radius)
{
    Kernel1D g = gaussian_kernel(sigma, radius);
    double moment = 0.0;
    for (int i = -radius; i <= radius; ++i)
    {
        g.taps[static_cast<std::size_t>(i + radius)] *= -static_cast<double>(i);
        moment += -static_cast<double>(i) * g.at(i);
    }
    // (f * h)(p) = sum_k f(p - k) h(k); for f(x) = x this is -sum_k k h(k).
    for (double& v : g.taps)
        v /= moment;
    return g;
}

/// out(x, y) = sum_k in(reflect(x - k), y) hx(k), then the same along y.
template <typename T>
Grid<T> separable_convolve(const Grid<T>& in, const Kernel1D& hx, const Kernel1D& hy)
{
    const int w = in.width();
    const int h = in.height();
    Grid<T> tmp(w, h);
    std::vector<int> idx;

    idx.resize(static_cast<std::size_t>(w + 2 * hx.radius));
    for (int i = 0; i < static_cast<int>(idx.size()); ++i)
        idx[static_cast<std::size_t>(i)] = reflect_index(i - hx.radius, w);
    for (int y = 0; y < h; ++y)
    {
        for (int x = 0; x < w; ++x)
        {
            T acc{};
            for (int k = -hx.radius; k <= hx.radius; ++k)
                acc += in(idx[static_cast<std::size_t>(x - k + hx.radius)], y) * hx.at(k);
            tmp(x, y) = acc;
        }
    }

    Grid<T> out(w, h);
    idx.resize(static_cast<std::size_t>(h + 2 * hy.radius));
    for (int i = 0; i < static_cast<int>(idx.size()); ++i)
        idx[static_cast<std::size_t>(i)] = reflect_index(i - hy.radius, h);
    for (int y = 0; y < h; ++y)
    {
        for (int x = 0; x < w; ++x)
        {
            T acc{};
            for (int k = -hy.radius; k <= hy.radius; ++k)
                acc += tmp(x, idx[static_cast<std::size_t>(y - k + hy.radius)]) * hy.at(k);
            out(x, y) = acc;
        }
    }
    return out;
}

namespace detail
{

inline std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

struct FftwFree
{
    void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};

using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

inline FftwBuffer fftw_buffer(std::size_t n)
{
    auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (p == nullptr)
        throw std::bad_alloc();
    return FftwBuffer(p);
}

class FftwPlan
{
public:
    FftwPlan(int rows, int cols, fftw_complex* in, fftw_complex* out, int sign)
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan_ = fftw_plan_dft_2d(rows, cols, in, out, sign, FFTW_ESTIMATE);
        if (plan_ == nullptr)
            throw Error("fftw_plan_dft_2d failed");
    }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;
    ~FftwPlan()
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
    }

    void execute() const noexcept { fftw_execute(plan_); }

private:
    fftw_plan plan_ = nullptr;
};

} // namespace detail

/// 2-D convolution of a real image with a complex (2r+1)x(2r+1) kernel via
/// FFT. The input is reflect-padded by r on each side, so circular wrap-around
/// never reaches the cropped interior. `kernel(kx + r, ky + r)` holds h(kx, ky).
inline ComplexField fft_convolve(const RealField& in, const ComplexField& kernel)
{
    if (kernel.width() != kernel.height() || kernel.width() % 2 == 0)
        throw DimensionError("fft_convolve: kernel must be square with odd size");
    const int r = kernel.width() / 2;
    const int w = in.width();
    const int h = in.height();
    const int pw = w + 2 * r;
    const int ph = h + 2 * r;
    const std::size_t n = static_cast<std::size_t>(pw) * static_cast<std::size_t>(ph);

    auto img = detail::fftw_buffer(n);
    auto ker = detail::fftw_buffer(n);
    for (int y = 0; y < ph; ++y)
    {
        const int sy = reflect_index(y - r, h);
        for (int x = 0; x < pw; ++x)
        {
            const std::size_t i = static_cast<std::size_t>(y) * pw + x;
            img[i][0] = in(reflect_index(x - r, w), sy);
            img[i][1] = 0.0;
            ker[i][0] = 0.0;
            ker[i][1] = 0.0;
        }
    }
    for (int ky = -r; ky <= r; ++ky)
    {
        const int yy = (ky + ph) % ph;
        for (int kx = -r; kx <= r; ++kx)
        {
            const int xx = (kx + pw) % pw;
            const Complex v = kernel(kx + r, ky + r);
            const std::size_t i = static_cast<std::size_t>(yy) * pw + xx;
            ker[i][0] = v.real();
            ker[i][1] = v.imag();
        }
    }

    {
        detail::FftwPlan fi(ph, pw, img.get(), img.get(), FFTW_FORWARD);
        detail::FftwPlan fk(ph, pw, ker.get(), ker.get(), FFTW_FORWARD);
        fi.execute();
        fk.execute();
    }
    for (std::size_t i = 0; i < n; ++i)
    {
        const double ar = img[i][0], ai = img[i][1];
        const double br = ker[i][0], bi = ker[i][1];
        img[i][0] = ar * br - ai * bi;
        img[i][1] = ar * bi + ai * br;
    }
    {
        detail::FftwPlan back(ph, pw, img.get(), img.get(), FFTW_BACKWARD);
        back.execute();
    }

    const double scale = 1.0 / static_cast<double>(n);
    ComplexField out(w, h);
    for (int y = 0; y < h; ++y)
    {
        for (int x = 0; x < w; ++x)
        {
            const std::size_t i = static_cast<std::size_t>(y + r) * pw + (x + r);
            out(x, y) = Complex(img[i][0] * scale, img[i][1] * scale);
        }
    }
    return out;
}

/// Outer product kernel hx(kx) * hy(ky) with a matching radius.
inline ComplexField outer_kernel(const Kernel1D& hx, const Kernel1D& hy, Complex weight = 1.0)
{
    if (hx.radius != hy.radius)
        throw DimensionError("outer_kernel: radii differ");
    const int r = hx.radius;
    ComplexField k(2 * r + 1, 2 * r + 1);
    for (int ky = -r; ky <= r; ++ky)
        for (int kx = -r; kx <= r; ++kx)
            k(kx + r, ky + r) = weight * (hx.at(kx) * hy.at(ky));
    return k;
}

} // namespace bele

#endif // BELE_CONVOLVE_HPP
