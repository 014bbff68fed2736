#ifndef BELE_TEST_ORACLES_HPP
#define BELE_TEST_ORACLES_HPP

// Brute-force reference computations, written without the library's
// convolution and statistics code.

#include <cmath>
#include <complex>
#include <vector>

#include "bele/image.hpp"

namespace oracle
{

// Mirror with the edge sample repeated.
inline int mirror(int i, int n)
{
    while (i < 0 || i >= n)
        i = i < 0 ? -i - 1 : 2 * n - 1 - i;
    return i;
}

// Full 2-D summation over the (kx, ky) support of the complex
// derivative-of-Gaussian kernel, truncated at ceil(3 sigma).
inline std::vector<std::complex<double>> visual_map(const bele::LuminanceImage& img, double sigma)
{
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> g(2 * r + 1), d(2 * r + 1);
    double gs = 0.0;
    for (int k = -r; k <= r; ++k)
        gs += g[k + r] = std::exp(-k * k / (2.0 * sigma * sigma));
    double ramp = 0.0;
    for (int k = -r; k <= r; ++k)
    {
        g[k + r] /= gs;
        d[k + r] = -k * g[k + r];
        ramp += -k * d[k + r];
    }
    for (double& v : d)
        v /= ramp;

    const int w = img.width(), h = img.height();
    std::vector<std::complex<double>> out(static_cast<std::size_t>(w * h));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
        {
            double re = 0.0, im = 0.0;
            for (int ky = -r; ky <= r; ++ky)
                for (int kx = -r; kx <= r; ++kx)
                {
                    const double v = img(mirror(x - kx, w), mirror(y - ky, h));
                    re += v * d[kx + r] * g[ky + r];
                    im += v * g[kx + r] * d[ky + r];
                }
            out[static_cast<std::size_t>(y * w + x)] = {re, im};
        }
    return out;
}

inline double relative_frobenius(const bele::VisualMap& m, const std::vector<std::complex<double>>& ref)
{
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i)
    {
        num += std::norm(m.values[i] - ref[i]);
        den += std::norm(ref[i]);
    }
    return std::sqrt(num / den);
}

// Rank of v[i] = #(less) + (#(equal) + 1) / 2, by exhaustive counting.
inline std::vector<double> ranks(const std::vector<double>& v)
{
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        double less = 0.0, equal = 0.0;
        for (double x : v)
        {
            less += x < v[i];
            equal += x == v[i];
        }
        r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
}

// One-pass raw-moment Pearson correlation in extended precision.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b)
{
    long double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    const long double n = static_cast<long double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        sa += a[i];
        sb += b[i];
        sab += static_cast<long double>(a[i]) * b[i];
        saa += static_cast<long double>(a[i]) * a[i];
        sbb += static_cast<long double>(b[i]) * b[i];
    }
    return static_cast<double>((sab - sa * sb / n) / std::sqrt((saa - sa * sa / n) * (sbb - sb * sb / n)));
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b)
{
    return pearson(ranks(a), ranks(b));
}

inline double rmse(const std::vector<double>& a, const std::vector<double>& b)
{
    long double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += static_cast<long double>(a[i] - b[i]) * (a[i] - b[i]);
    return static_cast<double>(std::sqrt(s / static_cast<long double>(a.size())));
}

} // namespace oracle

#endif // BELE_TEST_ORACLES_HPP
