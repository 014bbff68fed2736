#ifndef BELE_NELDER_MEAD_HPP
#define BELE_NELDER_MEAD_HPP

// Box-constrained Nelder-Mead simplex minimizer (trial points are projected
// onto the box).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "bele/error.hpp"

namespace bele::optim
{

struct Box
{
    std::vector<double> lower;
    std::vector<double> upper;

    void project(std::vector<double>& x) const
    {
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = std::clamp(x[i], lower[i], upper[i]);
    }
};

struct NelderMeadOptions
{
    double xatol = 1e-10;
    double fatol = 1e-10;
    int max_evaluations = 2000;
    /// Relative size of the initial simplex edges.
    double initial_step = 0.05;
};

struct NelderMeadResult
{
    std::vector<double> x;
    double fx = 0.0;
    int evaluations = 0;
    bool converged = false;
};

inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const Box& box, const NelderMeadOptions& options = {})
{
    const std::size_t n = x0.size();
    if (n == 0 || box.lower.size() != n || box.upper.size() != n)
        throw DimensionError("nelder_mead: dimension mismatch between start point and box");

    int evals = 0;
    auto eval = [&](std::vector<double>& x) {
        box.project(x);
        ++evals;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    std::vector<std::vector<double>> pts(n + 1, x0);
    std::vector<double> fv(n + 1);
    fv[0] = eval(pts[0]);
    for (std::size_t i = 0; i < n; ++i)
    {
        std::vector<double>& p = pts[i + 1];
        const double step = p[i] != 0.0 ? options.initial_step * p[i] : 0.00025;
        p[i] += step;
        if (p[i] > box.upper[i])
            p[i] = x0[i] - step;
        fv[i + 1] = eval(p);
    }

    std::vector<std::size_t> order(n + 1);
    bool converged = false;
    while (evals < options.max_evaluations)
    {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        {
            std::vector<std::vector<double>> p2(n + 1);
            std::vector<double> f2(n + 1);
            for (std::size_t i = 0; i <= n; ++i)
            {
                p2[i] = pts[order[i]];
                f2[i] = fv[order[i]];
            }
            pts.swap(p2);
            fv.swap(f2);
        }

        double xspread = 0.0;
        double fspread = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
        {
            fspread = std::max(fspread, std::abs(fv[i] - fv[0]));
            for (std::size_t k = 0; k < n; ++k)
                xspread = std::max(xspread, std::abs(pts[i][k] - pts[0][k]));
        }
        if (xspread <= options.xatol && fspread <= options.fatol)
        {
            converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                centroid[k] += pts[i][k] / static_cast<double>(n);

        auto along = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t k = 0; k < n; ++k)
                p[k] = centroid[k] + t * (pts[n][k] - centroid[k]);
            return p;
        };

        std::vector<double> xr = along(-1.0);
        const double fr = eval(xr);
        if (fr < fv[0])
        {
            std::vector<double> xe = along(-2.0);
            const double fe = eval(xe);
            if (fe < fr)
            {
                pts[n] = std::move(xe);
                fv[n] = fe;
            }
            else
            {
                pts[n] = std::move(xr);
                fv[n] = fr;
            }
            continue;
        }
        if (fr < fv[n - 1])
        {
            pts[n] = std::move(xr);
            fv[n] = fr;
            continue;
        }
        if (fr < fv[n])
        {
            std::vector<double> xc = along(-0.5);
            const double fc = eval(xc);
            if (fc <= fr)
            {
                pts[n] = std::move(xc);
                fv[n] = fc;
                continue;
            }
        }
        else
        {
            std::vector<double> xc = along(0.5);
            const double fc = eval(xc);
            if (fc < fv[n])
            {
                pts[n] = std::move(xc);
                fv[n] = fc;
                continue;
            }
        }
        for (std::size_t i = 1; i <= n; ++i)
        {
            for (std::size_t k = 0; k < n; ++k)
                pts[i][k] = pts[0][k] + 0.5 * (pts[i][k] - pts[0][k]);
            fv[i] = eval(pts[i]);
        }
    }

    const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    return NelderMeadResult{pts[best], fv[best], evals, converged};
}

} // namespace bele::optim

#endif // BELE_NELDER_MEAD_HPP
