#ifndef BELE_STATS_HPP
#define BELE_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bele/error.hpp"

namespace bele::stats
{

struct MetricReport
{
    double rmse = 0.0;
    double srocc = 0.0;
    double plcc = 0.0;
    std::size_t n = 0;
};

namespace detail
{

inline void require_pair(std::span<const double> a, std::span<const double> b, std::size_t min_n, const char* where)
{
    if (a.size() != b.size())
        throw DimensionError(std::string(where) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()) + ")");
    if (a.size() < min_n)
        throw DegenerateInputError(std::string(where) + ": need at least " + std::to_string(min_n) + " samples");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(a[i]) || !std::isfinite(b[i]))
            throw DomainError(std::string(where) + ": non-finite value");
}

} // namespace detail

inline double mean(std::span<const double> v)
{
    if (v.empty())
        throw DegenerateInputError("mean: empty input");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double median(std::vector<double> v)
{
    if (v.empty())
        throw DegenerateInputError("median: empty input");
    const std::size_t m = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
    const double hi = v[m];
    if (v.size() % 2 == 1)
        return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
    return 0.5 * (lo + hi);
}

/// Sample standard deviation (n - 1 denominator).
inline double stddev(std::span<const double> v)
{
    if (v.size() < 2)
        throw DegenerateInputError("stddev: need at least 2 samples");
    const double m = mean(v);
    double s = 0.0;
    for (double x : v)
        s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline double rmse(std::span<const double> pred, std::span<const double> target)
{
    detail::require_pair(pred, target, 1, "rmse");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        s += (pred[i] - target[i]) * (pred[i] - target[i]);
    return std::sqrt(s / static_cast<double>(pred.size()));
}

inline double plcc(std::span<const double> a, std::span<const double> b)
{
    detail::require_pair(a, b, 3, "plcc");
    const double ma = mean(a);
    const double mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0)
        throw DegenerateInputError("plcc: constant input");
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

/// 1-based ranks; tied values share the average of their positions.
inline std::vector<double> mid_ranks(std::span<const double> v)
{
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> rank(v.size());
    std::size_t i = 0;
    while (i < order.size())
    {
        std::size_t j = i + 1;
        while (j < order.size() && v[order[j]] == v[order[i]])
            ++j;
        const double r = 0.5 * static_cast<double>(i + j + 1);
        for (std::size_t k = i; k < j; ++k)
            rank[order[k]] = r;
        i = j;
    }
    return rank;
}

inline double srocc(std::span<const double> a, std::span<const double> b)
{
    detail::require_pair(a, b, 3, "srocc");
    const std::vector<double> ra = mid_ranks(a);
    const std::vector<double> rb = mid_ranks(b);
    try
    {
        return plcc(ra, rb);
    }
    catch (const DegenerateInputError&)
    {
        throw DegenerateInputError("srocc: constant input");
    }
}

inline MetricReport report(std::span<const double> pred, std::span<const double> target)
{
    return MetricReport{rmse(pred, target), srocc(pred, target), plcc(pred, target), pred.size()};
}

} // namespace bele::stats

#endif // BELE_STATS_HPP
