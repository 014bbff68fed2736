#ifndef BELE_TEXTURE_INDEX_HPP
#define BELE_TEXTURE_INDEX_HPP

// Complex PSNR between two visual maps, restricted to the hot region.

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "bele/edge_index.hpp"
#include "bele/error.hpp"
#include "bele/image.hpp"

namespace bele
{

inline constexpr double cpsnr_cap_db = 100.0;
inline constexpr double cpsnr_mse_floor = 1e-10;

struct TextureScore
{
    double cpsnr_db = cpsnr_cap_db;
    double mse = 0.0;
    std::size_t n_hot = 0;
    /// Set when the hot region is empty and the score is the cap by default.
    bool empty_region = false;
};

inline double mse_to_db(double mse) noexcept
{
    return mse < cpsnr_mse_floor ? cpsnr_cap_db : -10.0 * std::log10(mse);
}

/// mse = sum_{hot} |y_ref - y|^2 / (N_hot * max_{hot}(|y_ref|^2, |y|^2)).
inline TextureScore cpsnr(const VisualMap& ref_map, const VisualMap& dist_map, const RegionPartition& region)
{
    if (!ref_map.values.same_shape(dist_map.values) || !ref_map.values.same_shape(region.labels))
        throw DimensionError("cpsnr: map and region sizes differ");

    TextureScore s;
    s.n_hot = region.hot.size();
    if (region.hot.empty())
    {
        s.empty_region = true;
        return s;
    }

    double num = 0.0;
    double peak = 0.0;
    for (std::size_t i : region.hot)
    {
        const Complex a = ref_map.values[i];
        const Complex b = dist_map.values[i];
        num += std::norm(a - b);
        peak = std::max({peak, std::norm(a), std::norm(b)});
    }
    s.mse = peak > 0.0 ? num / (peak * static_cast<double>(s.n_hot)) : 0.0;
    s.cpsnr_db = mse_to_db(s.mse);
    return s;
}

} // namespace bele

#endif // BELE_TEXTURE_INDEX_HPP
