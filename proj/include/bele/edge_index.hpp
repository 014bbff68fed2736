#ifndef BELE_EDGE_INDEX_HPP
#define BELE_EDGE_INDEX_HPP

// Certainty map, cold/hot partition and the edge-side estimators: the
// empirical DMOS estimator and BELE_cold (distortion term x focusing term).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bele/core_model.hpp"
#include "bele/error.hpp"
#include "bele/image.hpp"
#include "bele/vrf.hpp"

namespace bele
{

inline constexpr double distortion_exponent = 0.65;
inline constexpr double focusing_exponent = 1.35;

struct EdgeIndexOptions
{
    /// Pixels with |y_ref| below this fraction of max |y_ref| are excluded.
    double magnitude_floor = 1e-3;
    /// lambda ratios are clamped to [0, ratio_ceiling] before pooling.
    double ratio_ceiling = 1.0;
};

struct CertaintyMap
{
    RealField values;
    Grid<std::uint8_t> valid_mask;

    int width() const noexcept { return values.width(); }
    int height() const noexcept { return values.height(); }
    bool valid(std::size_t i) const noexcept { return valid_mask[i] != 0; }

    std::size_t valid_count() const noexcept
    {
        return static_cast<std::size_t>(std::count(valid_mask.storage().begin(), valid_mask.storage().end(), 1));
    }
};

enum class Region : std::uint8_t
{
    invalid = 0,
    cold = 1,
    hot = 2,
};

/// Pixel labelling into the cold set (strong isolated edges, M >= threshold)
/// and the hot set (valid pixels below threshold).
struct RegionPartition
{
    Grid<Region> labels;
    std::vector<std::size_t> cold;
    std::vector<std::size_t> hot;
    double threshold = 1.0;

    int width() const noexcept { return labels.width(); }
    int height() const noexcept { return labels.height(); }
};

struct EdgeScore
{
    double bele_cold = 0.0;
    double d_distortion = 0.0;
    double d_focus = 0.0;
    double xi_eq = 0.0;
    double first_pass_dmos = 0.0;
};

/// M(p) = |y(p)| / |y_ref(p)| on pixels where |y_ref| clears the floor.
inline CertaintyMap certainty_map(const VisualMap& ref_map, const VisualMap& dist_map,
                                  double magnitude_floor = EdgeIndexOptions{}.magnitude_floor)
{
    if (!ref_map.values.same_shape(dist_map.values))
        throw DimensionError("certainty_map: visual maps differ in size");
    if (ref_map.sigma_pixels != dist_map.sigma_pixels)
        throw DimensionError("certainty_map: visual maps were computed with different kernels");
    if (!(magnitude_floor >= 0.0 && magnitude_floor < 1.0))
        throw DomainError("certainty_map: floor fraction must be in [0,1)");

    const std::size_t n = ref_map.values.size();
    std::vector<double> mag(n);
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        mag[i] = std::abs(ref_map.values[i]);
        peak = std::max(peak, mag[i]);
    }
    const double cut = magnitude_floor * peak;

    CertaintyMap out{RealField(ref_map.width(), ref_map.height()),
                     Grid<std::uint8_t>(ref_map.width(), ref_map.height(), std::uint8_t{0})};
    for (std::size_t i = 0; i < n; ++i)
    {
        if (mag[i] > 0.0 && mag[i] >= cut)
        {
            out.values[i] = std::abs(dist_map.values[i]) / mag[i];
            out.valid_mask[i] = 1;
        }
    }
    return out;
}

namespace detail
{

inline RegionPartition split(const CertaintyMap& cmap, double m_bar)
{
    RegionPartition p{Grid<Region>(cmap.width(), cmap.height(), Region::invalid), {}, {}, m_bar};
    for (std::size_t i = 0; i < cmap.values.size(); ++i)
    {
        if (!cmap.valid(i))
            continue;
        if (cmap.values[i] >= m_bar)
        {
            p.labels[i] = Region::cold;
            p.cold.push_back(i);
        }
        else
        {
            p.labels[i] = Region::hot;
            p.hot.push_back(i);
        }
    }
    return p;
}

} // namespace detail

/// Cold set = {p valid : M(p) >= m_bar}; hot set = the remaining valid pixels.
inline RegionPartition partition(const CertaintyMap& cmap, double m_bar)
{
    if (!(m_bar > 0.0 && m_bar <= 1.0))
        throw DomainError("partition: threshold must be in (0,1]");
    RegionPartition p = detail::split(cmap, m_bar);
    if (p.cold.empty())
        throw DegenerateInputError("partition: no pixel reaches the certainty threshold " + std::to_string(m_bar));
    return p;
}

/// Every valid pixel in the cold set; used before any blur estimate exists.
inline RegionPartition provisional_partition(const CertaintyMap& cmap)
{
    RegionPartition p = detail::split(cmap, 0.0);
    if (p.cold.empty())
        throw DegenerateInputError("provisional_partition: reference has no valid pixel");
    return p;
}

namespace detail
{

inline void require_region(const RealField& lambda_num, const RealField& lambda_ref, const RegionPartition& region,
                           const char* where)
{
    if (!lambda_num.same_shape(lambda_ref) || !lambda_num.same_shape(region.labels))
        throw DimensionError(std::string(where) + ": field sizes differ");
    if (region.cold.empty())
        throw DegenerateInputError(std::string(where) + ": empty cold region");
}

/// mean over the cold set of clamp(lambda/lambda_ref, 0, ceiling)^exponent.
inline double pooled_ratio(const RealField& lambda_num, const RealField& lambda_ref, const RegionPartition& region,
                           double exponent, double ceiling, const char* where)
{
    require_region(lambda_num, lambda_ref, region, where);
    double acc = 0.0;
    for (std::size_t i : region.cold)
    {
        const double den = lambda_ref[i];
        if (!(den > 0.0))
            throw DegenerateInputError(std::string(where) + ": zero reference energy in the cold region");
        const double r = std::clamp(lambda_num[i] / den, 0.0, ceiling);
        acc += exponent == 1.0 ? r : std::pow(r, exponent);
    }
    return acc / static_cast<double>(region.cold.size());
}

inline double loss_from_pooled(double pooled) noexcept
{
    return std::clamp(1.0 - std::sqrt(pooled), 0.0, 1.0);
}

} // namespace detail

/// d = 100 Q (1 - sqrt(R)), R the cold-region mean of lambda / lambda_ref.
inline DmosScore empirical_dmos(const CanonicalParams& params, const RealField& lambda_dist,
                                const RealField& lambda_ref, const RegionPartition& region,
                                double ratio_ceiling = EdgeIndexOptions{}.ratio_ceiling)
{
    params.validate();
    const double r = detail::pooled_ratio(lambda_dist, lambda_ref, region, 1.0, ratio_ceiling, "empirical_dmos");
    return DmosScore(params.anchor() * detail::loss_from_pooled(std::min(r, 1.0)));
}

/// 1 - sqrt(mean (lambda / lambda_ref)^0.65) over the cold region.
inline double distortion_term(const RealField& lambda_dist, const RealField& lambda_ref,
                              const RegionPartition& region,
                              double ratio_ceiling = EdgeIndexOptions{}.ratio_ceiling)
{
    return detail::loss_from_pooled(
        detail::pooled_ratio(lambda_dist, lambda_ref, region, distortion_exponent, ratio_ceiling, "distortion_term"));
}

/// 1 - sqrt(mean (lambda_w / lambda_ref)^1.35) over the cold region, with
/// lambda_w taken from the reference re-blurred at the equivalent blur.
inline double focusing_term(const RealField& lambda_blur_eq, const RealField& lambda_ref,
                            const RegionPartition& region,
                            double ratio_ceiling = EdgeIndexOptions{}.ratio_ceiling)
{
    return detail::loss_from_pooled(
        detail::pooled_ratio(lambda_blur_eq, lambda_ref, region, focusing_exponent, ratio_ceiling, "focusing_term"));
}

/// Spread, in pixels, of the Gaussian applied to the reference to build the
/// focusing image: the equivalent blur read as arcminutes of visual angle.
/// This sits below the test-image blur s_B = xi * s_G by the factor s_G.
inline double focusing_spread_pixels(NormalizedBlur xi_eq, const ViewerGeometry& geometry)
{
    return geometry.arcmin_to_pixels(xi_eq.value);
}

/// Natural-vision threshold for an equivalent blur at the calibrated viewing
/// distance: sqrt(1 / (1 + xi^2 / tau^4)).
inline double threshold_for(NormalizedBlur xi, const CanonicalParams& params)
{
    return certainty_threshold(NormalizedBlur(xi.value / (params.tau * params.tau)));
}

/// Everything computed while scoring one pair; the texture index reuses the
/// maps and the final partition.
struct EdgeAnalysis
{
    VisualMap ref_map;
    VisualMap dist_map;
    RealField lambda_ref;
    RealField lambda_dist;
    RealField lambda_focus;
    CertaintyMap certainty;
    RegionPartition final_region;
    EdgeScore score;
};

/// Runs the edge pipeline:
///  1. visual maps and energy fields at the tau-scaled kernel;
///  2. provisional score 100 Q d_distortion over every valid pixel;
///  3. equivalent blur by inverting the canonical model (clamped below 100 Q);
///  4. reference re-blurred at the focusing spread;
///  5. final cold region at the threshold of the equivalent blur;
///  6. BELE_cold = 100 Q [1 - (1 - d_distortion)(1 - d_focus)].
inline EdgeAnalysis analyze_edges(const LuminanceImage& ref, const LuminanceImage& dist,
                                  const CanonicalParams& params, const ViewerGeometry& geometry,
                                  const EdgeIndexOptions& options = {})
{
    params.validate();
    geometry.validate();
    if (ref.width() != dist.width() || ref.height() != dist.height())
        throw DimensionError("bele_cold: reference and distorted images differ in size");

    const KernelSpec kernel = KernelSpec::from_sigma(kernel_sigma(geometry));
    const WindowSpec window = default_window(kernel.sigma_pixels);

    EdgeAnalysis a;
    a.ref_map = visual_map(ref, kernel);
    a.dist_map = visual_map(dist, kernel);
    a.lambda_ref = gradient_energy(a.ref_map, window);
    a.lambda_dist = gradient_energy(a.dist_map, window);
    a.certainty = certainty_map(a.ref_map, a.dist_map, options.magnitude_floor);

    const RegionPartition first = provisional_partition(a.certainty);
    const double d_first = distortion_term(a.lambda_dist, a.lambda_ref, first, options.ratio_ceiling);
    a.score.first_pass_dmos = params.anchor() * d_first;

    const NormalizedBlur xi_eq = equivalent_blur_clamped(DmosScore(a.score.first_pass_dmos), params);
    a.score.xi_eq = xi_eq.value;

    const double s_focus = focusing_spread_pixels(xi_eq, geometry);
    if (s_focus > 0.0)
        a.lambda_focus = gradient_energy(visual_map(gaussian_blur(ref, s_focus), kernel), window);
    else
        a.lambda_focus = a.lambda_ref;

    a.final_region = partition(a.certainty, threshold_for(xi_eq, params));
    a.score.d_distortion = distortion_term(a.lambda_dist, a.lambda_ref, a.final_region, options.ratio_ceiling);
    a.score.d_focus = focusing_term(a.lambda_focus, a.lambda_ref, a.final_region, options.ratio_ceiling);
    a.score.bele_cold =
        params.anchor() * (1.0 - (1.0 - a.score.d_distortion) * (1.0 - a.score.d_focus));
    return a;
}

inline EdgeScore bele_cold(const LuminanceImage& ref, const LuminanceImage& dist, const CanonicalParams& params,
                           const ViewerGeometry& geometry, const EdgeIndexOptions& options = {})
{
    return analyze_edges(ref, dist, params, geometry, options).score;
}

/// Distortion and focusing terms with the equivalent blur fixed by the caller
/// (e.g. the true normalized blur of a Gaussian-blurred test image).
struct FocusComparison
{
    double d_distortion = 0.0;
    double d_focus = 0.0;
};

inline FocusComparison focus_terms_at(const LuminanceImage& ref, const LuminanceImage& dist, NormalizedBlur xi_eq,
                                      const CanonicalParams& params, const ViewerGeometry& geometry,
                                      const EdgeIndexOptions& options = {})
{
    params.validate();
    geometry.validate();
    if (ref.width() != dist.width() || ref.height() != dist.height())
        throw DimensionError("focus_terms_at: reference and distorted images differ in size");
    const KernelSpec kernel = KernelSpec::from_sigma(kernel_sigma(geometry));
    const WindowSpec window = default_window(kernel.sigma_pixels);
    const VisualMap yr = visual_map(ref, kernel);
    const VisualMap yd = visual_map(dist, kernel);
    const RealField lr = gradient_energy(yr, window);
    const RealField ld = gradient_energy(yd, window);
    const RealField lw =
        gradient_energy(visual_map(gaussian_blur(ref, focusing_spread_pixels(xi_eq, geometry)), kernel), window);
    const RegionPartition region = partition(certainty_map(yr, yd, options.magnitude_floor), threshold_for(xi_eq, params));
    return {distortion_term(ld, lr, region, options.ratio_ceiling), focusing_term(lw, lr, region, options.ratio_ceiling)};
}

} // namespace bele

#endif // BELE_EDGE_INDEX_HPP
