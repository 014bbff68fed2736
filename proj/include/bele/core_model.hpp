#ifndef BELE_CORE_MODEL_HPP
#define BELE_CORE_MODEL_HPP

// Closed-form canonical blur model: DMOS as a function of normalized blur,
// its inverse, and the scalar quantities derived from normalized blur.
//
// The retinal noise variance of the positional Fisher information cancels
// in every ratio used here and is fixed to 1.

#include <cmath>
#include <string>

#include "bele/error.hpp"

namespace bele
{

/// Observer geometry. `tau` is the viewing distance normalized to the
/// reference distance; the VRF spread is given in arcminutes and converted
/// to display pixels through the sampling density.
struct ViewerGeometry
{
    double tau = 1.0;
    double pixels_per_degree = 60.0;
    double s_g_arcmin = 2.5;

    void validate() const
    {
        if (!(std::isfinite(tau) && tau > 0.0))
            throw DomainError("ViewerGeometry: tau must be finite and > 0");
        if (!(std::isfinite(pixels_per_degree) && pixels_per_degree > 0.0))
            throw DomainError("ViewerGeometry: pixels_per_degree must be finite and > 0");
        if (!(std::isfinite(s_g_arcmin) && s_g_arcmin > 0.0))
            throw DomainError("ViewerGeometry: s_g_arcmin must be finite and > 0");
        const double sg = s_g_pixels();
        if (!(std::isfinite(sg) && sg > 0.0))
            throw DomainError("ViewerGeometry: derived s_g_pixels must be finite and > 0");
    }

    /// VRF spread at the reference distance, in pixels.
    double s_g_pixels() const noexcept { return pixels_per_degree * (s_g_arcmin / 60.0); }

    /// Converts a spread in arcminutes of visual angle to display pixels.
    double arcmin_to_pixels(double arcmin) const noexcept { return arcmin * pixels_per_degree / 60.0; }
};

/// Parameters of the canonical model: quality anchor gain and viewing distance.
struct CanonicalParams
{
    double q = 1.0;
    double tau = 1.0;

    void validate() const
    {
        if (!(std::isfinite(q) && q > 0.0))
            throw DomainError("CanonicalParams: q must be finite and > 0");
        if (!(std::isfinite(tau) && tau > 0.0))
            throw DomainError("CanonicalParams: tau must be finite and > 0");
    }

    double anchor() const noexcept { return 100.0 * q; }
};

/// Dimensionless blur, blur spread divided by VRF spread.
struct NormalizedBlur
{
    double value = 0.0;

    constexpr NormalizedBlur() = default;
    constexpr explicit NormalizedBlur(double xi) : value(xi) {}
};

/// Subjective quality loss on the DMOS scale (0 = pristine).
struct DmosScore
{
    double value = 0.0;

    constexpr DmosScore() = default;
    constexpr explicit DmosScore(double v) : value(v) {}
};

namespace detail
{

inline void require_blur(NormalizedBlur xi, const char* where)
{
    if (!(std::isfinite(xi.value) && xi.value >= 0.0))
        throw DomainError(std::string(where) + ": normalized blur must be finite and >= 0");
}

// 1 - 1/sqrt(1+u) without cancellation for small u.
inline double one_minus_inv_sqrt1p(double u) noexcept
{
    const double r = std::sqrt(1.0 + u);
    return u / (r * (1.0 + r));
}

} // namespace detail

/// d = 100 Q (1 - 1/sqrt(1 + xi^2/tau^4)).
inline DmosScore canonical_dmos(const CanonicalParams& params, NormalizedBlur xi)
{
    params.validate();
    detail::require_blur(xi, "canonical_dmos");
    const double t2 = params.tau * params.tau;
    const double r = xi.value / t2;
    return DmosScore(params.anchor() * detail::one_minus_inv_sqrt1p(r * r));
}

/// Loss of positional certainty, 1 - sqrt(1/(1+xi^2)).
inline double positional_uncertainty(NormalizedBlur xi)
{
    detail::require_blur(xi, "positional_uncertainty");
    return detail::one_minus_inv_sqrt1p(xi.value * xi.value);
}

/// Ratio of blurred to pristine positional Fisher information for isotropic
/// Gaussian blur: s_g^2 / (s_g^2 + s_b^2).
inline double pfi_blur_ratio(double s_g, double s_b)
{
    if (!(std::isfinite(s_g) && s_g > 0.0))
        throw DomainError("pfi_blur_ratio: s_g must be finite and > 0");
    if (!(std::isfinite(s_b) && s_b >= 0.0))
        throw DomainError("pfi_blur_ratio: s_b must be finite and >= 0");
    const double xi = s_b / s_g;
    return 1.0 / (1.0 + xi * xi);
}

/// Natural-vision threshold on the certainty map, sqrt(1/(1+xi^2)).
inline double certainty_threshold(NormalizedBlur xi)
{
    detail::require_blur(xi, "certainty_threshold");
    return 1.0 / std::sqrt(1.0 + xi.value * xi.value);
}

/// Inverse of the canonical model. Throws SaturationError when dmos >= 100 Q.
inline NormalizedBlur equivalent_blur(DmosScore dmos, const CanonicalParams& params)
{
    params.validate();
    if (!std::isfinite(dmos.value) || dmos.value < 0.0)
        throw DomainError("equivalent_blur: dmos must be finite and >= 0");
    if (dmos.value >= params.anchor())
        throw SaturationError("equivalent_blur: dmos " + std::to_string(dmos.value) +
                              " reaches the anchor 100*Q = " + std::to_string(params.anchor()));
    // 1/(1-a)^2 - 1 = a(2-a)/(1-a)^2
    const double a = dmos.value / params.anchor();
    return NormalizedBlur(params.tau * params.tau * std::sqrt(a * (2.0 - a)) / (1.0 - a));
}

/// Largest admissible fraction of the anchor before inversion.
inline constexpr double saturation_fraction = 0.999;

/// equivalent_blur with the pipeline's clamping policy: scores at or above
/// the anchor are pulled back to 0.999 * 100 Q, negative scores to 0.
inline NormalizedBlur equivalent_blur_clamped(DmosScore dmos, const CanonicalParams& params)
{
    params.validate();
    if (std::isnan(dmos.value))
        throw DomainError("equivalent_blur_clamped: dmos is NaN");
    const double cap = saturation_fraction * params.anchor();
    double v = dmos.value;
    if (v < 0.0)
        v = 0.0;
    if (v > cap)
        v = cap;
    return equivalent_blur(DmosScore(v), params);
}

} // namespace bele

#endif // BELE_CORE_MODEL_HPP
