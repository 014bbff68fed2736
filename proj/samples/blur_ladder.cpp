// Scores a synthetic scene against increasingly blurred copies of itself.

#include <cstdio>

#include "bele/bele.hpp"

int main()
{
    const bele::ViewerGeometry geometry; // tau 1, 60 px/deg, s_G 2.5'
    const bele::CanonicalParams params;  // Q 1, tau 1
    const bele::FusionCoefficients fusion{0.0, 1.0, 0.0};

    const bele::LuminanceImage ref = bele::synthetic::edge_scene(42);
    std::printf("%6s %10s %10s %8s %10s\n", "s_B", "bele_cold", "cpsnr_dB", "xi_eq", "canonical");
    for (double s_b : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0})
    {
        const bele::LuminanceImage dist = bele::gaussian_blur(ref, s_b);
        const bele::ScoreRow row = bele::score_pair(ref, dist, params, geometry, fusion);
        const double canonical =
            bele::canonical_dmos(params, bele::NormalizedBlur(s_b / geometry.s_g_pixels())).value;
        std::printf("%6.2f %10.3f %10.2f %8.3f %10.3f\n", s_b, row.bele_cold, row.cpsnr, row.xi_eq, canonical);
    }
}
