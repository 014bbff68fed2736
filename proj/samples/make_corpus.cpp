// Writes a small synthetic corpus and its manifest:
//   make_corpus <dir> [n_refs]
// gaussian_blur rows get targets from the canonical model (Q 0.9, tau 1.2)
// plus noise; noise rows get targets from their noise amplitude.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "bele/bele.hpp"

int main(int argc, char** argv)
{
    if (argc < 2)
    {
        std::fprintf(stderr, "usage: %s <dir> [n_refs]\n", argv[0]);
        return 4;
    }
    const std::filesystem::path dir = argv[1];
    const int n_refs = argc > 2 ? std::atoi(argv[2]) : 4;
    std::filesystem::create_directories(dir);

    const bele::ViewerGeometry geometry;
    const bele::CanonicalParams truth{0.9, 1.2};
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> jitter(0.0, 1.5);

    std::ofstream manifest(dir / "manifest.csv");
    manifest << "ref_path,dist_path,distortion,level,dmos\n";
    for (int r = 0; r < n_refs; ++r)
    {
        const bele::LuminanceImage ref = bele::synthetic::edge_scene(100 + static_cast<std::uint64_t>(r));
        const std::string ref_name = "ref" + std::to_string(r) + ".png";
        bele::io::save_png(dir / ref_name, ref);

        for (double s_b : {0.5, 1.0, 2.0, 4.0, 8.0})
        {
            const std::string name = "ref" + std::to_string(r) + "_blur" + std::to_string(static_cast<int>(s_b * 10)) + ".png";
            bele::io::save_png(dir / name, bele::gaussian_blur(ref, s_b));
            const double d = bele::canonical_dmos(truth, bele::NormalizedBlur(s_b / geometry.s_g_pixels())).value;
            manifest << ref_name << ',' << name << ",gaussian_blur," << s_b << ',' << d + jitter(rng) << '\n';
        }

        std::normal_distribution<double> unit(0.0, 1.0);
        for (double sigma : {0.02, 0.05, 0.1})
        {
            std::vector<double> v(ref.samples().begin(), ref.samples().end());
            for (double& x : v)
                x += sigma * unit(rng);
            const std::string name = "ref" + std::to_string(r) + "_noise" + std::to_string(static_cast<int>(sigma * 100)) + ".png";
            bele::io::save_png(dir / name, bele::LuminanceImage::clamped(ref.width(), ref.height(), std::move(v)));
            manifest << ref_name << ',' << name << ",white_noise," << sigma << ',' << 400.0 * sigma + jitter(rng) << '\n';
        }
    }
    std::printf("wrote %s\n", (dir / "manifest.csv").string().c_str());
}
