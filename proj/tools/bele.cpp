// bele: command-line front end for scoring, calibration and evaluation.

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "bele/bele.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

enum ExitCode : int
{
    exit_ok = 0,
    exit_failure = 1,
    exit_not_found = 2,
    exit_unwritable = 3,
    exit_usage = 4,
};

class UsageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig
{
    std::optional<double> tau;
    double ppd = 60.0;
    double s_g = 2.5;
    std::string calibration;
    std::string fusion;
    unsigned workers = 0;
    std::string out;
    std::string format = "json";
    bool scatter = false;
    bool no_cache = false;
};

struct Resolved
{
    bele::CanonicalParams params;
    bele::ViewerGeometry geometry;
    bele::FusionCoefficients fusion;
};

json read_json(const fs::path& p)
{
    std::ifstream in(p);
    if (!in)
        throw bele::MissingFileError({p});
    try
    {
        return json::parse(in);
    }
    catch (const json::exception& e)
    {
        throw bele::ParseError(p.string() + ": " + e.what(), 0);
    }
}

/// Calibration defaults to Q = 1, tau = 1; geometry tau follows --tau, else
/// the calibrated tau; fusion defaults to the identity on the edge index.
Resolved resolve(const RunConfig& c)
{
    Resolved r;
    if (!c.calibration.empty())
    {
        bele::CanonicalFit fit;
        try
        {
            fit = read_json(c.calibration).get<bele::CanonicalFit>();
        }
        catch (const json::exception& e)
        {
            throw bele::ParseError(c.calibration + ": " + e.what(), 0);
        }
        r.params = fit.params;
    }
    if (!c.fusion.empty())
    {
        try
        {
            r.fusion = read_json(c.fusion).get<bele::FusionCoefficients>();
        }
        catch (const json::exception& e)
        {
            throw bele::ParseError(c.fusion + ": " + e.what(), 0);
        }
    }
    r.geometry.tau = c.tau.value_or(r.params.tau);
    r.geometry.pixels_per_degree = c.ppd;
    r.geometry.s_g_arcmin = c.s_g;
    try
    {
        r.geometry.validate();
        r.params.validate();
    }
    catch (const bele::DomainError& e)
    {
        throw UsageError(e.what());
    }
    return r;
}

void emit(const RunConfig& c, const std::string& text)
{
    if (c.out.empty())
    {
        std::cout << text;
        return;
    }
    bele::io::write_text(c.out, text);
}

std::string fmt(double v)
{
    return bele::detail::number(v);
}

/// Three significant figures with a bare exponent: 3.75e9, 150528 -> 1.51e5.
std::string sig3(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    std::string s = buf;
    const auto e = s.find('e');
    if (e == std::string::npos)
        return s;
    std::string mant = s.substr(0, e), exp = s.substr(e + 1);
    const bool neg = exp[0] == '-';
    exp.erase(0, 1);
    exp.erase(0, std::min(exp.find_first_not_of('0'), exp.size() - 1));
    return mant + "e" + (neg ? "-" : "") + exp;
}

void add_geometry(CLI::App* cmd, RunConfig& c)
{
    cmd->add_option_function<double>(
           "--tau", [&c](double v) { c.tau = v; }, "normalized viewing distance (default: calibrated tau, else 1)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--ppd", c.ppd, "display pixels per degree of visual angle")->check(CLI::PositiveNumber);
    cmd->add_option("--sg", c.s_g, "VRF spread in arcminutes")->check(CLI::PositiveNumber);
}

void add_artifacts(CLI::App* cmd, RunConfig& c)
{
    cmd->add_option("--calibration", c.calibration, "calibration JSON {q, tau, ...}");
    cmd->add_option("--fusion", c.fusion, "fusion JSON {d0, d1_e, d1_t, ...}");
}

void add_format(CLI::App* cmd, RunConfig& c)
{
    cmd->add_option("--format", c.format, "output format")->check(CLI::IsMember({"json", "csv", "text"}));
}

int cmd_score(const RunConfig& c, const std::string& ref, const std::string& dist)
{
    const Resolved r = resolve(c);
    const bele::LuminanceImage a = bele::io::load_luminance(ref);
    const bele::LuminanceImage b = bele::io::load_luminance(dist);
    const bele::ScoreRow row = bele::score_pair(a, b, r.params, r.geometry, r.fusion);

    std::string text;
    if (c.format == "csv")
        text = "bele_cold,cpsnr,xi_eq,predicted_dmos\n" + fmt(row.bele_cold) + "," + fmt(row.cpsnr) + "," +
               fmt(row.xi_eq) + "," + fmt(row.predicted_dmos) + "\n";
    else if (c.format == "text")
        text = "bele_cold      " + fmt(row.bele_cold) + "\ncpsnr_db       " + fmt(row.cpsnr) + "\nxi_eq          " +
               fmt(row.xi_eq) + "\npredicted_dmos " + fmt(row.predicted_dmos) + "\n";
    else
        text = json{{"bele_cold", row.bele_cold},
                    {"cpsnr", row.cpsnr},
                    {"xi_eq", row.xi_eq},
                    {"predicted_dmos", row.predicted_dmos},
                    {"d_distortion", row.d_distortion},
                    {"d_focus", row.d_focus}}
                   .dump(2) +
               "\n";
    emit(c, text);
    return exit_ok;
}

int cmd_calibrate(const RunConfig& c, const std::string& manifest)
{
    const auto entries = bele::load_manifest(manifest, false);
    bele::ViewerGeometry g;
    g.tau = c.tau.value_or(1.0);
    g.pixels_per_degree = c.ppd;
    g.s_g_arcmin = c.s_g;
    const auto samples = bele::blur_samples(entries, g);
    if (samples.empty())
        throw bele::DegenerateInputError("calibrate: manifest has no gaussian_blur rows");
    const bele::CanonicalFit fit = bele::fit_canonical(samples);
    std::cerr << "fitted Q = " << fmt(fit.params.q) << ", tau = " << fmt(fit.params.tau)
              << ", residual RMSE = " << fmt(fit.residual_rmse) << " over " << fit.n_samples << " samples\n";
    std::string text;
    if (c.format == "csv")
        text = "q,tau,residual_rmse,n_samples\n" + fmt(fit.params.q) + "," + fmt(fit.params.tau) + "," +
               fmt(fit.residual_rmse) + "," + std::to_string(fit.n_samples) + "\n";
    else if (c.format == "text")
        text = "q " + fmt(fit.params.q) + "\ntau " + fmt(fit.params.tau) + "\nresidual_rmse " +
               fmt(fit.residual_rmse) + "\nn_samples " + std::to_string(fit.n_samples) + "\n";
    else
        text = json(fit).dump(2) + "\n";
    emit(c, text);
    return exit_ok;
}

std::unique_ptr<bele::ScoreCache> open_cache(const RunConfig& c, const fs::path& fallback)
{
    if (c.no_cache)
        return nullptr;
    if (const char* env = std::getenv("BELE_CACHE_DIR"); env != nullptr && *env != '\0')
        return std::make_unique<bele::ScoreCache>(env);
    return std::make_unique<bele::ScoreCache>(fallback);
}

fs::path default_cache_dir(const std::string& manifest)
{
    return fs::path(manifest).parent_path() / ".bele-cache";
}

int cmd_fit_fusion(const RunConfig& c, const std::string& manifest)
{
    const Resolved r = resolve(c);
    const auto entries = bele::load_manifest(manifest);
    auto cache = open_cache(c, default_cache_dir(manifest));
    const auto rows = bele::score_corpus(entries, r.params, r.geometry, r.fusion, {c.workers, cache.get()});
    const auto samples = bele::fusion_samples(rows, entries);
    const bele::FusionCoefficients coeffs = bele::fit_fusion(samples);
    json j = coeffs;
    if (samples.size() >= 10)
    {
        try
        {
            j["cross_sensitivity"] = bele::cross_sensitivity_report(samples);
        }
        catch (const bele::Error& e)
        {
            std::cerr << "cross-sensitivity diagnostic unavailable: " << e.what() << "\n";
        }
    }
    std::cerr << "fusion: D0 = " << fmt(coeffs.d0) << ", D1E = " << fmt(coeffs.d1_e) << ", D1T = " << fmt(coeffs.d1_t)
              << ", residual RMSE = " << fmt(coeffs.residual_rmse) << " over " << coeffs.n_samples << " pairs\n";
    emit(c, j.dump(2) + "\n");
    return exit_ok;
}

void write_scatter(const fs::path& dir, const std::string& stem, const std::vector<double>& pred,
                   const std::vector<double>& dmos, const std::vector<std::string>& labels)
{
    const bele::render::ScatterPlot plot = bele::render::render_scatter(pred, dmos, labels, stem);
    bele::io::save_png(dir / ("scatter_" + stem + ".png"), plot.image);
    bele::io::write_text(dir / ("scatter_" + stem + ".svg"), plot.svg);
}

std::string safe_stem(const std::string& s)
{
    std::string out;
    for (char ch : s)
        out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_') ? ch : '_';
    return out.empty() ? "unlabelled" : out;
}

int cmd_evaluate(const RunConfig& c, const std::string& manifest)
{
    const Resolved r = resolve(c);
    const auto entries = bele::load_manifest(manifest);
    const fs::path out_dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir))
        throw bele::OutputError("cannot create output directory " + out_dir.string());

    auto cache = open_cache(c, out_dir / "cache");
    const auto rows = bele::score_corpus(entries, r.params, r.geometry, r.fusion, {c.workers, cache.get()});
    std::size_t failed = 0;
    for (const auto& row : rows)
    {
        if (!row.ok())
        {
            ++failed;
            std::cerr << "row " << row.row_index << ": " << row.error << "\n";
        }
    }
    bele::io::write_text(out_dir / "scores.csv", bele::rows_to_csv(rows));
    bele::io::write_text(out_dir / "scores.jsonl", bele::rows_to_jsonl(rows));
    if (!rows.empty() && failed == rows.size())
    {
        std::cerr << "all " << failed << " pairs failed\n";
        return exit_failure;
    }

    bele::EvaluationReport rep = bele::evaluate(rows, entries);
    rep.params = r.params;
    rep.geometry = r.geometry;
    rep.fusion = r.fusion;
    bele::io::write_text(out_dir / "report.json", bele::report_json(rep).dump(2) + "\n");

    if (c.scatter)
    {
        std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
        std::vector<double> all_p, all_d;
        std::vector<std::string> all_l;
        for (const auto& row : rows)
        {
            const auto& e = entries[row.row_index];
            if (!row.ok() || !e.dmos)
                continue;
            groups[e.distortion].first.push_back(row.predicted_dmos);
            groups[e.distortion].second.push_back(*e.dmos);
            all_p.push_back(row.predicted_dmos);
            all_d.push_back(*e.dmos);
            all_l.push_back(e.distortion);
        }
        for (const auto& [name, g] : groups)
            write_scatter(out_dir, safe_stem(name), g.first, g.second, std::vector<std::string>(g.first.size(), name));
        write_scatter(out_dir, "overall", all_p, all_d, all_l);
    }

    const auto show = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string("n/a"); };
    std::ostringstream summary;
    summary << "overall n=" << rep.overall.n << " rmse=" << show(rep.overall.rmse)
            << " srocc=" << show(rep.overall.srocc) << " plcc=" << show(rep.overall.plcc) << "\n";
    for (const auto& [name, g] : rep.groups)
    {
        summary << "  " << name << " n=" << g.n;
        if (g.skipped)
            summary << " (skipped)";
        else
            summary << " rmse=" << show(g.rmse) << " srocc=" << show(g.srocc) << " plcc=" << show(g.plcc);
        summary << "\n";
    }
    if (failed > 0)
        summary << failed << " pair(s) failed\n";
    std::cerr << summary.str();
    return exit_ok;
}

int cmd_certainty_map(const RunConfig& c, const std::string& ref, const std::string& dist,
                      std::optional<double> dmos_marker)
{
    if (c.out.empty())
        throw UsageError("certainty-map requires --out <file.png>");
    const Resolved r = resolve(c);
    const bele::LuminanceImage a = bele::io::load_luminance(ref);
    const bele::LuminanceImage b = bele::io::load_luminance(dist);
    const bele::EdgeAnalysis e = bele::analyze_edges(a, b, r.params, r.geometry);
    bele::render::IsoluminancePalette palette;
    palette.threshold = e.final_region.threshold;
    std::optional<bele::DmosScore> marker;
    if (dmos_marker)
        marker = bele::DmosScore(*dmos_marker);
    const auto img = bele::render::render_certainty(e.certainty, palette, e.lambda_ref, marker, r.params);
    bele::io::save_png(c.out, img.image);
    std::cerr << "threshold M = " << fmt(palette.threshold) << ", cold " << e.final_region.cold.size() << ", hot "
              << e.final_region.hot.size() << " pixels -> " << c.out << "\n";
    return exit_ok;
}

int cmd_flops(const RunConfig& c, double n, double s, double d, double p, double px)
{
    double estimate = 0.0;
    double logistic = 0.0;
    try
    {
        estimate = bele::flops_estimate(n, s, d, p, px);
        if (n >= 1.0)
            logistic = bele::flops_logistic(n);
    }
    catch (const bele::DomainError& e)
    {
        throw UsageError(e.what());
    }
    std::string text;
    if (c.format == "json")
    {
        json j{{"estimate", estimate}};
        j["logistic"] = n >= 1.0 ? json(logistic) : json(nullptr);
        text = j.dump(2) + "\n";
    }
    else if (c.format == "csv")
        text = "estimate,logistic\n" + fmt(estimate) + "," + (n >= 1.0 ? fmt(logistic) : std::string()) + "\n";
    else
    {
        text = "estimate " + fmt(estimate) + " (" + sig3(estimate) + ")\n";
        if (n >= 1.0)
            text += "logistic " + fmt(logistic) + " (" + sig3(logistic) + ")\n";
    }
    emit(c, text);
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Blur-equivalent full-reference image quality scoring"};
    app.require_subcommand(1);
    app.set_version_flag("--version", bele::version);
    RunConfig cfg;
    std::string ref, dist, manifest;
    std::optional<double> dmos_marker;
    double fn = 0, fs_ = std::exp(1.0), fd = 0, fp = 0, fc = 0;

    auto* score = app.add_subcommand("score", "score one reference/distorted pair");
    score->add_option("ref", ref, "reference image")->required();
    score->add_option("dist", dist, "distorted image")->required();
    add_geometry(score, cfg);
    add_artifacts(score, cfg);
    add_format(score, cfg);
    score->add_option("--out", cfg.out, "write output to this file instead of stdout");

    auto* calibrate = app.add_subcommand("calibrate", "fit (Q, tau) from gaussian_blur rows of a manifest");
    calibrate->add_option("manifest", manifest, "CSV manifest")->required();
    add_geometry(calibrate, cfg);
    add_format(calibrate, cfg);
    calibrate->add_option("--out", cfg.out, "calibration JSON output path");

    auto* fusion = app.add_subcommand("fit-fusion", "score a manifest and fit fusion coefficients");
    fusion->add_option("manifest", manifest, "CSV manifest")->required();
    add_geometry(fusion, cfg);
    fusion->add_option("--calibration", cfg.calibration, "calibration JSON");
    fusion->add_option("--workers", cfg.workers, "worker threads (default: all cores)");
    fusion->add_option("--out", cfg.out, "fusion JSON output path");
    fusion->add_flag("--no-cache", cfg.no_cache, "disable the score cache");

    auto* evaluate = app.add_subcommand("evaluate", "score a manifest and write an evaluation report");
    evaluate->add_option("manifest", manifest, "CSV manifest")->required();
    add_geometry(evaluate, cfg);
    add_artifacts(evaluate, cfg);
    evaluate->add_option("--workers", cfg.workers, "worker threads (default: all cores)");
    evaluate->add_option("--out", cfg.out, "output directory (default: .)");
    evaluate->add_flag("--scatter", cfg.scatter, "write scatterplots per distortion group and overall");
    evaluate->add_flag("--no-cache", cfg.no_cache, "disable the score cache");

    auto* cmap = app.add_subcommand("certainty-map", "render the isoluminance certainty map of a pair");
    cmap->add_option("ref", ref, "reference image")->required();
    cmap->add_option("dist", dist, "distorted image")->required();
    add_geometry(cmap, cfg);
    add_artifacts(cmap, cfg);
    cmap->add_option("--out", cfg.out, "PNG output path")->required();
    cmap->add_option_function<double>(
        "--dmos", [&](double v) { dmos_marker = v; }, "draw a colorbar marker for this DMOS");

    auto* flops = app.add_subcommand("flops", "FLOP estimates of the calibration stage");
    flops->add_option("--n", fn, "dataset size N");
    flops->add_option("--s", fs_, "spline segments S (default e)");
    flops->add_option("--d", fd, "spline degree d");
    flops->add_option("--p", fp, "scored pairs P");
    flops->add_option("--c", fc, "FLOPs per pixel");
    cfg.format = "json";
    add_format(flops, cfg);
    flops->add_option("--out", cfg.out, "write output to this file instead of stdout");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForVersion& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return exit_usage;
    }

    try
    {
        if (*score)
            return cmd_score(cfg, ref, dist);
        if (*calibrate)
            return cmd_calibrate(cfg, manifest);
        if (*fusion)
            return cmd_fit_fusion(cfg, manifest);
        if (*evaluate)
            return cmd_evaluate(cfg, manifest);
        if (*cmap)
            return cmd_certainty_map(cfg, ref, dist, dmos_marker);
        if (*flops)
            return cmd_flops(cfg, fn, fs_, fd, fp, fc);
    }
    catch (const UsageError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    catch (const bele::MissingFileError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_not_found;
    }
    catch (const bele::OutputError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_unwritable;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_failure;
    }
    return exit_usage;
}
