#ifndef BELE_HARNESS_HPP
#define BELE_HARNESS_HPP

// Dataset manifests, batch scoring with a worker pool and a content-hashed
// score cache, per-distortion evaluation reports and the FLOP model.

#include <openssl/evp.h>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <system_error>
#include <thread>
#include <unordered_map>
#include <vector>

#include "bele/calibration.hpp"
#include "bele/core_model.hpp"
#include "bele/edge_index.hpp"
#include "bele/error.hpp"
#include "bele/fusion.hpp"
#include "bele/image_io.hpp"
#include "bele/stats.hpp"
#include "bele/texture_index.hpp"

namespace bele
{

inline constexpr const char* version = "0.1.0";

struct ManifestEntry
{
    std::size_t row_index = 0;
    std::filesystem::path ref_path;
    std::filesystem::path dist_path;
    std::string distortion;
    std::optional<double> level;
    std::optional<double> dmos;
};

namespace detail
{

/// Splits one CSV record; supports double-quoted fields with "" escapes.
inline std::vector<std::string> split_csv(const std::string& line, std::size_t line_no)
{
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i)
    {
        const char c = line[i];
        if (quoted)
        {
            if (c == '"')
            {
                if (i + 1 < line.size() && line[i + 1] == '"')
                {
                    field += '"';
                    ++i;
                }
                else
                    quoted = false;
            }
            else
                field += c;
        }
        else if (c == '"' && field.empty() && !was_quoted)
        {
            quoted = true;
            was_quoted = true;
        }
        else if (c == ',')
        {
            out.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        }
        else
            field += c;
    }
    if (quoted)
        throw ParseError("manifest line " + std::to_string(line_no) + ": unterminated quoted field", line_no);
    out.push_back(std::move(field));
    return out;
}

inline std::string trim(std::string s)
{
    const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && ws(static_cast<unsigned char>(s.back())))
        s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && ws(static_cast<unsigned char>(s[b])))
        ++b;
    return s.substr(b);
}

inline std::optional<double> parse_optional_number(const std::string& text, const char* column, std::size_t line_no)
{
    const std::string s = trim(text);
    if (s.empty())
        return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ParseError("manifest line " + std::to_string(line_no) + ": column '" + column +
                             "' is not a finite number: '" + s + "'",
                         line_no);
    return v;
}

} // namespace detail

/// Reads a CSV manifest with header ref_path,dist_path,distortion,level,dmos
/// (any column order). Relative paths resolve against the manifest's
/// directory. `row_index` is the 0-based data row number.
inline std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path, bool check_files = true)
{
    std::ifstream in(path);
    if (!in)
        throw MissingFileError({path});
    const std::filesystem::path base = path.parent_path();

    std::string line;
    std::size_t line_no = 0;
    std::map<std::string, std::size_t> col;
    const std::array<const char*, 5> names{"ref_path", "dist_path", "distortion", "level", "dmos"};
    while (std::getline(in, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0)
            line.erase(0, 3);
        if (detail::trim(line).empty())
            continue;
        const auto header = detail::split_csv(line, line_no);
        for (std::size_t i = 0; i < header.size(); ++i)
            col[detail::trim(header[i])] = i;
        for (const char* n : names)
            if (!col.contains(n))
                throw ParseError("manifest header is missing column '" + std::string(n) + "'", line_no);
        break;
    }
    if (col.empty())
        throw ParseError("manifest is empty", line_no);

    std::vector<ManifestEntry> entries;
    std::vector<std::filesystem::path> missing;
    while (std::getline(in, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (detail::trim(line).empty())
            continue;
        const auto f = detail::split_csv(line, line_no);
        if (f.size() != col.size())
            throw ParseError("manifest line " + std::to_string(line_no) + ": expected " + std::to_string(col.size()) +
                                 " fields, found " + std::to_string(f.size()),
                             line_no);
        ManifestEntry e;
        e.row_index = entries.size();
        const std::string ref = detail::trim(f[col["ref_path"]]);
        const std::string dist = detail::trim(f[col["dist_path"]]);
        if (ref.empty() || dist.empty())
            throw ParseError("manifest line " + std::to_string(line_no) + ": empty image path", line_no);
        e.ref_path = std::filesystem::path(ref).is_absolute() ? std::filesystem::path(ref) : base / ref;
        e.dist_path = std::filesystem::path(dist).is_absolute() ? std::filesystem::path(dist) : base / dist;
        e.distortion = detail::trim(f[col["distortion"]]);
        e.level = detail::parse_optional_number(f[col["level"]], "level", line_no);
        e.dmos = detail::parse_optional_number(f[col["dmos"]], "dmos", line_no);
        if (check_files)
        {
            for (const auto& p : {e.ref_path, e.dist_path})
                if (!std::filesystem::is_regular_file(p) &&
                    std::find(missing.begin(), missing.end(), p) == missing.end())
                    missing.push_back(p);
        }
        entries.push_back(std::move(e));
    }
    if (!missing.empty())
        throw MissingFileError(std::move(missing));
    return entries;
}

/// One scored pair. `error` is empty on success.
struct ScoreRow
{
    std::size_t row_index = 0;
    double bele_cold = 0.0;
    double cpsnr = 0.0;
    double xi_eq = 0.0;
    double predicted_dmos = 0.0;
    double d_distortion = 0.0;
    double d_focus = 0.0;
    std::size_t n_cold = 0;
    std::size_t n_hot = 0;
    std::string error;

    bool ok() const noexcept { return error.empty(); }
};

/// Full per-pair pipeline: edge analysis, CPSNR on the final hot region,
/// affine fusion.
inline ScoreRow score_pair(const LuminanceImage& ref, const LuminanceImage& dist, const CanonicalParams& params,
                           const ViewerGeometry& geometry, const FusionCoefficients& fusion)
{
    const EdgeAnalysis a = analyze_edges(ref, dist, params, geometry);
    const TextureScore t = cpsnr(a.ref_map, a.dist_map, a.final_region);
    ScoreRow r;
    r.bele_cold = a.score.bele_cold;
    r.cpsnr = t.cpsnr_db;
    r.xi_eq = a.score.xi_eq;
    r.d_distortion = a.score.d_distortion;
    r.d_focus = a.score.d_focus;
    r.n_cold = a.final_region.cold.size();
    r.n_hot = a.final_region.hot.size();
    r.predicted_dmos = predict(fusion, r.bele_cold, r.cpsnr).value;
    return r;
}

namespace detail
{

inline std::string sha256_hex(std::span<const std::span<const std::uint8_t>> parts)
{
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr)
        throw Error("EVP_MD_CTX_new failed");
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1;
    for (const auto& p : parts)
    {
        const std::uint64_t n = p.size();
        ok = ok && EVP_DigestUpdate(ctx, &n, sizeof n) == 1;
        ok = ok && EVP_DigestUpdate(ctx, p.data(), p.size()) == 1;
    }
    ok = ok && EVP_DigestFinal_ex(ctx, md, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok)
        throw Error("SHA-256 computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i)
    {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

inline std::string config_fingerprint(const CanonicalParams& params, const ViewerGeometry& geometry)
{
    const nlohmann::json j{{"q", params.q},
                           {"tau", params.tau},
                           {"geometry_tau", geometry.tau},
                           {"ppd", geometry.pixels_per_degree},
                           {"s_g_arcmin", geometry.s_g_arcmin},
                           {"version", version}};
    return j.dump();
}

} // namespace detail

/// Append-only JSON-lines store of per-pair index values keyed by
/// SHA-256(ref bytes, dist bytes, params, geometry, library version).
/// Predicted DMOS is not stored since it depends on the fusion coefficients.
class ScoreCache
{
public:
    explicit ScoreCache(std::filesystem::path dir) : file_(std::move(dir) / "scores.jsonl")
    {
        std::error_code ec;
        std::filesystem::create_directories(file_.parent_path(), ec);
        std::ifstream in(file_);
        std::string line;
        while (std::getline(in, line))
        {
            const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.contains("key"))
                continue;
            ScoreRow r;
            r.bele_cold = j.value("bele_cold", 0.0);
            r.cpsnr = j.value("cpsnr", 0.0);
            r.xi_eq = j.value("xi_eq", 0.0);
            r.d_distortion = j.value("d_distortion", 0.0);
            r.d_focus = j.value("d_focus", 0.0);
            r.n_cold = j.value("n_cold", std::size_t{0});
            r.n_hot = j.value("n_hot", std::size_t{0});
            entries_[j["key"].get<std::string>()] = r;
        }
    }

    std::optional<ScoreRow> find(const std::string& key) const
    {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto it = entries_.find(key);
        if (it == entries_.end())
            return std::nullopt;
        return it->second;
    }

    void store(const std::string& key, const ScoreRow& r)
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (entries_.contains(key))
            return;
        entries_[key] = r;
        const nlohmann::json j{{"key", key},
                               {"bele_cold", r.bele_cold},
                               {"cpsnr", r.cpsnr},
                               {"xi_eq", r.xi_eq},
                               {"d_distortion", r.d_distortion},
                               {"d_focus", r.d_focus},
                               {"n_cold", r.n_cold},
                               {"n_hot", r.n_hot}};
        std::ofstream out(file_, std::ios::app);
        if (out)
            out << j.dump() << '\n';
    }

    std::size_t size() const
    {
        std::lock_guard<std::mutex> lock(mutex_);
        return entries_.size();
    }

    const std::filesystem::path& file() const noexcept { return file_; }

private:
    std::filesystem::path file_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, ScoreRow> entries_;
};

struct ScoreOptions
{
    unsigned workers = 0; // 0 = hardware concurrency
    ScoreCache* cache = nullptr;
};

/// Scores every entry; per-pair failures are recorded in the row. Output is
/// sorted by row_index and independent of the worker count.
inline std::vector<ScoreRow> score_corpus(std::span<const ManifestEntry> entries, const CanonicalParams& params,
                                          const ViewerGeometry& geometry, const FusionCoefficients& fusion,
                                          const ScoreOptions& options = {})
{
    params.validate();
    geometry.validate();
    fusion.validate();
    const std::string fingerprint = detail::config_fingerprint(params, geometry);

    std::vector<ScoreRow> rows(entries.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < entries.size(); i = next++)
        {
            const ManifestEntry& e = entries[i];
            ScoreRow r;
            try
            {
                const std::vector<std::uint8_t> rb = io::read_bytes(e.ref_path);
                const std::vector<std::uint8_t> db = io::read_bytes(e.dist_path);
                std::string key;
                std::optional<ScoreRow> hit;
                if (options.cache != nullptr)
                {
                    const std::span<const std::uint8_t> fp(reinterpret_cast<const std::uint8_t*>(fingerprint.data()),
                                                           fingerprint.size());
                    const std::array<std::span<const std::uint8_t>, 3> parts{rb, db, fp};
                    key = detail::sha256_hex(parts);
                    hit = options.cache->find(key);
                }
                if (hit)
                {
                    r = *hit;
                    r.predicted_dmos = predict(fusion, r.bele_cold, r.cpsnr).value;
                }
                else
                {
                    r = score_pair(io::decode_luminance(rb), io::decode_luminance(db), params, geometry, fusion);
                    if (options.cache != nullptr)
                        options.cache->store(key, r);
                }
            }
            catch (const std::exception& ex)
            {
                r = ScoreRow{};
                r.error = ex.what();
            }
            r.row_index = e.row_index;
            rows[i] = std::move(r);
        }
    };

    unsigned n = options.workers != 0 ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(1, entries.size())));
    if (n <= 1)
        work();
    else
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n; ++t)
            pool.emplace_back(work);
    }
    std::sort(rows.begin(), rows.end(), [](const ScoreRow& a, const ScoreRow& b) { return a.row_index < b.row_index; });
    return rows;
}

/// Metrics of one distortion group. srocc/plcc are absent when either side
/// is constant; the whole group is skipped when n < 3.
struct GroupReport
{
    std::size_t n = 0;
    bool skipped = false;
    std::optional<double> rmse;
    std::optional<double> srocc;
    std::optional<double> plcc;
};

struct EvaluationReport
{
    std::map<std::string, GroupReport> groups;
    GroupReport overall;
    CanonicalParams params;
    ViewerGeometry geometry;
    FusionCoefficients fusion;
    std::vector<ScoreRow> rows;
    std::size_t failed = 0;
    std::size_t without_target = 0;
};

namespace detail
{

inline GroupReport group_metrics(const std::vector<double>& pred, const std::vector<double>& target)
{
    GroupReport g;
    g.n = pred.size();
    if (g.n < 3)
    {
        g.skipped = true;
        return g;
    }
    g.rmse = stats::rmse(pred, target);
    try
    {
        g.srocc = stats::srocc(pred, target);
    }
    catch (const DegenerateInputError&)
    {
    }
    try
    {
        g.plcc = stats::plcc(pred, target);
    }
    catch (const DegenerateInputError&)
    {
    }
    return g;
}

} // namespace detail

/// Groups successful rows with a target by distortion label. `rows` and
/// `entries` are matched through row_index.
inline EvaluationReport evaluate(std::span<const ScoreRow> rows, std::span<const ManifestEntry> entries)
{
    std::map<std::size_t, const ManifestEntry*> by_index;
    for (const ManifestEntry& e : entries)
        by_index[e.row_index] = &e;

    EvaluationReport rep;
    rep.rows.assign(rows.begin(), rows.end());
    std::sort(rep.rows.begin(), rep.rows.end(),
              [](const ScoreRow& a, const ScoreRow& b) { return a.row_index < b.row_index; });

    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
    std::vector<double> all_pred, all_target;
    for (const ScoreRow& r : rep.rows)
    {
        const auto it = by_index.find(r.row_index);
        if (it == by_index.end())
            throw DomainError("evaluate: score row " + std::to_string(r.row_index) + " has no manifest entry");
        if (!r.ok())
        {
            ++rep.failed;
            continue;
        }
        if (!it->second->dmos)
        {
            ++rep.without_target;
            continue;
        }
        auto& g = groups[it->second->distortion];
        g.first.push_back(r.predicted_dmos);
        g.second.push_back(*it->second->dmos);
        all_pred.push_back(r.predicted_dmos);
        all_target.push_back(*it->second->dmos);
    }
    if (all_pred.size() < 3)
        throw DegenerateInputError("evaluate: need at least 3 scored rows with targets, have " +
                                   std::to_string(all_pred.size()));
    for (const auto& [name, g] : groups)
        rep.groups[name] = detail::group_metrics(g.first, g.second);
    rep.overall = detail::group_metrics(all_pred, all_target);
    return rep;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail
{

inline std::string number(double v)
{
    if (!std::isfinite(v))
        return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

inline nlohmann::json optional_json(const std::optional<double>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

} // namespace detail

inline nlohmann::json row_json(const ScoreRow& r)
{
    nlohmann::json j{{"row_index", r.row_index}};
    if (r.ok())
    {
        j["bele_cold"] = r.bele_cold;
        j["cpsnr"] = r.cpsnr;
        j["xi_eq"] = r.xi_eq;
        j["predicted_dmos"] = r.predicted_dmos;
        j["error"] = nullptr;
    }
    else
    {
        j["bele_cold"] = nullptr;
        j["cpsnr"] = nullptr;
        j["xi_eq"] = nullptr;
        j["predicted_dmos"] = nullptr;
        j["error"] = r.error;
    }
    return j;
}

inline const char* score_csv_header = "row_index,bele_cold,cpsnr,xi_eq,predicted_dmos,error";

inline std::string row_csv(const ScoreRow& r)
{
    std::string s = std::to_string(r.row_index) + ",";
    if (r.ok())
        s += detail::number(r.bele_cold) + "," + detail::number(r.cpsnr) + "," + detail::number(r.xi_eq) + "," +
             detail::number(r.predicted_dmos) + ",";
    else
        s += ",,,," + detail::csv_field(r.error);
    return s;
}

inline std::string rows_to_csv(std::span<const ScoreRow> rows)
{
    std::string s = std::string(score_csv_header) + "\n";
    for (const ScoreRow& r : rows)
        s += row_csv(r) + "\n";
    return s;
}

inline std::string rows_to_jsonl(std::span<const ScoreRow> rows)
{
    std::string s;
    for (const ScoreRow& r : rows)
        s += row_json(r).dump() + "\n";
    return s;
}

inline nlohmann::json group_json(const GroupReport& g)
{
    return nlohmann::json{{"n", g.n},
                          {"skipped", g.skipped},
                          {"rmse", detail::optional_json(g.rmse)},
                          {"srocc", detail::optional_json(g.srocc)},
                          {"plcc", detail::optional_json(g.plcc)}};
}

inline nlohmann::json report_json(const EvaluationReport& rep)
{
    nlohmann::json groups = nlohmann::json::object();
    for (const auto& [name, g] : rep.groups)
        groups[name] = group_json(g);
    nlohmann::json rows = nlohmann::json::array();
    for (const ScoreRow& r : rep.rows)
        rows.push_back(row_json(r));
    nlohmann::json fusion;
    to_json(fusion, rep.fusion);
    return nlohmann::json{
        {"version", version},
        {"calibration", {{"q", rep.params.q}, {"tau", rep.params.tau}}},
        {"geometry",
         {{"tau", rep.geometry.tau},
          {"pixels_per_degree", rep.geometry.pixels_per_degree},
          {"s_g_arcmin", rep.geometry.s_g_arcmin}}},
        {"fusion", fusion},
        {"overall", group_json(rep.overall)},
        {"groups", groups},
        {"failed", rep.failed},
        {"without_target", rep.without_target},
        {"rows", rows},
    };
}

// ---------------------------------------------------------------------------
// Calibration inputs derived from a manifest

inline constexpr const char* blur_label = "gaussian_blur";

/// Rows labelled gaussian_blur with level (s_B in pixels) and dmos, as
/// normalized-blur samples xi = s_B / s_G.
inline std::vector<BlurSample> blur_samples(std::span<const ManifestEntry> entries, const ViewerGeometry& geometry)
{
    geometry.validate();
    std::vector<BlurSample> out;
    for (const ManifestEntry& e : entries)
    {
        if (e.distortion != blur_label)
            continue;
        if (!e.level)
            throw ParseError("row " + std::to_string(e.row_index) + ": gaussian_blur row without 'level'",
                             e.row_index);
        if (!e.dmos)
            throw ParseError("row " + std::to_string(e.row_index) + ": gaussian_blur row without 'dmos'",
                             e.row_index);
        if (*e.level < 0.0)
            throw DomainError("row " + std::to_string(e.row_index) + ": negative blur level");
        out.push_back(BlurSample{*e.level / geometry.s_g_pixels(), *e.dmos});
    }
    return out;
}

inline std::vector<FusionSample> fusion_samples(std::span<const ScoreRow> rows, std::span<const ManifestEntry> entries)
{
    std::map<std::size_t, const ManifestEntry*> by_index;
    for (const ManifestEntry& e : entries)
        by_index[e.row_index] = &e;
    std::vector<FusionSample> out;
    for (const ScoreRow& r : rows)
    {
        const auto it = by_index.find(r.row_index);
        if (r.ok() && it != by_index.end() && it->second->dmos)
            out.push_back(FusionSample{r.bele_cold, r.cpsnr, *it->second->dmos});
    }
    return out;
}

// ---------------------------------------------------------------------------
// FLOP model

/// 3N + N (ln S + d + 1) + P * 224 * 224 * 3 * c_pixel.
/// Zero counts are accepted; S must be positive when N > 0.
inline double flops_estimate(double n_dataset, double s_segments, double d_degree, double p_pairs, double c_pixel)
{
    for (double v : {n_dataset, s_segments, d_degree, p_pairs, c_pixel})
        if (!std::isfinite(v) || v < 0.0)
            throw DomainError("flops_estimate: counts must be finite and >= 0");
    double total = p_pairs * 224.0 * 224.0 * 3.0 * c_pixel;
    if (n_dataset > 0.0)
    {
        if (!(s_segments > 0.0))
            throw DomainError("flops_estimate: segment count must be > 0 when N > 0");
        total += 3.0 * n_dataset + n_dataset * (std::log(s_segments) + d_degree + 1.0);
    }
    return total;
}

/// (15 N + 5) * 250000.
inline double flops_logistic(double n_dataset)
{
    if (!std::isfinite(n_dataset) || n_dataset < 1.0)
        throw DomainError("flops_logistic: N must be >= 1");
    return (15.0 * n_dataset + 5.0) * 250000.0;
}

} // namespace bele

#endif // BELE_HARNESS_HPP
