#ifndef BELE_IMAGE_IO_HPP
#define BELE_IMAGE_IO_HPP

// Image decoding to luminance (PNG, BMP, PGM/PPM) and PNG encoding.
// Colour inputs are reduced to Rec. 709 luma of the stored (gamma-encoded)
// values; samples are normalized by the largest code value.

#include <png.h>

#include <array>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "bele/error.hpp"
#include "bele/image.hpp"
#include "bele/vrf.hpp"

namespace bele::io
{

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw MissingFileError({path});
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

namespace detail
{

struct PngReader
{
    std::span<const std::uint8_t> bytes;
    std::size_t offset = 0;
};

inline void png_read_callback(png_structp png, png_bytep out, png_size_t n)
{
    auto* r = static_cast<PngReader*>(png_get_io_ptr(png));
    if (r->offset + n > r->bytes.size())
        png_error(png, "truncated PNG stream");
    std::memcpy(out, r->bytes.data() + r->offset, n);
    r->offset += n;
}

inline void png_error_callback(png_structp png, png_const_charp msg)
{
    auto* buf = static_cast<std::string*>(png_get_error_ptr(png));
    if (buf != nullptr)
        *buf = msg;
    png_longjmp(png, 1);
}

inline void png_warning_callback(png_structp, png_const_charp) {}

inline LuminanceImage decode_png(std::span<const std::uint8_t> bytes)
{
    std::string message = "invalid PNG";
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_callback,
                                             png_warning_callback);
    if (png == nullptr)
        throw DecodeError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (info == nullptr)
    {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DecodeError("png_create_info_struct failed");
    }

    PngReader reader{bytes, 0};
    // Everything that owns memory lives outside the setjmp scope.
    std::vector<std::uint8_t> raw;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0, height = 0;
    int depth = 0, channels = 0;

    if (setjmp(png_jmpbuf(png)))
    {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError("PNG decode failed: " + message);
    }
    png_set_read_fn(png, &reader, png_read_callback);
    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    if (png_get_bit_depth(png, info) == 16)
        png_set_swap(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    depth = png_get_bit_depth(png, info);
    channels = png_get_channels(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    raw.resize(stride * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y)
        rows[y] = raw.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    if (channels != 1 && channels != 3)
        throw DecodeError("PNG: unsupported channel count " + std::to_string(channels));
    const double max_code = depth == 16 ? 65535.0 : 255.0;
    std::vector<double> out(static_cast<std::size_t>(width) * height);
    for (png_uint_32 y = 0; y < height; ++y)
    {
        for (png_uint_32 x = 0; x < width; ++x)
        {
            auto sample = [&](int c) -> double {
                const std::size_t i = (static_cast<std::size_t>(x) * channels + c) * (depth == 16 ? 2 : 1);
                const std::uint8_t* row = rows[y];
                return depth == 16 ? static_cast<double>(row[i] | (row[i + 1] << 8)) : static_cast<double>(row[i]);
            };
            const double v = channels == 1 ? sample(0) : rec709_luma(sample(0), sample(1), sample(2));
            out[static_cast<std::size_t>(y) * width + x] = v / max_code;
        }
    }
    return LuminanceImage::clamped(static_cast<int>(width), static_cast<int>(height), std::move(out));
}

inline std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at)
{
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

inline std::uint16_t le16(std::span<const std::uint8_t> b, std::size_t at)
{
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

inline LuminanceImage decode_bmp(std::span<const std::uint8_t> b)
{
    if (b.size() < 54)
        throw DecodeError("BMP: truncated header");
    const std::uint32_t data_offset = le32(b, 10);
    const std::uint32_t header_size = le32(b, 14);
    const auto w = static_cast<std::int32_t>(le32(b, 18));
    const auto h_signed = static_cast<std::int32_t>(le32(b, 22));
    const std::uint16_t bpp = le16(b, 28);
    const std::uint32_t compression = le32(b, 30);
    if (w <= 0 || h_signed == 0)
        throw DecodeError("BMP: invalid dimensions");
    if (compression != 0 && !(compression == 3 && bpp == 32))
        throw DecodeError("BMP: compressed bitmaps are not supported");
    if (bpp != 8 && bpp != 24 && bpp != 32)
        throw DecodeError("BMP: unsupported bit depth " + std::to_string(bpp));
    const bool top_down = h_signed < 0;
    const int h = top_down ? -h_signed : h_signed;

    std::vector<std::array<double, 3>> palette;
    if (bpp == 8)
    {
        std::uint32_t n = le32(b, 46);
        if (n == 0)
            n = 256;
        const std::size_t at = 14 + header_size;
        if (at + 4 * static_cast<std::size_t>(n) > b.size())
            throw DecodeError("BMP: truncated palette");
        for (std::uint32_t i = 0; i < n; ++i)
            palette.push_back({static_cast<double>(b[at + 4 * i + 2]), static_cast<double>(b[at + 4 * i + 1]),
                               static_cast<double>(b[at + 4 * i])});
    }

    const std::size_t stride = ((static_cast<std::size_t>(w) * bpp + 31) / 32) * 4;
    if (data_offset + stride * static_cast<std::size_t>(h) > b.size())
        throw DecodeError("BMP: truncated pixel data");
    std::vector<double> out(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    for (int row = 0; row < h; ++row)
    {
        const int y = top_down ? row : h - 1 - row;
        const std::size_t base = data_offset + stride * static_cast<std::size_t>(row);
        for (int x = 0; x < w; ++x)
        {
            double v;
            if (bpp == 8)
            {
                const std::uint8_t idx = b[base + static_cast<std::size_t>(x)];
                if (idx >= palette.size())
                    throw DecodeError("BMP: palette index out of range");
                v = rec709_luma(palette[idx][0], palette[idx][1], palette[idx][2]);
            }
            else
            {
                const std::size_t p = base + static_cast<std::size_t>(x) * (bpp / 8);
                v = rec709_luma(b[p + 2], b[p + 1], b[p]);
            }
            out[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = v / 255.0;
        }
    }
    return LuminanceImage::clamped(w, h, std::move(out));
}

/// Netpbm P2/P3 (ASCII) and P5/P6 (binary, 8 or 16 bit big-endian).
inline LuminanceImage decode_pnm(std::span<const std::uint8_t> b)
{
    std::size_t pos = 2;
    auto skip_space = [&] {
        while (pos < b.size())
        {
            if (b[pos] == '#')
            {
                while (pos < b.size() && b[pos] != '\n')
                    ++pos;
            }
            else if (std::isspace(b[pos]))
                ++pos;
            else
                break;
        }
    };
    auto read_uint = [&]() -> unsigned long {
        skip_space();
        if (pos >= b.size() || !std::isdigit(b[pos]))
            throw DecodeError("PNM: malformed header");
        unsigned long v = 0;
        while (pos < b.size() && std::isdigit(b[pos]))
        {
            v = v * 10 + static_cast<unsigned long>(b[pos] - '0');
            if (v > 1u << 30)
                throw DecodeError("PNM: value out of range");
            ++pos;
        }
        return v;
    };

    const char kind = static_cast<char>(b[1]);
    const bool color = kind == '3' || kind == '6';
    const bool ascii = kind == '2' || kind == '3';
    const auto w = read_uint();
    const auto h = read_uint();
    const auto maxval = read_uint();
    if (w == 0 || h == 0 || maxval == 0 || maxval > 65535)
        throw DecodeError("PNM: invalid header values");
    const int channels = color ? 3 : 1;
    const std::size_t count = static_cast<std::size_t>(w) * h * channels;
    std::vector<double> raw(count);
    if (ascii)
    {
        for (std::size_t i = 0; i < count; ++i)
            raw[i] = static_cast<double>(read_uint());
    }
    else
    {
        ++pos; // single whitespace byte after maxval
        const std::size_t bytes_per = maxval > 255 ? 2 : 1;
        if (pos + count * bytes_per > b.size())
            throw DecodeError("PNM: truncated pixel data");
        for (std::size_t i = 0; i < count; ++i)
            raw[i] = bytes_per == 2 ? static_cast<double>((b[pos + 2 * i] << 8) | b[pos + 2 * i + 1])
                                    : static_cast<double>(b[pos + i]);
    }
    std::vector<double> out(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (color ? rec709_luma(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]) : raw[i]) / maxval;
    return LuminanceImage::clamped(static_cast<int>(w), static_cast<int>(h), std::move(out));
}

} // namespace detail

/// Decodes by content signature.
inline LuminanceImage decode_luminance(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0)
        return detail::decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M')
        return detail::decode_bmp(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '2' && bytes[1] <= '6' && bytes[1] != '4')
        return detail::decode_pnm(bytes);
    throw DecodeError("unrecognized image format");
}

inline LuminanceImage load_luminance(const std::filesystem::path& path)
{
    const std::vector<std::uint8_t> bytes = read_bytes(path);
    try
    {
        return decode_luminance(bytes);
    }
    catch (const DecodeError& e)
    {
        throw DecodeError(path.string() + ": " + e.what());
    }
}

namespace detail
{

inline void png_write_callback(png_structp png, png_bytep data, png_size_t n)
{
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + n);
}

inline void png_flush_callback(png_structp) {}

/// rows: height rows of width * channels bytes.
inline std::vector<std::uint8_t> encode_png(int width, int height, int channels, const std::vector<std::uint8_t>& pixels)
{
    std::string message = "PNG encode failed";
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_callback,
                                              png_warning_callback);
    if (png == nullptr)
        throw OutputError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (info == nullptr)
    {
        png_destroy_write_struct(&png, nullptr);
        throw OutputError("png_create_info_struct failed");
    }
    std::vector<std::uint8_t> out;
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y)
        rows[static_cast<std::size_t>(y)] =
            const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(y) * width * channels);

    if (setjmp(png_jmpbuf(png)))
    {
        png_destroy_write_struct(&png, &info);
        throw OutputError(message);
    }
    png_set_write_fn(png, &out, png_write_callback, png_flush_callback);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

} // namespace detail

inline std::vector<std::uint8_t> encode_png(const RgbImage& image)
{
    std::vector<std::uint8_t> px;
    px.reserve(static_cast<std::size_t>(image.width()) * image.height() * 3);
    for (int y = 0; y < image.height(); ++y)
    {
        for (int x = 0; x < image.width(); ++x)
        {
            const RgbImage::Pixel p = image(x, y);
            px.insert(px.end(), {p.r, p.g, p.b});
        }
    }
    return detail::encode_png(image.width(), image.height(), 3, px);
}

/// 8-bit grayscale, code = round(255 * sample).
inline std::vector<std::uint8_t> encode_png(const LuminanceImage& image)
{
    std::vector<std::uint8_t> px(image.size());
    for (std::size_t i = 0; i < px.size(); ++i)
        px[i] = static_cast<std::uint8_t>(std::lround(255.0 * image[i]));
    return detail::encode_png(image.width(), image.height(), 1, px);
}

inline void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw OutputError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw OutputError("failed writing " + path.string());
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline void save_png(const std::filesystem::path& path, const RgbImage& image)
{
    write_bytes(path, encode_png(image));
}

inline void save_png(const std::filesystem::path& path, const LuminanceImage& image)
{
    write_bytes(path, encode_png(image));
}

} // namespace bele::io

#endif // BELE_IMAGE_IO_HPP
