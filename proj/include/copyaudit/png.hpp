// Copyright 2026 The copyaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Minimal 8-bit PNG codec. Decodes non-interlaced grayscale, gray+alpha,
// RGB and RGBA (alpha dropped); encodes grayscale or RGB with filter type 0.

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "copyaudit/error.hpp"
#include "copyaudit/image.hpp"

namespace copyaudit {

namespace png_detail {

inline constexpr std::array<std::uint8_t, 8> kSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

inline std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t pos) {
    return (std::uint32_t{bytes[pos]} << 24) | (std::uint32_t{bytes[pos + 1]} << 16) |
           (std::uint32_t{bytes[pos + 2]} << 8) | std::uint32_t{bytes[pos + 3]};
}

inline void append_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void append_chunk(std::vector<std::uint8_t>& out, std::string_view type,
                         std::span<const std::uint8_t> payload) {
    append_be32(out, static_cast<std::uint32_t>(payload.size()));
    const std::size_t type_pos = out.size();
    out.insert(out.end(), type.begin(), type.end());
    out.insert(out.end(), payload.begin(), payload.end());
    const uLong crc = crc32(0L, out.data() + type_pos, static_cast<uInt>(4 + payload.size()));
    append_be32(out, static_cast<std::uint32_t>(crc));
}

inline std::uint8_t paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a);
    const int pb = std::abs(p - b);
    const int pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
    if (pb <= pc) return static_cast<std::uint8_t>(b);
    return static_cast<std::uint8_t>(c);
}

inline std::vector<std::uint8_t> inflate_exact(std::span<const std::uint8_t> compressed,
                                               std::size_t expected) {
    std::vector<std::uint8_t> out(expected);
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) {
        throw Error(ErrorKind::MalformedFile, "zlib initialisation failed");
    }
    zs.next_in = const_cast<Bytef*>(compressed.data());
    zs.avail_in = static_cast<uInt>(compressed.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    const std::size_t produced = zs.total_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != expected) {
        throw Error(ErrorKind::MalformedFile, "image data stream is corrupt or truncated");
    }
    return out;
}

}  // namespace png_detail

inline ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
    using namespace png_detail;
    if (bytes.size() < kSignature.size() ||
        !std::equal(kSignature.begin(), kSignature.end(), bytes.begin())) {
        throw Error(ErrorKind::MalformedFile, "missing PNG signature");
    }

    std::size_t pos = kSignature.size();
    bool have_header = false;
    bool have_end = false;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    int color_type = 0;
    std::vector<std::uint8_t> idat;

    while (!have_end) {
        if (bytes.size() - pos < 12) {
            throw Error(ErrorKind::MalformedFile, "truncated chunk header");
        }
        const std::uint32_t length = read_be32(bytes, pos);
        if (length > 0x7fffffffU || bytes.size() - pos - 12 < length) {
            throw Error(ErrorKind::MalformedFile, "truncated chunk");
        }
        const std::string_view type(reinterpret_cast<const char*>(bytes.data() + pos + 4), 4);
        const auto payload = bytes.subspan(pos + 8, length);
        const std::uint32_t stored_crc = read_be32(bytes, pos + 8 + length);
        const uLong crc = crc32(0L, bytes.data() + pos + 4, static_cast<uInt>(length + 4));
        if (static_cast<std::uint32_t>(crc) != stored_crc) {
            throw Error(ErrorKind::MalformedFile, "CRC mismatch in chunk " + std::string(type));
        }
        pos += 12 + length;

        if (!have_header && type != "IHDR") {
            throw Error(ErrorKind::MalformedFile, "first chunk is not IHDR");
        }
        if (type == "IHDR") {
            if (have_header || length != 13) {
                throw Error(ErrorKind::MalformedFile, "bad IHDR");
            }
            have_header = true;
            width = read_be32(payload, 0);
            height = read_be32(payload, 4);
            const int bit_depth = payload[8];
            color_type = payload[9];
            if (width == 0 || height == 0 || width > (1U << 16) || height > (1U << 16)) {
                throw Error(ErrorKind::MalformedFile, "invalid image dimensions");
            }
            if (payload[10] != 0 || payload[11] != 0) {
                throw Error(ErrorKind::MalformedFile, "unknown compression or filter method");
            }
            if (bit_depth != 8) {
                throw Error(ErrorKind::UnsupportedFormat,
                            "only 8-bit PNG is supported, got bit depth " + std::to_string(bit_depth));
            }
            if (color_type != 0 && color_type != 2 && color_type != 4 && color_type != 6) {
                throw Error(ErrorKind::UnsupportedFormat,
                            "unsupported PNG color type " + std::to_string(color_type));
            }
            if (payload[12] != 0) {
                throw Error(ErrorKind::UnsupportedFormat, "interlaced PNG is not supported");
            }
        } else if (type == "IDAT") {
            idat.insert(idat.end(), payload.begin(), payload.end());
        } else if (type == "IEND") {
            have_end = true;
        }
        // Ancillary chunks are skipped.
    }
    if (idat.empty()) {
        throw Error(ErrorKind::MalformedFile, "no image data");
    }

    const std::size_t samples_per_px = color_type == 0 ? 1 : color_type == 4 ? 2 : color_type == 2 ? 3 : 4;
    const std::size_t stride = std::size_t{width} * samples_per_px;
    auto raw = inflate_exact(idat, std::size_t{height} * (stride + 1));

    std::vector<std::uint8_t> prev(stride, 0);
    std::vector<std::uint8_t> cur(stride);
    const int out_channels = (color_type == 0 || color_type == 4) ? 1 : 3;
    std::vector<double> data(std::size_t{width} * height * static_cast<std::size_t>(out_channels));
    std::size_t out_pos = 0;
    const std::size_t bpp = samples_per_px;

    for (std::uint32_t y = 0; y < height; ++y) {
        const std::uint8_t* row = raw.data() + std::size_t{y} * (stride + 1);
        const int filter = row[0];
        for (std::size_t i = 0; i < stride; ++i) {
            const int x = row[1 + i];
            const int a = i >= bpp ? cur[i - bpp] : 0;
            const int b = prev[i];
            const int c = i >= bpp ? prev[i - bpp] : 0;
            switch (filter) {
            case 0: cur[i] = static_cast<std::uint8_t>(x); break;
            case 1: cur[i] = static_cast<std::uint8_t>(x + a); break;
            case 2: cur[i] = static_cast<std::uint8_t>(x + b); break;
            case 3: cur[i] = static_cast<std::uint8_t>(x + (a + b) / 2); break;
            case 4: cur[i] = static_cast<std::uint8_t>(x + paeth(a, b, c)); break;
            default: throw Error(ErrorKind::MalformedFile, "unknown row filter " + std::to_string(filter));
            }
        }
        for (std::uint32_t x = 0; x < width; ++x) {
            for (int ch = 0; ch < out_channels; ++ch) {
                data[out_pos++] = cur[std::size_t{x} * samples_per_px + static_cast<std::size_t>(ch)] / 255.0;
            }
        }
        std::swap(prev, cur);
    }
    return ImageBuffer(static_cast<int>(width), static_cast<int>(height), out_channels, std::move(data));
}

inline std::vector<std::uint8_t> encode_png(const ImageBuffer& img) {
    using namespace png_detail;
    const std::size_t stride = static_cast<std::size_t>(img.width()) * static_cast<std::size_t>(img.channels());
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(img.height()) * (stride + 1));
    const auto src = img.data();
    for (int y = 0; y < img.height(); ++y) {
        raw.push_back(0);
        for (std::size_t i = 0; i < stride; ++i) {
            raw.push_back(static_cast<std::uint8_t>(quantize8(src[static_cast<std::size_t>(y) * stride + i])));
        }
    }

    uLongf compressed_size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(compressed_size);
    if (compress2(compressed.data(), &compressed_size, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
        throw Error(ErrorKind::IoError, "zlib compression failed");
    }
    compressed.resize(compressed_size);

    std::vector<std::uint8_t> out(kSignature.begin(), kSignature.end());
    std::vector<std::uint8_t> ihdr;
    append_be32(ihdr, static_cast<std::uint32_t>(img.width()));
    append_be32(ihdr, static_cast<std::uint32_t>(img.height()));
    ihdr.push_back(8);
    ihdr.push_back(img.channels() == 1 ? 0 : 2);
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    append_chunk(out, "IHDR", ihdr);
    append_chunk(out, "IDAT", compressed);
    append_chunk(out, "IEND", {});
    return out;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoError, "cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::IoError, "cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorKind::IoError, "short write to " + path.string());
    }
}

inline ImageBuffer load_png(const std::filesystem::path& path) { return decode_png(read_file_bytes(path)); }

inline void save_png(const std::filesystem::path& path, const ImageBuffer& img) {
    write_file_bytes(path, encode_png(img));
}

}  // namespace copyaudit
