// Copyright 2026 The copyaudit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <zlib.h>

#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "copyaudit/copyaudit.hpp"
#include "support.hpp"

using namespace copyaudit;

namespace {

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_chunk(std::vector<std::uint8_t>& out, const char* type, const std::vector<std::uint8_t>& payload) {
    put_be32(out, static_cast<std::uint32_t>(payload.size()));
    std::vector<std::uint8_t> typed(type, type + 4);
    typed.insert(typed.end(), payload.begin(), payload.end());
    out.insert(out.end(), typed.begin(), typed.end());
    put_be32(out, static_cast<std::uint32_t>(crc32(0, typed.data(), static_cast<uInt>(typed.size()))));
}

/// Hand-assembled PNG from already-filtered scanlines.
std::vector<std::uint8_t> make_png(int w, int h, int depth, int color, const std::vector<std::uint8_t>& raw,
                                   int interlace = 0) {
    std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    std::vector<std::uint8_t> ihdr;
    put_be32(ihdr, static_cast<std::uint32_t>(w));
    put_be32(ihdr, static_cast<std::uint32_t>(h));
    ihdr.push_back(static_cast<std::uint8_t>(depth));
    ihdr.push_back(static_cast<std::uint8_t>(color));
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(static_cast<std::uint8_t>(interlace));
    put_chunk(out, "IHDR", ihdr);
    uLongf len = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> z(len);
    compress(z.data(), &len, raw.data(), static_cast<uLong>(raw.size()));
    z.resize(len);
    put_chunk(out, "IDAT", z);
    put_chunk(out, "IEND", {});
    return out;
}

int paeth_ref(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    return pb <= pc ? b : c;
}

/// Forward-filters `pixels` (bpp bytes per pixel) using filter type row % 5.
std::vector<std::uint8_t> filter_rows(const std::vector<std::uint8_t>& pixels, int w, int h, int bpp) {
    const int stride = w * bpp;
    std::vector<std::uint8_t> out;
    for (int y = 0; y < h; ++y) {
        const int type = y % 5;
        out.push_back(static_cast<std::uint8_t>(type));
        for (int i = 0; i < stride; ++i) {
            const int x = pixels[y * stride + i];
            const int a = i >= bpp ? pixels[y * stride + i - bpp] : 0;
            const int b = y > 0 ? pixels[(y - 1) * stride + i] : 0;
            const int c = (y > 0 && i >= bpp) ? pixels[(y - 1) * stride + i - bpp] : 0;
            int pred = 0;
            switch (type) {
                case 1: pred = a; break;
                case 2: pred = b; break;
                case 3: pred = (a + b) / 2; break;
                case 4: pred = paeth_ref(a, b, c); break;
                default: break;
            }
            out.push_back(static_cast<std::uint8_t>((x - pred) & 0xff));
        }
    }
    return out;
}

}  // namespace

TEST(ImageBuffer, RejectsBrokenInvariants) {
    EXPECT_THROW(ImageBuffer(0, 4, 1, {}), Error);
    EXPECT_THROW(ImageBuffer(2, 2, 2, std::vector<double>(8, 0.0)), Error);
    EXPECT_THROW(ImageBuffer(2, 2, 1, std::vector<double>(3, 0.0)), Error);
    EXPECT_THROW(ImageBuffer(1, 1, 1, {1.5}), Error);
    EXPECT_THROW(ImageBuffer(1, 1, 1, {-0.01}), Error);
    EXPECT_THROW(ImageBuffer(1, 1, 1, {std::nan("")}), Error);
    try {
        ImageBuffer(1, 1, 4, std::vector<double>(4, 0.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidParameter);
    }
}

TEST(ImageBuffer, InterleavedIndexing) {
    const ImageBuffer img(2, 1, 3, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
    EXPECT_DOUBLE_EQ(img.at(1, 0, 2), 0.6);
    EXPECT_DOUBLE_EQ(img.at(0, 0, 1), 0.2);
    EXPECT_EQ(img.pixel_count(), 2u);
    EXPECT_EQ(img.sample_count(), 6u);
}

TEST(Grayscale, Bt601Weights) {
    EXPECT_DOUBLE_EQ(to_grayscale(ImageBuffer(1, 1, 3, {1, 1, 1})).at(0, 0), 1.0);
    EXPECT_NEAR(to_grayscale(ImageBuffer(1, 1, 3, {1, 0, 0})).at(0, 0), 0.299, 1e-15);
    EXPECT_NEAR(to_grayscale(ImageBuffer(1, 1, 3, {0, 1, 0})).at(0, 0), 0.587, 1e-15);
    EXPECT_NEAR(to_grayscale(ImageBuffer(1, 1, 3, {0, 0, 1})).at(0, 0), 0.114, 1e-15);
    const ImageBuffer gray(1, 1, 1, {0.3});
    EXPECT_EQ(to_grayscale(gray), gray);
}

TEST(Grayscale, HarmonizeOnlyWhenChannelsDiffer) {
    const ImageBuffer rgb = ImageBuffer::filled(4, 4, 3, 0.5);
    const ImageBuffer gray = ImageBuffer::filled(4, 4, 1, 0.5);
    auto [a, b] = harmonize_channels(rgb, gray);
    EXPECT_EQ(a.channels(), 1);
    EXPECT_EQ(b.channels(), 1);
    auto [c, d] = harmonize_channels(rgb, rgb);
    EXPECT_EQ(c.channels(), 3);
    EXPECT_EQ(d.channels(), 3);
}

TEST(Resize, IdentityAndLongestSide) {
    std::mt19937_64 rng(1);
    const ImageBuffer img = testsupport::random_image(rng, 13, 7, 3);
    EXPECT_EQ(resize_bilinear(img, 13, 7), img);
    const ImageBuffer r = resize_longest_side(img, 26);
    EXPECT_EQ(r.width(), 26);
    EXPECT_EQ(r.height(), 14);
    const ImageBuffer tall = resize_longest_side(ImageBuffer::filled(10, 30, 1, 0.2), 60);
    EXPECT_EQ(tall.width(), 20);
    EXPECT_EQ(tall.height(), 60);
}

TEST(Resize, MatchesBilinearOracle) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        std::uniform_int_distribution<int> dim(1, 12);
        const ImageBuffer img = testsupport::random_image(rng, dim(rng), dim(rng), 1);
        const int nw = dim(rng) + 2, nh = dim(rng) + 2;
        const ImageBuffer out = resize_bilinear(img, nw, nh);
        const auto g = testsupport::to_grid(img);
        for (int y = 0; y < nh; ++y)
            for (int x = 0; x < nw; ++x) ASSERT_NEAR(out.at(x, y), oracle::bilinear_at(g, x, y, nw, nh), 1e-12);
    }
}

TEST(Png, TwoByTwoGrayExample) {
    const std::vector<std::uint8_t> raw = {0, 0, 255, 0, 128, 64};
    const ImageBuffer img = decode_png(make_png(2, 2, 8, 0, raw));
    ASSERT_EQ(img.channels(), 1);
    EXPECT_DOUBLE_EQ(img.at(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(img.at(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(img.at(0, 1), 128.0 / 255.0);
    EXPECT_DOUBLE_EQ(img.at(1, 1), 64.0 / 255.0);
}

TEST(Png, EncodeOnePixel) {
    const auto bytes = encode_png(ImageBuffer(1, 1, 3, {1.0, 0.0, 0.5}));
    ASSERT_GE(bytes.size(), 8u);
    EXPECT_EQ(bytes[1], 'P');
    const ImageBuffer back = decode_png(bytes);
    EXPECT_EQ(back.channels(), 3);
    EXPECT_DOUBLE_EQ(back.at(0, 0, 0), 1.0);
    EXPECT_DOUBLE_EQ(back.at(0, 0, 1), 0.0);
    EXPECT_DOUBLE_EQ(back.at(0, 0, 2), 128.0 / 255.0);
}

TEST(Png, AllFilterTypesAndColorTypes) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> byte(0, 255);
    for (const auto& [color, bpp] : {std::pair{0, 1}, std::pair{2, 3}, std::pair{4, 2}, std::pair{6, 4}}) {
        const int w = 9, h = 11;
        std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w * h * bpp));
        for (auto& p : pixels) p = static_cast<std::uint8_t>(byte(rng));
        const ImageBuffer img = decode_png(make_png(w, h, 8, color, filter_rows(pixels, w, h, bpp)));
        const int out_ch = (color == 0 || color == 4) ? 1 : 3;
        ASSERT_EQ(img.channels(), out_ch);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < out_ch; ++c)
                    ASSERT_EQ(quantize8(img.at(x, y, c)), pixels[(y * w + x) * bpp + c]) << "color " << color;
    }
}

TEST(Png, RoundTripProperty) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> dim(1, 24);
    for (int trial = 0; trial < 50; ++trial) {
        const int ch = trial % 2 ? 3 : 1;
        const ImageBuffer img = testsupport::random_image(rng, dim(rng), dim(rng), ch);
        std::vector<double> q(img.data().begin(), img.data().end());
        for (double& v : q) v = quantize8(v) / 255.0;
        const ImageBuffer expected(img.width(), img.height(), ch, q);
        ASSERT_EQ(decode_png(encode_png(img)), expected);
        ASSERT_EQ(encode_png(expected), encode_png(decode_png(encode_png(expected))));
    }
}

TEST(Png, MalformedInputs) {
    const auto good = encode_png(ImageBuffer::filled(4, 4, 1, 0.5));
    const auto kind_of = [](const std::vector<std::uint8_t>& bytes) {
        try {
            decode_png(bytes);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::IoError;
    };
    EXPECT_EQ(kind_of({}), ErrorKind::MalformedFile);
    EXPECT_EQ(kind_of({1, 2, 3, 4, 5, 6, 7, 8, 9}), ErrorKind::MalformedFile);
    EXPECT_EQ(kind_of(std::vector<std::uint8_t>(good.begin(), good.begin() + 30)), ErrorKind::MalformedFile);
    auto corrupt = good;
    corrupt[20] ^= 0x01;  // inside IHDR, breaks its CRC
    EXPECT_EQ(kind_of(corrupt), ErrorKind::MalformedFile);
    // Too little image data for the declared size.
    EXPECT_EQ(kind_of(make_png(4, 4, 8, 0, {0, 1, 2, 3, 4})), ErrorKind::MalformedFile);
    // Unknown filter type.
    EXPECT_EQ(kind_of(make_png(1, 1, 8, 0, {7, 0})), ErrorKind::MalformedFile);
}

TEST(Png, UnsupportedVariants) {
    const auto kind_of = [](const std::vector<std::uint8_t>& bytes) {
        try {
            decode_png(bytes);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::IoError;
    };
    EXPECT_EQ(kind_of(make_png(1, 1, 16, 0, {0, 0, 0})), ErrorKind::UnsupportedFormat);
    EXPECT_EQ(kind_of(make_png(1, 1, 8, 3, {0, 0})), ErrorKind::UnsupportedFormat);
    EXPECT_EQ(kind_of(make_png(1, 1, 8, 0, {0, 0}, 1)), ErrorKind::UnsupportedFormat);
}

TEST(Png, FixturesDecode) {
    for (const auto& name : testsupport::fixture_names()) {
        const ImageBuffer img = load_png(testsupport::fixtures_dir() / (name + ".png"));
        EXPECT_EQ(img.width(), 256) << name;
        EXPECT_EQ(img.height(), 256) << name;
        EXPECT_EQ(img.channels(), 3) << name;
    }
}

TEST(Png, MissingFileIsIoError) {
    try {
        load_png("/nonexistent/copyaudit/none.png");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IoError);
    }
}
