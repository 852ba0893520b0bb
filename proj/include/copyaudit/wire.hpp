// Copyright 2026 The copyaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Payload encoding shared by backend clients and the mock server: images
// and masks travel as base64-encoded 8-bit PNG inside JSON bodies.

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "copyaudit/error.hpp"
#include "copyaudit/mask.hpp"
#include "copyaudit/png.hpp"

namespace copyaudit::wire {

inline std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

/// Strict base64 (no whitespace, padded to a multiple of 4).
inline std::vector<std::uint8_t> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) {
        throw Error(ErrorKind::ProtocolError, "base64 payload length is not a multiple of 4");
    }
    std::size_t body = text.size();
    while (body > 0 && text[body - 1] == '=') --body;
    const bool alphabet = std::all_of(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(body), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '/';
    });
    if (!alphabet || text.size() - body > 2) {
        throw Error(ErrorKind::ProtocolError, "invalid base64 payload");
    }
    std::vector<std::uint8_t> out(3 * (text.size() / 4));
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0) {
        throw Error(ErrorKind::ProtocolError, "invalid base64 payload");
    }
    std::size_t padding = 0;
    if (!text.empty() && text.back() == '=') ++padding;
    if (text.size() >= 2 && text[text.size() - 2] == '=') ++padding;
    out.resize(static_cast<std::size_t>(n) - padding);
    return out;
}

inline std::string image_to_b64(const ImageBuffer& img) { return base64_encode(encode_png(img)); }

/// Decoding failures surface as ProtocolError since they describe a bad peer.
inline ImageBuffer image_from_b64(std::string_view text) {
    const auto bytes = base64_decode(text);
    try {
        return decode_png(bytes);
    } catch (const Error& e) {
        throw Error(ErrorKind::ProtocolError, std::string("payload is not a usable PNG: ") + e.what());
    }
}

inline std::string mask_to_b64(const BinaryMask& mask) { return image_to_b64(mask_to_image(mask)); }

inline BinaryMask mask_from_b64(std::string_view text) { return mask_from_image(image_from_b64(text)); }

inline std::string soft_mask_to_b64(const SoftMask& soft) { return image_to_b64(soft_mask_to_image(soft)); }

inline SoftMask soft_mask_from_b64(std::string_view text) {
    return soft_mask_from_image(image_from_b64(text));
}

}  // namespace copyaudit::wire
