// Copyright 2026 The copyaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace copyaudit {

enum class ErrorKind {
    MalformedFile,
    UnsupportedFormat,
    InvalidParameter,
    InvalidThreshold,
    DimensionMismatch,
    ImageTooSmall,
    InsufficientSamples,
    NumericalFailure,
    OutOfRange,
    Timeout,
    ProtocolError,
    BackendUnavailable,
    InvalidRequest,
    ManifestError,
    ConfigError,
    IoError,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::MalformedFile: return "MalformedFile";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::InvalidThreshold: return "InvalidThreshold";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ImageTooSmall: return "ImageTooSmall";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::ProtocolError: return "ProtocolError";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::InvalidRequest: return "InvalidRequest";
    case ErrorKind::ManifestError: return "ManifestError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace copyaudit
