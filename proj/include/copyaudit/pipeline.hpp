// Copyright 2026 The copyaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Audit orchestration: resize -> segment -> refine mask -> generate ->
// blur -> metrics -> classify, persisting every intermediate image.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "json.hpp"

#include "copyaudit/backends.hpp"
#include "copyaudit/blur.hpp"
#include "copyaudit/config.hpp"
#include "copyaudit/error.hpp"
#include "copyaudit/image.hpp"
#include "copyaudit/mask.hpp"
#include "copyaudit/metrics.hpp"
#include "copyaudit/png.hpp"

namespace copyaudit {

struct StageFailure {
    std::string stage;
    std::string message;
};

struct AuditRecord {
    std::string source_path;
    std::string prompt;
    std::string config_digest;
    /// Present iff every stage succeeded.
    std::optional<SimilarityReport> report;
    std::optional<StageFailure> error;
    std::string mask_path;
    std::string generated_path;
    std::string blurred_path;
    std::vector<std::pair<std::string, double>> timing_ms;

    bool ok() const noexcept { return report.has_value(); }
};

/// Where and under which name an audit writes its artifacts.
struct AuditOutput {
    std::filesystem::path out_dir = "audit_out";
    std::string stem = "audit";
    /// Recorded verbatim as the record's source.
    std::string source_label;
};

namespace pipeline_detail {

class StageTimer {
public:
    explicit StageTimer(AuditRecord& rec) : rec_(rec) {}

    template <typename F>
    auto run(const char* stage, F&& fn) {
        current_ = stage;
        const auto start = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            record(stage, start);
        } else {
            auto result = fn();
            record(stage, start);
            return result;
        }
    }

    const std::string& current() const noexcept { return current_; }

private:
    void record(const char* stage, std::chrono::steady_clock::time_point start) {
        const std::chrono::duration<double, std::milli> ms = std::chrono::steady_clock::now() - start;
        rec_.timing_ms.emplace_back(stage, ms.count());
    }

    AuditRecord& rec_;
    std::string current_;
};

inline ImageBuffer requantize(const ImageBuffer& img) {
    std::vector<double> data(img.data().begin(), img.data().end());
    for (double& v : data) v = quantize8(v) / 255.0;
    return ImageBuffer(img.width(), img.height(), img.channels(), std::move(data));
}

}  // namespace pipeline_detail

/// Mask used both for conditioning and for the shape-avoidance check.
inline BinaryMask refine_mask(const SoftMask& soft, double threshold, int width, int height) {
    return upsample_mask(largest_component_mask(threshold_mask(soft, threshold)), width, height);
}

/// Runs one audit. Stage errors are captured in the record rather than
/// thrown; artifacts written before the failure stay on disk.
inline AuditRecord run_audit(const PipelineConfig& cfg, const ImageBuffer& source, const std::string& prompt,
                             const AuditOutput& output, const SegmentationBackend& segmenter,
                             const GenerationBackend& generator) {
    AuditRecord rec;
    rec.source_path = output.source_label;
    rec.prompt = prompt;
    pipeline_detail::StageTimer timer(rec);
    const auto artifact = [&](const char* suffix) {
        return (output.out_dir / (output.stem + "_" + suffix + ".png")).string();
    };

    try {
        timer.run("validate", [&] {
            cfg.validate();
            rec.config_digest = config_digest(cfg);
            if (prompt.empty()) throw Error(ErrorKind::InvalidRequest, "prompt must not be empty");
            std::filesystem::create_directories(output.out_dir);
        });

        const ImageBuffer resized = timer.run("resize", [&] { return resize_longest_side(source, cfg.target_resolution); });

        const BinaryMask mask = timer.run("segment", [&] {
            const SoftMask soft = segmenter.segment(resized);
            if (soft.width() != resized.width() || soft.height() != resized.height()) {
                throw Error(ErrorKind::ProtocolError, "segmentation mask dimensions differ from the image");
            }
            BinaryMask m = refine_mask(soft, cfg.mask_threshold, resized.width(), resized.height());
            rec.mask_path = artifact("mask");
            save_png(rec.mask_path, mask_to_image(m));
            return m;
        });

        const ImageBuffer generated = timer.run("generate", [&] {
            const GenerationRequest req{prompt, mask, cfg.seed, cfg.steps, cfg.avoid_mask};
            ImageBuffer img = generator.generate(req);
            if (img.width() != mask.width() || img.height() != mask.height()) {
                throw Error(ErrorKind::ProtocolError, "generated image dimensions differ from the mask");
            }
            rec.generated_path = artifact("generated");
            save_png(rec.generated_path, img);
            return img;
        });

        // Metrics see exactly the pixels that were written to disk.
        const ImageBuffer blurred = timer.run("blur", [&] {
            const auto kernel = build_kernel(cfg.blur_sigma, cfg.effective_blur_radius());
            ImageBuffer img = pipeline_detail::requantize(gaussian_blur(generated, kernel));
            rec.blurred_path = artifact("blurred");
            save_png(rec.blurred_path, img);
            return img;
        });

        SimilarityReport report = timer.run("metrics", [&] {
            SimilarityReport r;
            const auto [a, b] = harmonize_channels(resized, blurred);
            r.ssim = ssim(a, b);
            r.psnr = psnr(a, b);
            r.fid = fid_images(a, b, cfg.fid_patch, cfg.fid_stride);
            const BinaryMask output_mask = refine_mask(fallback_segment(blurred), cfg.mask_threshold,
                                                       blurred.width(), blurred.height());
            r.mask_iou = mask_iou(mask, output_mask);
            r.config_digest = rec.config_digest;
            return r;
        });

        timer.run("classify", [&] { report.bands = classify(report.ssim, report.fid); });
        rec.report = std::move(report);
    } catch (const std::exception& e) {
        rec.error = StageFailure{timer.current(), e.what()};
    }
    return rec;
}

inline AuditRecord run_audit(const PipelineConfig& cfg, const ImageBuffer& source, const std::string& prompt,
                             const AuditOutput& output) {
    AuditRecord rec;
    std::unique_ptr<SegmentationBackend> seg;
    std::unique_ptr<GenerationBackend> gen;
    try {
        seg = make_segmentation_backend(cfg.seg_endpoint);
        gen = make_generation_backend(cfg.gen_endpoint);
    } catch (const std::exception& e) {
        rec.source_path = output.source_label;
        rec.prompt = prompt;
        rec.error = StageFailure{"validate", e.what()};
        return rec;
    }
    return run_audit(cfg, source, prompt, output, *seg, *gen);
}

// ---------------------------------------------------------------------------
// Batch

struct ManifestEntry {
    std::string path;
    std::string prompt;
};

/// JSON array of {"path", "prompt"}. Relative paths are kept as written;
/// run_batch resolves them against `base_dir`.
inline std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
    const auto j = read_json_file(path, ErrorKind::ManifestError);
    if (!j.is_array()) throw Error(ErrorKind::ManifestError, "manifest must be a JSON array");
    std::vector<ManifestEntry> entries;
    for (const auto& item : j) {
        if (!item.is_object() || !item.contains("path") || !item["path"].is_string() || !item.contains("prompt") ||
            !item["prompt"].is_string()) {
            throw Error(ErrorKind::ManifestError, "manifest entries must be {\"path\": str, \"prompt\": str}");
        }
        entries.push_back({item["path"].get<std::string>(), item["prompt"].get<std::string>()});
    }
    if (entries.empty()) throw Error(ErrorKind::ManifestError, "manifest is empty");
    return entries;
}

struct BatchOptions {
    std::filesystem::path out_dir = "audit_out";
    std::filesystem::path base_dir;
    /// 0 means one worker per hardware thread.
    unsigned workers = 0;
};

/// Audits every manifest item on a bounded worker pool. Records come back
/// in manifest order; a failing item never aborts the others.
inline std::vector<AuditRecord> run_batch(const PipelineConfig& cfg, const std::vector<ManifestEntry>& manifest,
                                          const BatchOptions& opts) {
    if (manifest.empty()) throw Error(ErrorKind::ManifestError, "manifest is empty");
    std::vector<AuditRecord> records(manifest.size());

    const auto run_item = [&](std::size_t i) {
        const auto& entry = manifest[i];
        char prefix[16];
        std::snprintf(prefix, sizeof prefix, "%03zu_", i);
        AuditOutput out{opts.out_dir, prefix + std::filesystem::path(entry.path).stem().string(), entry.path};
        std::filesystem::path file(entry.path);
        if (file.is_relative() && !opts.base_dir.empty()) file = opts.base_dir / file;
        std::optional<ImageBuffer> img;
        const auto start = std::chrono::steady_clock::now();
        try {
            img = load_png(file);
        } catch (const std::exception& e) {
            AuditRecord rec;
            rec.source_path = entry.path;
            rec.prompt = entry.prompt;
            try {
                rec.config_digest = config_digest(cfg);
            } catch (const std::exception&) {
            }
            rec.error = StageFailure{"load", e.what()};
            records[i] = std::move(rec);
            return;
        }
        const std::chrono::duration<double, std::milli> load_ms = std::chrono::steady_clock::now() - start;
        records[i] = run_audit(cfg, *img, entry.prompt, out);
        records[i].timing_ms.insert(records[i].timing_ms.begin(), {"load", load_ms.count()});
    };

    unsigned workers = opts.workers != 0 ? opts.workers : std::max(1U, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(manifest.size()));
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < manifest.size(); i = next++) run_item(i);
            });
        }
    }
    return records;
}

// ---------------------------------------------------------------------------
// Report serialization

/// Stable key order. Non-finite PSNR is written as the string "inf".
inline nlohmann::ordered_json record_to_json(const AuditRecord& rec, bool include_timing = true) {
    nlohmann::ordered_json j;
    j["source"] = rec.source_path;
    j["prompt"] = rec.prompt;
    if (rec.report) {
        const auto& r = *rec.report;
        nlohmann::ordered_json metrics;
        metrics["ssim"] = r.ssim;
        metrics["fid"] = r.fid;
        if (std::isfinite(r.psnr)) metrics["psnr"] = r.psnr;
        else metrics["psnr"] = "inf";
        metrics["mask_iou"] = r.mask_iou;
        j["metrics"] = metrics;
        nlohmann::ordered_json bands;
        bands["ssim"] = ssim_band_label(r.bands.ssim_band);
        bands["fid"] = fid_band_label(r.bands.fid_band);
        bands["overall_risk"] = risk_label(r.bands.overall_risk);
        j["bands"] = bands;
    }
    if (rec.error) {
        j["error"] = nlohmann::ordered_json{{"stage", rec.error->stage}, {"message", rec.error->message}};
    }
    nlohmann::ordered_json outputs;
    outputs["mask"] = rec.mask_path.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(rec.mask_path);
    outputs["generated"] =
        rec.generated_path.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(rec.generated_path);
    outputs["blurred"] =
        rec.blurred_path.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(rec.blurred_path);
    j["outputs"] = outputs;
    j["config_digest"] = rec.config_digest;
    if (include_timing) {
        nlohmann::ordered_json timing = nlohmann::ordered_json::object();
        for (const auto& [stage, ms] : rec.timing_ms) timing[stage] = ms;
        j["timing_ms"] = timing;
    }
    return j;
}

}  // namespace copyaudit
