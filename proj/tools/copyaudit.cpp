// Copyright 2026 The copyaudit Authors
// SPDX-License-Identifier: Apache-2.0

// copyaudit: copyright-risk audits of mask-conditioned image generation.
//
// Exit codes: 0 success, 1 pipeline or runtime error, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "copyaudit/copyaudit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

/// Flags that override PipelineConfig fields. Unset options leave the
/// file or default value in place.
struct ConfigFlags {
    std::string config_path;
    std::optional<double> blur_sigma;
    std::optional<int> blur_radius;
    std::optional<double> mask_threshold;
    std::optional<int> fid_patch;
    std::optional<int> fid_stride;
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
    std::optional<std::string> seg_endpoint;
    std::optional<std::string> gen_endpoint;
    std::optional<bool> avoid_mask;
    std::optional<int> target_resolution;

    void attach(CLI::App& cmd) {
        cmd.add_option("--config", config_path, "JSON config file (falls back to $COPYAUDIT_CONFIG)");
        cmd.add_option("--sigma", blur_sigma, "Gaussian blur sigma");
        cmd.add_option("--radius", blur_radius, "Gaussian blur radius (default ceil(3 sigma))");
        cmd.add_option("--threshold", mask_threshold, "Mask threshold in [0, 1]");
        cmd.add_option("--fid-patch", fid_patch, "FID patch size in pixels");
        cmd.add_option("--fid-stride", fid_stride, "FID patch stride in pixels");
        cmd.add_option("--seed", seed, "Generation seed");
        cmd.add_option("--steps", steps, "Diffusion step count");
        cmd.add_option("--seg-endpoint", seg_endpoint, "Segmentation backend URL or 'mock'");
        cmd.add_option("--gen-endpoint", gen_endpoint, "Generation backend URL or 'mock'");
        cmd.add_option("--avoid-mask", avoid_mask, "Condition by avoiding the mask region (true/false)");
        cmd.add_option("--target-resolution", target_resolution, "Longest side after resizing");
    }

    json overrides() const {
        json j = json::object();
        if (blur_sigma) j["blur_sigma"] = *blur_sigma;
        if (blur_radius) j["blur_radius"] = *blur_radius;
        if (mask_threshold) j["mask_threshold"] = *mask_threshold;
        if (fid_patch) j["fid_patch"] = *fid_patch;
        if (fid_stride) j["fid_stride"] = *fid_stride;
        if (seed) j["seed"] = *seed;
        if (steps) j["steps"] = *steps;
        if (seg_endpoint) j["seg_endpoint"] = *seg_endpoint;
        if (gen_endpoint) j["gen_endpoint"] = *gen_endpoint;
        if (avoid_mask) j["avoid_mask"] = *avoid_mask;
        if (target_resolution) j["target_resolution"] = *target_resolution;
        return j;
    }

    /// flag > file > default.
    copyaudit::PipelineConfig resolve() const {
        std::string path = config_path;
        if (path.empty()) {
            if (const char* env = std::getenv("COPYAUDIT_CONFIG"); env != nullptr) path = env;
        }
        json file = nullptr;
        if (!path.empty()) file = copyaudit::read_json_file(path, copyaudit::ErrorKind::ConfigError);
        return copyaudit::resolve_config({file, overrides()});
    }
};

void print_json(const nlohmann::ordered_json& j) { std::cout << j.dump(2) << std::endl; }

int usage_error(const std::string& message) {
    std::cerr << "copyaudit: " << message << std::endl;
    return kExitUsage;
}

int runtime_error(const std::string& message) {
    std::cerr << "copyaudit: " << message << std::endl;
    return kExitFailure;
}

nlohmann::ordered_json bands_json(const copyaudit::Classification& c) {
    nlohmann::ordered_json j;
    j["ssim"] = copyaudit::ssim_band_label(c.ssim_band);
    j["fid"] = copyaudit::fid_band_label(c.fid_band);
    j["overall_risk"] = copyaudit::risk_label(c.overall_risk);
    return j;
}

int cmd_audit(const ConfigFlags& flags, const std::string& input, const std::string& prompt, const fs::path& out) {
    copyaudit::PipelineConfig cfg;
    try {
        cfg = flags.resolve();
    } catch (const copyaudit::Error& e) {
        return usage_error(e.what());
    }
    copyaudit::AuditRecord rec;
    try {
        const auto img = copyaudit::load_png(input);
        rec = copyaudit::run_audit(cfg, img, prompt, {out, fs::path(input).stem().string(), input});
    } catch (const std::exception& e) {
        rec.source_path = input;
        rec.prompt = prompt;
        rec.config_digest = copyaudit::config_digest(cfg);
        rec.error = copyaudit::StageFailure{"load", e.what()};
    }
    print_json(copyaudit::record_to_json(rec));
    if (!rec.ok()) {
        std::cerr << "copyaudit: stage '" << rec.error->stage << "' failed: " << rec.error->message << std::endl;
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_batch(const ConfigFlags& flags, const std::string& manifest_path, const fs::path& out, unsigned workers) {
    copyaudit::PipelineConfig cfg;
    try {
        cfg = flags.resolve();
    } catch (const copyaudit::Error& e) {
        return usage_error(e.what());
    }
    std::vector<copyaudit::ManifestEntry> manifest;
    try {
        manifest = copyaudit::load_manifest(manifest_path);
    } catch (const copyaudit::Error& e) {
        print_json({{"error", e.what()}});
        return runtime_error(e.what());
    }
    copyaudit::BatchOptions opts{out, fs::path(manifest_path).parent_path(), workers};
    const auto records = copyaudit::run_batch(cfg, manifest, opts);
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    bool all_ok = true;
    for (std::size_t i = 0; i < records.size(); ++i) {
        arr.push_back(copyaudit::record_to_json(records[i]));
        std::cerr << "[" << (i + 1) << "/" << records.size() << "] " << records[i].source_path << ": "
                  << (records[i].ok() ? "ok" : "failed at " + records[i].error->stage) << std::endl;
        all_ok = all_ok && records[i].ok();
    }
    print_json(arr);
    return all_ok ? kExitOk : kExitFailure;
}

int cmd_segment(const ConfigFlags& flags, const std::string& input, const std::string& output) {
    copyaudit::PipelineConfig cfg;
    try {
        cfg = flags.resolve();
    } catch (const copyaudit::Error& e) {
        return usage_error(e.what());
    }
    try {
        const auto img = copyaudit::load_png(input);
        const auto backend = copyaudit::make_segmentation_backend(cfg.seg_endpoint);
        const auto soft = backend->segment(img);
        const auto mask = copyaudit::refine_mask(soft, cfg.mask_threshold, img.width(), img.height());
        copyaudit::save_png(output, copyaudit::mask_to_image(mask));
        nlohmann::ordered_json j;
        j["input"] = input;
        j["mask"] = output;
        j["width"] = mask.width();
        j["height"] = mask.height();
        j["foreground_fraction"] = static_cast<double>(mask.count()) / static_cast<double>(mask.pixel_count());
        print_json(j);
    } catch (const std::exception& e) {
        return runtime_error(e.what());
    }
    return kExitOk;
}

int cmd_blur(const std::string& input, const std::string& output, double sigma, std::optional<int> radius) {
    try {
        const auto img = copyaudit::load_png(input);
        const int r = radius.value_or(copyaudit::default_blur_radius(sigma));
        const auto kernel = copyaudit::build_kernel(sigma, r);
        copyaudit::save_png(output, copyaudit::gaussian_blur(img, kernel));
        nlohmann::ordered_json j;
        j["input"] = input;
        j["output"] = output;
        j["sigma"] = sigma;
        j["radius"] = r;
        print_json(j);
    } catch (const copyaudit::Error& e) {
        if (e.kind() == copyaudit::ErrorKind::InvalidParameter) return usage_error(e.what());
        return runtime_error(e.what());
    } catch (const std::exception& e) {
        return runtime_error(e.what());
    }
    return kExitOk;
}

int cmd_compare(const std::string& path_a, const std::string& path_b, int fid_patch, int fid_stride) {
    try {
        const auto img_a = copyaudit::load_png(path_a);
        const auto img_b = copyaudit::load_png(path_b);
        if (img_a.width() != img_b.width() || img_a.height() != img_b.height()) {
            return runtime_error("images differ in size: " + std::to_string(img_a.width()) + "x" +
                                 std::to_string(img_a.height()) + " vs " + std::to_string(img_b.width()) + "x" +
                                 std::to_string(img_b.height()));
        }
        const auto [a, b] = copyaudit::harmonize_channels(img_a, img_b);
        const double s = copyaudit::ssim(a, b);
        const double f = copyaudit::fid_images(a, b, fid_patch, fid_stride);
        const double p = copyaudit::psnr(a, b);
        nlohmann::ordered_json j;
        j["ssim"] = s;
        j["fid"] = f;
        if (std::isfinite(p)) j["psnr"] = p;
        else j["psnr"] = "inf";
        j["bands"] = bands_json(copyaudit::classify(s, f));
        print_json(j);
    } catch (const std::exception& e) {
        return runtime_error(e.what());
    }
    return kExitOk;
}

int cmd_serve_mock(const std::string& host, int port) {
    httplib::Server server;
    // Refuse ports that another process already holds.
    server.set_socket_options([](socket_t sock) {
        const int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    copyaudit::install_mock_routes(server, [](const httplib::Request& req, const httplib::Response& res) {
        std::cerr << req.method << " " << req.path << " " << res.status << " " << req.body.size() << "B in "
                  << res.body.size() << "B out" << std::endl;
    });
    int bound = port;
    if (port == 0) {
        bound = server.bind_to_any_port(host);
        if (bound < 0) return runtime_error("cannot bind " + host);
    } else if (!server.bind_to_port(host, port)) {
        return runtime_error("cannot bind " + host + ":" + std::to_string(port));
    }
    std::cerr << "copyaudit mock backend listening on http://" << host << ":" << bound << std::endl;
    if (!server.listen_after_bind()) return runtime_error("server stopped unexpectedly");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Copyright-risk audit of mask-guided image generation"};
    app.require_subcommand(1);

    ConfigFlags audit_flags;
    std::string audit_input;
    std::string audit_prompt;
    std::string audit_out = "audit_out";
    auto* audit = app.add_subcommand("audit", "Run the full audit pipeline on one image");
    audit->add_option("--input", audit_input, "Source PNG")->required();
    audit->add_option("--prompt", audit_prompt, "Generation prompt")->required();
    audit->add_option("--out", audit_out, "Artifact directory")->capture_default_str();
    audit_flags.attach(*audit);

    ConfigFlags batch_flags;
    std::string batch_manifest;
    std::string batch_out = "audit_out";
    unsigned batch_workers = 0;
    auto* batch = app.add_subcommand("batch", "Audit every item of a JSON manifest");
    batch->add_option("--manifest", batch_manifest, "JSON array of {path, prompt}")->required();
    batch->add_option("--out", batch_out, "Artifact directory")->capture_default_str();
    batch->add_option("--workers", batch_workers, "Worker threads (0 = CPU count)")->capture_default_str();
    batch_flags.attach(*batch);

    ConfigFlags segment_flags;
    std::string segment_input;
    std::string segment_output;
    auto* segment = app.add_subcommand("segment", "Run only the mask extraction stage");
    segment->add_option("--input", segment_input, "Source PNG")->required();
    segment->add_option("--output", segment_output, "Mask PNG to write")->required();
    segment_flags.attach(*segment);

    std::string blur_input;
    std::string blur_output;
    double blur_sigma = 1.0;
    std::optional<int> blur_radius;
    auto* blur = app.add_subcommand("blur", "Apply only the Gaussian blur stage");
    blur->add_option("--input", blur_input, "Input PNG")->required();
    blur->add_option("--output", blur_output, "Output PNG")->required();
    blur->add_option("--sigma", blur_sigma, "Standard deviation in pixels")->capture_default_str();
    blur->add_option("--radius", blur_radius, "Kernel radius (default ceil(3 sigma))");

    std::string compare_a;
    std::string compare_b;
    int compare_patch = 16;
    int compare_stride = 8;
    auto* compare = app.add_subcommand("compare", "Similarity metrics for an image pair");
    compare->add_option("--a", compare_a, "First PNG")->required();
    compare->add_option("--b", compare_b, "Second PNG")->required();
    compare->add_option("--fid-patch", compare_patch, "FID patch size")->capture_default_str();
    compare->add_option("--fid-stride", compare_stride, "FID patch stride")->capture_default_str();

    std::string serve_host = "127.0.0.1";
    int serve_port = 0;
    auto* serve = app.add_subcommand("serve-mock", "Serve the mock backends over HTTP");
    serve->add_option("--port", serve_port, "TCP port (0 picks a free port)")->required();
    serve->add_option("--host", serve_host, "Bind address")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        std::cout << (subs.empty() ? app.help() : subs.front()->help());
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "copyaudit: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        std::cerr << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    if (*audit) return cmd_audit(audit_flags, audit_input, audit_prompt, audit_out);
    if (*batch) return cmd_batch(batch_flags, batch_manifest, batch_out, batch_workers);
    if (*segment) return cmd_segment(segment_flags, segment_input, segment_output);
    if (*blur) return cmd_blur(blur_input, blur_output, blur_sigma, blur_radius);
    if (*compare) return cmd_compare(compare_a, compare_b, compare_patch, compare_stride);
    if (*serve) return cmd_serve_mock(serve_host, serve_port);
    return kExitUsage;
}
