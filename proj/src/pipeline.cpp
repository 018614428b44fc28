#include "hncg/pipeline.hpp"

#include <json.hpp>

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <sstream>

#include "hncg/error.hpp"
#include "hncg/image_io.hpp"
#include "hncg/raster.hpp"
#include "hncg/synthesis.hpp"

namespace hncg {

namespace {

class Fnv1a {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001B3ULL;
        }
    }
    void text(const std::string& s) { bytes(s.data(), s.size() + 1); }
    void real(double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        bytes(&bits, sizeof bits);
    }
    void integer(std::int64_t v) { bytes(&v, sizeof v); }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

void hash_mesh(Fnv1a& h, const TriMesh& mesh) {
    for (const auto& v : mesh.vertices) h.bytes(v.data(), sizeof(double) * 3);
    for (const auto& f : mesh.faces) h.bytes(f.data(), sizeof(int) * 3);
    for (const auto& uv : mesh.uvs) h.bytes(uv.data(), sizeof(double) * 2);
}

void hash_pose(Fnv1a& h, const PoseVector& pose) {
    for (double v : pose.to_array()) h.real(v);
}

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (Error& e) {
        if (e.stage().empty()) e.set_stage(stage);
        throw;
    }
}

Image synthesize(const SemanticImage& m, const SceneDescription& scene, const PipelineConfig& config,
                 std::uint64_t seed) {
    if (config.synth_plug) return external_synthesize(m, scene.palette, PlugConfig::from_command(*config.synth_plug));
    return stub_synthesize(m, scene.palette, seed, config.noise_amp);
}

SemanticImage segment(const Image& rgb, const SceneDescription& scene, const PipelineConfig& config) {
    if (config.segment_plug) return external_segment(rgb, PlugConfig::from_command(*config.segment_plug));
    return declassify_nearest(rgb, scene.palette);
}

FeatureMatrix features(const std::vector<Image>& images, const PipelineConfig& config) {
    if (config.features_plug) return external_features(images, PlugConfig::from_command(*config.features_plug));
    return stub_feature_matrix(images);
}

Image blend_with(BlendMode mode, const Image& background, const PartialRender& partial, const Image& foreground,
                 const PipelineConfig& config) {
    switch (mode) {
        case BlendMode::alpha: return alpha_blend(background, foreground, coverage_to_alpha(partial));
        case BlendMode::pyramid: return pyramid_blend(background, foreground, coverage_mask(partial), config.levels);
        case BlendMode::gp_classical:
            return poisson_blend(background, foreground, coverage_mask(partial), config.poisson);
        case BlendMode::gan_plug: {
            if (!config.blend_plug) throw ValidationError("blend mode gan-plug needs a blender plug command");
            const BlendMask coverage = coverage_mask(partial);
            return external_gan_blend(copy_paste_composite(background, foreground, coverage), coverage,
                                      PlugConfig::from_command(*config.blend_plug));
        }
    }
    throw ValidationError("unknown blend mode");
}

std::string frame_file(const PipelineConfig& config, int frame, const char* stage) {
    return (config.out_dir / ("frame_" + std::to_string(frame) + "_" + stage + ".png")).string();
}

Bytes8 rgba_bytes(const Image& display_rgb, const Image& alpha) {
    Bytes8 out(display_rgb.width(), display_rgb.height(), 4);
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = quantize_unit(display_rgb.at(x, y, c));
            out.at(x, y, 3) = quantize_unit(alpha.at(x, y));
        }
    }
    return out;
}

std::string format_optional(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *v);
    return buf;
}

}  // namespace

std::string PipelineConfig::canonical() const {
    std::ostringstream s;
    s.precision(17);
    s << "seed=" << seed << ";noise_amp=" << noise_amp << ";synth=" << synth_plug.value_or("stub")
      << ";segment=" << segment_plug.value_or("stub") << ";features=" << features_plug.value_or("stub")
      << ";blend=" << to_string(blend) << ";blend_plug=" << blend_plug.value_or("") << ";levels=" << levels
      << ";poisson_tol=" << poisson.tol << ";poisson_max_iters=" << poisson.max_iters;
    return s.str();
}

std::string config_hash(const PipelineConfig& config, const SceneDescription& scene) {
    Fnv1a h;
    h.text(config.canonical());
    for (const auto& obj : scene.objects) {
        hash_pose(h, obj.pose);
        h.integer(obj.class_id);
        hash_mesh(h, obj.semantic_mesh);
    }
    for (const auto& item : scene.interest) {
        h.integer(static_cast<std::int64_t>(item.object_index));
        hash_mesh(h, item.mesh);
        if (item.texture) {
            for (double v : item.texture->rgb.values()) h.real(v);
        }
        h.bytes(item.albedo.data(), sizeof(double) * 3);
        h.bytes(item.emission.data(), sizeof(double) * 3);
    }
    hash_pose(h, scene.camera);
    for (const auto& pose : scene.trajectory) hash_pose(h, pose);
    h.integer(static_cast<int>(scene.light.kind));
    h.bytes(scene.light.vector.data(), sizeof(double) * 3);
    h.bytes(scene.light.radiance.data(), sizeof(double) * 3);
    h.integer(scene.settings.width);
    h.integer(scene.settings.height);
    h.real(scene.settings.focal_px);
    for (const auto& e : scene.palette.entries) {
        h.integer(e.id);
        h.bytes(e.color.data(), 3);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h.value());
    return buf;
}

std::optional<double> interest_retention(const SemanticImage& layout, const PartialRender& partial,
                                         const Image& foreground, const Image& output) {
    if (!layout.same_extent(partial.alpha) || !layout.same_extent(output) || !layout.same_extent(foreground)) {
        throw ValidationError("interest_retention: dimension mismatch");
    }
    std::size_t covered = 0, exact = 0;
    for (int y = 0; y < layout.height(); ++y) {
        for (int x = 0; x < layout.width(); ++x) {
            if (!partial.covered(x, y)) continue;
            ++covered;
            bool same = partial.class_ids.at(x, y) == layout.at(x, y);
            for (int c = 0; c < 3 && same; ++c) same = output.at(x, y, c) == foreground.at(x, y, c);
            if (same) ++exact;
        }
    }
    if (covered == 0) return std::nullopt;
    return static_cast<double>(exact) / static_cast<double>(covered);
}

FrameResult run_frame(const SceneDescription& scene, const PoseVector& camera, const PipelineConfig& config,
                      int frame_index) {
    FrameResult r;
    r.index = frame_index;
    r.seed = config.seed + static_cast<std::uint64_t>(frame_index);
    const Intrinsics K = in_stage("intrinsics", [&] { return Intrinsics::from_settings(scene.settings); });

    r.semantic = in_stage("semantic", [&] { return rasterize_semantic(scene, camera, K).ids; });
    r.synthesized = in_stage("synthesize", [&] { return synthesize(r.semantic, scene, config, r.seed); });
    r.partial = in_stage("render-partial", [&] { return render_partial(scene, camera, K); });
    r.foreground = encode_display(r.partial.rgb);
    r.hybrid = in_stage("blend", [&] { return blend_with(config.blend, r.synthesized, r.partial, r.foreground, config); });

    const SemanticImage predicted = in_stage("segment", [&] { return segment(r.hybrid, scene, config); });
    in_stage("metrics", [&] {
        r.metrics.retention = semantic_retention(r.semantic, predicted);
        r.metrics.synth_retention = semantic_retention(r.semantic, segment(r.synthesized, scene, config));
        r.metrics.interest_retention = interest_retention(r.semantic, r.partial, r.foreground, r.hybrid);
    });

    if (!config.out_dir.empty()) {
        in_stage("write", [&] {
            std::filesystem::create_directories(config.out_dir);
            write_label_png(frame_file(config, frame_index, "semantic"), r.semantic);
            write_rgb_png(frame_file(config, frame_index, "semantic_color"), colorize_semantic(r.semantic, scene.palette));
            write_rgb_png(frame_file(config, frame_index, "synthesized"), r.synthesized);
            write_png(frame_file(config, frame_index, "partial"), rgba_bytes(r.foreground, r.partial.alpha));
            write_label_png(frame_file(config, frame_index, "partial_ids"), r.partial.class_ids);
            write_rgb_png(frame_file(config, frame_index, "hybrid"), r.hybrid);
            write_label_png(frame_file(config, frame_index, "predicted"), predicted);
        });
    }
    return r;
}

FrameResult run_frame(const SceneDescription& scene, const PipelineConfig& config) {
    return run_frame(scene, scene.camera, config, 0);
}

std::vector<FrameResult> run_sequence(const SceneDescription& scene, const std::vector<PoseVector>& trajectory,
                                      const PipelineConfig& config) {
    std::vector<FrameResult> frames;
    frames.reserve(trajectory.size());
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        try {
            frames.push_back(run_frame(scene, trajectory[i], config, static_cast<int>(i)));
        } catch (Error& e) {
            e.set_stage("frame " + std::to_string(i) + (e.stage().empty() ? "" : "/" + e.stage()));
            throw;
        }
    }
    return frames;
}

std::vector<PoseVector> camera_path(const SceneDescription& scene) {
    if (!scene.trajectory.empty()) return scene.trajectory;
    return {scene.camera};
}

std::vector<AblationRow> run_ablation(const SceneDescription& scene, const PipelineConfig& config,
                                      const std::optional<FeatureMatrix>& real_features) {
    const auto path = camera_path(scene);
    const Intrinsics K = Intrinsics::from_settings(scene.settings);
    const std::string hash = config_hash(config, scene);
    constexpr std::size_t kMethods = std::size(kAblationMethods);

    std::vector<std::vector<Image>> outputs(kMethods);
    std::vector<double> retention_sum(kMethods, 0.0);
    std::vector<std::size_t> covered(kMethods, 0), exact(kMethods, 0);

    for (std::size_t f = 0; f < path.size(); ++f) {
        try {
            const PoseVector& camera = path[f];
            const std::uint64_t seed = config.seed + f;
            const SemanticImage layout = in_stage("semantic", [&] { return rasterize_semantic(scene, camera, K).ids; });
            const Image synthesized = in_stage("synthesize", [&] { return synthesize(layout, scene, config, seed); });
            const PartialRender partial = in_stage("render-partial", [&] { return render_partial(scene, camera, K); });
            const Image foreground = encode_display(partial.rgb);

            std::array<Image, kMethods> frame_out;
            frame_out[0] = in_stage("render-full", [&] { return encode_display(render_full(scene, camera, K)); });
            frame_out[1] = synthesized;
            in_stage("blend", [&] {
                frame_out[2] = blend_with(BlendMode::alpha, synthesized, partial, foreground, config);
                frame_out[3] = blend_with(BlendMode::pyramid, synthesized, partial, foreground, config);
                frame_out[4] = blend_with(BlendMode::gp_classical, synthesized, partial, foreground, config);
                frame_out[5] = blend_with(config.blend_plug ? BlendMode::gan_plug : BlendMode::gp_classical,
                                          synthesized, partial, foreground, config);
            });

            for (std::size_t m = 0; m < kMethods; ++m) {
                const SemanticImage predicted = in_stage("segment", [&] { return segment(frame_out[m], scene, config); });
                retention_sum[m] += in_stage("metrics", [&] { return semantic_retention(layout, predicted); });
                for (int y = 0; y < layout.height(); ++y) {
                    for (int x = 0; x < layout.width(); ++x) {
                        if (!partial.covered(x, y)) continue;
                        ++covered[m];
                        bool same = partial.class_ids.at(x, y) == layout.at(x, y);
                        for (int c = 0; c < 3 && same; ++c) same = frame_out[m].at(x, y, c) == foreground.at(x, y, c);
                        if (same) ++exact[m];
                    }
                }
                if (!config.out_dir.empty()) {
                    std::filesystem::create_directories(config.out_dir);
                    write_rgb_png(config.out_dir / ("ablation_" + std::string(kAblationMethods[m]) + "_frame_" +
                                                    std::to_string(f) + ".png"),
                                  frame_out[m]);
                }
                outputs[m].push_back(std::move(frame_out[m]));
            }
        } catch (Error& e) {
            e.set_stage("frame " + std::to_string(f) + (e.stage().empty() ? "" : "/" + e.stage()));
            throw;
        }
    }

    std::vector<AblationRow> rows;
    for (std::size_t m = 0; m < kMethods; ++m) {
        AblationRow row;
        row.method = kAblationMethods[m];
        row.retention = retention_sum[m] / static_cast<double>(path.size());
        if (covered[m] > 0) row.interest_retention = static_cast<double>(exact[m]) / static_cast<double>(covered[m]);
        if (real_features && path.size() >= 2) {
            row.fid = in_stage("fid", [&] { return fid_between_sets(features(outputs[m], config), *real_features); });
        }
        row.seed = config.seed;
        row.config_hash = hash;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_report_table(const std::vector<AblationRow>& rows) {
    std::ostringstream s;
    char line[160];
    std::snprintf(line, sizeof line, "%-14s %10s %18s %14s %20s %16s\n", "method", "retention", "interest_retention",
                  "fid", "seed", "config_hash");
    s << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-14s %10.6f %18s %14s %20" PRIu64 " %16s\n", r.method.c_str(), r.retention,
                      format_optional(r.interest_retention).c_str(), format_optional(r.fid).c_str(), r.seed,
                      r.config_hash.c_str());
        s << line;
    }
    return s.str();
}

std::string format_report_json(const std::vector<AblationRow>& rows) {
    nlohmann::ordered_json doc;
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json row;
        row["method"] = r.method;
        row["retention"] = r.retention;
        row["interest_retention"] = r.interest_retention ? nlohmann::ordered_json(*r.interest_retention) : nullptr;
        row["fid"] = r.fid ? nlohmann::ordered_json(*r.fid) : nullptr;
        row["seed"] = r.seed;
        row["config_hash"] = r.config_hash;
        doc["rows"].push_back(std::move(row));
    }
    return doc.dump(2) + "\n";
}

}  // namespace hncg
