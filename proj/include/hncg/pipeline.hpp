#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hncg/blend.hpp"
#include "hncg/metrics.hpp"
#include "hncg/render.hpp"
#include "hncg/scene.hpp"

namespace hncg {

struct PipelineConfig {
    std::uint64_t seed = 0;
    double noise_amp = 0.05;
    std::optional<std::string> synth_plug;     // unset: stub synthesizer
    std::optional<std::string> segment_plug;   // unset: nearest-palette declassifier
    std::optional<std::string> features_plug;  // unset: stub features
    std::optional<std::string> blend_plug;     // command used by BlendMode::gan_plug
    BlendMode blend = BlendMode::alpha;
    int levels = 4;
    PoissonOptions poisson;
    std::filesystem::path out_dir;  // empty: keep artifacts in memory only

    // Canonical one-line description; equal configs give equal strings.
    std::string canonical() const;
};

// 16 hex digits identifying the configuration and the scene contents.
std::string config_hash(const PipelineConfig& config, const SceneDescription& scene);

struct FrameMetrics {
    double retention = 0.0;        // segmentation of the hybrid vs the layout
    double synth_retention = 0.0;  // segmentation of the synthesized image vs the layout
    // Share of interest-covered pixels that show the exact partial render of
    // the layout's class; unset when nothing is covered.
    std::optional<double> interest_retention;
    std::optional<double> fid;
};

struct FrameResult {
    int index = 0;
    std::uint64_t seed = 0;
    SemanticImage semantic;
    Image synthesized;
    PartialRender partial;
    Image foreground;  // display-encoded partial render
    Image hybrid;
    FrameMetrics metrics;
};

// Layout, synthesis, partial render, blend and retention for one camera pose.
// Frame n uses seed config.seed + n. Errors carry the failing stage.
FrameResult run_frame(const SceneDescription& scene, const PoseVector& camera, const PipelineConfig& config,
                      int frame_index = 0);
FrameResult run_frame(const SceneDescription& scene, const PipelineConfig& config);

std::vector<FrameResult> run_sequence(const SceneDescription& scene, const std::vector<PoseVector>& trajectory,
                                      const PipelineConfig& config);

// The scene's trajectory, or its single camera pose when none is given.
std::vector<PoseVector> camera_path(const SceneDescription& scene);

inline constexpr const char* kAblationMethods[] = {"only-render",   "only-synth",   "alpha-blend",
                                                   "pyramid-blend", "gp-classical", "gan-blend"};

struct AblationRow {
    std::string method;
    double retention = 0.0;
    std::optional<double> interest_retention;
    std::optional<double> fid;
    std::uint64_t seed = 0;
    std::string config_hash;

    bool operator==(const AblationRow&) const = default;
};

// Runs every method over the scene's camera path. FID needs real features
// and at least two frames; otherwise it stays unset.
std::vector<AblationRow> run_ablation(const SceneDescription& scene, const PipelineConfig& config,
                                      const std::optional<FeatureMatrix>& real_features);

std::string format_report_table(const std::vector<AblationRow>& rows);
std::string format_report_json(const std::vector<AblationRow>& rows);

// Pixels covered by the partial render whose output equals the foreground
// exactly and whose render class matches the layout, over covered pixels.
std::optional<double> interest_retention(const SemanticImage& layout, const PartialRender& partial,
                                         const Image& foreground, const Image& output);

}  // namespace hncg
