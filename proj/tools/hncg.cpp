// Command-line front end for the hybrid image-formation pipeline.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "hncg/blend.hpp"
#include "hncg/error.hpp"
#include "hncg/image_io.hpp"
#include "hncg/metrics.hpp"
#include "hncg/pipeline.hpp"
#include "hncg/raster.hpp"
#include "hncg/render.hpp"
#include "hncg/scene.hpp"
#include "hncg/synthesis.hpp"

namespace fs = std::filesystem;
using namespace hncg;

namespace {

struct CommonFlags {
    std::string scene;
    std::string out = ".";
    std::uint64_t seed = 0;
    std::string synth = "stub";
    std::string segment = "stub";
    std::string features = "stub";
    std::string blend = "alpha";
    std::string blend_plug;
    int levels = 4;
    double noise_amp = 0.05;
    std::string real_features;
};

// "stub" -> nullopt, "plug:CMD" -> CMD.
std::optional<std::string> plug_choice(const std::string& value, const char* flag) {
    if (value == "stub") return std::nullopt;
    if (value.rfind("plug:", 0) == 0 && value.size() > 5) return value.substr(5);
    throw ValidationError(std::string(flag) + " must be 'stub' or 'plug:CMD', got '" + value + "'");
}

PipelineConfig to_config(const CommonFlags& f) {
    PipelineConfig config;
    config.seed = f.seed;
    config.noise_amp = f.noise_amp;
    config.synth_plug = plug_choice(f.synth, "--synth");
    config.segment_plug = plug_choice(f.segment, "--segment");
    config.features_plug = plug_choice(f.features, "--features");
    const auto mode = parse_blend_mode(f.blend);
    if (!mode) throw ValidationError("unknown blend mode '" + f.blend + "'");
    config.blend = *mode;
    if (!f.blend_plug.empty()) config.blend_plug = f.blend_plug;
    config.levels = f.levels;
    config.out_dir = f.out;
    return config;
}

void add_scene_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--scene", f.scene, "Scene document (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out, "Output directory");
}

void add_pipeline_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--seed", f.seed, "Master seed; frame n uses seed + n");
    cmd->add_option("--synth", f.synth, "Synthesizer: stub | plug:CMD");
    cmd->add_option("--segment", f.segment, "Segmenter for retention: stub | plug:CMD");
    cmd->add_option("--features", f.features, "Feature extractor for FID: stub | plug:CMD");
    cmd->add_option("--blend", f.blend, "Blend mode: alpha | pyramid | gp-classical | gan-plug");
    cmd->add_option("--blend-plug", f.blend_plug, "Blender command used by gan-plug ({in}, {mask}, {out})");
    cmd->add_option("--levels", f.levels, "Pyramid levels");
    cmd->add_option("--noise-amp", f.noise_amp, "Stub synthesizer noise amplitude in [0, 0.5)");
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << text;
}

Image read_foreground(const fs::path& path, std::optional<Image>& alpha) {
    const Bytes8 rgba = read_png(path, 4);
    Image rgb(rgba.width(), rgba.height(), 3);
    Image a(rgba.width(), rgba.height(), 1);
    for (int y = 0; y < rgba.height(); ++y) {
        for (int x = 0; x < rgba.width(); ++x) {
            for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = rgba.at(x, y, c) / 255.0;
            a.at(x, y) = rgba.at(x, y, 3) / 255.0;
        }
    }
    alpha = std::move(a);
    return rgb;
}

std::vector<fs::path> png_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ValidationError(dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
    }
    std::ranges::sort(files);
    return files;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid neural image formation: semantic rasterization, synthesis, partial rendering, blending"};
    app.require_subcommand(1);
    CommonFlags f;

    auto* semantic = app.add_subcommand("semantic", "Rasterize the semantic layout");
    add_scene_flags(semantic, f);

    auto* partial = app.add_subcommand("render-partial", "Render the objects of interest");
    add_scene_flags(partial, f);

    std::string labels_in, palette_in, output;
    auto* synth = app.add_subcommand("synthesize", "Synthesize RGB from a layout (scene or label PNG)");
    synth->add_option("--scene", f.scene, "Scene document (JSON)")->check(CLI::ExistingFile);
    synth->add_option("--out", f.out, "Output directory (scene mode)");
    synth->add_option("--labels", labels_in, "Raw-id label PNG (file mode)")->check(CLI::ExistingFile);
    synth->add_option("--palette", palette_in, "Palette JSON (file mode)")->check(CLI::ExistingFile);
    synth->add_option("--output", output, "Output PNG (file mode)");
    synth->add_option("--seed", f.seed, "Seed");
    synth->add_option("--synth", f.synth, "Synthesizer: stub | plug:CMD");
    synth->add_option("--noise-amp", f.noise_amp, "Stub noise amplitude in [0, 0.5)");

    std::string background_in, foreground_in, mask_in;
    auto* blend = app.add_subcommand("blend", "Blend a synthesized background with a rendered foreground");
    blend->add_option("--background", background_in, "Background RGB PNG")->required()->check(CLI::ExistingFile);
    blend->add_option("--foreground", foreground_in, "Foreground PNG (RGBA alpha = coverage)")
        ->required()
        ->check(CLI::ExistingFile);
    blend->add_option("--mask", mask_in, "Coverage mask PNG (default: foreground alpha)")->check(CLI::ExistingFile);
    blend->add_option("--output", output, "Output PNG")->required();
    blend->add_option("--blend", f.blend, "alpha | pyramid | gp-classical | gan-plug");
    blend->add_option("--blend-plug", f.blend_plug, "Blender command for gan-plug");
    blend->add_option("--levels", f.levels, "Pyramid levels");

    auto* declassify = app.add_subcommand("declassify", "Nearest-palette-color segmentation of an RGB PNG");
    declassify->add_option("--in", background_in, "RGB PNG")->required()->check(CLI::ExistingFile);
    declassify->add_option("--palette", palette_in, "Palette JSON")->required()->check(CLI::ExistingFile);
    declassify->add_option("--output", output, "Raw-id PNG")->required();

    auto* metrics = app.add_subcommand("metrics", "Retention, FID and feature extraction");
    metrics->require_subcommand(1);
    std::string layout_in, predicted_in, ignore = "0";
    auto* retention = metrics->add_subcommand("retention", "Top-1 pixel accuracy against a layout");
    retention->add_option("--layout", layout_in, "Layout raw-id PNG")->required()->check(CLI::ExistingFile);
    retention->add_option("--predicted", predicted_in, "Predicted raw-id PNG")->required()->check(CLI::ExistingFile);
    retention->add_option("--ignore", ignore, "Comma-separated ids to ignore (default 0)");
    std::string feat_a, feat_b, images_dir;
    auto* fid = metrics->add_subcommand("fid", "Frechet distance between two feature files");
    fid->add_option("--a", feat_a, "Feature file")->required()->check(CLI::ExistingFile);
    fid->add_option("--b", feat_b, "Feature file")->required()->check(CLI::ExistingFile);
    auto* feats = metrics->add_subcommand("features", "Extract stub features from a directory of PNGs");
    feats->add_option("--images", images_dir, "Directory of PNG images")->required();
    feats->add_option("--output", output, "Feature file")->required();

    auto* run = app.add_subcommand("run", "Run the full pipeline over the scene's camera path");
    add_scene_flags(run, f);
    add_pipeline_flags(run, f);

    auto* ablate = app.add_subcommand("ablate", "Compare rendering, synthesis and blending variants");
    add_scene_flags(ablate, f);
    add_pipeline_flags(ablate, f);
    ablate->add_option("--real-features", f.real_features, "Reference feature file for FID")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ErrorKind::validation);
    }

    try {
        if (semantic->parsed()) {
            const SceneDescription scene = load_scene(f.scene);
            const auto raster = rasterize_semantic(scene, Intrinsics::from_settings(scene.settings));
            fs::create_directories(f.out);
            write_label_png(fs::path(f.out) / "semantic.png", raster.ids);
            write_rgb_png(fs::path(f.out) / "semantic_color.png", colorize_semantic(raster.ids, scene.palette));
        } else if (partial->parsed()) {
            const SceneDescription scene = load_scene(f.scene);
            const PartialRender pr = render_partial(scene, Intrinsics::from_settings(scene.settings));
            const Image display = encode_display(pr.rgb);
            Bytes8 rgba(display.width(), display.height(), 4);
            for (int y = 0; y < rgba.height(); ++y) {
                for (int x = 0; x < rgba.width(); ++x) {
                    for (int c = 0; c < 3; ++c) rgba.at(x, y, c) = quantize_unit(display.at(x, y, c));
                    rgba.at(x, y, 3) = quantize_unit(pr.alpha.at(x, y));
                }
            }
            fs::create_directories(f.out);
            write_png(fs::path(f.out) / "partial.png", rgba);
            write_label_png(fs::path(f.out) / "partial_ids.png", pr.class_ids);
        } else if (synth->parsed()) {
            const auto plug = plug_choice(f.synth, "--synth");
            auto make = [&](const SemanticImage& m, const ClassPalette& palette) {
                return plug ? external_synthesize(m, palette, PlugConfig::from_command(*plug))
                            : stub_synthesize(m, palette, f.seed, f.noise_amp);
            };
            if (!f.scene.empty()) {
                const SceneDescription scene = load_scene(f.scene);
                const auto raster = rasterize_semantic(scene, Intrinsics::from_settings(scene.settings));
                fs::create_directories(f.out);
                write_rgb_png(fs::path(f.out) / "synthesized.png", make(raster.ids, scene.palette));
            } else {
                if (labels_in.empty() || palette_in.empty() || output.empty()) {
                    throw ValidationError("synthesize needs --scene, or --labels, --palette and --output");
                }
                write_rgb_png(output, make(read_label_png(labels_in), load_palette(palette_in)));
            }
        } else if (blend->parsed()) {
            const auto mode = parse_blend_mode(f.blend);
            if (!mode) throw ValidationError("unknown blend mode '" + f.blend + "'");
            const Image background = read_rgb_png(background_in);
            std::optional<Image> alpha;
            const Image foreground = read_foreground(foreground_in, alpha);
            const Image coverage = mask_in.empty() ? *alpha : read_mask_png(mask_in);
            Image out;
            switch (*mode) {
                case BlendMode::alpha: {
                    Image weights = coverage;
                    for (double& v : weights.values()) v = 1.0 - v;
                    out = alpha_blend(background, foreground, weights);
                    break;
                }
                case BlendMode::pyramid: out = pyramid_blend(background, foreground, coverage, f.levels); break;
                case BlendMode::gp_classical: out = poisson_blend(background, foreground, coverage); break;
                case BlendMode::gan_plug:
                    if (f.blend_plug.empty()) throw ValidationError("gan-plug needs --blend-plug");
                    out = external_gan_blend(copy_paste_composite(background, foreground, coverage), coverage,
                                             PlugConfig::from_command(f.blend_plug));
                    break;
            }
            write_rgb_png(output, out);
        } else if (declassify->parsed()) {
            write_label_png(output, declassify_nearest(read_rgb_png(background_in), load_palette(palette_in)));
        } else if (retention->parsed()) {
            std::set<ClassId> ignored;
            std::stringstream ss(ignore);
            for (std::string tok; std::getline(ss, tok, ',');) {
                if (tok.empty()) continue;
                const int id = std::stoi(tok);
                if (id < 0 || id > 255) throw ValidationError("ignore ids must lie in [0, 255]");
                ignored.insert(static_cast<ClassId>(id));
            }
            std::printf("%.9f\n", semantic_retention(read_label_png(layout_in), read_label_png(predicted_in), ignored));
        } else if (fid->parsed()) {
            std::printf("%.9f\n", fid_between_sets(read_feature_file(feat_a), read_feature_file(feat_b)));
        } else if (feats->parsed()) {
            std::vector<Image> images;
            for (const auto& file : png_files(images_dir)) images.push_back(read_rgb_png(file));
            write_feature_file(output, stub_feature_matrix(images));
        } else if (run->parsed()) {
            const SceneDescription scene = load_scene(f.scene);
            const PipelineConfig config = to_config(f);
            const auto frames = run_sequence(scene, camera_path(scene), config);
            nlohmann::ordered_json report;
            report["config_hash"] = config_hash(config, scene);
            report["seed"] = config.seed;
            report["frames"] = nlohmann::ordered_json::array();
            for (const auto& fr : frames) {
                nlohmann::ordered_json row;
                row["frame"] = fr.index;
                row["seed"] = fr.seed;
                row["retention"] = fr.metrics.retention;
                row["synth_retention"] = fr.metrics.synth_retention;
                row["interest_retention"] = fr.metrics.interest_retention
                                                ? nlohmann::ordered_json(*fr.metrics.interest_retention)
                                                : nullptr;
                report["frames"].push_back(std::move(row));
                std::printf("frame %d: retention %.6f, synth retention %.6f\n", fr.index, fr.metrics.retention,
                            fr.metrics.synth_retention);
            }
            write_text(fs::path(f.out) / "run_report.json", report.dump(2) + "\n");
        } else if (ablate->parsed()) {
            const SceneDescription scene = load_scene(f.scene);
            const PipelineConfig config = to_config(f);
            std::optional<FeatureMatrix> real;
            if (!f.real_features.empty()) real = read_feature_file(f.real_features);
            const auto rows = run_ablation(scene, config, real);
            const std::string table = format_report_table(rows);
            fs::create_directories(f.out);
            write_text(fs::path(f.out) / "report.txt", table);
            write_text(fs::path(f.out) / "report.json", format_report_json(rows));
            std::fputs(table.c_str(), stdout);
        }
    } catch (const Error& e) {
        if (e.stage().empty()) {
            std::fprintf(stderr, "hncg: %s\n", e.what());
        } else {
            std::fprintf(stderr, "hncg: [%s] %s\n", e.stage().c_str(), e.what());
        }
        return e.exit_code();
    } catch (const fs::filesystem_error& e) {
        std::fprintf(stderr, "hncg: %s\n", e.what());
        return static_cast<int>(ErrorKind::validation);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "hncg: internal error: %s\n", e.what());
        return 1;
    }
    return 0;
}
