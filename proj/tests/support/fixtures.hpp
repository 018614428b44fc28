#pragma once

#include <filesystem>
#include <string>

#include "hncg/scene.hpp"

namespace fixture {

inline const std::filesystem::path demo_dir = HNCG_DEMO_DIR;
inline const std::filesystem::path demo_scene = std::filesystem::path(HNCG_DEMO_DIR) / "scene.json";
inline const std::string cli = HNCG_CLI_PATH;

// One triangle at depth `depth` that covers the whole view of a square camera
// with focal length >= half the width.
hncg::TriMesh frustum_triangle(double depth);
// Axis-aligned square facing +z, centred at (cx, cy, z).
hncg::TriMesh square(double cx, double cy, double z, double half, bool with_uvs = false);

// Identity camera, no objects, `classes` palette entries.
hncg::SceneDescription empty_scene(int width, int height, double focal_px, int classes = 9);

struct CommandResult {
    int exit_code = -1;
    std::string output;
};
// Runs a shell command, capturing stdout and stderr.
CommandResult run(const std::string& command);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace fixture
