#include "fixtures.hpp"

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "oracles.hpp"

namespace fixture {

hncg::TriMesh frustum_triangle(double depth) {
    hncg::TriMesh m;
    const double z = -depth, s = 10.0 * depth;
    m.vertices = {{-s, -s, z}, {3 * s, -s, z}, {-s, 3 * s, z}};
    m.faces = {{1, 2, 3}};
    m.uvs = {{0, 0}, {1, 0}, {0, 1}};
    return m;
}

hncg::TriMesh square(double cx, double cy, double z, double half, bool with_uvs) {
    hncg::TriMesh m;
    m.vertices = {{cx - half, cy - half, z}, {cx + half, cy - half, z}, {cx + half, cy + half, z}, {cx - half, cy + half, z}};
    m.faces = {{1, 2, 3}, {1, 3, 4}};
    if (with_uvs) m.uvs = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    return m;
}

hncg::SceneDescription empty_scene(int width, int height, double focal_px, int classes) {
    hncg::SceneDescription s;
    s.settings = {width, height, focal_px};
    s.palette = oracle::test_palette(classes);
    s.light.kind = hncg::LightSource::Kind::directional;
    s.light.vector = hncg::Vec3(0, 0, -1);
    s.light.radiance = hncg::Vec3::Zero();
    return s;
}

CommandResult run(const std::string& command) {
    const std::string full = command + " 2>&1";
    FILE* pipe = popen(full.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed for " + command);
    CommandResult r;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), got);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace fixture
