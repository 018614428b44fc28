#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hncg/error.hpp"
#include "hncg/scene.hpp"

namespace hncg {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw ValidationError("obj line " + std::to_string(line) + ": " + what);
}

double parse_real(const std::string& token, std::size_t line) {
    double value = 0.0;
    const char* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end) fail(line, "malformed number '" + token + "'");
    return value;
}

int parse_index(const std::string& token, std::size_t line) {
    int value = 0;
    const char* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end) fail(line, "malformed index '" + token + "'");
    return value;
}

}  // namespace

TriMesh parse_obj(std::istream& in) {
    TriMesh mesh;
    std::vector<Vec2> texcoords;
    // Per-vertex uv assignment from "a/at" references; 0 = unassigned.
    std::vector<int> uv_ref;
    bool any_uv_ref = false;

    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
        std::istringstream ls(raw);
        std::string tag;
        if (!(ls >> tag)) continue;

        std::vector<std::string> args;
        for (std::string t; ls >> t;) args.push_back(t);

        if (tag == "v") {
            if (args.size() < 3) fail(line, "vertex needs 3 coordinates");
            mesh.vertices.emplace_back(parse_real(args[0], line), parse_real(args[1], line),
                                       parse_real(args[2], line));
            uv_ref.push_back(0);
        } else if (tag == "vt") {
            if (args.size() < 2) fail(line, "texture coordinate needs 2 values");
            texcoords.emplace_back(parse_real(args[0], line), parse_real(args[1], line));
        } else if (tag == "f") {
            if (args.size() != 3) fail(line, "only triangular faces are supported, got " + std::to_string(args.size()) + " vertices");
            std::array<int, 3> face{};
            for (int k = 0; k < 3; ++k) {
                const std::string& ref = args[k];
                const auto slash = ref.find('/');
                face[k] = parse_index(ref.substr(0, slash), line);
                if (face[k] < 1 || face[k] > static_cast<int>(mesh.vertices.size())) {
                    fail(line, "face index " + std::to_string(face[k]) + " out of range [1, " +
                                   std::to_string(mesh.vertices.size()) + "]");
                }
                if (slash == std::string::npos) continue;
                const auto second = ref.find('/', slash + 1);
                const std::string uv_token = ref.substr(slash + 1, second == std::string::npos ? std::string::npos : second - slash - 1);
                if (uv_token.empty()) continue;
                const int uv = parse_index(uv_token, line);
                if (uv < 1 || uv > static_cast<int>(texcoords.size())) {
                    fail(line, "texture index " + std::to_string(uv) + " out of range [1, " +
                                   std::to_string(texcoords.size()) + "]");
                }
                int& slot = uv_ref[face[k] - 1];
                if (slot != 0 && texcoords[slot - 1] != texcoords[uv - 1]) {
                    fail(line, "vertex " + std::to_string(face[k]) + " is given two different uvs");
                }
                slot = uv;
                any_uv_ref = true;
            }
            if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
                fail(line, "face repeats a vertex index");
            }
            mesh.faces.push_back(face);
        } else if (tag == "vn" || tag == "vp" || tag == "o" || tag == "g" || tag == "s" || tag == "usemtl" ||
                   tag == "mtllib") {
            continue;
        } else {
            fail(line, "unsupported record '" + tag + "'");
        }
    }

    if (any_uv_ref) {
        mesh.uvs.resize(mesh.vertices.size(), Vec2::Zero());
        for (std::size_t i = 0; i < uv_ref.size(); ++i) {
            if (uv_ref[i] != 0) mesh.uvs[i] = texcoords[uv_ref[i] - 1];
        }
    } else if (!texcoords.empty() && texcoords.size() == mesh.vertices.size()) {
        mesh.uvs = texcoords;
    }
    mesh.validate();
    return mesh;
}

TriMesh parse_obj(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_obj(in);
}

TriMesh load_obj(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("missing file " + path.string());
    try {
        return parse_obj(in);
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

}  // namespace hncg
