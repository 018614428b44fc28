#include "hncg/scene.hpp"

#include <json.hpp>

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hncg/error.hpp"
#include "hncg/image_io.hpp"

namespace hncg {

using nlohmann::json;

PoseVector PoseVector::from_array(const std::array<double, 6>& v) {
    PoseVector pose;
    pose.position = Vec3(v[0], v[1], v[2]);
    pose.orientation = Vec3(v[3], v[4], v[5]);
    return pose;
}

std::array<double, 6> PoseVector::to_array() const {
    return {position.x(), position.y(), position.z(), orientation.x(), orientation.y(), orientation.z()};
}

bool PoseVector::is_finite() const { return position.allFinite() && orientation.allFinite(); }

Mat3 rotation_matrix(const PoseVector& pose) {
    const double roll = pose.orientation.x();
    const double pitch = pose.orientation.y();
    const double yaw = pose.orientation.z();
    return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
            Eigen::AngleAxisd(roll, Vec3::UnitX()))
        .toRotationMatrix();
}

Vec3 transform_to_camera(const Vec3& p, const PoseVector& object_pose, const PoseVector& camera_pose) {
    const Vec3 world = rotation_matrix(object_pose) * p + object_pose.position;
    return rotation_matrix(camera_pose).transpose() * (world - camera_pose.position);
}

Vec3 transform_from_camera(const Vec3& p_cam, const PoseVector& object_pose, const PoseVector& camera_pose) {
    const Vec3 world = rotation_matrix(camera_pose) * p_cam + camera_pose.position;
    return rotation_matrix(object_pose).transpose() * (world - object_pose.position);
}

void TriMesh::validate() const {
    const int n = static_cast<int>(vertices.size());
    if (!uvs.empty() && uvs.size() != vertices.size()) {
        throw ValidationError("mesh has " + std::to_string(uvs.size()) + " uvs for " +
                              std::to_string(n) + " vertices");
    }
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const auto& q = faces[f];
        for (int idx : q) {
            if (idx < 1 || idx > n) {
                throw ValidationError("face " + std::to_string(f + 1) + " index " + std::to_string(idx) +
                                      " out of range [1, " + std::to_string(n) + "]");
            }
        }
        if (q[0] == q[1] || q[1] == q[2] || q[0] == q[2]) {
            throw ValidationError("face " + std::to_string(f + 1) + " repeats a vertex index");
        }
    }
    for (const auto& v : vertices) {
        if (!v.allFinite()) throw ValidationError("mesh has a non-finite vertex");
    }
}

Vec3 Texture::sample(const Vec2& uv) const {
    const int w = rgb.width();
    const int h = rgb.height();
    const double u = std::clamp(uv.x(), 0.0, 1.0);
    const double v = std::clamp(uv.y(), 0.0, 1.0);
    auto texel = [&](int x, int y) {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return Vec3(rgb.at(x, y, 0), rgb.at(x, y, 1), rgb.at(x, y, 2));
    };
    if (sampling == Sampling::nearest) {
        return texel(static_cast<int>(std::floor(u * w)), static_cast<int>(std::floor((1.0 - v) * h)));
    }
    const double fx = u * w - 0.5;
    const double fy = (1.0 - v) * h - 0.5;
    const int x0 = static_cast<int>(std::floor(fx));
    const int y0 = static_cast<int>(std::floor(fy));
    const double tx = fx - x0;
    const double ty = fy - y0;
    const Vec3 top = (1.0 - tx) * texel(x0, y0) + tx * texel(x0 + 1, y0);
    const Vec3 bottom = (1.0 - tx) * texel(x0, y0 + 1) + tx * texel(x0 + 1, y0 + 1);
    return (1.0 - ty) * top + ty * bottom;
}

void LightSource::validate() const {
    if (!vector.allFinite()) throw ValidationError("light vector must be finite");
    if (!radiance.allFinite() || (radiance.array() < 0.0).any()) {
        throw ValidationError("light radiance must be finite and non-negative");
    }
    if (kind == Kind::directional && vector.norm() == 0.0) {
        throw ValidationError("directional light needs a nonzero direction");
    }
}

void RenderSettings::validate() const {
    if (width < 1 || height < 1) throw ValidationError("image dimensions must be at least 1");
    if (!std::isfinite(focal_px) || focal_px <= 0.0) throw ValidationError("focal_px must be finite and positive");
}

const ClassPalette::Entry* ClassPalette::find(ClassId id) const noexcept {
    const auto it = std::ranges::find(entries, id, &Entry::id);
    return it == entries.end() ? nullptr : &*it;
}

Vec3 ClassPalette::unit_color(ClassId id) const {
    const Entry* e = find(id);
    if (e == nullptr) throw ValidationError("class id " + std::to_string(id) + " not in palette");
    return Vec3(e->color[0], e->color[1], e->color[2]) / 255.0;
}

double ClassPalette::min_color_distance() const {
    int best = 256;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        for (std::size_t j = i + 1; j < entries.size(); ++j) {
            int d = 0;
            for (int c = 0; c < 3; ++c) {
                d = std::max(d, std::abs(int(entries[i].color[c]) - int(entries[j].color[c])));
            }
            best = std::min(best, d);
        }
    }
    return best / 255.0;
}

void ClassPalette::validate() const {
    std::set<ClassId> ids;
    for (const auto& e : entries) {
        if (!ids.insert(e.id).second) throw ValidationError("duplicate class id " + std::to_string(e.id) + " in palette");
    }
    if (entries.size() > 1 && min_color_distance() == 0.0) {
        throw ValidationError("palette colors must be pairwise distinct");
    }
}

namespace {

template <std::size_t N>
std::array<double, N> read_reals(const json& j, const char* what) {
    if (!j.is_array() || j.size() != N) {
        throw ValidationError(std::string(what) + " must be an array of " + std::to_string(N) + " numbers");
    }
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        if (!j[i].is_number()) throw ValidationError(std::string(what) + " must contain numbers");
        out[i] = j[i].get<double>();
    }
    return out;
}

Vec3 read_vec3(const json& j, const char* what) {
    const auto a = read_reals<3>(j, what);
    return Vec3(a[0], a[1], a[2]);
}

PoseVector read_pose(const json& j, const char* what) {
    PoseVector pose = PoseVector::from_array(read_reals<6>(j, what));
    if (!pose.is_finite()) throw ValidationError(std::string(what) + " must be finite");
    return pose;
}

const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
    return j.at(key);
}

ClassId read_class_id(const json& j) {
    if (!j.is_number_integer()) throw ValidationError("class id must be an integer");
    const auto v = j.get<long long>();
    if (v < 0 || v > 255) throw ValidationError("class id " + std::to_string(v) + " outside [0, 255]");
    return static_cast<ClassId>(v);
}

std::filesystem::path resolve(const std::filesystem::path& base, const json& j) {
    if (!j.is_string()) throw ValidationError("file reference must be a string");
    std::filesystem::path p = j.get<std::string>();
    if (p.is_relative()) p = base / p;
    if (!std::filesystem::exists(p)) throw ValidationError("missing file " + p.string());
    return p;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("missing file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed document: ") + e.what());
    }
}

}  // namespace

ClassPalette parse_palette(std::string_view json_text) {
    const json doc = parse_json(json_text);
    if (!doc.is_array()) throw ValidationError("palette must be a list of {id, color, name}");
    ClassPalette palette;
    for (const auto& item : doc) {
        ClassPalette::Entry e;
        e.id = read_class_id(require(item, "id"));
        const auto c = read_reals<3>(require(item, "color"), "palette color");
        for (int k = 0; k < 3; ++k) {
            if (c[k] < 0 || c[k] > 255 || c[k] != std::floor(c[k])) {
                throw ValidationError("palette colors must be 8-bit integers");
            }
            e.color[k] = static_cast<std::uint8_t>(c[k]);
        }
        if (item.contains("name")) e.name = item.at("name").get<std::string>();
        palette.entries.push_back(std::move(e));
    }
    // Void is implicit when the palette does not name it.
    if (!palette.contains(0)) palette.entries.insert(palette.entries.begin(), {0, {0, 0, 0}, "void"});
    palette.validate();
    return palette;
}

ClassPalette load_palette(const std::filesystem::path& path) { return parse_palette(slurp(path)); }

void SceneDescription::validate() const {
    settings.validate();
    light.validate();
    palette.validate();
    if (!camera.is_finite()) throw ValidationError("camera pose must be finite");
    for (const auto& pose : trajectory) {
        if (!pose.is_finite()) throw ValidationError("trajectory poses must be finite");
    }
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const auto& obj = objects[i];
        if (!obj.pose.is_finite()) throw ValidationError("object " + std::to_string(i) + " pose must be finite");
        if (obj.class_id == 0 || !palette.contains(obj.class_id)) {
            throw ValidationError("object " + std::to_string(i) + " class id " + std::to_string(obj.class_id) +
                                  " is not a palette class");
        }
        obj.semantic_mesh.validate();
    }
    std::set<std::size_t> seen;
    for (const auto& item : interest) {
        if (item.object_index >= objects.size()) {
            throw ValidationError("interest index " + std::to_string(item.object_index) + " does not name one of the " +
                                  std::to_string(objects.size()) + " objects");
        }
        if (!seen.insert(item.object_index).second) {
            throw ValidationError("interest index " + std::to_string(item.object_index) + " listed twice");
        }
        item.mesh.validate();
        if (item.texture && !item.mesh.has_uvs()) {
            throw ValidationError("interest mesh for object " + std::to_string(item.object_index) +
                                  " has a texture but no uvs");
        }
        if ((item.albedo.array() < 0.0).any() || (item.albedo.array() > 1.0).any()) {
            throw ValidationError("albedo must lie in [0,1]");
        }
        if (!item.emission.allFinite() || (item.emission.array() < 0.0).any()) {
            throw ValidationError("emission must be finite and non-negative");
        }
    }
}

namespace {

SceneDescription build_scene(const json& doc, const std::filesystem::path& base_dir) {
    SceneDescription scene;

    scene.palette = load_palette(resolve(base_dir, require(doc, "palette")));

    const json& settings = require(doc, "settings");
    scene.settings.width = require(settings, "width").get<int>();
    scene.settings.height = require(settings, "height").get<int>();
    scene.settings.focal_px = require(settings, "focal_px").get<double>();

    scene.camera = read_pose(require(doc, "camera"), "camera");

    const json& light = require(doc, "light");
    const std::string kind = require(light, "kind").get<std::string>();
    if (kind == "directional") {
        scene.light.kind = LightSource::Kind::directional;
    } else if (kind == "point") {
        scene.light.kind = LightSource::Kind::point;
    } else {
        throw ValidationError("light kind must be 'directional' or 'point', got '" + kind + "'");
    }
    scene.light.vector = read_vec3(require(light, "vector"), "light vector");
    scene.light.radiance = read_vec3(require(light, "radiance"), "light radiance");

    for (const auto& item : require(doc, "objects")) {
        SceneObject obj;
        obj.pose = read_pose(require(item, "pose"), "object pose");
        obj.semantic_mesh = load_obj(resolve(base_dir, require(item, "mesh")));
        obj.class_id = read_class_id(require(item, "class_id"));
        scene.objects.push_back(std::move(obj));
    }

    if (doc.contains("interest")) {
        for (const auto& item : doc.at("interest")) {
            InterestObject entry;
            const json& index = require(item, "object_index");
            if (!index.is_number_integer() || index.get<long long>() < 0) {
                throw ValidationError("interest object_index must be a non-negative integer");
            }
            entry.object_index = index.get<std::size_t>();
            entry.mesh = load_obj(resolve(base_dir, require(item, "mesh")));
            if (item.contains("texture")) {
                entry.texture = Texture{read_color_image(resolve(base_dir, item.at("texture"))), Sampling::bilinear};
                if (item.contains("sampling")) {
                    const std::string mode = item.at("sampling").get<std::string>();
                    if (mode == "nearest") {
                        entry.texture->sampling = Sampling::nearest;
                    } else if (mode != "bilinear") {
                        throw ValidationError("sampling must be 'nearest' or 'bilinear'");
                    }
                }
            }
            if (item.contains("albedo")) entry.albedo = read_vec3(item.at("albedo"), "albedo");
            if (item.contains("emission")) entry.emission = read_vec3(item.at("emission"), "emission");
            scene.interest.push_back(std::move(entry));
        }
    }

    if (doc.contains("trajectory")) {
        for (const auto& pose : doc.at("trajectory")) scene.trajectory.push_back(read_pose(pose, "trajectory pose"));
    }

    scene.validate();
    return scene;
}

}  // namespace

SceneDescription parse_scene(std::string_view json_text, const std::filesystem::path& base_dir) {
    const json doc = parse_json(json_text);
    try {
        return build_scene(doc, base_dir);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("scene document: ") + e.what());
    }
}

SceneDescription load_scene(const std::filesystem::path& path) {
    return parse_scene(slurp(path), path.parent_path());
}

}  // namespace hncg
