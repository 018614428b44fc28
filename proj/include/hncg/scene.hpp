#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hncg/grid.hpp"

namespace hncg {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Rigid pose: position in meters, orientation as (roll, pitch, yaw) radians.
// Rotation is R = Rz(yaw) * Ry(pitch) * Rx(roll); the pose maps local
// coordinates to world coordinates as p_world = R * p_local + position.
struct PoseVector {
    Vec3 position = Vec3::Zero();
    Vec3 orientation = Vec3::Zero();

    static PoseVector from_array(const std::array<double, 6>& values);
    std::array<double, 6> to_array() const;
    bool is_finite() const;
};

Mat3 rotation_matrix(const PoseVector& pose);

// object -> world -> camera. The camera pose is the camera-to-world transform,
// and the camera looks down its local -z axis with +y up.
Vec3 transform_to_camera(const Vec3& p, const PoseVector& object_pose, const PoseVector& camera_pose);
// Inverse of transform_to_camera.
Vec3 transform_from_camera(const Vec3& p_cam, const PoseVector& object_pose, const PoseVector& camera_pose);

// Triangle mesh. Face indices are 1-based, as in OBJ files.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<Vec2> uvs;  // empty, or one per vertex

    bool has_uvs() const noexcept { return !uvs.empty(); }
    const Vec3& corner(std::size_t face, int k) const { return vertices[faces[face][k] - 1]; }
    void validate() const;

    bool operator==(const TriMesh&) const = default;
};

// Parses the triangle subset of Wavefront OBJ: v, vt and f records (f entries
// may be "a", "a/at", "a/at/an" or "a//an"). Normal, group, smoothing and
// material records are skipped; any other record is an error.
TriMesh parse_obj(std::istream& in);
TriMesh parse_obj(std::string_view text);
TriMesh load_obj(const std::filesystem::path& path);

enum class Sampling { nearest, bilinear };

// RGB texture in [0,1]. uv (0,0) is the bottom-left corner of the image.
struct Texture {
    Image rgb;
    Sampling sampling = Sampling::bilinear;

    Vec3 sample(const Vec2& uv) const;
};

struct LightSource {
    enum class Kind { directional, point };
    Kind kind = Kind::directional;
    // Directional: the direction light travels. Point: light position.
    // Expressed in the camera frame, since the light is fixed relative to it.
    Vec3 vector = Vec3(0.0, 0.0, -1.0);
    Vec3 radiance = Vec3::Zero();

    void validate() const;
};

struct RenderSettings {
    int width = 64;
    int height = 64;
    double focal_px = 64.0;

    void validate() const;
};

struct ClassPalette {
    struct Entry {
        ClassId id = 0;
        std::array<std::uint8_t, 3> color{};
        std::string name;
    };
    std::vector<Entry> entries;

    const Entry* find(ClassId id) const noexcept;
    bool contains(ClassId id) const noexcept { return find(id) != nullptr; }
    // Unit-range RGB of a class; throws ValidationError for unknown ids.
    Vec3 unit_color(ClassId id) const;
    // Smallest pairwise L-infinity color distance, in [0,1] units.
    double min_color_distance() const;
    void validate() const;
};

ClassPalette parse_palette(std::string_view json_text);
ClassPalette load_palette(const std::filesystem::path& path);

struct SceneObject {
    PoseVector pose;
    TriMesh semantic_mesh;
    ClassId class_id = 0;
};

// Detailed mesh and surface description for one object of interest.
struct InterestObject {
    std::size_t object_index = 0;
    TriMesh mesh;
    std::optional<Texture> texture;
    Vec3 albedo = Vec3::Constant(0.8);  // used when no texture is given
    Vec3 emission = Vec3::Zero();
};

struct SceneDescription {
    std::vector<SceneObject> objects;
    std::vector<InterestObject> interest;
    PoseVector camera;
    LightSource light;
    RenderSettings settings;
    ClassPalette palette;
    // Optional camera path; empty means the single pose `camera`.
    std::vector<PoseVector> trajectory;

    void validate() const;
};

// Reads a scene document; relative paths resolve against `base_dir`.
SceneDescription parse_scene(std::string_view json_text, const std::filesystem::path& base_dir);
SceneDescription load_scene(const std::filesystem::path& path);

}  // namespace hncg
