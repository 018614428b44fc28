#pragma once

#include <optional>
#include <vector>

#include "hncg/grid.hpp"
#include "hncg/scene.hpp"

namespace hncg {

// Pinhole intrinsics in pixel units. Continuous pixel coordinates place the
// centre of pixel (x, y) at (x + 0.5, y + 0.5).
struct Intrinsics {
    double focal_px = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 1;
    int height = 1;

    // Principal point at the image centre.
    static Intrinsics from_settings(const RenderSettings& settings);
};

// Raw pinhole relation on the image plane at distance d behind the pinhole:
// (m1, m2) = -d / p3 * (p1, p2). The resulting image is upside down.
Vec2 pinhole_image_plane(const Vec3& p, double plane_distance);

// Upright pixel coordinates of a camera-frame point: the raw pinhole image
// rotated by 180 degrees and mapped to pixels. Returns nullopt for points
// that are not in front of the camera (z >= 0).
std::optional<Vec2> project_point(const Vec3& p_cam, const Intrinsics& K);

// Near clipping distance for triangles that cross the camera plane.
inline constexpr double kNearClip = 1e-6;

struct SemanticRaster {
    SemanticImage ids;
    DepthBuffer depth;
};

// Z-buffered rasterization of the semantic meshes. A pixel is covered when its
// centre lies inside a projected triangle (top-left rule on shared edges);
// equal depths go to the lower object index.
SemanticRaster rasterize_semantic(const SceneDescription& scene, const Intrinsics& K);
SemanticRaster rasterize_semantic(const SceneDescription& scene, const PoseVector& camera, const Intrinsics& K);

// Substitutes each id with its palette color, in [0,1].
Image colorize_semantic(const SemanticImage& m, const ClassPalette& palette);

// Nearest palette color under the L-infinity distance; ties go to the
// palette entry listed first.
SemanticImage declassify_nearest(const Image& rgb, const ClassPalette& palette);

}  // namespace hncg
