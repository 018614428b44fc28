#pragma once

#include <variant>

#include "hncg/grid.hpp"
#include "hncg/raster.hpp"
#include "hncg/scene.hpp"

namespace hncg {

// Lambertian surface: constant or textured albedo, plus emitted radiance.
struct Material {
    std::variant<Vec3, const Texture*> albedo = Vec3(0.8, 0.8, 0.8);
    Vec3 emission = Vec3::Zero();

    bool textured() const noexcept { return std::holds_alternative<const Texture*>(albedo); }
    Vec3 albedo_at(const Vec2& uv) const;
};

// Linear radiance of the objects of interest with binary coverage.
struct PartialRender {
    Image rgb;             // 3 channels, 0 wherever alpha is 0
    Image alpha;           // 1 channel, exactly 0 or 1
    SemanticImage class_ids;  // class of the covering interest object, 0 elsewhere

    bool covered(int x, int y) const { return alpha.at(x, y) != 0.0; }
};

// Outgoing radiance at a surface point under one delta light:
// L_e + albedo(uv) / pi * L_i * max(0, w_i . n).
// Point lights fall off as 1/r^2. `view_dir` does not affect a Lambertian surface.
Vec3 shade_point(const Vec3& p, const Vec3& n, const Material& mat, const Vec2& uv, const LightSource& light,
                 const Vec3& view_dir);

// Renders only the objects of interest with flat face normals.
PartialRender render_partial(const SceneDescription& scene, const Intrinsics& K);
PartialRender render_partial(const SceneDescription& scene, const PoseVector& camera, const Intrinsics& K);

// Conventional full render: every object shaded, with palette colors as albedo
// for plain objects and the detailed interest meshes in place of their proxies.
Image render_full(const SceneDescription& scene, const PoseVector& camera, const Intrinsics& K);

// Display encoding of linear radiance: clamp to [0,1], then gamma 1/2.2.
inline constexpr double kDisplayGamma = 2.2;
Image encode_display(const Image& linear);

}  // namespace hncg
