#include "hncg/render.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

#include "hncg/error.hpp"
#include "visibility.hpp"

namespace hncg {

Vec3 Material::albedo_at(const Vec2& uv) const {
    if (const auto* tex = std::get_if<const Texture*>(&albedo)) return (*tex)->sample(uv);
    return std::get<Vec3>(albedo);
}

Vec3 shade_point(const Vec3& p, const Vec3& n, const Material& mat, const Vec2& uv, const LightSource& light,
                 const Vec3& /*view_dir*/) {
    const double n_len = n.norm();
    if (!(n_len > 0.0)) throw ValidationError("shade_point: zero-length normal");
    const Vec3 normal = n / n_len;

    Vec3 incoming_dir;
    Vec3 incoming = light.radiance;
    if (light.kind == LightSource::Kind::directional) {
        incoming_dir = -light.vector.normalized();
    } else {
        const Vec3 to_light = light.vector - p;
        const double r2 = to_light.squaredNorm();
        if (r2 == 0.0) return mat.emission;
        incoming_dir = to_light / std::sqrt(r2);
        incoming /= r2;
    }
    const double cos_theta = std::max(0.0, incoming_dir.dot(normal));
    const Vec3 brdf = mat.albedo_at(uv) / std::numbers::pi;
    return mat.emission + brdf.cwiseProduct(incoming) * cos_theta;
}

namespace {

struct ShadedInstance {
    detail::MeshInstance instance;
    Material material;
    ClassId class_id = 0;
};

struct ShadeResult {
    Image rgb;
    Image alpha;
    SemanticImage class_ids;
};

ShadeResult shade_instances(const std::vector<ShadedInstance>& items, const LightSource& light,
                            const PoseVector& camera, const Intrinsics& K) {
    std::vector<detail::MeshInstance> instances;
    instances.reserve(items.size());
    for (const auto& item : items) instances.push_back(item.instance);
    const auto buffer = detail::resolve_visibility(instances, camera, K);

    ShadeResult out{Image(K.width, K.height, 3, 0.0), Image(K.width, K.height, 1, 0.0),
                    SemanticImage(K.width, K.height, 1, 0)};
    for (int y = 0; y < K.height; ++y) {
        for (int x = 0; x < K.width; ++x) {
            const auto& frag = buffer[static_cast<std::size_t>(y) * K.width + x];
            if (!frag.covered()) continue;
            const ShadedInstance& item = items[frag.instance];
            const TriMesh& mesh = *item.instance.mesh;
            const auto& q = mesh.faces[frag.face];

            std::array<Vec3, 3> corner;
            for (int k = 0; k < 3; ++k) {
                corner[k] = transform_to_camera(mesh.vertices[q[k] - 1], item.instance.pose, camera);
            }
            const Vec3 p = frag.bary.x() * corner[0] + frag.bary.y() * corner[1] + frag.bary.z() * corner[2];
            const Vec3 n = (corner[1] - corner[0]).cross(corner[2] - corner[0]);
            Vec2 uv = Vec2::Zero();
            if (mesh.has_uvs()) {
                uv = frag.bary.x() * mesh.uvs[q[0] - 1] + frag.bary.y() * mesh.uvs[q[1] - 1] +
                     frag.bary.z() * mesh.uvs[q[2] - 1];
            }
            const Vec3 radiance = shade_point(p, n, item.material, uv, light, -p.normalized());
            for (int c = 0; c < 3; ++c) out.rgb.at(x, y, c) = radiance[c];
            out.alpha.at(x, y) = 1.0;
            out.class_ids.at(x, y) = item.class_id;
        }
    }
    return out;
}

Material interest_material(const InterestObject& item) {
    Material mat;
    if (item.texture) {
        mat.albedo = &*item.texture;
    } else {
        mat.albedo = item.albedo;
    }
    mat.emission = item.emission;
    return mat;
}

}  // namespace

PartialRender render_partial(const SceneDescription& scene, const PoseVector& camera, const Intrinsics& K) {
    std::vector<ShadedInstance> items;
    for (const auto& item : scene.interest) {
        if (item.object_index >= scene.objects.size()) {
            throw ValidationError("interest index " + std::to_string(item.object_index) + " out of range");
        }
        if (item.texture && !item.mesh.has_uvs()) {
            throw ValidationError("interest mesh for object " + std::to_string(item.object_index) +
                                  " references a texture but has no uvs");
        }
        const SceneObject& obj = scene.objects[item.object_index];
        items.push_back({{&item.mesh, obj.pose, static_cast<int>(item.object_index)},
                         interest_material(item),
                         obj.class_id});
    }
    ShadeResult shaded = shade_instances(items, scene.light, camera, K);
    return PartialRender{std::move(shaded.rgb), std::move(shaded.alpha), std::move(shaded.class_ids)};
}

PartialRender render_partial(const SceneDescription& scene, const Intrinsics& K) {
    return render_partial(scene, scene.camera, K);
}

Image render_full(const SceneDescription& scene, const PoseVector& camera, const Intrinsics& K) {
    std::vector<const InterestObject*> detailed(scene.objects.size(), nullptr);
    for (const auto& item : scene.interest) {
        if (item.object_index < detailed.size()) detailed[item.object_index] = &item;
    }
    std::vector<ShadedInstance> items;
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
        const SceneObject& obj = scene.objects[i];
        if (detailed[i] != nullptr) {
            items.push_back({{&detailed[i]->mesh, obj.pose, static_cast<int>(i)},
                             interest_material(*detailed[i]),
                             obj.class_id});
        } else {
            Material mat;
            mat.albedo = Vec3(scene.palette.unit_color(obj.class_id));
            items.push_back({{&obj.semantic_mesh, obj.pose, static_cast<int>(i)}, mat, obj.class_id});
        }
    }
    return shade_instances(items, scene.light, camera, K).rgb;
}

Image encode_display(const Image& linear) {
    Image out = linear;
    for (double& v : out.values()) {
        v = std::pow(std::clamp(std::isnan(v) ? 0.0 : v, 0.0, 1.0), 1.0 / kDisplayGamma);
    }
    return out;
}

}  // namespace hncg
