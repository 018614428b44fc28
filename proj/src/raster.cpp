#include "hncg/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hncg/error.hpp"
#include "visibility.hpp"

namespace hncg {

Intrinsics Intrinsics::from_settings(const RenderSettings& settings) {
    settings.validate();
    return {settings.focal_px, settings.width / 2.0, settings.height / 2.0, settings.width, settings.height};
}

Vec2 pinhole_image_plane(const Vec3& p, double plane_distance) {
    return -plane_distance / p.z() * Vec2(p.x(), p.y());
}

std::optional<Vec2> project_point(const Vec3& p_cam, const Intrinsics& K) {
    if (!(p_cam.z() < 0.0)) return std::nullopt;
    // Unit-distance pinhole image, rotated by 180 degrees so the result is upright.
    const Vec2 m = -pinhole_image_plane(p_cam, 1.0);
    return Vec2(K.cx - K.focal_px * m.x(), K.cy + K.focal_px * m.y());
}

namespace detail {

namespace {

struct ClipVertex {
    Vec3 p;     // camera frame
    Vec3 bary;  // weights on the original face corners
};

// Keeps the part of the triangle with z <= -kNearClip.
int clip_near(const std::array<ClipVertex, 3>& tri, std::array<ClipVertex, 4>& out) {
    int n = 0;
    for (int i = 0; i < 3; ++i) {
        const ClipVertex& a = tri[i];
        const ClipVertex& b = tri[(i + 1) % 3];
        const bool a_in = a.p.z() <= -kNearClip;
        const bool b_in = b.p.z() <= -kNearClip;
        if (a_in) out[n++] = a;
        if (a_in != b_in) {
            const double t = (-kNearClip - a.p.z()) / (b.p.z() - a.p.z());
            ClipVertex v{a.p + t * (b.p - a.p), a.bary + t * (b.bary - a.bary)};
            v.p.z() = -kNearClip;
            out[n++] = v;
        }
    }
    return n;
}

double edge(const Vec2& a, const Vec2& b, const Vec2& p) {
    return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

// Inclusive edge under the top-left rule, for counter-clockwise-in-y-down order.
bool is_top_left(const Vec2& a, const Vec2& b) {
    const double dy = b.y() - a.y();
    return dy < 0.0 || (dy == 0.0 && b.x() > a.x());
}

bool inside(double w, bool top_left) { return w > 0.0 || (w == 0.0 && top_left); }

int clamp_to_int(double v, int lo, int hi) {
    if (!(v > lo)) return lo;
    if (!(v < hi)) return hi;
    return static_cast<int>(v);
}

template <typename Visit>
void rasterize_clipped(std::array<ClipVertex, 3> tri, const Intrinsics& K, Visit&& visit) {
    std::array<Vec2, 3> s;
    for (int i = 0; i < 3; ++i) s[i] = *project_point(tri[i].p, K);
    double area = edge(s[0], s[1], s[2]);
    if (!(std::abs(area) > 0.0) || !std::isfinite(area)) return;
    if (area < 0.0) {
        std::swap(s[1], s[2]);
        std::swap(tri[1], tri[2]);
        area = -area;
    }

    const double min_u = std::min({s[0].x(), s[1].x(), s[2].x()});
    const double max_u = std::max({s[0].x(), s[1].x(), s[2].x()});
    const double min_v = std::min({s[0].y(), s[1].y(), s[2].y()});
    const double max_v = std::max({s[0].y(), s[1].y(), s[2].y()});
    const int x0 = clamp_to_int(std::ceil(min_u - 0.5), 0, K.width);
    const int x1 = clamp_to_int(std::floor(max_u - 0.5), -1, K.width - 1);
    const int y0 = clamp_to_int(std::ceil(min_v - 0.5), 0, K.height);
    const int y1 = clamp_to_int(std::floor(max_v - 0.5), -1, K.height - 1);

    const bool tl0 = is_top_left(s[1], s[2]);
    const bool tl1 = is_top_left(s[2], s[0]);
    const bool tl2 = is_top_left(s[0], s[1]);
    const Vec3 inv_depth(-1.0 / tri[0].p.z(), -1.0 / tri[1].p.z(), -1.0 / tri[2].p.z());

    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const Vec2 p(x + 0.5, y + 0.5);
            const double w0 = edge(s[1], s[2], p);
            const double w1 = edge(s[2], s[0], p);
            const double w2 = edge(s[0], s[1], p);
            if (!inside(w0, tl0) || !inside(w1, tl1) || !inside(w2, tl2)) continue;
            const Vec3 lambda = Vec3(w0, w1, w2) / area;
            const Vec3 weighted = lambda.cwiseProduct(inv_depth);
            const double inv = weighted.sum();
            const Vec3 bary = (weighted.x() * tri[0].bary + weighted.y() * tri[1].bary + weighted.z() * tri[2].bary) / inv;
            visit(x, y, 1.0 / inv, bary);
        }
    }
}

}  // namespace

std::vector<Fragment> resolve_visibility(const std::vector<MeshInstance>& instances, const PoseVector& camera,
                                         const Intrinsics& K) {
    std::vector<Fragment> buffer(static_cast<std::size_t>(K.width) * K.height);
    std::vector<Vec3> cam;
    for (std::size_t inst = 0; inst < instances.size(); ++inst) {
        const MeshInstance& mi = instances[inst];
        const TriMesh& mesh = *mi.mesh;
        cam.resize(mesh.vertices.size());
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
            cam[v] = transform_to_camera(mesh.vertices[v], mi.pose, camera);
        }
        for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
            const auto& q = mesh.faces[f];
            const std::array<ClipVertex, 3> tri = {ClipVertex{cam[q[0] - 1], Vec3::UnitX()},
                                                   ClipVertex{cam[q[1] - 1], Vec3::UnitY()},
                                                   ClipVertex{cam[q[2] - 1], Vec3::UnitZ()}};
            std::array<ClipVertex, 4> poly;
            const int n = clip_near(tri, poly);
            auto visit = [&](int x, int y, double depth, const Vec3& bary) {
                Fragment& frag = buffer[static_cast<std::size_t>(y) * K.width + x];
                if (depth < frag.depth || (depth == frag.depth && mi.owner < frag.owner)) {
                    frag = Fragment{depth, mi.owner, static_cast<int>(inst), static_cast<int>(f), bary};
                }
            };
            for (int k = 1; k + 1 < n; ++k) rasterize_clipped({poly[0], poly[k], poly[k + 1]}, K, visit);
        }
    }
    return buffer;
}

}  // namespace detail

SemanticRaster rasterize_semantic(const SceneDescription& scene, const PoseVector& camera, const Intrinsics& K) {
    std::vector<detail::MeshInstance> instances;
    instances.reserve(scene.objects.size());
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
        instances.push_back({&scene.objects[i].semantic_mesh, scene.objects[i].pose, static_cast<int>(i)});
    }
    const auto buffer = detail::resolve_visibility(instances, camera, K);

    SemanticRaster out{SemanticImage(K.width, K.height, 1, 0),
                       DepthBuffer(K.width, K.height, 1, std::numeric_limits<double>::infinity())};
    for (int y = 0; y < K.height; ++y) {
        for (int x = 0; x < K.width; ++x) {
            const auto& frag = buffer[static_cast<std::size_t>(y) * K.width + x];
            if (!frag.covered()) continue;
            out.ids.at(x, y) = scene.objects[frag.owner].class_id;
            out.depth.at(x, y) = frag.depth;
        }
    }
    return out;
}

SemanticRaster rasterize_semantic(const SceneDescription& scene, const Intrinsics& K) {
    return rasterize_semantic(scene, scene.camera, K);
}

Image colorize_semantic(const SemanticImage& m, const ClassPalette& palette) {
    std::array<const ClassPalette::Entry*, 256> lut{};
    for (const auto& e : palette.entries) lut[e.id] = &e;
    Image out(m.width(), m.height(), 3);
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            const ClassPalette::Entry* e = lut[m.at(x, y)];
            if (e == nullptr) {
                throw ValidationError("class id " + std::to_string(m.at(x, y)) + " at (" + std::to_string(x) + ", " +
                                      std::to_string(y) + ") not in palette");
            }
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = e->color[c] / 255.0;
        }
    }
    return out;
}

SemanticImage declassify_nearest(const Image& rgb, const ClassPalette& palette) {
    if (rgb.channels() != 3) throw ValidationError("declassify expects an RGB image");
    if (palette.entries.empty()) throw ValidationError("declassify needs a non-empty palette");
    std::vector<Vec3> colors;
    for (const auto& e : palette.entries) colors.push_back(palette.unit_color(e.id));

    SemanticImage out(rgb.width(), rgb.height(), 1, 0);
    for (int y = 0; y < rgb.height(); ++y) {
        for (int x = 0; x < rgb.width(); ++x) {
            const Vec3 px(rgb.at(x, y, 0), rgb.at(x, y, 1), rgb.at(x, y, 2));
            double best = std::numeric_limits<double>::infinity();
            ClassId best_id = 0;
            for (std::size_t i = 0; i < colors.size(); ++i) {
                const double d = (px - colors[i]).cwiseAbs().maxCoeff();
                if (d < best) {
                    best = d;
                    best_id = palette.entries[i].id;
                }
            }
            out.at(x, y) = best_id;
        }
    }
    return out;
}

}  // namespace hncg
