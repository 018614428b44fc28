#include "oracles.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace oracle {

namespace {

Eigen::Matrix4d rot_x(double a) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m(1, 1) = std::cos(a);
    m(1, 2) = -std::sin(a);
    m(2, 1) = std::sin(a);
    m(2, 2) = std::cos(a);
    return m;
}

Eigen::Matrix4d rot_y(double a) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m(0, 0) = std::cos(a);
    m(0, 2) = std::sin(a);
    m(2, 0) = -std::sin(a);
    m(2, 2) = std::cos(a);
    return m;
}

Eigen::Matrix4d rot_z(double a) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m(0, 0) = std::cos(a);
    m(0, 1) = -std::sin(a);
    m(1, 0) = std::sin(a);
    m(1, 1) = std::cos(a);
    return m;
}

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

}  // namespace

Eigen::Matrix4d pose_matrix(const hncg::PoseVector& pose) {
    Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
    t.block<3, 1>(0, 3) = pose.position;
    return t * rot_z(pose.orientation.z()) * rot_y(pose.orientation.y()) * rot_x(pose.orientation.x());
}

Vec3 to_camera(const Vec3& p, const hncg::PoseVector& object_pose, const hncg::PoseVector& camera_pose) {
    const Eigen::Matrix4d m = pose_matrix(camera_pose).inverse() * pose_matrix(object_pose);
    return (m * p.homogeneous()).head<3>();
}

Eigen::Matrix<double, 3, 4> projection_matrix(const hncg::Intrinsics& K) {
    Eigen::Matrix<double, 3, 4> P = Eigen::Matrix<double, 3, 4>::Zero();
    P(0, 0) = K.focal_px;
    P(0, 2) = -K.cx;
    P(1, 1) = -K.focal_px;
    P(1, 2) = -K.cy;
    P(2, 2) = -1.0;
    return P;
}

Eigen::Vector2d project(const Vec3& p_cam, const hncg::Intrinsics& K) {
    const Eigen::Vector3d h = projection_matrix(K) * p_cam.homogeneous();
    return h.head<2>() / h.z();
}

double ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 e1 = b - a, e2 = c - a;
    const Vec3 pv = dir.cross(e2);
    const double det = e1.dot(pv);
    if (std::abs(det) < 1e-14) return -1.0;
    const double inv = 1.0 / det;
    const Vec3 tv = origin - a;
    const double u = tv.dot(pv) * inv;
    if (u < 0.0 || u > 1.0) return -1.0;
    const Vec3 qv = tv.cross(e1);
    const double v = dir.dot(qv) * inv;
    if (v < 0.0 || u + v > 1.0) return -1.0;
    return e2.dot(qv) * inv;
}

std::vector<RayHit> ray_cast(const std::vector<hncg::SceneObject>& objects, const hncg::PoseVector& camera,
                             const hncg::Intrinsics& K) {
    struct Tri {
        Vec3 a, b, c;
        int object;
    };
    std::vector<Tri> tris;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const auto& mesh = objects[i].semantic_mesh;
        for (const auto& f : mesh.faces) {
            tris.push_back({to_camera(mesh.vertices[f[0] - 1], objects[i].pose, camera),
                            to_camera(mesh.vertices[f[1] - 1], objects[i].pose, camera),
                            to_camera(mesh.vertices[f[2] - 1], objects[i].pose, camera), static_cast<int>(i)});
        }
    }
    std::vector<RayHit> hits(static_cast<std::size_t>(K.width) * K.height);
    for (int y = 0; y < K.height; ++y) {
        for (int x = 0; x < K.width; ++x) {
            const Vec3 dir((x + 0.5 - K.cx) / K.focal_px, -(y + 0.5 - K.cy) / K.focal_px, -1.0);
            RayHit best{-1, std::numeric_limits<double>::infinity()};
            for (const auto& t : tris) {
                const double s = ray_triangle(Vec3::Zero(), dir, t.a, t.b, t.c);
                if (s <= 0.0) continue;
                if (s < best.t || (s == best.t && t.object < best.object)) best = {t.object, s};
            }
            hits[static_cast<std::size_t>(y) * K.width + x] = best;
        }
    }
    return hits;
}

SemanticImage ray_cast_ids(const hncg::SceneDescription& scene, const hncg::Intrinsics& K) {
    const auto hits = ray_cast(scene.objects, scene.camera, K);
    SemanticImage ids(K.width, K.height, 1, 0);
    for (int y = 0; y < K.height; ++y) {
        for (int x = 0; x < K.width; ++x) {
            const auto& h = hits[static_cast<std::size_t>(y) * K.width + x];
            if (h.object >= 0) ids.at(x, y) = scene.objects[h.object].class_id;
        }
    }
    return ids;
}

hncg::ClassPalette test_palette(int classes) {
    hncg::ClassPalette p;
    p.entries.push_back({0, {0, 0, 0}, "void"});
    for (int k = 1; k <= classes; ++k) {
        p.entries.push_back({static_cast<hncg::ClassId>(k),
                             {static_cast<std::uint8_t>((k * 53) % 256), static_cast<std::uint8_t>((k * 97) % 256),
                              static_cast<std::uint8_t>((k * 151) % 256)},
                             "class" + std::to_string(k)});
    }
    return p;
}

hncg::SceneDescription random_scene(std::mt19937_64& rng, int max_triangles, int width, int height) {
    hncg::SceneDescription scene;
    scene.settings = {width, height, 0.75 * width};
    scene.palette = test_palette(9);
    auto random_pose = [&](double spread) {
        hncg::PoseVector p;
        p.position = Vec3(uniform(rng, -spread, spread), uniform(rng, -spread, spread), uniform(rng, -spread, spread));
        p.orientation = Vec3(uniform(rng, -3.1, 3.1), uniform(rng, -1.5, 1.5), uniform(rng, -3.1, 3.1));
        return p;
    };
    scene.camera = random_pose(3.0);
    const double half_fov = 0.5 * width / scene.settings.focal_px;

    int remaining = std::uniform_int_distribution<int>(max_triangles / 2, max_triangles)(rng);
    while (remaining > 0) {
        hncg::SceneObject obj;
        obj.pose = random_pose(5.0);
        obj.class_id = static_cast<hncg::ClassId>(std::uniform_int_distribution<int>(1, 9)(rng));
        const Eigen::Matrix4d local_from_cam = pose_matrix(obj.pose).inverse() * pose_matrix(scene.camera);
        const int count = std::min(remaining, std::uniform_int_distribution<int>(1, 4)(rng));
        for (int t = 0; t < count; ++t) {
            const double z = uniform(rng, -9.0, -1.5);
            const Vec3 centre(uniform(rng, -half_fov, half_fov) * -z, uniform(rng, -half_fov, half_fov) * -z, z);
            const bool crossing = uniform(rng, 0.0, 1.0) < 0.1;
            for (int k = 0; k < 3; ++k) {
                Vec3 v = centre + Vec3(uniform(rng, -2.5, 2.5), uniform(rng, -2.5, 2.5), uniform(rng, -1.0, 1.0));
                if (crossing && k == 0) v.z() = uniform(rng, 0.5, 2.0);
                obj.semantic_mesh.vertices.push_back((local_from_cam * v.homogeneous()).head<3>());
            }
            const int base = static_cast<int>(obj.semantic_mesh.vertices.size()) - 3;
            obj.semantic_mesh.faces.push_back({base + 1, base + 2, base + 3});
        }
        remaining -= count;
        scene.objects.push_back(std::move(obj));
    }
    return scene;
}

hncg::TriMesh random_mesh(std::mt19937_64& rng, bool with_uvs) {
    hncg::TriMesh mesh;
    const int groups = std::uniform_int_distribution<int>(1, 10)(rng);
    for (int i = 0; i < 3 * groups; ++i) {
        mesh.vertices.emplace_back(uniform(rng, -100, 100), uniform(rng, -100, 100), uniform(rng, -100, 100));
        if (with_uvs) mesh.uvs.emplace_back(uniform(rng, 0, 1), uniform(rng, 0, 1));
    }
    // Every vertex is referenced at least once, so per-reference uvs survive.
    for (int g = 0; g < groups; ++g) mesh.faces.push_back({3 * g + 1, 3 * g + 3, 3 * g + 2});
    const int n = static_cast<int>(mesh.vertices.size());
    const int extra = std::uniform_int_distribution<int>(0, 15)(rng);
    std::uniform_int_distribution<int> pick(1, n);
    for (int i = 0; i < extra; ++i) {
        std::array<int, 3> f{};
        do {
            f = {pick(rng), pick(rng), pick(rng)};
        } while (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]);
        mesh.faces.push_back(f);
    }
    return mesh;
}

std::string serialize_obj(const hncg::TriMesh& mesh) {
    std::string out = "# random mesh\n";
    char buf[128];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        out += buf;
    }
    for (const auto& t : mesh.uvs) {
        std::snprintf(buf, sizeof buf, "vt %.17g %.17g\n", t.x(), t.y());
        out += buf;
    }
    for (const auto& f : mesh.faces) {
        if (mesh.has_uvs()) {
            std::snprintf(buf, sizeof buf, "f %d/%d %d/%d %d/%d\n", f[0], f[0], f[1], f[1], f[2], f[2]);
        } else {
            std::snprintf(buf, sizeof buf, "f %d %d %d\n", f[0], f[1], f[2]);
        }
        out += buf;
    }
    return out;
}

Image dense_poisson(const Image& background, const Image& foreground, const Image& coverage) {
    const int w = background.width(), h = background.height();
    std::vector<int> id(static_cast<std::size_t>(w) * h, -1);
    int n = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (coverage.at(x, y) >= 0.5) id[y * w + x] = n++;

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    const int nx[4] = {-1, 1, 0, 0}, ny[4] = {0, 0, -1, 1};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int i = id[y * w + x];
            if (i < 0) continue;
            A(i, i) = 4.0;
            for (int k = 0; k < 4; ++k) {
                const int j = id[(y + ny[k]) * w + x + nx[k]];
                if (j >= 0) A(i, j) = -1.0;
            }
        }
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Image out = background;
    for (int c = 0; c < background.channels(); ++c) {
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const int i = id[y * w + x];
                if (i < 0) continue;
                for (int k = 0; k < 4; ++k) {
                    const int qx = x + nx[k], qy = y + ny[k];
                    b(i) += foreground.at(x, y, c) - foreground.at(qx, qy, c);
                    if (id[qy * w + qx] < 0) b(i) += background.at(qx, qy, c);
                }
            }
        }
        const Eigen::VectorXd f = lu.solve(b);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (const int i = id[y * w + x]; i >= 0) out.at(x, y, c) = std::clamp(f(i), 0.0, 1.0);
    }
    return out;
}

double fid_nonsymmetric(const hncg::FeatureStats& a, const hncg::FeatureStats& b) {
    const Eigen::EigenSolver<Eigen::MatrixXd> es(a.cov * b.cov, false);
    double tr_sqrt = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) tr_sqrt += std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
    return (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * tr_sqrt;
}

hncg::FeatureStats two_pass_stats(const hncg::FeatureMatrix& f) {
    const std::size_t n = f.rows, d = f.cols;
    hncg::FeatureStats s;
    s.mean = Eigen::VectorXd::Zero(d);
    for (std::size_t j = 0; j < d; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += f.at(i, j);
        s.mean(j) = sum / n;
    }
    s.cov = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = 0; k < d; ++k) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) sum += (f.at(i, j) - s.mean(j)) * (f.at(i, k) - s.mean(k));
            s.cov(j, k) = sum / (n - 1);
        }
    }
    return s;
}

Eigen::MatrixXd random_psd(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(d, d + 3);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
    return a * a.transpose() / (d + 3);
}

double retention_loop(const SemanticImage& layout, const SemanticImage& predicted, const std::set<hncg::ClassId>& ignore) {
    long counted = 0, agree = 0;
    for (int y = 0; y < layout.height(); ++y) {
        for (int x = 0; x < layout.width(); ++x) {
            if (ignore.count(layout.at(x, y))) continue;
            ++counted;
            if (layout.at(x, y) == predicted.at(x, y)) ++agree;
        }
    }
    return static_cast<double>(agree) / static_cast<double>(counted);
}

hncg::Activation spade_loop(const hncg::Activation& h, const hncg::Modulation& gamma, const hncg::Modulation& beta,
                            const std::vector<double>& mu, const std::vector<double>& sigma) {
    hncg::Activation out(h.n, h.c, h.y, h.x);
    for (int n = 0; n < h.n; ++n)
        for (int c = 0; c < h.c; ++c)
            for (int y = 0; y < h.y; ++y)
                for (int x = 0; x < h.x; ++x)
                    out.at(n, c, y, x) = gamma.at(0, c, y, x) * ((h.at(n, c, y, x) - mu[c]) / sigma[c]) + beta.at(0, c, y, x);
    return out;
}

std::vector<double> stub_features_loop(const Image& rgb) {
    const int w = rgb.width(), h = rgb.height();
    std::vector<double> f;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> hist(64, 0.0);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double v = std::clamp(rgb.at(x, y, c), 0.0, 1.0);
                hist[std::min(63, static_cast<int>(std::floor(v * 64.0)))] += 1.0;
            }
        }
        for (double b : hist) f.push_back(b / (static_cast<double>(w) * h));
    }
    auto luma = [&](int x, int y) { return 0.299 * rgb.at(x, y, 0) + 0.587 * rgb.at(x, y, 1) + 0.114 * rgb.at(x, y, 2); };
    // Block b spans the pixels whose scaled coordinate floor(8 x / w) is b.
    auto first = [](int b, int extent) { return (b * extent + 7) / 8; };
    for (int by = 0; by < 8; ++by) {
        for (int bx = 0; bx < 8; ++bx) {
            double sum = 0.0;
            int count = 0;
            for (int y = first(by, h); y < first(by + 1, h); ++y) {
                for (int x = first(bx, w); x < first(bx + 1, w); ++x) {
                    sum += luma(x, y);
                    ++count;
                }
            }
            f.push_back(count > 0 ? sum / count : luma(bx * w / 8, by * h / 8));
        }
    }
    return f;
}

Image random_image(std::mt19937_64& rng, int width, int height, int channels) {
    Image img(width, height, channels);
    for (double& v : img.values()) v = uniform(rng, 0.0, 1.0);
    return img;
}

double max_abs_diff(const Image& a, const Image& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

}  // namespace oracle
