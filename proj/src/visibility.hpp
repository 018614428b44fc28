#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <vector>

#include "hncg/raster.hpp"
#include "hncg/scene.hpp"

namespace hncg::detail {

// One mesh placed in the scene. `owner` ranks equal-depth fragments (lower wins).
struct MeshInstance {
    const TriMesh* mesh = nullptr;
    PoseVector pose;
    int owner = 0;
};

// Nearest surface seen through one pixel centre. `bary` holds perspective
// correct barycentric weights on the original (unclipped) face corners.
struct Fragment {
    double depth = std::numeric_limits<double>::infinity();
    int owner = -1;
    int instance = -1;
    int face = -1;
    Vec3 bary = Vec3::Zero();

    bool covered() const noexcept { return owner >= 0; }
};

// Row-major W*H visibility buffer.
std::vector<Fragment> resolve_visibility(const std::vector<MeshInstance>& instances, const PoseVector& camera,
                                         const Intrinsics& K);

}  // namespace hncg::detail
