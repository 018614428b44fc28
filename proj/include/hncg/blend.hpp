#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "hncg/grid.hpp"
#include "hncg/plug.hpp"
#include "hncg/render.hpp"

namespace hncg {

// Single-channel weights in [0,1].
using BlendMask = Image;

enum class BlendMode { alpha, pyramid, gp_classical, gan_plug };

// "alpha", "pyramid", "gp-classical", "gan-plug".
std::string_view to_string(BlendMode mode);
std::optional<BlendMode> parse_blend_mode(std::string_view name);

// alpha = 1 - coverage: the background weight of alpha_blend.
BlendMask coverage_to_alpha(const PartialRender& pr);
// The coverage itself as a mask (1 where the partial render covers).
BlendMask coverage_mask(const PartialRender& pr);

// I_h = alpha * background + (1 - alpha) * foreground, per pixel and channel.
Image alpha_blend(const Image& background, const Image& foreground, const BlendMask& alpha);

// Deepest pyramid allowed for an image: floor(log2(min(width, height))), at least 1.
int max_pyramid_levels(int width, int height);

// 5-tap binomial pyramids. Odd sizes are padded by edge replication before
// downsampling; upsampled levels are cropped back to the finer size.
std::vector<Image> gaussian_pyramid(const Image& img, int levels);
std::vector<Image> laplacian_pyramid(const Image& img, int levels);
Image collapse_pyramid(const std::vector<Image>& laplacian);

// Multi-band blend: per level G(mask) * L(foreground) + (1 - G(mask)) * L(background).
// Note the orientation: the mask weights the FOREGROUND here, so callers pass
// the coverage, not coverage_to_alpha.
Image pyramid_blend(const Image& background, const Image& foreground, const BlendMask& mask, int levels);

// Foreground where coverage is set, background elsewhere.
Image copy_paste_composite(const Image& background, const Image& foreground, const BlendMask& coverage);

struct PoissonOptions {
    int max_iters = 0;  // 0: ceil(10 * sqrt(region pixel count))
    double tol = 1e-8;  // relative to the initial residual
};

struct PoissonResult {
    Image image;
    int iterations = 0;  // worst channel
    int budget = 0;
    double residual_ratio = 0.0;  // worst channel, final / initial
};

// Gradient-domain blend: inside the covered region solve the 5-point Poisson
// equation with the foreground's gradients as guidance and the background as
// Dirichlet boundary, by conjugate gradients per channel. Pixels outside the
// region are copied from the background. The region must not touch the border.
PoissonResult poisson_blend_solve(const Image& background, const Image& foreground, const BlendMask& coverage,
                                  const PoissonOptions& options = {});
Image poisson_blend(const Image& background, const Image& foreground, const BlendMask& coverage,
                    const PoissonOptions& options = {});

// Sends the copy-paste composite ({in}) and coverage mask ({mask}) to an
// external blender and reads its RGB result from {out}.
Image external_gan_blend(const Image& composite, const BlendMask& coverage, const PlugConfig& plug);

}  // namespace hncg
