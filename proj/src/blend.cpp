#include "hncg/blend.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "hncg/error.hpp"
#include "hncg/image_io.hpp"

namespace hncg {

namespace {

constexpr std::array<double, 5> kBinomial = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
constexpr double kRoundoffFloor = 1e-14;

void require_same(const Image& a, const Image& b, const char* what) {
    if (!a.same_extent(b) || a.channels() != b.channels()) {
        throw ValidationError(std::string(what) + ": image dimension mismatch (" + std::to_string(a.width()) + "x" +
                              std::to_string(a.height()) + "x" + std::to_string(a.channels()) + " vs " +
                              std::to_string(b.width()) + "x" + std::to_string(b.height()) + "x" +
                              std::to_string(b.channels()) + ")");
    }
}

void require_mask(const Image& img, const BlendMask& mask, const char* what) {
    if (!img.same_extent(mask) || mask.channels() != 1) {
        throw ValidationError(std::string(what) + ": mask must be single-channel and match the image size");
    }
}

Image clamp_unit(Image img) {
    for (double& v : img.values()) v = std::clamp(v, 0.0, 1.0);
    return img;
}

// Binomial filter then decimation by two, with edge replication (which also
// pads odd sizes to even).
Image downsample(const Image& img) {
    const int w = img.width(), h = img.height(), ch = img.channels();
    const int w2 = (w + 1) / 2, h2 = (h + 1) / 2;
    Image rows(w2, h, ch);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w2; ++x) {
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int k = -2; k <= 2; ++k) acc += kBinomial[k + 2] * img.at(std::clamp(2 * x + k, 0, w - 1), y, c);
                rows.at(x, y, c) = acc;
            }
        }
    }
    Image out(w2, h2, ch);
    for (int y = 0; y < h2; ++y) {
        for (int x = 0; x < w2; ++x) {
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int k = -2; k <= 2; ++k) acc += kBinomial[k + 2] * rows.at(x, std::clamp(2 * y + k, 0, h - 1), c);
                out.at(x, y, c) = acc;
            }
        }
    }
    return out;
}

// Polyphase form of zero-insertion followed by the binomial filter (gain 2 per
// axis): even outputs take (1,6,1)/8, odd outputs (4,4)/8 of the coarse samples.
double upsample_tap(int pos, int n, auto&& sample) {
    const int i = pos / 2;
    auto at = [&](int k) { return sample(std::clamp(k, 0, n - 1)); };
    if (pos % 2 == 0) return (at(i - 1) + 6.0 * at(i) + at(i + 1)) / 8.0;
    return (at(i) + at(i + 1)) / 2.0;
}

Image upsample(const Image& coarse, int width, int height) {
    const int cw = coarse.width(), chh = coarse.height(), ch = coarse.channels();
    Image rows(width, chh, ch);
    for (int y = 0; y < chh; ++y) {
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < ch; ++c) {
                rows.at(x, y, c) = upsample_tap(x, cw, [&](int k) { return coarse.at(k, y, c); });
            }
        }
    }
    Image out(width, height, ch);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < ch; ++c) {
                out.at(x, y, c) = upsample_tap(y, chh, [&](int k) { return rows.at(x, k, c); });
            }
        }
    }
    return out;
}

void check_levels(const Image& img, int levels) {
    if (img.empty()) throw ValidationError("pyramid of an empty image");
    const int max_levels = max_pyramid_levels(img.width(), img.height());
    if (levels < 1 || levels > std::max(1, max_levels)) {
        throw ValidationError("pyramid levels " + std::to_string(levels) + " outside [1, " +
                              std::to_string(std::max(1, max_levels)) + "] for a " + std::to_string(img.width()) + "x" +
                              std::to_string(img.height()) + " image");
    }
}

}  // namespace

std::string_view to_string(BlendMode mode) {
    switch (mode) {
        case BlendMode::alpha: return "alpha";
        case BlendMode::pyramid: return "pyramid";
        case BlendMode::gp_classical: return "gp-classical";
        case BlendMode::gan_plug: return "gan-plug";
    }
    return "alpha";
}

std::optional<BlendMode> parse_blend_mode(std::string_view name) {
    for (BlendMode m : {BlendMode::alpha, BlendMode::pyramid, BlendMode::gp_classical, BlendMode::gan_plug}) {
        if (to_string(m) == name) return m;
    }
    return std::nullopt;
}

BlendMask coverage_mask(const PartialRender& pr) { return pr.alpha; }

BlendMask coverage_to_alpha(const PartialRender& pr) {
    BlendMask mask = pr.alpha;
    for (double& v : mask.values()) v = 1.0 - v;
    return mask;
}

Image alpha_blend(const Image& background, const Image& foreground, const BlendMask& alpha) {
    require_same(background, foreground, "alpha_blend");
    require_mask(background, alpha, "alpha_blend");
    Image out(background.width(), background.height(), background.channels());
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            const double a = alpha.at(x, y);
            for (int c = 0; c < out.channels(); ++c) {
                out.at(x, y, c) = a * background.at(x, y, c) + (1.0 - a) * foreground.at(x, y, c);
            }
        }
    }
    return clamp_unit(std::move(out));
}

int max_pyramid_levels(int width, int height) {
    int levels = 0;
    for (int n = std::min(width, height); n > 1; n /= 2) ++levels;
    // a single level is the image itself, valid at any size
    return std::max(levels, 1);
}

std::vector<Image> gaussian_pyramid(const Image& img, int levels) {
    check_levels(img, levels);
    std::vector<Image> pyr{img};
    for (int k = 1; k < levels; ++k) pyr.push_back(downsample(pyr.back()));
    return pyr;
}

std::vector<Image> laplacian_pyramid(const Image& img, int levels) {
    std::vector<Image> pyr = gaussian_pyramid(img, levels);
    for (int k = 0; k + 1 < levels; ++k) {
        const Image up = upsample(pyr[k + 1], pyr[k].width(), pyr[k].height());
        auto dst = pyr[k].values();
        auto src = up.values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= src[i];
    }
    return pyr;
}

Image collapse_pyramid(const std::vector<Image>& laplacian) {
    if (laplacian.empty()) throw ValidationError("collapse of an empty pyramid");
    Image img = laplacian.back();
    for (int k = static_cast<int>(laplacian.size()) - 2; k >= 0; --k) {
        Image up = upsample(img, laplacian[k].width(), laplacian[k].height());
        auto dst = up.values();
        auto src = laplacian[k].values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
        img = std::move(up);
    }
    return img;
}

Image pyramid_blend(const Image& background, const Image& foreground, const BlendMask& mask, int levels) {
    require_same(background, foreground, "pyramid_blend");
    require_mask(background, mask, "pyramid_blend");
    const auto weights = gaussian_pyramid(mask, levels);
    const auto fg = laplacian_pyramid(foreground, levels);
    const auto bg = laplacian_pyramid(background, levels);

    std::vector<Image> blended;
    blended.reserve(levels);
    for (int k = 0; k < levels; ++k) {
        Image level(fg[k].width(), fg[k].height(), fg[k].channels());
        for (int y = 0; y < level.height(); ++y) {
            for (int x = 0; x < level.width(); ++x) {
                const double g = weights[k].at(x, y);
                for (int c = 0; c < level.channels(); ++c) {
                    level.at(x, y, c) = g * fg[k].at(x, y, c) + (1.0 - g) * bg[k].at(x, y, c);
                }
            }
        }
        blended.push_back(std::move(level));
    }
    return clamp_unit(collapse_pyramid(blended));
}

Image copy_paste_composite(const Image& background, const Image& foreground, const BlendMask& coverage) {
    require_same(background, foreground, "copy_paste_composite");
    require_mask(background, coverage, "copy_paste_composite");
    Image out = background;
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            if (coverage.at(x, y) < 0.5) continue;
            for (int c = 0; c < out.channels(); ++c) out.at(x, y, c) = foreground.at(x, y, c);
        }
    }
    return out;
}

PoissonResult poisson_blend_solve(const Image& background, const Image& foreground, const BlendMask& coverage,
                                  const PoissonOptions& options) {
    require_same(background, foreground, "poisson_blend");
    require_mask(background, coverage, "poisson_blend");
    const int w = background.width(), h = background.height();

    // Unknowns are the covered pixels; index -1 marks known (background) pixels.
    std::vector<int> index(static_cast<std::size_t>(w) * h, -1);
    std::vector<std::pair<int, int>> region;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (coverage.at(x, y) < 0.5) continue;
            if (x == 0 || y == 0 || x == w - 1 || y == h - 1) {
                throw ValidationError("poisson_blend: covered region touches the image border at (" +
                                      std::to_string(x) + ", " + std::to_string(y) + ")");
            }
            index[static_cast<std::size_t>(y) * w + x] = static_cast<int>(region.size());
            region.emplace_back(x, y);
        }
    }

    PoissonResult result;
    result.image = background;
    const std::size_t n = region.size();
    result.budget = options.max_iters > 0 ? options.max_iters
                                          : static_cast<int>(std::ceil(10.0 * std::sqrt(static_cast<double>(n))));
    if (n == 0) return result;

    constexpr int dx[4] = {1, -1, 0, 0};
    constexpr int dy[4] = {0, 0, 1, -1};
    auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto [x, y] = region[i];
            double acc = 4.0 * v[i];
            for (int k = 0; k < 4; ++k) {
                const int j = index[static_cast<std::size_t>(y + dy[k]) * w + (x + dx[k])];
                if (j >= 0) acc -= v[j];
            }
            out[i] = acc;
        }
    };
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };

    std::vector<double> b(n), f(n), r(n), p(n), ap(n);
    for (int c = 0; c < background.channels(); ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto [x, y] = region[i];
            const double g = foreground.at(x, y, c);
            double rhs = 0.0;
            for (int k = 0; k < 4; ++k) {
                const int qx = x + dx[k], qy = y + dy[k];
                rhs += g - foreground.at(qx, qy, c);
                if (index[static_cast<std::size_t>(qy) * w + qx] < 0) rhs += background.at(qx, qy, c);
            }
            b[i] = rhs;
            f[i] = g;  // start from the copy-paste composite
        }
        apply(f, ap);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
        p = r;
        double rr = dot(r, r);
        const double r0 = std::sqrt(rr);
        // A start that is already exact leaves only rounding noise in r0;
        // never ask for less than the roundoff level of the right-hand side.
        const double target = std::max(options.tol * r0, kRoundoffFloor * std::sqrt(dot(b, b)));
        int it = 0;
        while (std::sqrt(rr) > target) {
            if (it >= result.budget) {
                throw NumericalError("poisson_blend: no convergence after " + std::to_string(it) +
                                     " iterations (residual ratio " + std::to_string(std::sqrt(rr) / r0) + ")");
            }
            apply(p, ap);
            const double step = rr / dot(p, ap);
            for (std::size_t i = 0; i < n; ++i) {
                f[i] += step * p[i];
                r[i] -= step * ap[i];
            }
            const double rr_next = dot(r, r);
            const double beta = rr_next / rr;
            for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
            rr = rr_next;
            ++it;
        }
        result.iterations = std::max(result.iterations, it);
        result.residual_ratio = std::max(result.residual_ratio, r0 > 0.0 ? std::sqrt(rr) / r0 : 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto [x, y] = region[i];
            result.image.at(x, y, c) = std::clamp(f[i], 0.0, 1.0);
        }
    }
    return result;
}

Image poisson_blend(const Image& background, const Image& foreground, const BlendMask& coverage,
                    const PoissonOptions& options) {
    return poisson_blend_solve(background, foreground, coverage, options).image;
}

Image external_gan_blend(const Image& composite, const BlendMask& coverage, const PlugConfig& plug) {
    require_mask(composite, coverage, "external_gan_blend");
    plug.validate();
    TempDir tmp;
    const auto in = tmp.file("composite.png");
    const auto mask = tmp.file("mask.png");
    const auto out = tmp.file("blended.png");
    write_rgb_png(in, composite);
    write_mask_png(mask, coverage);

    run_plug(plug, {{"in", in}, {"mask", mask}, {"out", out}});

    Image result;
    try {
        result = read_rgb_png(out);
    } catch (const Error& e) {
        throw PlugError(PlugError::Reason::unreadable_output, std::string("blender output unreadable: ") + e.what());
    }
    if (!result.same_extent(composite)) {
        throw PlugError(PlugError::Reason::dimension_mismatch,
                        "blender returned " + std::to_string(result.width()) + "x" + std::to_string(result.height()) +
                            ", expected " + std::to_string(composite.width()) + "x" +
                            std::to_string(composite.height()));
    }
    return result;
}

}  // namespace hncg
