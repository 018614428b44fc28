#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hncg/grid.hpp"
#include "hncg/plug.hpp"
#include "hncg/scene.hpp"

namespace hncg {

// Counter-based hash noise in [-1, 1), a pure function of its arguments.
double hash_noise(std::uint64_t seed, int x, int y, int channel);

// Deterministic stand-in synthesizer: palette color plus clamped hash noise of
// amplitude noise_amp in [0, 0.5). When noise_amp is below half the palette's
// minimum L-infinity distance, declassify_nearest recovers m exactly.
Image stub_synthesize(const SemanticImage& m, const ClassPalette& palette, std::uint64_t seed, double noise_amp);

// Writes m to {in} (raw ids) and {in_color} (palette colors), runs the plug,
// and reads the RGB PNG it leaves at {out}.
Image external_synthesize(const SemanticImage& m, const ClassPalette& palette, const PlugConfig& plug);

// Activation tensor in N x C x Y x X layout.
struct Activation {
    int n = 0, c = 0, y = 0, x = 0;
    std::vector<double> data;

    Activation() = default;
    Activation(int n_, int c_, int y_, int x_, double fill = 0.0)
        : n(n_), c(c_), y(y_), x(x_), data(static_cast<std::size_t>(n_) * c_ * y_ * x_, fill) {}

    double& at(int in, int ic, int iy, int ix) { return data[offset(in, ic, iy, ix)]; }
    double at(int in, int ic, int iy, int ix) const { return data[offset(in, ic, iy, ix)]; }

private:
    std::size_t offset(int in, int ic, int iy, int ix) const {
        return ((static_cast<std::size_t>(in) * c + ic) * y + iy) * x + ix;
    }
};

// Spatial modulation map in C x Y x X layout (stored as an Activation with n = 1).
using Modulation = Activation;

// Spatially adaptive denormalization: gamma[c,y,x] * (h - mu[c]) / sigma[c] + beta[c,y,x].
Activation spade_denorm(const Activation& h, const Modulation& gamma, const Modulation& beta,
                        const std::vector<double>& mu, const std::vector<double>& sigma);

struct ChannelStats {
    std::vector<double> mean;
    std::vector<double> stddev;  // population standard deviation
};

// Per-channel mean and standard deviation over N, Y and X.
ChannelStats channel_stats(const Activation& h);

}  // namespace hncg
