#include "hncg/synthesis.hpp"

#include <algorithm>
#include <cmath>

#include "hncg/error.hpp"
#include "hncg/image_io.hpp"
#include "hncg/raster.hpp"

namespace hncg {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

double hash_noise(std::uint64_t seed, int x, int y, int channel) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ static_cast<std::uint32_t>(x));
    h = mix64(h ^ static_cast<std::uint32_t>(y));
    h = mix64(h ^ static_cast<std::uint32_t>(channel));
    const double unit = static_cast<double>(h >> 11) * 0x1.0p-53;
    return 2.0 * unit - 1.0;
}

Image stub_synthesize(const SemanticImage& m, const ClassPalette& palette, std::uint64_t seed, double noise_amp) {
    if (!(noise_amp >= 0.0 && noise_amp < 0.5)) throw ValidationError("noise_amp must lie in [0, 0.5)");
    Image out = colorize_semantic(m, palette);
    if (noise_amp == 0.0) return out;
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            for (int c = 0; c < 3; ++c) {
                double& v = out.at(x, y, c);
                v = std::clamp(v + noise_amp * hash_noise(seed, x, y, c), 0.0, 1.0);
            }
        }
    }
    return out;
}

Image external_synthesize(const SemanticImage& m, const ClassPalette& palette, const PlugConfig& plug) {
    plug.validate();
    TempDir tmp;
    const auto labels = tmp.file("labels.png");
    const auto color = tmp.file("labels_color.png");
    const auto out = tmp.file("synthesized.png");
    write_label_png(labels, m);
    write_rgb_png(color, colorize_semantic(m, palette));

    run_plug(plug, {{"in", labels}, {"in_color", color}, {"out", out}});

    Image result;
    try {
        result = read_rgb_png(out);
    } catch (const Error& e) {
        throw PlugError(PlugError::Reason::unreadable_output, std::string("synthesizer output unreadable: ") + e.what());
    }
    if (!result.same_extent(m)) {
        throw PlugError(PlugError::Reason::dimension_mismatch,
                        "synthesizer returned " + std::to_string(result.width()) + "x" + std::to_string(result.height()) +
                            ", expected " + std::to_string(m.width()) + "x" + std::to_string(m.height()));
    }
    return result;
}

Activation spade_denorm(const Activation& h, const Modulation& gamma, const Modulation& beta,
                        const std::vector<double>& mu, const std::vector<double>& sigma) {
    auto same_map = [&](const Modulation& g) { return g.n == 1 && g.c == h.c && g.y == h.y && g.x == h.x; };
    if (!same_map(gamma) || !same_map(beta)) throw ValidationError("spade_denorm: modulation shape mismatch");
    if (mu.size() != static_cast<std::size_t>(h.c) || sigma.size() != static_cast<std::size_t>(h.c)) {
        throw ValidationError("spade_denorm: per-channel statistics size mismatch");
    }
    for (double s : sigma) {
        if (!(s > 0.0)) throw ValidationError("spade_denorm: sigma must be positive");
    }
    Activation out(h.n, h.c, h.y, h.x);
    for (int n = 0; n < h.n; ++n) {
        for (int c = 0; c < h.c; ++c) {
            for (int y = 0; y < h.y; ++y) {
                for (int x = 0; x < h.x; ++x) {
                    out.at(n, c, y, x) = gamma.at(0, c, y, x) * (h.at(n, c, y, x) - mu[c]) / sigma[c] + beta.at(0, c, y, x);
                }
            }
        }
    }
    return out;
}

ChannelStats channel_stats(const Activation& h) {
    const double count = static_cast<double>(h.n) * h.y * h.x;
    if (count == 0.0) throw ValidationError("channel_stats: empty activation");
    ChannelStats stats{std::vector<double>(h.c, 0.0), std::vector<double>(h.c, 0.0)};
    for (int c = 0; c < h.c; ++c) {
        double sum = 0.0;
        for (int n = 0; n < h.n; ++n)
            for (int y = 0; y < h.y; ++y)
                for (int x = 0; x < h.x; ++x) sum += h.at(n, c, y, x);
        const double mean = sum / count;
        double sq = 0.0;
        for (int n = 0; n < h.n; ++n)
            for (int y = 0; y < h.y; ++y)
                for (int x = 0; x < h.x; ++x) sq += (h.at(n, c, y, x) - mean) * (h.at(n, c, y, x) - mean);
        stats.mean[c] = mean;
        stats.stddev[c] = std::sqrt(sq / count);
    }
    return stats;
}

}  // namespace hncg
