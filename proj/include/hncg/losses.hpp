#pragma once

#include <span>
#include <vector>

namespace hncg {

// Discriminator outputs are clamped to [eps, 1 - eps] before taking logs.
inline constexpr double kProbEpsilon = 1e-7;
// Default l2 weight of the blending GAN objective.
inline constexpr double kGpGanLambda = 0.999;

using ProbBatch = std::span<const double>;
// Equal-length sample vectors.
using SampleBatch = std::vector<std::vector<double>>;

// Minimax GAN value: mean log D(x) + mean log(1 - D(G(z))).
double gan_value(ProbBatch d_real, ProbBatch d_fake);

// Conditional GAN value; the discriminator outputs are already conditioned on y.
double cgan_value(ProbBatch d_real_given_y, ProbBatch d_fake_given_y);

// Cycle-consistency loss: mean |F(G(x)) - x| + mean |G(F(y)) - y|, each L1 term
// averaged over every element of its batch.
double cycle_consistency_loss(const SampleBatch& x, const SampleBatch& x_rec, const SampleBatch& y,
                              const SampleBatch& y_rec);

// L = L_GAN(G, D_Y) + L_GAN(F, D_X) + lambda * L_cyc.
double cycle_gan_total_loss(double gan_xy, double gan_yx, double cyc, double lambda);

// L = lambda * L_l2 + (1 - lambda) * L_adv, lambda in [0,1].
double gp_gan_loss(double l2, double adv, double lambda = kGpGanLambda);

}  // namespace hncg
