#include "hncg/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hncg/error.hpp"

namespace hncg {

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon); }

double mean_l1(const SampleBatch& a, const SampleBatch& b, const char* what) {
    if (a.empty() || a.size() != b.size()) {
        throw ValidationError(std::string("cycle_consistency_loss: ") + what + " batch sizes differ or are empty");
    }
    const std::size_t dim = a.front().size();
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != dim || b[i].size() != dim || dim == 0) {
            throw ValidationError(std::string("cycle_consistency_loss: ") + what + " sample shapes differ");
        }
        for (std::size_t k = 0; k < dim; ++k) sum += std::abs(b[i][k] - a[i][k]);
        count += dim;
    }
    return sum / static_cast<double>(count);
}

}  // namespace

double gan_value(ProbBatch d_real, ProbBatch d_fake) {
    if (d_real.empty() || d_fake.empty()) throw ValidationError("gan_value: empty batch");
    double real = 0.0;
    for (double p : d_real) real += std::log(clamp_prob(p));
    double fake = 0.0;
    for (double p : d_fake) fake += std::log(1.0 - clamp_prob(p));
    return real / static_cast<double>(d_real.size()) + fake / static_cast<double>(d_fake.size());
}

double cgan_value(ProbBatch d_real_given_y, ProbBatch d_fake_given_y) {
    return gan_value(d_real_given_y, d_fake_given_y);
}

double cycle_consistency_loss(const SampleBatch& x, const SampleBatch& x_rec, const SampleBatch& y,
                              const SampleBatch& y_rec) {
    return mean_l1(x, x_rec, "x") + mean_l1(y, y_rec, "y");
}

double cycle_gan_total_loss(double gan_xy, double gan_yx, double cyc, double lambda) {
    return gan_xy + gan_yx + lambda * cyc;
}

double gp_gan_loss(double l2, double adv, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("gp_gan_loss: lambda must lie in [0,1]");
    return lambda * l2 + (1.0 - lambda) * adv;
}

}  // namespace hncg
