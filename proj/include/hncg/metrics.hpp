#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <set>
#include <vector>

#include "hncg/grid.hpp"
#include "hncg/plug.hpp"

namespace hncg {

// Row-per-image feature vectors, stored in single precision as on disk.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> values;  // row-major

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t n, std::size_t d) : rows(n), cols(d), values(n * d, 0.0f) {}

    float& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    float at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    void append(const std::vector<double>& row);

    bool operator==(const FeatureMatrix&) const = default;
};

struct FeatureStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

// Fraction of pixels, excluding layout ids in `ignore_ids`, whose predicted
// id equals the layout id.
double semantic_retention(const SemanticImage& layout, const SemanticImage& predicted,
                          const std::set<ClassId>& ignore_ids = {0});

// Column means and unbiased (N - 1) covariance, symmetrized.
FeatureStats feature_stats(const FeatureMatrix& features);

// Squared Frechet distance between Gaussians:
// |mu1 - mu2|^2 + Tr(C1 + C2 - 2 sqrt(sqrt(C1) C2 sqrt(C1))).
// Eigenvalues in [-1e-8, 0) are treated as 0; anything lower is an error.
inline constexpr double kPsdTolerance = 1e-8;
double frechet_distance(const FeatureStats& s1, const FeatureStats& s2);

double fid_between_sets(const FeatureMatrix& a, const FeatureMatrix& b);

// Deterministic 256-D descriptor: 64-bin normalized histogram per RGB channel
// followed by an 8x8 box-averaged luma thumbnail.
inline constexpr std::size_t kStubFeatureDim = 256;
std::vector<double> stub_features(const Image& rgb);
FeatureMatrix stub_feature_matrix(const std::vector<Image>& images);

// "HNCGFEAT", u32 N, u32 D, then N*D float32, all little-endian, row-major.
void write_feature_file(const std::filesystem::path& path, const FeatureMatrix& features);
FeatureMatrix read_feature_file(const std::filesystem::path& path);

// Sends an RGB image ({in}) to an external segmenter that writes a raw-id PNG to {out}.
SemanticImage external_segment(const Image& rgb, const PlugConfig& plug);

// Writes images to a directory ({in}) and reads the feature file left at {out}.
FeatureMatrix external_features(const std::vector<Image>& images, const PlugConfig& plug);

}  // namespace hncg
