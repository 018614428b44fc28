#include "hncg/metrics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "hncg/error.hpp"
#include "hncg/image_io.hpp"

namespace hncg {

namespace {

constexpr char kFeatureMagic[8] = {'H', 'N', 'C', 'G', 'F', 'E', 'A', 'T'};

void put_u32(std::ostream& out, std::uint32_t v) {
    const char bytes[4] = {char(v & 0xFF), char((v >> 8) & 0xFF), char((v >> 16) & 0xFF), char((v >> 24) & 0xFF)};
    out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in, const std::filesystem::path& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw ValidationError(path.string() + ": truncated feature file");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

// sqrt of a symmetric PSD matrix; also checks the PSD tolerance.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    if (eig.info() != Eigen::Success) throw NumericalError(std::string(what) + ": eigendecomposition failed");
    Eigen::VectorXd lambda = eig.eigenvalues();
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda[i] < -kPsdTolerance) {
            throw NumericalError(std::string(what) + ": eigenvalue " + std::to_string(lambda[i]) +
                                 " below tolerance, not a covariance");
        }
        lambda[i] = std::sqrt(std::max(0.0, lambda[i]));
    }
    return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

void FeatureMatrix::append(const std::vector<double>& row) {
    if (rows == 0 && cols == 0) cols = row.size();
    if (row.size() != cols) throw ValidationError("feature row has dimension " + std::to_string(row.size()) +
                                                  ", expected " + std::to_string(cols));
    for (double v : row) values.push_back(static_cast<float>(v));
    ++rows;
}

double semantic_retention(const SemanticImage& layout, const SemanticImage& predicted,
                          const std::set<ClassId>& ignore_ids) {
    if (!layout.same_extent(predicted)) throw ValidationError("semantic_retention: dimension mismatch");
    std::size_t evaluated = 0, agree = 0;
    for (int y = 0; y < layout.height(); ++y) {
        for (int x = 0; x < layout.width(); ++x) {
            const ClassId truth = layout.at(x, y);
            if (ignore_ids.contains(truth)) continue;
            ++evaluated;
            if (predicted.at(x, y) == truth) ++agree;
        }
    }
    if (evaluated == 0) throw ValidationError("semantic_retention: every pixel is ignored");
    return static_cast<double>(agree) / static_cast<double>(evaluated);
}

FeatureStats feature_stats(const FeatureMatrix& f) {
    if (f.rows < 2) throw ValidationError("feature_stats: need at least 2 rows, got " + std::to_string(f.rows));
    const auto n = static_cast<Eigen::Index>(f.rows);
    const auto d = static_cast<Eigen::Index>(f.cols);
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < d; ++c) x(r, c) = f.at(r, c);
    FeatureStats s;
    s.mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd centered = x.rowwise() - s.mean.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    s.cov = 0.5 * (cov + cov.transpose());
    return s;
}

double frechet_distance(const FeatureStats& s1, const FeatureStats& s2) {
    const auto d = s1.mean.size();
    if (s2.mean.size() != d || s1.cov.rows() != d || s1.cov.cols() != d || s2.cov.rows() != d || s2.cov.cols() != d) {
        throw ValidationError("frechet_distance: dimension mismatch");
    }
    const Eigen::MatrixXd sqrt_c1 = psd_sqrt(s1.cov, "frechet_distance C1");
    psd_sqrt(s2.cov, "frechet_distance C2");

    Eigen::MatrixXd inner = sqrt_c1 * s2.cov * sqrt_c1;
    inner = 0.5 * (inner + inner.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(inner, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalError("frechet_distance: eigendecomposition failed");
    double trace_sqrt = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) trace_sqrt += std::sqrt(std::max(0.0, eig.eigenvalues()[i]));

    const double d2 = (s1.mean - s2.mean).squaredNorm() + s1.cov.trace() + s2.cov.trace() - 2.0 * trace_sqrt;
    if (!std::isfinite(d2)) throw NumericalError("frechet_distance: non-finite result");
    return std::max(0.0, d2);
}

double fid_between_sets(const FeatureMatrix& a, const FeatureMatrix& b) {
    return frechet_distance(feature_stats(a), feature_stats(b));
}

std::vector<double> stub_features(const Image& rgb) {
    if (rgb.channels() != 3 || rgb.empty()) throw ValidationError("stub_features expects a non-empty RGB image");
    const int w = rgb.width(), h = rgb.height();
    const double pixels = static_cast<double>(rgb.pixel_count());
    std::vector<double> out(kStubFeatureDim, 0.0);

    std::array<double, 64> luma_sum{};
    std::array<int, 64> luma_count{};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                const double v = std::clamp(rgb.at(x, y, c), 0.0, 1.0);
                const int bin = std::min(63, static_cast<int>(v * 64.0));
                out[c * 64 + bin] += 1.0;
            }
            const int block = (y * 8 / h) * 8 + (x * 8 / w);
            luma_sum[block] += 0.299 * rgb.at(x, y, 0) + 0.587 * rgb.at(x, y, 1) + 0.114 * rgb.at(x, y, 2);
            ++luma_count[block];
        }
    }
    for (int i = 0; i < 192; ++i) out[i] /= pixels;
    for (int by = 0; by < 8; ++by) {
        for (int bx = 0; bx < 8; ++bx) {
            const int block = by * 8 + bx;
            double luma = 0.0;
            if (luma_count[block] > 0) {
                luma = luma_sum[block] / luma_count[block];
            } else {
                const int x = bx * w / 8, y = by * h / 8;
                luma = 0.299 * rgb.at(x, y, 0) + 0.587 * rgb.at(x, y, 1) + 0.114 * rgb.at(x, y, 2);
            }
            out[192 + block] = luma;
        }
    }
    return out;
}

FeatureMatrix stub_feature_matrix(const std::vector<Image>& images) {
    FeatureMatrix m;
    m.cols = kStubFeatureDim;
    for (const auto& img : images) m.append(stub_features(img));
    return m;
}

void write_feature_file(const std::filesystem::path& path, const FeatureMatrix& features) {
    if (features.values.size() != features.rows * features.cols) throw ValidationError("feature matrix size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out.write(kFeatureMagic, sizeof kFeatureMagic);
    put_u32(out, static_cast<std::uint32_t>(features.rows));
    put_u32(out, static_cast<std::uint32_t>(features.cols));
    for (float v : features.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
    if (!out) throw ValidationError("error writing " + path.string());
}

FeatureMatrix read_feature_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("missing feature file " + path.string());
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kFeatureMagic, 8) != 0) {
        throw ValidationError(path.string() + ": not an HNCGFEAT feature file");
    }
    const std::uint32_t n = get_u32(in, path);
    const std::uint32_t d = get_u32(in, path);
    FeatureMatrix m(n, d);
    for (float& v : m.values) v = std::bit_cast<float>(get_u32(in, path));
    if (in.peek() != std::char_traits<char>::eof()) throw ValidationError(path.string() + ": trailing bytes");
    return m;
}

SemanticImage external_segment(const Image& rgb, const PlugConfig& plug) {
    plug.validate();
    TempDir tmp;
    const auto in = tmp.file("image.png");
    const auto out = tmp.file("labels.png");
    write_rgb_png(in, rgb);
    run_plug(plug, {{"in", in}, {"out", out}});
    SemanticImage labels;
    try {
        labels = read_label_png(out);
    } catch (const Error& e) {
        throw PlugError(PlugError::Reason::unreadable_output, std::string("segmenter output unreadable: ") + e.what());
    }
    if (!labels.same_extent(rgb)) {
        throw PlugError(PlugError::Reason::dimension_mismatch,
                        "segmenter returned " + std::to_string(labels.width()) + "x" + std::to_string(labels.height()) +
                            ", expected " + std::to_string(rgb.width()) + "x" + std::to_string(rgb.height()));
    }
    return labels;
}

FeatureMatrix external_features(const std::vector<Image>& images, const PlugConfig& plug) {
    plug.validate();
    TempDir tmp;
    const auto dir = tmp.file("images");
    std::filesystem::create_directory(dir);
    for (std::size_t i = 0; i < images.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "image_%05zu.png", i);
        write_rgb_png(dir / name, images[i]);
    }
    const auto out = tmp.file("features.bin");
    run_plug(plug, {{"in", dir}, {"out", out}});
    FeatureMatrix m;
    try {
        m = read_feature_file(out);
    } catch (const Error& e) {
        throw PlugError(PlugError::Reason::unreadable_output, std::string("feature output unreadable: ") + e.what());
    }
    if (m.rows != images.size()) {
        throw PlugError(PlugError::Reason::dimension_mismatch, "feature extractor returned " + std::to_string(m.rows) +
                                                                   " rows for " + std::to_string(images.size()) + " images");
    }
    return m;
}

}  // namespace hncg
