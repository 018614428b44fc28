#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hncg {

// Dense row-major H x W x C raster. Pixel (x, y) has x along the width and y
// growing downwards; channels are interleaved.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, int channels = 1, T fill = T{})
        : width_(width), height_(height), channels_(channels),
          data_(static_cast<std::size_t>(width) * height * channels, fill) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
    bool empty() const noexcept { return data_.empty(); }

    T& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
    const T& at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }

    template <typename U>
    bool same_extent(const Grid<U>& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    bool operator==(const Grid&) const = default;

private:
    std::size_t index(int x, int y, int c) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<T> data_;
};

using ClassId = std::uint8_t;

// Floating-point image. RGB images carry 3 channels, masks carry 1.
using Image = Grid<double>;
// Per-pixel class ids; 0 is void.
using SemanticImage = Grid<ClassId>;
// Positive distance along the viewing axis, +inf where nothing was hit.
using DepthBuffer = Grid<double>;

}  // namespace hncg
