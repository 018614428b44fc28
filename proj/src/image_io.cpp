#include "hncg/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "hncg/error.hpp"

namespace hncg {

namespace {

png_uint_32 png_format_for(int channels) {
    switch (channels) {
        case 1: return PNG_FORMAT_GRAY;
        case 3: return PNG_FORMAT_RGB;
        case 4: return PNG_FORMAT_RGBA;
        default: throw ValidationError("unsupported channel count " + std::to_string(channels));
    }
}

std::string read_token(std::istream& in) {
    std::string token;
    while (in) {
        const int c = in.peek();
        if (c == '#') {
            std::string comment;
            std::getline(in, comment);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    in >> token;
    return token;
}

}  // namespace

Bytes8 read_png(const std::filesystem::path& path, int channels) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw ValidationError("cannot read PNG " + path.string() + ": " + image.message);
    }
    image.format = png_format_for(channels);
    Bytes8 out(static_cast<int>(image.width), static_cast<int>(image.height), channels);
    if (!png_image_finish_read(&image, nullptr, out.values().data(), 0, nullptr)) {
        png_image_free(&image);
        throw ValidationError("cannot decode PNG " + path.string() + ": " + image.message);
    }
    return out;
}

void write_png(const std::filesystem::path& path, const Bytes8& bytes) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(bytes.width());
    image.height = static_cast<png_uint_32>(bytes.height());
    image.format = png_format_for(bytes.channels());
    if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.values().data(), 0, nullptr)) {
        throw ValidationError("cannot write PNG " + path.string() + ": " + image.message);
    }
}

Bytes8 read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    if (read_token(in) != "P6") throw ValidationError(path.string() + ": not a binary PPM (P6)");
    int width = 0, height = 0, maxval = 0;
    try {
        width = std::stoi(read_token(in));
        height = std::stoi(read_token(in));
        maxval = std::stoi(read_token(in));
    } catch (const std::exception&) {
        throw ValidationError(path.string() + ": malformed PPM header");
    }
    if (width < 1 || height < 1 || maxval != 255) {
        throw ValidationError(path.string() + ": unsupported PPM geometry or maxval");
    }
    in.get();  // single whitespace before the raster
    Bytes8 out(width, height, 3);
    auto values = out.values();
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size()));
    if (in.gcount() != static_cast<std::streamsize>(values.size())) {
        throw ValidationError(path.string() + ": truncated PPM raster");
    }
    return out;
}

std::uint8_t quantize_unit(double v) {
    const double clamped = std::clamp(std::isnan(v) ? 0.0 : v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

Bytes8 quantize(const Image& image) {
    Bytes8 out(image.width(), image.height(), image.channels());
    std::ranges::transform(image.values(), out.values().begin(), quantize_unit);
    return out;
}

Image dequantize(const Bytes8& image) {
    Image out(image.width(), image.height(), image.channels());
    std::ranges::transform(image.values(), out.values().begin(),
                           [](std::uint8_t v) { return v / 255.0; });
    return out;
}

Image read_rgb_png(const std::filesystem::path& path) { return dequantize(read_png(path, 3)); }

void write_rgb_png(const std::filesystem::path& path, const Image& rgb) {
    if (rgb.channels() != 3) throw ValidationError("write_rgb_png expects 3 channels");
    write_png(path, quantize(rgb));
}

Image read_mask_png(const std::filesystem::path& path) { return dequantize(read_png(path, 1)); }

void write_mask_png(const std::filesystem::path& path, const Image& mask) {
    if (mask.channels() != 1) throw ValidationError("write_mask_png expects 1 channel");
    write_png(path, quantize(mask));
}

SemanticImage read_label_png(const std::filesystem::path& path) { return read_png(path, 1); }

void write_label_png(const std::filesystem::path& path, const SemanticImage& labels) {
    write_png(path, labels);
}

Image read_color_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("missing image file " + path.string());
    char magic[2] = {};
    in.read(magic, 2);
    if (magic[0] == 'P' && magic[1] == '6') return dequantize(read_ppm(path));
    return read_rgb_png(path);
}

}  // namespace hncg
