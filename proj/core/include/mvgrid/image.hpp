#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace mvgrid {

/// Interleaved RGB image of doubles, nominally in [0, 1]. Row-major, HxWx3.
struct Image {
    static constexpr int channels = 3;

    int width = 0;
    int height = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, double fill = 0.0);

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }

    double& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
    double at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }

    std::span<double> values() { return data; }
    std::span<const double> values() const { return data; }

    bool same_shape(const Image& other) const { return width == other.width && height == other.height; }

    friend bool operator==(const Image&, const Image&) = default;
};

void require_same_shape(const Image& a, const Image& b, const char* what);

/// Constant-colour image.
Image solid_image(int width, int height, double r, double g, double b);

/// Snap every value to the 16-bit lattice k/65535 (after clamping to [0,1]).
Image quantize16(const Image& image);

void write_png16(const std::filesystem::path& path, const Image& image);
Image read_png16(const std::filesystem::path& path);

double mean_abs_diff(const Image& a, const Image& b);
double max_abs_diff(const Image& a, const Image& b);
double l2_distance(const Image& a, const Image& b);

}  // namespace mvgrid
