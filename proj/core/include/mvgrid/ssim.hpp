#pragma once

#include <span>
#include <vector>

namespace mvgrid {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

/// Normalised 1-D Gaussian taps; the 2-D window is their outer product.
std::vector<double> ssim_taps();

struct SsimPlane {
    double value = 0.0;         // mean of the local SSIM map
    std::vector<double> grad;   // d value / d a, empty unless requested
};

/// SSIM of two single-channel planes (row-major, width x height) over all
/// valid 11x11 window positions, dynamic range 1. Throws when the plane is
/// smaller than the window.
SsimPlane ssim_plane(std::span<const double> a, std::span<const double> b, int width, int height,
                     bool with_gradient = false);

}  // namespace mvgrid
