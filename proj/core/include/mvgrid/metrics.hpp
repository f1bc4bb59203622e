#pragma once

#include <span>
#include <vector>

#include "mvgrid/image.hpp"

namespace mvgrid::metrics {

inline constexpr double kPsnrSentinel = 99.0;

/// 10 log10(1 / MSE), capped at 99.0 (identical images report exactly 99.0).
double psnr(const Image& a, const Image& b);

/// Mean local SSIM of the channel-mean grayscale images (11x11 Gaussian
/// window, sigma 1.5, K1 0.01, K2 0.03, valid positions only).
double ssim(const Image& a, const Image& b);

/// Grayscale plane by channel mean.
std::vector<double> grayscale(const Image& image);

/// Row t of the result is pixel row `row` of frame t: a width x L image.
Image spacetime_slice(std::span<const Image> frames, int row);

}  // namespace mvgrid::metrics
