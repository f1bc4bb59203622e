#pragma once

#include "mvgrid/image.hpp"

namespace mvgrid::recon4d {

struct LossWeights {
    double l1 = 0.8;
    double dssim = 0.2;
};

struct LossResult {
    double value = 0.0;
    double l1 = 0.0;     // unweighted mean absolute error
    double dssim = 0.0;  // unweighted (1 - SSIM) / 2, SSIM averaged over channels
    Image grad;          // d value / d render
};

/// multiplier * (w_l1 * L1 + w_dssim * DSSIM).
LossResult photometric_loss(const Image& render, const Image& target, const LossWeights& weights,
                            double multiplier = 1.0, bool with_gradient = true);

}  // namespace mvgrid::recon4d
