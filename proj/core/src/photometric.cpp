#include "mvgrid/photometric.hpp"

#include <cmath>

#include "mvgrid/ssim.hpp"

namespace mvgrid::recon4d {

LossResult photometric_loss(const Image& render, const Image& target, const LossWeights& weights, double multiplier,
                            bool with_gradient) {
    require_same_shape(render, target, "photometric_loss");
    const std::size_t n = render.data.size();
    const std::size_t pixels = render.pixel_count();
    LossResult out;
    if (with_gradient) out.grad = Image(render.width, render.height);

    double abs_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = render.data[i] - target.data[i];
        abs_sum += std::abs(d);
        if (with_gradient) {
            const double sign = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
            out.grad.data[i] = multiplier * weights.l1 * sign / static_cast<double>(n);
        }
    }
    out.l1 = abs_sum / static_cast<double>(n);

    double ssim_sum = 0.0;
    if (weights.dssim != 0.0) {
        std::vector<double> a(pixels), b(pixels);
        for (int c = 0; c < Image::channels; ++c) {
            for (std::size_t p = 0; p < pixels; ++p) {
                a[p] = render.data[3 * p + c];
                b[p] = target.data[3 * p + c];
            }
            const SsimPlane s = ssim_plane(a, b, render.width, render.height, with_gradient);
            ssim_sum += s.value;
            if (with_gradient) {
                // d DSSIM / d SSIM_c = -1/2 * 1/3
                const double k = -multiplier * weights.dssim / (2.0 * Image::channels);
                for (std::size_t p = 0; p < pixels; ++p) out.grad.data[3 * p + c] += k * s.grad[p];
            }
        }
        out.dssim = (1.0 - ssim_sum / Image::channels) / 2.0;
    }
    out.value = multiplier * (weights.l1 * out.l1 + weights.dssim * out.dssim);
    return out;
}

}  // namespace mvgrid::recon4d
