#include "mvgrid/metrics.hpp"

#include <cmath>

#include "mvgrid/error.hpp"
#include "mvgrid/ssim.hpp"

namespace mvgrid::metrics {

double psnr(const Image& a, const Image& b) {
    require_same_shape(a, b, "psnr");
    require(!a.empty(), Errc::invalid_argument, "psnr: empty image");
    double sq = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        sq += d * d;
    }
    const double mse = sq / static_cast<double>(a.data.size());
    if (mse == 0.0) return kPsnrSentinel;
    return std::min(kPsnrSentinel, -10.0 * std::log10(mse));
}

std::vector<double> grayscale(const Image& image) {
    std::vector<double> out(image.pixel_count());
    for (std::size_t p = 0; p < out.size(); ++p)
        out[p] = (image.data[3 * p] + image.data[3 * p + 1] + image.data[3 * p + 2]) / 3.0;
    return out;
}

double ssim(const Image& a, const Image& b) {
    require_same_shape(a, b, "ssim");
    return ssim_plane(grayscale(a), grayscale(b), a.width, a.height).value;
}

Image spacetime_slice(std::span<const Image> frames, int row) {
    require(!frames.empty(), Errc::invalid_argument, "slice: no frames");
    for (const Image& f : frames) require_same_shape(f, frames.front(), "slice");
    const int w = frames.front().width;
    require(row >= 0 && row < frames.front().height, Errc::out_of_range, "slice: row out of bounds");
    Image out(w, static_cast<int>(frames.size()));
    for (std::size_t t = 0; t < frames.size(); ++t)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) out.at(x, static_cast<int>(t), c) = frames[t].at(x, row, c);
    return out;
}

}  // namespace mvgrid::metrics
