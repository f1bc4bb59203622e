#pragma once

#include <memory>
#include <span>
#include <vector>

#include "mvgrid/camera.hpp"
#include "mvgrid/image.hpp"

namespace mvgrid::recon4d {

struct RasterOptions {
    double background = 0.5;     // grey, all channels
    double cutoff_sigmas = 3.5;  // footprint support radius in sigmas; <= 0 disables the cutoff
    double near = 1e-2;          // Gaussians at smaller depth are culled
    double max_alpha = 0.99;
    double min_alpha = 1.0 / 255.0;     // weaker contributions are skipped
    double min_transmittance = 1e-4;    // compositing stops below this
};

/// Options under which the image is a smooth function of every parameter
/// (no cutoff, no skipping); used for gradient checks.
RasterOptions exact_raster_options();

struct RasterGrads {
    std::vector<Vec3> positions;  // world space
    std::vector<double> scales;
    std::vector<double> opacities;
    std::vector<Vec3> colors;
    std::vector<double> screen;  // |d L / d (u, v)| in normalised device units
};

/// Front-to-back compositing of isotropic Gaussians. Footprint sigma in pixels
/// is scale * (fx + fy) / 2 / depth; alpha = min(max_alpha, opacity * exp(-d^2 / (2 sigma^2))).
/// The forward pass keeps what the backward pass needs.
class Rasterization {
public:
    Rasterization(std::span<const Vec3> positions, std::span<const double> scales, std::span<const double> opacities,
                  std::span<const Vec3> colors, const Camera& camera, const RasterOptions& options = {});
    ~Rasterization();
    Rasterization(Rasterization&&) noexcept;
    Rasterization& operator=(Rasterization&&) noexcept;

    const Image& image() const { return image_; }
    const std::vector<double>& accumulated_alpha() const { return accumulated_; }  // sum of T_i alpha_i
    const std::vector<double>& transmittance() const { return transmittance_; }    // final T per pixel

    /// Exact gradients of a scalar loss given d L / d image.
    RasterGrads backward(const Image& d_image) const;

private:
    struct State;
    std::unique_ptr<State> state_;
    Image image_;
    std::vector<double> accumulated_;
    std::vector<double> transmittance_;
};

Image rasterize(std::span<const Vec3> positions, std::span<const double> scales, std::span<const double> opacities,
                std::span<const Vec3> colors, const Camera& camera, const RasterOptions& options = {});

RasterGrads rasterize_backward(std::span<const Vec3> positions, std::span<const double> scales,
                               std::span<const double> opacities, std::span<const Vec3> colors, const Camera& camera,
                               const Image& d_image, const RasterOptions& options = {});

}  // namespace mvgrid::recon4d
