#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvgrid/camera.hpp"
#include "mvgrid/image.hpp"

namespace mvgrid {

struct View {
    Image image;
    Camera camera;
    double time = 0.0;  // normalised, in [0, 1]

    void validate() const;
};

enum class FillState { empty, generated, input };

const char* to_string(FillState state);
FillState fill_state_from_string(const std::string& text);

/// A view plus where it came from; the unit of the sampler's input set and
/// of the reconstruction dataset.
struct Frame {
    View view;
    FillState provenance = FillState::input;
};

/// Map raw timestamps to [0,1] relative to the first one. Constant input maps
/// to all zeros. Throws Errc::ordering for decreasing input.
std::vector<double> normalize_times(std::span<const double> raw_times);

/// K x L grid of images: rows are stationary cameras, columns are timestamps.
class ViewGrid {
public:
    ViewGrid() = default;
    ViewGrid(std::vector<Camera> cameras, std::vector<double> raw_times, int width, int height);
    ViewGrid(std::vector<Camera> cameras, std::vector<double> raw_times, std::vector<double> times, int width,
             int height);

    int rows() const { return static_cast<int>(cameras_.size()); }
    int cols() const { return static_cast<int>(times_.size()); }
    int width() const { return width_; }
    int height() const { return height_; }

    const Camera& camera(int row) const { return cameras_.at(row); }
    const std::vector<Camera>& cameras() const { return cameras_; }
    double time(int col) const { return times_.at(col); }
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& raw_times() const { return raw_times_; }

    const std::optional<Image>& cell(int row, int col) const { return cells_.at(index(row, col)); }
    const Image& image(int row, int col) const;
    FillState fill(int row, int col) const { return fill_.at(index(row, col)); }

    void set(int row, int col, Image image, FillState state);
    void clear(int row, int col);

    bool complete() const;
    View view(int row, int col) const;

    friend bool operator==(const ViewGrid&, const ViewGrid&) = default;

private:
    std::size_t index(int row, int col) const;
    void validate() const;

    std::vector<Camera> cameras_;
    std::vector<double> raw_times_;
    std::vector<double> times_;
    int width_ = 0;
    int height_ = 0;
    std::vector<std::optional<Image>> cells_;
    std::vector<FillState> fill_;
};

/// A posed video as a sparse grid: rows are the distinct cameras in order of
/// first appearance, column j holds frame j as an input cell.
ViewGrid video_to_grid(std::span<const View> frames, std::span<const double> raw_times);

/// Inverse of video_to_grid: one view per column (exactly one filled cell per
/// column is required). Provenance follows the cell's fill state.
std::vector<Frame> grid_to_frames(const ViewGrid& grid);

}  // namespace mvgrid
