#include "mvgrid/view_grid.hpp"

#include <algorithm>
#include <string>

#include "mvgrid/error.hpp"

namespace mvgrid {

void View::validate() const {
    camera.validate();
    require(image.width == camera.width && image.height == camera.height, Errc::shape_mismatch,
            "view image size does not match its camera");
    require(time >= 0.0 && time <= 1.0, Errc::out_of_range, "view time outside [0,1]");
}

const char* to_string(FillState state) {
    switch (state) {
        case FillState::empty: return "empty";
        case FillState::generated: return "generated";
        case FillState::input: return "input";
    }
    return "empty";
}

FillState fill_state_from_string(const std::string& text) {
    if (text == "empty") return FillState::empty;
    if (text == "generated") return FillState::generated;
    if (text == "input") return FillState::input;
    fail(Errc::invalid_argument, "unknown fill state '" + text + "'");
}

std::vector<double> normalize_times(std::span<const double> raw_times) {
    require(!raw_times.empty(), Errc::invalid_argument, "normalize_times: empty list");
    for (std::size_t i = 1; i < raw_times.size(); ++i) {
        require(raw_times[i] >= raw_times[i - 1], Errc::ordering, "normalize_times: timestamps decrease");
    }
    const double first = raw_times.front();
    const double span = raw_times.back() - first;
    std::vector<double> out(raw_times.size(), 0.0);
    if (span <= 0.0) return out;
    for (std::size_t i = 0; i < raw_times.size(); ++i) out[i] = (raw_times[i] - first) / span;
    out.back() = 1.0;
    return out;
}

ViewGrid::ViewGrid(std::vector<Camera> cameras, std::vector<double> raw_times, int width, int height)
    : ViewGrid(std::move(cameras), raw_times, normalize_times(raw_times), width, height) {}

ViewGrid::ViewGrid(std::vector<Camera> cameras, std::vector<double> raw_times, std::vector<double> times, int width,
                   int height)
    : cameras_(std::move(cameras)),
      raw_times_(std::move(raw_times)),
      times_(std::move(times)),
      width_(width),
      height_(height),
      cells_(cameras_.size() * times_.size()),
      fill_(cameras_.size() * times_.size(), FillState::empty) {
    validate();
}

void ViewGrid::validate() const {
    require(width_ > 0 && height_ > 0, Errc::invalid_argument, "grid image size must be positive");
    require(raw_times_.size() == times_.size(), Errc::invalid_argument, "raw and normalised time counts differ");
    for (std::size_t j = 0; j < times_.size(); ++j) {
        require(times_[j] >= 0.0 && times_[j] <= 1.0, Errc::out_of_range, "grid time outside [0,1]");
        if (j > 0) require(times_[j] > times_[j - 1], Errc::ordering, "grid timestamps must strictly increase");
    }
    for (std::size_t i = 0; i < cameras_.size(); ++i) {
        cameras_[i].validate();
        require(cameras_[i].width == width_ && cameras_[i].height == height_, Errc::shape_mismatch,
                "grid camera image size differs from grid size");
        for (std::size_t k = 0; k < i; ++k) {
            require(!(cameras_[i] == cameras_[k]), Errc::invalid_argument, "grid row cameras must be distinct");
        }
    }
}

std::size_t ViewGrid::index(int row, int col) const {
    if (row < 0 || row >= rows() || col < 0 || col >= cols()) {
        fail(Errc::out_of_range, "grid cell (" + std::to_string(row) + "," + std::to_string(col) + ") out of range");
    }
    return static_cast<std::size_t>(row) * times_.size() + col;
}

const Image& ViewGrid::image(int row, int col) const {
    const auto& c = cell(row, col);
    if (!c) fail(Errc::missing_cell, "grid cell (" + std::to_string(row) + "," + std::to_string(col) + ") is empty");
    return *c;
}

void ViewGrid::set(int row, int col, Image image, FillState state) {
    require(state != FillState::empty, Errc::invalid_argument, "use clear() to empty a cell");
    require(image.width == width_ && image.height == height_, Errc::shape_mismatch, "cell image size mismatch");
    const std::size_t k = index(row, col);
    cells_[k] = std::move(image);
    fill_[k] = state;
}

void ViewGrid::clear(int row, int col) {
    const std::size_t k = index(row, col);
    cells_[k].reset();
    fill_[k] = FillState::empty;
}

bool ViewGrid::complete() const {
    return std::all_of(fill_.begin(), fill_.end(), [](FillState s) { return s != FillState::empty; });
}

View ViewGrid::view(int row, int col) const { return View{image(row, col), camera(row), time(col)}; }

ViewGrid video_to_grid(std::span<const View> frames, std::span<const double> raw_times) {
    require(!frames.empty(), Errc::invalid_argument, "video_to_grid: no frames");
    require(frames.size() == raw_times.size(), Errc::invalid_argument, "video_to_grid: frame/time count mismatch");
    std::vector<Camera> cams;
    std::vector<int> row_of(frames.size());
    for (std::size_t j = 0; j < frames.size(); ++j) {
        auto it = std::find(cams.begin(), cams.end(), frames[j].camera);
        if (it == cams.end()) {
            cams.push_back(frames[j].camera);
            row_of[j] = static_cast<int>(cams.size()) - 1;
        } else {
            row_of[j] = static_cast<int>(it - cams.begin());
        }
    }
    std::vector<double> times(frames.size());
    for (std::size_t j = 0; j < frames.size(); ++j) times[j] = frames[j].time;
    ViewGrid grid(std::move(cams), std::vector<double>(raw_times.begin(), raw_times.end()), std::move(times),
                  frames.front().image.width, frames.front().image.height);
    for (std::size_t j = 0; j < frames.size(); ++j) {
        grid.set(row_of[j], static_cast<int>(j), frames[j].image, FillState::input);
    }
    return grid;
}

std::vector<Frame> grid_to_frames(const ViewGrid& grid) {
    std::vector<Frame> frames;
    for (int j = 0; j < grid.cols(); ++j) {
        int found = -1;
        for (int i = 0; i < grid.rows(); ++i) {
            if (grid.fill(i, j) == FillState::empty) continue;
            require(found < 0, Errc::invalid_argument, "grid_to_frames: column has more than one filled cell");
            found = i;
        }
        require(found >= 0, Errc::missing_cell, "grid_to_frames: column " + std::to_string(j) + " is empty");
        frames.push_back(Frame{grid.view(found, j), grid.fill(found, j)});
    }
    return frames;
}

}  // namespace mvgrid
