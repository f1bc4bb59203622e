#include "mvgrid/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvgrid/error.hpp"
#include "mvgrid/metrics.hpp"
#include "mvgrid/optimize.hpp"
#include "mvgrid/oracle.hpp"

namespace mvgrid::metrics {

namespace {

double temporal_score(const ViewGrid& grid, const std::vector<std::vector<char>>& masks) {
    if (grid.cols() < 2) return 0.0;
    double total = 0.0;
    int rows = 0;
    for (int r = 0; r < grid.rows(); ++r) {
        const auto& mask = masks[r];
        const std::size_t static_pixels = std::count(mask.begin(), mask.end(), 1);
        if (static_pixels == 0) continue;
        double row_sum = 0.0;
        for (int c = 1; c < grid.cols(); ++c) {
            const Image& a = grid.image(r, c - 1);
            const Image& b = grid.image(r, c);
            double s = 0.0;
            for (std::size_t p = 0; p < mask.size(); ++p)
                if (mask[p])
                    for (int ch = 0; ch < 3; ++ch) s += std::abs(a.data[3 * p + ch] - b.data[3 * p + ch]);
            row_sum += s / (3.0 * static_cast<double>(static_pixels));
        }
        total += row_sum / (grid.cols() - 1);
        ++rows;
    }
    return rows == 0 ? 0.0 : total / rows;
}

// Mean |cell - render - shared smooth bias| over a column for one proxy time.
double column_residual(const ViewGrid& grid, int col, const std::vector<Image>& renders,
                       const std::vector<std::vector<double>>& basis) {
    const int k = grid.rows();
    const std::size_t npix = static_cast<std::size_t>(grid.width()) * grid.height();
    std::vector<Image> residual(k);
    double coef[3][3] = {};
    for (int r = 0; r < k; ++r) {
        residual[r] = grid.image(r, col);
        for (std::size_t q = 0; q < residual[r].data.size(); ++q) residual[r].data[q] -= renders[r].data[q];
        for (std::size_t p = 0; p < npix; ++p)
            for (int ch = 0; ch < 3; ++ch)
                for (std::size_t b = 0; b < basis.size(); ++b)
                    coef[ch][b] += basis[b][p] * residual[r].data[3 * p + ch] / k;
    }
    double total = 0.0;
    for (int r = 0; r < k; ++r)
        for (std::size_t p = 0; p < npix; ++p)
            for (int ch = 0; ch < 3; ++ch) {
                double v = residual[r].data[3 * p + ch];
                for (std::size_t b = 0; b < basis.size(); ++b) v -= coef[ch][b] * basis[b][p];
                total += std::abs(v);
            }
    return total / (3.0 * static_cast<double>(npix) * k);
}

double view_score_scene(const ViewGrid& grid, const toyworld::SceneSpec& scene, const ConsistencyOptions& options) {
    const auto basis = diffusion::smooth_basis(grid.width(), grid.height());
    double total = 0.0;
    for (int c = 0; c < grid.cols(); ++c) {
        double best = std::numeric_limits<double>::infinity();
        for (int s = 0; s < options.time_search_steps; ++s) {
            const double offset = options.time_search_steps == 1
                                      ? 0.0
                                      : options.time_search_radius * (2.0 * s / (options.time_search_steps - 1) - 1.0);
            const double t = std::clamp(grid.time(c) + offset, 0.0, 1.0);
            std::vector<Image> renders;
            for (int r = 0; r < grid.rows(); ++r)
                renders.push_back(toyworld::render(scene, grid.camera(r), t, options.render));
            best = std::min(best, column_residual(grid, c, renders, basis));
        }
        total += best;
    }
    return grid.cols() == 0 ? 0.0 : total / grid.cols();
}

double view_score_proxy(const ViewGrid& grid, const ConsistencyOptions& options) {
    recon4d::ReconConfig cfg;
    cfg.phase1_iters = options.proxy_iterations;
    cfg.phase2_iters = 0;
    cfg.init_points = 1000;
    const double h = options.proxy_box_half_extent;
    const recon4d::Aabb box{Vec3::Constant(-h), Vec3::Constant(h)};
    double total = 0.0;
    for (int c = 0; c < grid.cols(); ++c) {
        std::vector<Frame> frames;
        for (int r = 0; r < grid.rows(); ++r)
            frames.push_back(Frame{View{grid.image(r, c), grid.camera(r), 0.0}, FillState::generated});
        const auto fit = recon4d::optimize(frames, cfg, box, options.seed);
        double col = 0.0;
        for (int r = 0; r < grid.rows(); ++r)
            col += mean_abs_diff(recon4d::render_model(fit.cloud, fit.field, grid.camera(r), 0.0, cfg.raster),
                                 grid.image(r, c));
        total += col / grid.rows();
    }
    return grid.cols() == 0 ? 0.0 : total / grid.cols();
}

}  // namespace

ConsistencyReport consistency_report(const ViewGrid& grid, const toyworld::SceneSpec* scene,
                                     const ConsistencyOptions& options) {
    require(grid.complete(), Errc::missing_cell, "consistency_report: grid is incomplete");
    require(options.time_search_steps >= 1 && options.time_search_radius >= 0.0, Errc::invalid_argument,
            "consistency_report: bad time search settings");
    ConsistencyReport report;
    const std::size_t npix = static_cast<std::size_t>(grid.width()) * grid.height();
    std::vector<std::vector<char>> masks(grid.rows(), std::vector<char>(npix, 1));

    if (scene) {
        report.has_ground_truth = true;
        double sum = 0.0;
        double worst = std::numeric_limits<double>::infinity();
        for (int r = 0; r < grid.rows(); ++r) {
            std::vector<Image> truth;
            for (int c = 0; c < grid.cols(); ++c) {
                truth.push_back(toyworld::render(*scene, grid.camera(r), grid.time(c), options.render));
                const double p = psnr(grid.image(r, c), truth.back());
                sum += p;
                worst = std::min(worst, p);
            }
            for (std::size_t p = 0; p < npix; ++p)
                for (int c = 1; c < grid.cols() && masks[r][p]; ++c)
                    for (int ch = 0; ch < 3; ++ch)
                        if (truth[c].data[3 * p + ch] != truth[0].data[3 * p + ch]) masks[r][p] = 0;
        }
        report.psnr_mean = sum / (static_cast<double>(grid.rows()) * grid.cols());
        report.psnr_min = worst;
        report.view_inconsistency = view_score_scene(grid, *scene, options);
    } else {
        report.view_inconsistency = view_score_proxy(grid, options);
    }
    report.temporal_inconsistency = temporal_score(grid, masks);
    report.per_seed.push_back({options.seed, report.psnr_mean, report.temporal_inconsistency,
                               report.view_inconsistency});
    return report;
}

ConsistencyReport aggregate(std::span<const ConsistencyReport> reports, std::span<const std::uint64_t> seeds) {
    require(!reports.empty() && reports.size() == seeds.size(), Errc::invalid_argument,
            "aggregate: need one seed per report");
    ConsistencyReport out;
    out.has_ground_truth = true;
    out.psnr_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        out.has_ground_truth = out.has_ground_truth && r.has_ground_truth;
        out.psnr_mean += r.psnr_mean / reports.size();
        out.psnr_min = std::min(out.psnr_min, r.psnr_min);
        out.temporal_inconsistency += r.temporal_inconsistency / reports.size();
        out.view_inconsistency += r.view_inconsistency / reports.size();
        out.per_seed.push_back({seeds[i], r.psnr_mean, r.temporal_inconsistency, r.view_inconsistency});
    }
    return out;
}

nlohmann::json to_json(const ConsistencyReport& report) {
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto& s : report.per_seed)
        seeds.push_back({{"seed", s.seed}, {"psnr_mean", s.psnr_mean}, {"temporal", s.temporal}, {"view", s.view}});
    nlohmann::json j{{"temporal_inconsistency", report.temporal_inconsistency},
                     {"view_inconsistency", report.view_inconsistency},
                     {"per_seed", seeds}};
    if (report.has_ground_truth) {
        j["psnr_mean"] = report.psnr_mean;
        j["psnr_min"] = report.psnr_min;
    }
    return j;
}

}  // namespace mvgrid::metrics
