#include "mvgrid/ssim.hpp"

#include <cmath>

#include "mvgrid/error.hpp"

namespace mvgrid {

std::vector<double> ssim_taps() {
    std::vector<double> taps(kSsimWindow);
    const int half = kSsimWindow / 2;
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - half;
        taps[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += taps[i];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

namespace {

// Valid separable correlation: out is (w - n + 1) x (h - n + 1).
std::vector<double> filter_valid(const std::vector<double>& in, int w, int h, const std::vector<double>& g) {
    const int n = static_cast<int>(g.size());
    const int ow = w - n + 1;
    const int oh = h - n + 1;
    std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += g[i] * in[static_cast<std::size_t>(y) * w + x + i];
            tmp[static_cast<std::size_t>(y) * ow + x] = s;
        }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += g[i] * tmp[static_cast<std::size_t>(y + i) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = s;
        }
    return out;
}

// Adjoint of filter_valid: scatters a (ow x oh) map back to w x h.
std::vector<double> filter_adjoint(const std::vector<double>& in, int w, int h, const std::vector<double>& g) {
    const int n = static_cast<int>(g.size());
    const int ow = w - n + 1;
    const int oh = h - n + 1;
    std::vector<double> tmp(static_cast<std::size_t>(ow) * h, 0.0);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            const double v = in[static_cast<std::size_t>(y) * ow + x];
            for (int i = 0; i < n; ++i) tmp[static_cast<std::size_t>(y + i) * ow + x] += g[i] * v;
        }
    std::vector<double> out(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            const double v = tmp[static_cast<std::size_t>(y) * ow + x];
            for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(y) * w + x + i] += g[i] * v;
        }
    return out;
}

}  // namespace

SsimPlane ssim_plane(std::span<const double> a, std::span<const double> b, int width, int height,
                     bool with_gradient) {
    require(width >= kSsimWindow && height >= kSsimWindow, Errc::invalid_argument,
            "ssim: image smaller than the 11x11 window");
    const std::size_t n = static_cast<std::size_t>(width) * height;
    require(a.size() == n && b.size() == n, Errc::shape_mismatch, "ssim: plane sizes differ");

    const std::vector<double> g = ssim_taps();
    std::vector<double> va(a.begin(), a.end());
    std::vector<double> vb(b.begin(), b.end());
    std::vector<double> aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        aa[i] = va[i] * va[i];
        bb[i] = vb[i] * vb[i];
        ab[i] = va[i] * vb[i];
    }
    const auto mu_a = filter_valid(va, width, height, g);
    const auto mu_b = filter_valid(vb, width, height, g);
    const auto e_aa = filter_valid(aa, width, height, g);
    const auto e_bb = filter_valid(bb, width, height, g);
    const auto e_ab = filter_valid(ab, width, height, g);

    const double c1 = kSsimK1 * kSsimK1;
    const double c2 = kSsimK2 * kSsimK2;
    const std::size_t m = mu_a.size();
    SsimPlane out;
    std::vector<double> da_mu, da_var, da_cov;
    if (with_gradient) {
        da_mu.resize(m);
        da_var.resize(m);
        da_cov.resize(m);
    }
    double sum = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
        const double ma = mu_a[p];
        const double mb = mu_b[p];
        const double var_a = e_aa[p] - ma * ma;
        const double var_b = e_bb[p] - mb * mb;
        const double cov = e_ab[p] - ma * mb;
        const double a1 = 2.0 * ma * mb + c1;
        const double a2 = 2.0 * cov + c2;
        const double b1 = ma * ma + mb * mb + c1;
        const double b2 = var_a + var_b + c2;
        const double s = a1 * a2 / (b1 * b2);
        sum += s;
        if (with_gradient) {
            // Partial derivatives w.r.t. mu_a, var_a and cov, scaled for the mean.
            const double inv = 1.0 / static_cast<double>(m);
            const double d_mu = (2.0 * mb * a2 / (b1 * b2) - s * 2.0 * ma / b1) * inv;
            const double d_var = -s / b2 * inv;
            const double d_cov = 2.0 * a1 / (b1 * b2) * inv;
            // d var_a / d a_q = 2 g (a_q - mu_a); d cov / d a_q = g (b_q - mu_b).
            da_mu[p] = d_mu - 2.0 * d_var * ma - d_cov * mb;
            da_var[p] = 2.0 * d_var;
            da_cov[p] = d_cov;
        }
    }
    out.value = sum / static_cast<double>(m);
    if (with_gradient) {
        const auto t_mu = filter_adjoint(da_mu, width, height, g);
        const auto t_var = filter_adjoint(da_var, width, height, g);
        const auto t_cov = filter_adjoint(da_cov, width, height, g);
        out.grad.resize(n);
        for (std::size_t q = 0; q < n; ++q) out.grad[q] = t_mu[q] + va[q] * t_var[q] + vb[q] * t_cov[q];
    }
    return out;
}

}  // namespace mvgrid
