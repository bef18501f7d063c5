// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/image.hpp"
#include "gsav/math.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsav {

/// Weights of the training objective.
struct LossWeights {
    double jaw = 0.1;
    double l1 = 0.8;  // share of the L1 term inside the RGB loss
    double normal = 1e-5;
    double albedo = 0.25;
    double tv = 0.02;

    void check() const {
        for (double w : {jaw, l1, normal, albedo, tv})
            if (!std::isfinite(w) || w < 0.0)
                throw std::invalid_argument("LossWeights: weights must be finite and >= 0");
        if (l1 > 1.0) throw std::invalid_argument("LossWeights: l1 must lie in [0, 1]");
    }
};

/// A masked loss value; `empty_mask` is set when no pixel was selected.
struct MaskedLoss {
    double value = 0.0;
    bool empty_mask = false;
};

struct LossTerms {
    double rgb = 0.0;
    double jaw = 0.0;
    double normal = 0.0;
    double albedo = 0.0;
    double tv = 0.0;
};

struct LossReport {
    LossTerms terms;
    double total = 0.0;
    bool empty_mask = false;
};

/// Pixel selection threshold for masks given as alpha maps.
inline constexpr double kMaskThreshold = 0.5;

inline bool masked(const Image& mask, int x, int y) { return mask.at(x, y) > kMaskThreshold; }

inline void require_mask(const Image& img, const Image& mask, const char* what) {
    if (mask.channels != 1 || mask.width != img.width || mask.height != img.height)
        throw std::invalid_argument(std::string(what) + ": mask must be single-channel and match the image");
}

// ------------------------------------------------------------------ metrics

inline double mae(const Image& a, const Image& b) {
    require_same_shape(a, b, "mae");
    if (a.data.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k) sum += std::abs(double(a.data[k]) - double(b.data[k]));
    return sum / double(a.data.size());
}

inline double mae_star(const Image& a, const Image& b) { return 100.0 * mae(a, b); }

inline double mse(const Image& a, const Image& b) {
    require_same_shape(a, b, "mse");
    if (a.data.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k) {
        const double d = double(a.data[k]) - double(b.data[k]);
        sum += d * d;
    }
    return sum / double(a.data.size());
}

/// Peak signal-to-noise ratio for unit peak; +infinity for identical images.
inline double psnr(const Image& a, const Image& b) {
    const double m = mse(a, b);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / m);
}

inline constexpr int kSsimRadius = 5;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

namespace detail {

inline const std::array<double, 2 * kSsimRadius + 1>& ssim_kernel() {
    static const auto k = [] {
        std::array<double, 2 * kSsimRadius + 1> w{};
        for (int i = -kSsimRadius; i <= kSsimRadius; ++i)
            w[i + kSsimRadius] = std::exp(-0.5 * i * i / (kSsimSigma * kSsimSigma));
        return w;
    }();
    return k;
}

/// Window statistics at every pixel of one channel. The Gaussian window is
/// truncated at the border and renormalized over the taps that fall inside.
struct SsimStats {
    std::vector<double> mx, my, exx, eyy, exy, norm;
};

inline SsimStats ssim_stats(const Image& a, const Image& b, int c) {
    const int W = a.width, H = a.height;
    const auto& k = ssim_kernel();
    const std::size_t n = a.pixel_count();
    SsimStats s{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n),
                std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            double wsum = 0, mx = 0, my = 0, exx = 0, eyy = 0, exy = 0;
            for (int dy = -kSsimRadius; dy <= kSsimRadius; ++dy) {
                const int yy = y + dy;
                if (yy < 0 || yy >= H) continue;
                for (int dx = -kSsimRadius; dx <= kSsimRadius; ++dx) {
                    const int xx = x + dx;
                    if (xx < 0 || xx >= W) continue;
                    const double w = k[dx + kSsimRadius] * k[dy + kSsimRadius];
                    const double va = a.at(xx, yy, c), vb = b.at(xx, yy, c);
                    wsum += w;
                    mx += w * va;
                    my += w * vb;
                    exx += w * va * va;
                    eyy += w * vb * vb;
                    exy += w * va * vb;
                }
            }
            const std::size_t p = std::size_t(y) * W + x;
            s.norm[p] = wsum;
            s.mx[p] = mx / wsum;
            s.my[p] = my / wsum;
            s.exx[p] = exx / wsum;
            s.eyy[p] = eyy / wsum;
            s.exy[p] = exy / wsum;
        }
    return s;
}

struct SsimTerms {
    double value, d_mx, d_exx, d_exy;  // SSIM and its partials w.r.t. the first image's moments
};

inline SsimTerms ssim_terms(double mx, double my, double exx, double eyy, double exy) {
    const double sx = exx - mx * mx, sy = eyy - my * my, sxy = exy - mx * my;
    const double n1 = 2.0 * mx * my + kSsimC1, n2 = 2.0 * sxy + kSsimC2;
    const double d1 = mx * mx + my * my + kSsimC1, d2 = sx + sy + kSsimC2;
    const double s = n1 * n2 / (d1 * d2);
    return {s, s * (2.0 * my / n1 - 2.0 * my / n2 - 2.0 * mx / d1 + 2.0 * mx / d2), -s / d2, 2.0 * s / n2};
}

}  // namespace detail

/// Mean SSIM over pixels and channels (11x11 Gaussian window, sigma 1.5).
inline double ssim(const Image& a, const Image& b) {
    require_same_shape(a, b, "ssim");
    if (a.data.empty()) return 1.0;
    double sum = 0.0;
    for (int c = 0; c < a.channels; ++c) {
        const detail::SsimStats s = detail::ssim_stats(a, b, c);
        for (std::size_t p = 0; p < a.pixel_count(); ++p)
            sum += detail::ssim_terms(s.mx[p], s.my[p], s.exx[p], s.eyy[p], s.exy[p]).value;
    }
    return sum / double(a.data.size());
}

inline double d_ssim(const Image& a, const Image& b) { return 0.5 * (1.0 - ssim(a, b)); }

/// Gradient of ssim(a, b) with respect to every element of a.
inline Image ssim_gradient(const Image& a, const Image& b) {
    require_same_shape(a, b, "ssim_gradient");
    Image g(a.width, a.height, a.channels);
    const int W = a.width, H = a.height;
    const auto& k = detail::ssim_kernel();
    const double inv = 1.0 / double(a.data.size());
    for (int c = 0; c < a.channels; ++c) {
        const detail::SsimStats s = detail::ssim_stats(a, b, c);
        std::vector<double> ga(a.pixel_count()), gb(a.pixel_count()), gc(a.pixel_count());
        for (std::size_t p = 0; p < a.pixel_count(); ++p) {
            const auto t = detail::ssim_terms(s.mx[p], s.my[p], s.exx[p], s.eyy[p], s.exy[p]);
            ga[p] = t.d_mx / s.norm[p];
            gb[p] = t.d_exx / s.norm[p];
            gc[p] = t.d_exy / s.norm[p];
        }
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                double acc_a = 0, acc_b = 0, acc_c = 0;
                for (int dy = -kSsimRadius; dy <= kSsimRadius; ++dy) {
                    const int yy = y + dy;
                    if (yy < 0 || yy >= H) continue;
                    for (int dx = -kSsimRadius; dx <= kSsimRadius; ++dx) {
                        const int xx = x + dx;
                        if (xx < 0 || xx >= W) continue;
                        const double w = k[dx + kSsimRadius] * k[dy + kSsimRadius];
                        const std::size_t p = std::size_t(yy) * W + xx;
                        acc_a += w * ga[p];
                        acc_b += w * gb[p];
                        acc_c += w * gc[p];
                    }
                }
                const double va = a.at(x, y, c), vb = b.at(x, y, c);
                g.at(x, y, c) = static_cast<float>(inv * (acc_a + 2.0 * va * acc_b + vb * acc_c));
            }
    }
    return g;
}

// ------------------------------------------------------------------ losses

inline double l_rgb(const Image& pred, const Image& gt, double l1 = LossWeights{}.l1) {
    if (l1 == 1.0) return mae(pred, gt);
    return l1 * mae(pred, gt) + (1.0 - l1) * d_ssim(pred, gt);
}

/// Gradient of l_rgb with respect to pred. The L1 subgradient is 0 at ties.
inline Image l_rgb_gradient(const Image& pred, const Image& gt, double l1 = LossWeights{}.l1) {
    require_same_shape(pred, gt, "l_rgb_gradient");
    Image g(pred.width, pred.height, pred.channels);
    if (pred.data.empty()) return g;
    const double inv = 1.0 / double(pred.data.size());
    for (std::size_t k = 0; k < g.data.size(); ++k) {
        const double d = double(pred.data[k]) - double(gt.data[k]);
        g.data[k] = static_cast<float>(l1 * inv * double((d > 0) - (d < 0)));
    }
    if (l1 < 1.0) {
        const Image s = ssim_gradient(pred, gt);
        for (std::size_t k = 0; k < g.data.size(); ++k)
            g.data[k] = static_cast<float>(g.data[k] - 0.5 * (1.0 - l1) * s.data[k]);
    }
    return g;
}

inline double l_jaw(const Vec3& predicted, const Vec3& tracked) { return (predicted - tracked).norm(); }

/// Mean of |1 - n . n_hat| over masked pixels.
inline MaskedLoss l_normal(const Image& rendered, const Image& from_depth, const Image& mask) {
    require_same_shape(rendered, from_depth, "l_normal");
    if (rendered.channels != 3) throw std::invalid_argument("l_normal: normal maps need 3 channels");
    require_mask(rendered, mask, "l_normal");
    double sum = 0.0;
    std::size_t count = 0;
    for (int y = 0; y < rendered.height; ++y)
        for (int x = 0; x < rendered.width; ++x) {
            if (!masked(mask, x, y)) continue;
            double dot = 0.0;
            for (int c = 0; c < 3; ++c) dot += double(rendered.at(x, y, c)) * double(from_depth.at(x, y, c));
            sum += std::abs(1.0 - dot);
            ++count;
        }
    if (count == 0) return {0.0, true};
    return {sum / double(count), false};
}

/// Mean absolute difference over masked pixels and all channels.
inline MaskedLoss l_albedo(const Image& rendered, const Image& target, const Image& mask) {
    require_same_shape(rendered, target, "l_albedo");
    require_mask(rendered, mask, "l_albedo");
    double sum = 0.0;
    std::size_t count = 0;
    for (int y = 0; y < rendered.height; ++y)
        for (int x = 0; x < rendered.width; ++x) {
            if (!masked(mask, x, y)) continue;
            for (int c = 0; c < rendered.channels; ++c)
                sum += std::abs(double(rendered.at(x, y, c)) - double(target.at(x, y, c)));
            count += std::size_t(rendered.channels);
        }
    if (count == 0) return {0.0, true};
    return {sum / double(count), false};
}

/// Total variation of a single-channel map: forward differences |dx| + |dy|
/// taken where both pixels are masked, averaged over the masked pixels.
inline MaskedLoss tv(const Image& map, const Image& mask) {
    if (map.channels != 1) throw std::invalid_argument("tv: map must be single-channel");
    require_mask(map, mask, "tv");
    double sum = 0.0;
    std::size_t count = 0;
    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x) {
            if (!masked(mask, x, y)) continue;
            ++count;
            const double v = map.at(x, y);
            if (x + 1 < map.width && masked(mask, x + 1, y)) sum += std::abs(double(map.at(x + 1, y)) - v);
            if (y + 1 < map.height && masked(mask, x, y + 1)) sum += std::abs(double(map.at(x, y + 1)) - v);
        }
    if (count == 0) return {0.0, true};
    return {sum / double(count), false};
}

/// Gradient of tv with respect to the map.
inline Image tv_gradient(const Image& map, const Image& mask) {
    if (map.channels != 1) throw std::invalid_argument("tv_gradient: map must be single-channel");
    require_mask(map, mask, "tv_gradient");
    Image g(map.width, map.height, 1);
    std::size_t count = 0;
    for (float m : mask.data) count += m > kMaskThreshold;
    if (count == 0) return g;
    const double inv = 1.0 / double(count);
    auto edge = [&](int x0, int y0, int x1, int y1) {
        const double d = double(map.at(x1, y1)) - double(map.at(x0, y0));
        const double s = inv * double((d > 0) - (d < 0));
        g.at(x1, y1) += static_cast<float>(s);
        g.at(x0, y0) -= static_cast<float>(s);
    };
    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x) {
            if (!masked(mask, x, y)) continue;
            if (x + 1 < map.width && masked(mask, x + 1, y)) edge(x, y, x + 1, y);
            if (y + 1 < map.height && masked(mask, x, y + 1)) edge(x, y, x, y + 1);
        }
    return g;
}

/// Weighted sum of already-evaluated terms.
inline LossReport total_loss(const LossTerms& terms, const LossWeights& w = {}) {
    w.check();
    LossReport r;
    r.terms = terms;
    r.total = terms.rgb + w.jaw * terms.jaw + w.normal * terms.normal + w.albedo * terms.albedo +
              w.tv * terms.tv;
    return r;
}

/// Everything the objective looks at for one frame. Empty optional images
/// drop their term.
struct LossInputs {
    Image rendered;           // shaded RGB
    Image target;             // ground-truth RGB
    Vec3 predicted_jaw = Vec3::Zero();
    Vec3 tracked_jaw = Vec3::Zero();
    Image normals;            // rendered normal map
    Image depth_normals;      // normals from the depth map
    Image albedo;             // rendered albedo
    Image albedo_target;      // pseudo ground-truth albedo
    Image roughness;          // rendered roughness map
    Image mask;               // foreground alpha
};

inline LossReport total_loss(const LossInputs& in, const LossWeights& w = {}) {
    w.check();
    LossTerms t;
    t.rgb = l_rgb(in.rendered, in.target, w.l1);
    t.jaw = l_jaw(in.predicted_jaw, in.tracked_jaw);
    bool empty = false;
    if (!in.normals.data.empty()) {
        const MaskedLoss m = l_normal(in.normals, in.depth_normals, in.mask);
        t.normal = m.value;
        empty |= m.empty_mask;
    }
    if (!in.albedo_target.data.empty()) {
        const MaskedLoss m = l_albedo(in.albedo, in.albedo_target, in.mask);
        t.albedo = m.value;
        empty |= m.empty_mask;
    }
    if (!in.roughness.data.empty()) {
        const MaskedLoss m = tv(in.roughness, in.mask);
        t.tv = m.value;
        empty |= m.empty_mask;
    }
    LossReport r = total_loss(t, w);
    r.empty_mask = empty;
    return r;
}

}  // namespace gsav
