// SPDX-License-Identifier: Apache-2.0
#include "gsav/losses.hpp"

#include <gtest/gtest.h>

#include <random>

namespace gsav {
namespace {

Image random_image(std::uint64_t seed, int w, int h, int c, float lo = 0.0f, float hi = 1.0f) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(lo, hi);
    Image img(w, h, c);
    for (float& v : img.data) v = u(rng);
    return img;
}

Image unit_normals(std::uint64_t seed, int w, int h) {
    Image img = random_image(seed, w, h, 3, -1.0f, 1.0f);
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        const Vec3 n = Vec3(img.data[3 * p], img.data[3 * p + 1], img.data[3 * p + 2]).normalized();
        for (int c = 0; c < 3; ++c) img.data[3 * p + c] = static_cast<float>(n[c]);
    }
    return img;
}

TEST(Mae, Examples) {
    const Image a = random_image(1, 9, 7, 3);
    EXPECT_EQ(mae(a, a), 0.0);
    const Image zero(4, 4, 3), half(4, 4, 3, 0.5f);
    EXPECT_EQ(mae(zero, half), 0.5);
    EXPECT_EQ(mae_star(zero, half), 50.0);
    EXPECT_THROW(mae(zero, Image(4, 4, 1)), std::invalid_argument);
}

TEST(Mae, MatchesDirectSummation) {
    const Image a = random_image(2, 13, 11, 3), b = random_image(3, 13, 11, 3);
    double sum = 0.0;
    for (int y = 0; y < 11; ++y)
        for (int x = 0; x < 13; ++x)
            for (int c = 0; c < 3; ++c) sum += std::abs(double(a.at(x, y, c)) - b.at(x, y, c));
    EXPECT_NEAR(mae(a, b), sum / (13 * 11 * 3), 1e-9);
}

TEST(Psnr, ClosedForm) {
    const Image a(8, 8, 3), b(8, 8, 3, 0.1f);
    EXPECT_NEAR(psnr(a, b), 20.0, 1e-5);  // MSE = 0.1f^2
    EXPECT_EQ(psnr(a, a), std::numeric_limits<double>::infinity());
}

TEST(Ssim, IdenticalAndInverted) {
    const Image a = random_image(4, 20, 16, 3);
    EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
    EXPECT_NEAR(d_ssim(a, a), 0.0, 1e-12);
    Image inv = a;
    for (float& v : inv.data) v = 1.0f - v;
    EXPECT_LT(ssim(a, inv), 1.0);
    EXPECT_LT(ssim(a, inv), 0.0);
}

TEST(Ssim, ConstantImagesClosedForm) {
    const double c1 = 0.3, c2 = 0.6;
    const Image a(12, 12, 1, float(c1)), b(12, 12, 1, float(c2));
    const double x = float(c1), y = float(c2);
    const double expected = (2 * x * y + kSsimC1) / (x * x + y * y + kSsimC1);
    EXPECT_NEAR(ssim(a, b), expected, 1e-9);
}

TEST(Ssim, SymmetricAndBounded) {
    const Image a = random_image(5, 17, 13, 3), b = random_image(6, 17, 13, 3);
    EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
    EXPECT_LE(ssim(a, b), 1.0);
    EXPECT_GE(d_ssim(a, b), 0.0);
}

TEST(Ssim, GradientMatchesFiniteDifferences) {
    Image a = random_image(7, 14, 12, 3);
    const Image b = random_image(8, 14, 12, 3);
    const Image g = ssim_gradient(a, b);
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<std::size_t> pick(0, a.data.size() - 1);
    for (int t = 0; t < 40; ++t) {
        const std::size_t k = pick(rng);
        const float h = 1e-3f, v = a.data[k];
        a.data[k] = v + h;
        const double up = ssim(a, b);
        a.data[k] = v - h;
        const double down = ssim(a, b);
        a.data[k] = v;
        const double fd = (up - down) / (double(v + h) - double(v - h));
        EXPECT_NEAR(g.data[k], fd, 1e-3 * std::abs(fd) + 1e-7) << k;
    }
}

TEST(LRgb, Examples) {
    const Image a = random_image(10, 12, 12, 3), b = random_image(11, 12, 12, 3);
    EXPECT_EQ(l_rgb(a, a), 0.0);
    EXPECT_EQ(l_rgb(a, b, 1.0), mae(a, b));
    EXPECT_NEAR(l_rgb(a, b), 0.8 * mae(a, b) + 0.2 * d_ssim(a, b), 1e-15);
}

TEST(LRgb, GradientMatchesFiniteDifferences) {
    Image a = random_image(12, 12, 12, 3);
    const Image b = random_image(13, 12, 12, 3);
    const Image g = l_rgb_gradient(a, b);
    for (std::size_t k = 0; k < a.data.size(); k += 37) {
        const float h = 1e-3f, v = a.data[k];
        if (std::abs(v - b.data[k]) < 2e-3f) continue;
        a.data[k] = v + h;
        const double up = l_rgb(a, b);
        a.data[k] = v - h;
        const double down = l_rgb(a, b);
        a.data[k] = v;
        const double fd = (up - down) / (double(v + h) - double(v - h));
        EXPECT_NEAR(g.data[k], fd, 1e-3 * std::abs(fd) + 1e-8) << k;
    }
}

TEST(LJaw, Examples) {
    EXPECT_EQ(l_jaw(Vec3(0.1, 0.2, 0.3), Vec3(0.1, 0.2, 0.3)), 0.0);
    EXPECT_NEAR(l_jaw(Vec3(0.03, 0.04, 0.0), Vec3::Zero()), 0.05, 1e-15);
    const Vec3 a(0.3, -0.1, 0.2), b(-0.2, 0.4, 0.0);
    EXPECT_EQ(l_jaw(a, b), l_jaw(b, a));
}

TEST(LNormal, Examples) {
    const Image n = unit_normals(14, 8, 6);
    const Image mask(8, 6, 1, 1.0f);
    EXPECT_NEAR(l_normal(n, n, mask).value, 0.0, 1e-6);
    Image opposite = n;
    for (float& v : opposite.data) v = -v;
    EXPECT_NEAR(l_normal(n, opposite, mask).value, 2.0, 1e-6);

    Image x(8, 6, 3), y(8, 6, 3);
    for (std::size_t p = 0; p < x.pixel_count(); ++p) {
        x.data[3 * p] = 1.0f;
        y.data[3 * p + 1] = 1.0f;
    }
    EXPECT_EQ(l_normal(x, y, mask).value, 1.0);

    const MaskedLoss empty = l_normal(n, opposite, Image(8, 6, 1));
    EXPECT_EQ(empty.value, 0.0);
    EXPECT_TRUE(empty.empty_mask);
}

TEST(LNormal, MaskSelectsPixels) {
    Image x(4, 1, 3), y(4, 1, 3), mask(4, 1, 1);
    for (int p = 0; p < 4; ++p) {
        x.at(p, 0, 2) = 1.0f;
        y.at(p, 0, 2) = p < 2 ? 1.0f : -1.0f;
    }
    mask.at(1, 0) = 1.0f;
    mask.at(2, 0) = 0.8f;
    mask.at(3, 0) = 0.5f;  // not above the threshold
    EXPECT_EQ(l_normal(x, y, mask).value, 1.0);  // (0 + 2) / 2
}

TEST(LAlbedo, Examples) {
    const Image a = random_image(15, 10, 9, 3), b = random_image(16, 10, 9, 3);
    Image mask = random_image(17, 10, 9, 1);
    EXPECT_EQ(l_albedo(a, a, mask).value, 0.0);
    EXPECT_EQ(l_albedo(Image(10, 9, 3), Image(10, 9, 3, 1.0f), mask).value, 1.0);
    double sum = 0.0;
    int count = 0;
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 10; ++x)
            if (mask.at(x, y) > 0.5f)
                for (int c = 0; c < 3; ++c, ++count) sum += std::abs(double(a.at(x, y, c)) - b.at(x, y, c));
    EXPECT_NEAR(l_albedo(a, b, mask).value, sum / count, 1e-9);
    EXPECT_THROW(l_albedo(a, Image(10, 9, 1), mask), std::invalid_argument);
}

TEST(Tv, Examples) {
    const Image mask(9, 7, 1, 1.0f);
    EXPECT_EQ(tv(Image(9, 7, 1, 0.4f), mask).value, 0.0);
    // Step of height h between columns 3 and 4: one x-difference per row.
    const double h = 0.25;
    Image step(9, 7, 1);
    for (int y = 0; y < 7; ++y)
        for (int x = 4; x < 9; ++x) step.at(x, y) = float(h);
    EXPECT_NEAR(tv(step, mask).value, h * 7 / (9 * 7), 1e-12);
    for (int seed = 0; seed < 5; ++seed) EXPECT_GE(tv(random_image(seed, 9, 7, 1), mask).value, 0.0);
}

TEST(Tv, GradientMatchesFiniteDifferences) {
    Image map = random_image(18, 9, 8, 1);
    Image mask = random_image(19, 9, 8, 1);
    const Image g = tv_gradient(map, mask);
    for (std::size_t k = 0; k < map.data.size(); ++k) {
        const float h = 1e-4f, v = map.data[k];
        map.data[k] = v + h;
        const double up = tv(map, mask).value;
        map.data[k] = v - h;
        const double down = tv(map, mask).value;
        map.data[k] = v;
        EXPECT_NEAR(g.data[k], (up - down) / (double(v + h) - double(v - h)), 1e-3) << k;
    }
}

TEST(LossWeightsTest, Defaults) {
    const LossWeights w;
    EXPECT_EQ(w.jaw, 0.1);
    EXPECT_EQ(w.l1, 0.8);
    EXPECT_EQ(w.normal, 1e-5);
    EXPECT_EQ(w.albedo, 0.25);
    EXPECT_EQ(w.tv, 0.02);
    EXPECT_NO_THROW(w.check());
    EXPECT_THROW((LossWeights{0.1, 1.5}).check(), std::invalid_argument);
    EXPECT_THROW((LossWeights{-0.1}).check(), std::invalid_argument);
}

TEST(TotalLoss, WeightedSum) {
    EXPECT_EQ(total_loss(LossTerms{}).total, 0.0);
    const LossTerms t{0.3, 0.07, 0.5, 0.11, 0.9};
    EXPECT_NEAR(total_loss(t).total, 0.3 + 0.1 * 0.07 + 1e-5 * 0.5 + 0.25 * 0.11 + 0.02 * 0.9, 1e-15);
    EXPECT_EQ(total_loss(t, LossWeights{0, 0.8, 0, 0, 0}).total, 0.3);
    std::mt19937_64 rng(20);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int k = 0; k < 100; ++k) {
        const LossTerms r{u(rng), u(rng), u(rng), u(rng), u(rng)};
        const LossWeights w{u(rng), u(rng) / 3.0, u(rng), u(rng), u(rng)};
        const LossReport rep = total_loss(r, w);
        EXPECT_NEAR(rep.total, r.rgb + w.jaw * r.jaw + w.normal * r.normal + w.albedo * r.albedo + w.tv * r.tv, 1e-9);
    }
}

TEST(TotalLoss, FromInputs) {
    LossInputs in;
    in.rendered = random_image(21, 16, 16, 3);
    in.target = random_image(22, 16, 16, 3);
    in.predicted_jaw = Vec3(0.03, 0.04, 0.0);
    in.normals = unit_normals(23, 16, 16);
    in.depth_normals = unit_normals(24, 16, 16);
    in.albedo = random_image(25, 16, 16, 3);
    in.albedo_target = random_image(26, 16, 16, 3);
    in.roughness = random_image(27, 16, 16, 1);
    in.mask = random_image(28, 16, 16, 1);
    const LossReport r = total_loss(in);
    EXPECT_NEAR(r.terms.rgb, l_rgb(in.rendered, in.target), 1e-15);
    EXPECT_NEAR(r.terms.jaw, 0.05, 1e-15);
    EXPECT_EQ(r.terms.tv, tv(in.roughness, in.mask).value);
    EXPECT_NEAR(r.total, total_loss(r.terms).total, 1e-15);
    EXPECT_FALSE(r.empty_mask);
    in.mask = Image(16, 16, 1);
    EXPECT_TRUE(total_loss(in).empty_mask);
}

TEST(Losses, NonNegativeAndZeroOnIdentical) {
    for (int seed = 0; seed < 5; ++seed) {
        const Image a = random_image(100 + seed, 12, 10, 3), b = random_image(200 + seed, 12, 10, 3);
        const Image m = random_image(300 + seed, 12, 10, 1), r = random_image(400 + seed, 12, 10, 1);
        const Image n = unit_normals(500 + seed, 12, 10);
        for (double v : {mae(a, b), l_rgb(a, b), d_ssim(a, b), l_albedo(a, b, m).value, tv(r, m).value,
                         l_normal(n, unit_normals(600 + seed, 12, 10), m).value})
            EXPECT_GE(v, 0.0);
        EXPECT_EQ(mae(a, a), 0.0);
        EXPECT_NEAR(l_rgb(a, a), 0.0, 1e-15);
        EXPECT_EQ(l_albedo(a, a, m).value, 0.0);
    }
}

}  // namespace
}  // namespace gsav
