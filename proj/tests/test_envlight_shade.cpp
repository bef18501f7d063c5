// SPDX-License-Identifier: Apache-2.0
#include "envs.hpp"
#include "gsav/envlight.hpp"
#include "gsav/rasterize.hpp"
#include "gsav/shade.hpp"

#include <gtest/gtest.h>

#include <random>

namespace gsav {
namespace {

Cubemap constant_cube(int res, double v) {
    return make_cubemap(res, [v](const Vec3&) -> Vec3 { return Vec3(v, v, v); });
}

double face_mean(const Cubemap& c, int face) {
    double s = 0.0;
    for (int j = 0; j < c.res; ++j)
        for (int i = 0; i < c.res; ++i) s += c.texel(face, i, j).sum() / 3.0;
    return s / (c.res * c.res);
}

// ---------------------------------------------------------------- equirect

TEST(Equirect, DirectionRoundTrip) {
    for (int f = 0; f < 6; ++f)
        for (int j = 0; j < 8; ++j)
            for (int i = 0; i < 8; ++i) {
                const Vec3 d = cube_texel_direction(f, i, j, 8);
                EXPECT_LT((equirect_to_direction(direction_to_equirect(d)) - d).norm(), 1e-6);
            }
}

TEST(Equirect, ConstantImageGivesConstantCube) {
    const Image img = make_equirect(32, 16, [](const Vec3&) -> Vec3 { return Vec3(0.7, 0.7, 0.7); });
    const Cubemap c = equirect_to_cubemap(img, 8);
    for (float v : c.data) EXPECT_NEAR(v, 0.7f, 1e-6);
}

TEST(Equirect, HemisphereImageLightsPlusZFace) {
    const Image img = make_equirect(64, 32, [](const Vec3& d) -> Vec3 { return d.z() > 0 ? Vec3(1, 1, 1) : Vec3::Zero(); });
    const Cubemap c = equirect_to_cubemap(img, 16);
    EXPECT_GT(face_mean(c, 4), 0.9);
    EXPECT_LT(face_mean(c, 5), 0.1);
}

TEST(Equirect, NonFiniteInputThrows) {
    Image img(8, 4, 3);
    img.data[5] = std::numeric_limits<float>::quiet_NaN();
    EXPECT_THROW(equirect_to_cubemap(img, 4), std::invalid_argument);
}

// ---------------------------------------------------------------- cube maps

TEST(Cubemap, SolidAnglesSumToSphere) {
    for (int res : {1, 4, 16}) {
        double s = 0.0;
        for (int j = 0; j < res; ++j)
            for (int i = 0; i < res; ++i) s += 6.0 * cube_texel_solid_angle(i, j, res);
        EXPECT_NEAR(s, 4.0 * kPi, 1e-9);
    }
}

TEST(Cubemap, CoordInvertsFaceDirection) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 200; ++k) {
        const Vec3 d = Vec3(u(rng), u(rng), u(rng)).normalized();
        const CubeCoord c = cube_coord(d);
        EXPECT_LT((cube_face_direction(c.face, c.s, c.t).normalized() - d).norm(), 1e-12);
    }
}

TEST(Cubemap, SampleIsContinuousAcrossSeams) {
    const Cubemap c = make_cubemap(16, [](const Vec3& d) -> Vec3 { return Vec3(d.x() + 2, d.y() + 2, d.z() + 2); });
    // Approach the +x/+z edge from both faces.
    const Vec3 a = cube_sample(c, Vec3(1, 0.1, 0.999).normalized());
    const Vec3 b = cube_sample(c, Vec3(0.999, 0.1, 1).normalized());
    EXPECT_LT((a - b).norm(), 0.02);
}

// ---------------------------------------------------------------- irradiance

TEST(Irradiance, ConstantStaysConstant) {
    const Cubemap irr = compute_irradiance(constant_cube(16, 2.0), 8);
    for (float v : irr.data) EXPECT_NEAR(v, 2.0, 2e-3);
}

TEST(Irradiance, LinearEnvironmentMatchesClosedForm) {
    // L(d) = a + b.d integrates to a + (2/3) b.n under the 1/pi cosine convention.
    const Vec3 b(0.3, -0.2, 0.4);
    const Cubemap src = make_cubemap(32, [&](const Vec3& d) -> Vec3 { const double v = 1.0 + b.dot(d); return Vec3(v, v, v); });
    const Cubemap irr = compute_irradiance(src, 8);
    for (int f = 0; f < 6; ++f)
        for (int j = 0; j < 8; ++j)
            for (int i = 0; i < 8; ++i) {
                const Vec3 n = cube_texel_direction(f, i, j, 8);
                EXPECT_NEAR(irr.texel(f, i, j).x(), 1.0 + 2.0 / 3.0 * b.dot(n), 2e-3);
            }
}

TEST(Irradiance, BrightFaceDominates) {
    Cubemap src(16);
    for (int j = 0; j < 16; ++j)
        for (int i = 0; i < 16; ++i) src.set_texel(4, i, j, Vec3(1, 1, 1));
    const Cubemap irr = compute_irradiance(src, 16);
    const double front = cube_sample(irr, Vec3(0, 0, 1)).x(), back = cube_sample(irr, Vec3(0, 0, -1)).x();
    EXPECT_GT(front, 10.0 * std::max(back, 1e-12));
}

TEST(Irradiance, LinearInRadiance) {
    const auto envs = testing::analytic_envs();
    const Cubemap a = make_cubemap(16, envs[2].radiance);
    const Cubemap b = make_cubemap(16, [&](const Vec3& d) -> Vec3 { return 3.0 * envs[2].radiance(d); });
    const Cubemap ia = compute_irradiance(a, 8), ib = compute_irradiance(b, 8);
    for (std::size_t k = 0; k < ia.data.size(); ++k) EXPECT_NEAR(ib.data[k], 3.0 * ia.data[k], 1e-4 * ib.data[k]);
}

// ---------------------------------------------------------------- prefilter

TEST(Prefilter, LevelRoughness) {
    EXPECT_EQ(prefilter_level_roughness(0, 3), 0.02);
    EXPECT_EQ(prefilter_level_roughness(1, 3), 0.5);
    EXPECT_EQ(prefilter_level_roughness(2, 3), 1.0);
}

TEST(Prefilter, ConstantStaysConstantAtEveryLevel) {
    const auto chain = prefilter_ggx(constant_cube(32, 0.5), 16, 3, {256, 0});
    ASSERT_EQ(chain.size(), 3u);
    EXPECT_EQ(chain[0].res, 16);
    EXPECT_EQ(chain[2].res, 4);
    for (const Cubemap& c : chain)
        for (float v : c.data) EXPECT_NEAR(v, 0.5, 1e-5);
}

TEST(Prefilter, PointLightSpreadsWithRoughness) {
    const Vec3 s = Vec3(0, 0, 1);
    const Cubemap src = make_cubemap(32, [&](const Vec3& d) -> Vec3 { return d.dot(s) > 0.995 ? Vec3(1, 1, 1) : Vec3::Zero(); });
    const auto chain = prefilter_ggx(src, 32, 3, {512, 0});
    // Fraction of the peak value 30 degrees away from the light.
    const Vec3 off = Vec3(std::sin(0.52), 0, std::cos(0.52));
    const double sharp = cube_sample(chain[0], off).x() / cube_sample(chain[0], s).x();
    const double broad = cube_sample(chain[2], off).x() / cube_sample(chain[2], s).x();
    EXPECT_LT(sharp, 0.01);
    EXPECT_GT(broad, 0.3);
}

TEST(Prefilter, LinearInRadiance) {
    const auto envs = testing::analytic_envs();
    const Cubemap a = make_cubemap(16, envs[1].radiance);
    const Cubemap b = make_cubemap(16, [&](const Vec3& d) -> Vec3 { return 2.5 * envs[1].radiance(d); });
    const auto ca = prefilter_ggx(a, 8, 2, {128, 3}), cb = prefilter_ggx(b, 8, 2, {128, 3});
    for (int m = 0; m < 2; ++m)
        for (std::size_t k = 0; k < ca[m].data.size(); ++k)
            EXPECT_NEAR(cb[m].data[k], 2.5 * ca[m].data[k], 1e-4 * cb[m].data[k]);
}

TEST(Prefilter, InvalidArguments) {
    EXPECT_THROW(prefilter_ggx(constant_cube(8, 1), 8, 0), std::invalid_argument);
    EXPECT_THROW(prefilter_ggx(constant_cube(8, 1), 2, 3), std::invalid_argument);
}

// ---------------------------------------------------------------- BRDF LUT

class LutTest : public ::testing::Test {
protected:
    static const BrdfLut& lut() {
        static const BrdfLut table = compute_brdf_lut(32, {1024, 0});
        return table;
    }
};

TEST_F(LutTest, EnergyBounded) {
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c) {
            EXPECT_GE(lut().scale(r, c), 0.0f);
            EXPECT_GE(lut().bias(r, c), 0.0f);
            EXPECT_LE(lut().scale(r, c) + lut().bias(r, c), 1.0 + 1e-3) << r << "," << c;
        }
}

TEST_F(LutTest, MirrorLimit) {
    EXPECT_NEAR(lut().scale(0, 31), 1.0, 0.05);
    EXPECT_NEAR(lut().bias(0, 31), 0.0, 0.05);
    const LutSample s = sample_brdf_lut(lut(), 0.02, 1.0);
    EXPECT_NEAR(s.scale, 1.0, 0.05);
}

TEST_F(LutTest, DeterministicUnderSeed) {
    EXPECT_EQ(compute_brdf_lut(8, {64, 4}).data, compute_brdf_lut(8, {64, 4}).data);
}

TEST_F(LutTest, MatchesUniformHemisphereQuadrature) {
    // Independent estimator: uniform hemisphere sampling of the full BRDF
    // f = D G / (4 n.l n.v) times n.l, split on the Fresnel weight.
    for (const auto [row, col] : {std::pair{16, 16}, std::pair{31, 8}, std::pair{20, 28}}) {
        const double o = row / 31.0, ndv = col / 31.0;
        const double a = o * o, k = o * o / 2.0;
        const Vec3 v(std::sqrt(1 - ndv * ndv), 0, ndv);
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(0, 1);
        const int n = 400000;
        double sc = 0, bi = 0;
        for (int i = 0; i < n; ++i) {
            const double z = u(rng), phi = 2 * kPi * u(rng), r = std::sqrt(1 - z * z);
            const Vec3 l(r * std::cos(phi), r * std::sin(phi), z);
            const Vec3 h = (l + v).normalized();
            const double nh = h.z(), vh = v.dot(h);
            const double d = a * a / (kPi * std::pow(nh * nh * (a * a - 1) + 1, 2));
            const double g = (z / (z * (1 - k) + k)) * (ndv / (ndv * (1 - k) + k));
            const double f = d * g / (4 * z * ndv) * z * 2 * kPi;  // pdf = 1 / (2 pi)
            const double fc = std::pow(1 - vh, 5);
            sc += (1 - fc) * f;
            bi += fc * f;
        }
        EXPECT_NEAR(lut().scale(row, col), sc / n, 0.02) << row << "," << col;
        EXPECT_NEAR(lut().bias(row, col), bi / n, 0.01) << row << "," << col;
    }
}

// ---------------------------------------------------------------- MC reference

TEST(McReference, ZeroCubeIsExactlyZero) {
    const auto r = mc_reference(constant_cube(8, 0), Vec3::UnitZ(), Vec3::UnitZ(), Vec3(1, 1, 1), 0.5, 0.04, 256, 1);
    EXPECT_EQ(r.diffuse, Vec3::Zero());
    EXPECT_EQ(r.specular, Vec3::Zero());
}

TEST(McReference, ConstantDiffuseIsAlbedoTimesL) {
    const Vec3 alb(0.2, 0.5, 0.8);
    const auto r = mc_reference(constant_cube(8, 1.5), Vec3::UnitY(), Vec3(0, 1, 1).normalized(), alb, 0.5, 0.04, 1024, 2);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(r.diffuse[c], 1.5 * alb[c], 2 * r.diffuse_stderr[c] + 1e-12);
}

TEST(McReference, StderrShrinksWithSamples) {
    const auto envs = testing::analytic_envs();
    const Cubemap c = make_cubemap(16, envs[2].radiance);
    const Vec3 n = Vec3(0.3, 0.8, 0.5).normalized();
    const auto a = mc_reference(c, n, n, Vec3(1, 1, 1), 0.6, 0.1, 4096, 3);
    const auto b = mc_reference(c, n, n, Vec3(1, 1, 1), 0.6, 0.1, 16384, 3);
    EXPECT_NEAR(b.specular_stderr.x() / a.specular_stderr.x(), 0.5, 0.15);
}

// ---------------------------------------------------------------- shading

class BakedEnvTest : public ::testing::Test {
protected:
    static EnvironmentLight bake(int env) {
        BakeOptions o;
        o.prefilter_samples = 512;
        o.lut_samples = 512;
        o.lut_res = 32;
        return bake_environment(make_cubemap(32, testing::analytic_envs()[env].radiance), o, "t");
    }
    static const EnvironmentLight& constant() {
        static const EnvironmentLight e = bake(0);
        return e;
    }
    static const EnvironmentLight& sky() {
        static const EnvironmentLight e = bake(1);
        return e;
    }
};

TEST(Shade, ReflectExamples) {
    const Vec3 v = Vec3(1, 2, 3).normalized();
    EXPECT_LT((reflect(v, v) - v).norm(), 1e-15);
    EXPECT_LT((reflect(Vec3::UnitZ(), Vec3(1, 0, 1).normalized()) - Vec3(-1, 0, 1).normalized()).norm(), 1e-15);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    for (int i = 0; i < 100; ++i) {
        const Vec3 n = Vec3(g(rng), g(rng), g(rng)).normalized(), w = Vec3(g(rng), g(rng), g(rng)).normalized();
        EXPECT_NEAR(reflect(n, w).norm(), 1.0, 1e-12);
    }
}

TEST(Shade, FresnelKsExamples) {
    EXPECT_EQ(fresnel_ks(0.0, 0.5, 0.04), 0.5);
    EXPECT_EQ(fresnel_ks(0.0, 0.98, 0.04), 0.04);
    EXPECT_NEAR(fresnel_ks(1.0, 0.5, 0.04), 0.04 + 0.46 * std::pow(2.0, -12.253046), 1e-12);
    for (double ndv : {0.0, 0.3, 0.7, 1.0}) EXPECT_EQ(fresnel_ks(ndv, 1.0, 0.04), 0.04);
}

TEST(Shade, FresnelKsBounds) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 1000; ++i) {
        const double ndv = u(rng), o = u(rng), f0 = u(rng);
        const double ks = fresnel_ks(ndv, o, f0);
        EXPECT_GE(ks, f0 - 1e-15);
        EXPECT_LE(ks, std::max(1 - o, f0) + 1e-15);
    }
}

TEST(Shade, WrapYaw) {
    EXPECT_EQ(wrap_yaw(2 * kPi), 0.0);
    EXPECT_NEAR(wrap_yaw(-0.5), 2 * kPi - 0.5, 1e-15);
}

TEST_F(BakedEnvTest, ConstantIrradianceAndYawPeriodicity) {
    EnvironmentLight env = sky();
    const Vec3 n = Vec3(0.2, 0.5, -0.8).normalized();
    EXPECT_NEAR(sample_irradiance(constant(), n).x(), 1.0, 2e-3);
    env.yaw = 0.0;
    const Vec3 a = sample_irradiance(env, n);
    env.yaw = 2 * kPi;
    const Vec3 b = sample_irradiance(env, n);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-6);
}

TEST_F(BakedEnvTest, BrightFaceIrradiancePeaksAtFaceCenter) {
    Cubemap src(16);
    for (int j = 0; j < 16; ++j)
        for (int i = 0; i < 16; ++i) src.set_texel(2, i, j, Vec3(1, 1, 1));  // +y
    EnvironmentLight env;
    env.irradiance = compute_irradiance(src, 16);
    const Vec3 dirs[6] = {Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(), -Vec3::UnitY(), Vec3::UnitZ(), -Vec3::UnitZ()};
    int best = 0;
    for (int f = 1; f < 6; ++f)
        if (sample_irradiance(env, dirs[f]).x() > sample_irradiance(env, dirs[best]).x()) best = f;
    EXPECT_EQ(best, 2);
}

TEST_F(BakedEnvTest, PrefilteredLookups) {
    const EnvironmentLight& env = sky();
    const Vec3 r = Vec3(0.1, 0.9, 0.3).normalized();
    EXPECT_EQ(sample_prefiltered(env, r, 0.0), cube_sample(env.prefiltered[0], r));
    const Vec3 mid = sample_prefiltered(env, r, 0.25);
    const Vec3 avg = 0.5 * (cube_sample(env.prefiltered[0], r) + cube_sample(env.prefiltered[1], r));
    EXPECT_LT((mid - avg).cwiseAbs().maxCoeff(), 1e-6);
    for (double o : {0.0, 0.4, 0.8, 1.0}) EXPECT_NEAR(sample_prefiltered(constant(), r, o).x(), 1.0, 1e-5);
}

TEST_F(BakedEnvTest, LutGridPointLookup) {
    const BrdfLut& lut = sky().brdf_lut;
    const LutSample s = sample_brdf_lut(lut, 10.0 / 31.0, 20.0 / 31.0);
    EXPECT_NEAR(s.scale, lut.scale(10, 20), 1e-6);
    EXPECT_NEAR(s.bias, lut.bias(10, 20), 1e-6);
}

TEST_F(BakedEnvTest, HandComposedConstantEnvironment) {
    const Vec3 alb(0.3, 0.6, 0.9);
    const ShadedTerms t = shade_sample({alb, 1.0, 0.04, Vec3::UnitZ()}, Vec3::UnitZ(), constant());
    const BrdfLut& lut = constant().brdf_lut;
    const Vec3 irr = cube_sample(constant().irradiance, Vec3::UnitZ());
    const Vec3 pre = cube_sample(constant().prefiltered[2], Vec3::UnitZ());
    for (int c = 0; c < 3; ++c) {
        EXPECT_NEAR(t.diffuse[c], alb[c] * irr[c], 1e-12);
        EXPECT_NEAR(t.specular[c], pre[c] * (0.04 * lut.scale(31, 31) + lut.bias(31, 31)), 1e-7);
    }
}

Camera probe_camera() {
    return look_at(Vec3(0, 0, 3), Vec3::Zero(), 24, 24, 0.6);
}

GaussianCloud probe_cloud() {
    GaussianCloud c;
    c.resize(3, 0, 0, 0);
    const Vec3 pos[3] = {Vec3(-0.3, 0, 0), Vec3(0.3, 0.1, 0), Vec3(0, -0.3, 0.2)};
    for (int i = 0; i < 3; ++i) {
        c.set_position(i, pos[i]);
        c.set_scale(i, Vec3(0.25, 0.2, 0.03));
        c.set_rotation(i, Quat(Eigen::AngleAxisd(0.4 * i, Vec3(1, 1, 0).normalized())));
        c.opacities[i] = 0.9f;
        c.albedo[3 * i] = 0.5f, c.albedo[3 * i + 1] = 0.4f, c.albedo[3 * i + 2] = 0.3f;
        c.roughness[i] = 0.3f + 0.2f * i;
        c.f0[i] = 0.04f;
    }
    return c;
}

TEST_F(BakedEnvTest, ZeroEnvironmentIsBlack) {
    EnvironmentLight env = sky();
    for (float& v : env.irradiance.data) v = 0;
    for (Cubemap& m : env.prefiltered)
        for (float& v : m.data) v = 0;
    const Image img = shade(rasterize(probe_cloud(), probe_camera()), probe_camera(), env);
    for (float v : img.data) EXPECT_EQ(v, 0.0f);
}

TEST_F(BakedEnvTest, F0SweepIsMonotonePerPixel) {
    const GBuffer gb = rasterize(probe_cloud(), probe_camera());
    Image prev;
    for (double s : {1.0, 2.0, 3.0}) {
        ShadeParams p;
        p.f0_scale = s;
        const Image spec = shade_layers(gb, probe_camera(), sky(), p).specular;
        if (!prev.data.empty())
            for (std::size_t k = 0; k < spec.data.size(); ++k)
                if (gb.alpha.data[k / 3] > 0) EXPECT_GT(spec.data[k], prev.data[k]);
        prev = spec;
    }
}

TEST_F(BakedEnvTest, LinearInEnvironmentRadiance) {
    EnvironmentLight env = sky();
    for (float& v : env.irradiance.data) v *= 4;
    for (Cubemap& m : env.prefiltered)
        for (float& v : m.data) v *= 4;
    const GBuffer gb = rasterize(probe_cloud(), probe_camera());
    const Image a = shade(gb, probe_camera(), sky()), b = shade(gb, probe_camera(), env);
    for (std::size_t k = 0; k < a.data.size(); ++k) EXPECT_NEAR(b.data[k], 4 * a.data[k], 1e-6 + 1e-6 * b.data[k]);
}

TEST_F(BakedEnvTest, ConstantEnvironmentIgnoresYaw) {
    const GBuffer gb = rasterize(probe_cloud(), probe_camera());
    ShadeParams p;
    const Image a = shade(gb, probe_camera(), constant(), p);
    p.env_yaw = 1.3;
    const Image b = shade(gb, probe_camera(), constant(), p);
    for (std::size_t k = 0; k < a.data.size(); ++k) EXPECT_NEAR(a.data[k], b.data[k], 1e-5);
}

TEST_F(BakedEnvTest, ResolutionMismatchThrows) {
    const GBuffer gb = rasterize(probe_cloud(), probe_camera());
    Camera other = probe_camera();
    other.width = 10;
    EXPECT_THROW(shade(gb, other, sky()), std::invalid_argument);
}

TEST_F(BakedEnvTest, BakedYawMatchesRotatedSource) {
    const auto envs = testing::analytic_envs();
    const Cubemap src = make_cubemap(32, envs[4].radiance);
    const double phi = 0.8;
    const Cubemap irr_rot = compute_irradiance(rotate_yaw(src, phi), 16);
    EnvironmentLight env;
    env.irradiance = compute_irradiance(src, 16);
    env.yaw = phi;
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    for (int i = 0; i < 50; ++i) {
        const Vec3 d = Vec3(g(rng), g(rng), g(rng)).normalized();
        const Vec3 a = cube_sample(irr_rot, d), b = sample_irradiance(env, d);
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(a[c], b[c], 0.02 * b[c]);
    }
}

TEST(SplitSum, CompositionMatchesMonteCarloAwayFromGrazing) {
    // LUT + prefilter with the plain f0 weighting, for n.v >= 0.25.
    const auto envs = testing::analytic_envs();
    BakeOptions opt;
    for (std::size_t e = 1; e < 3; ++e) {
        const Cubemap src = make_cubemap(64, envs[e].radiance);
        const EnvironmentLight env = bake_environment(src, opt, envs[e].name);
        for (const auto& p : testing::random_probes(10 + e, 6, 0.25)) {
            const LutSample l = sample_brdf_lut(env, p.roughness, p.n.dot(p.v));
            const Vec3 spec = sample_prefiltered(env, reflect(p.n, p.v), p.roughness) * (p.f0 * l.scale + l.bias);
            const Vec3 diff = p.albedo.cwiseProduct(sample_irradiance(env, p.n));
            const auto ref = mc_reference(src, p.n, p.v, p.albedo, p.roughness, p.f0, 16384, 77);
            for (int c = 0; c < 3; ++c) {
                EXPECT_LE(std::abs(spec[c] - ref.specular[c]), std::max(0.1 * ref.specular[c], 0.01));
                EXPECT_LE(std::abs(diff[c] - ref.diffuse[c]), 0.02 * ref.diffuse[c]);
            }
        }
    }
}

}  // namespace
}  // namespace gsav
