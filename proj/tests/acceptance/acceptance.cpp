// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only NAME]... [--expect-fail NAME]... [--bench-points N]
//
// Exit status is 0 when every criterion that ran passed, except those named
// with --expect-fail, which must fail.
#include "cli_run.hpp"
#include "envs.hpp"
#include "fixtures.hpp"
#include "raster_oracle.hpp"

#include "gsav/cli/frame.hpp"
#include "gsav/deform.hpp"
#include "gsav/envlight.hpp"
#include "gsav/fit.hpp"
#include "gsav/io/pfm.hpp"
#include "gsav/losses.hpp"
#include "gsav/shade.hpp"
#include "gsav/toyrig.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace gsav {
namespace {

namespace fs = std::filesystem;
using testing::gsav;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Vec3 random_vec(std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return {u(rng), u(rng), u(rng)};
}

// --------------------------------------------------------------- constants

Outcome constants() {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // Independent evaluation of 2^((-5.55473 * 1 - 6.698316) * 1).
    const double spot = std::exp2(-5.55473 - 6.698316);
    const double expected_spot = std::exp2(-12.253046);
    bool exact = true;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double o = u(rng), f0 = u(rng);
        const double ceiling = std::max(1.0 - o, f0);
        exact &= fresnel_ks(0.0, o, f0) == ceiling;
        worst = std::max(worst, std::abs(fresnel_ks(1.0, o, f0) - (f0 + (ceiling - f0) * expected_spot)));
    }
    worst = std::max(worst, std::abs(spot - expected_spot));
    return {exact && worst <= 1e-9,
            std::string("ndotv=0 ") + (exact ? "exact" : "NOT exact") + ", ndotv=1 max err " + fmt("%.2e", worst)};
}

// ------------------------------------------------------------ loss weights

Image random_image(std::mt19937_64& rng, int w, int h, int c) {
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Image img(w, h, c);
    for (float& v : img.data) v = u(rng);
    return img;
}

Outcome loss_weights() {
    const LossWeights w;
    const bool defaults = w.jaw == 0.1 && w.l1 == 0.8 && w.normal == 1e-5 && w.albedo == 0.25 && w.tv == 0.02;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const LossTerms t{u(rng), u(rng), 1e3 * u(rng), u(rng), u(rng)};
        const double sum = t.rgb + 0.1 * t.jaw + 1e-5 * t.normal + 0.25 * t.albedo + 0.02 * t.tv;
        worst = std::max(worst, std::abs(total_loss(t).total - sum));
    }
    // Whole-image path: the L1 half of the photometric term recomputed by hand.
    for (int i = 0; i < 10; ++i) {
        LossInputs in;
        in.rendered = random_image(rng, 24, 20, 3);
        in.target = random_image(rng, 24, 20, 3);
        in.predicted_jaw = random_vec(rng, 1.0);
        in.tracked_jaw = random_vec(rng, 1.0);
        in.mask = Image(24, 20, 1);
        for (float& m : in.mask.data) m = u(rng) < 0.7 ? 1.0f : 0.0f;
        in.normals = random_image(rng, 24, 20, 3);
        in.depth_normals = random_image(rng, 24, 20, 3);
        in.albedo = random_image(rng, 24, 20, 3);
        in.albedo_target = random_image(rng, 24, 20, 3);
        in.roughness = random_image(rng, 24, 20, 1);
        const LossReport r = total_loss(in);
        double l1 = 0.0;
        for (std::size_t k = 0; k < in.rendered.data.size(); ++k)
            l1 += std::abs(double(in.rendered.data[k]) - double(in.target.data[k]));
        l1 /= double(in.rendered.data.size());
        const double rgb = 0.8 * l1 + 0.2 * d_ssim(in.rendered, in.target);
        const double jaw = (in.predicted_jaw - in.tracked_jaw).norm();
        const double sum = rgb + 0.1 * jaw + 1e-5 * r.terms.normal + 0.25 * r.terms.albedo + 0.02 * r.terms.tv;
        worst = std::max({worst, std::abs(r.total - sum), std::abs(r.terms.rgb - rgb)});
    }
    return {defaults && worst <= 1e-9,
            std::string("defaults ") + (defaults ? "match" : "DIFFER") + ", weighted sum max err " + fmt("%.2e", worst)};
}

// ---------------------------------------------------------------- raster

Outcome rasterizer_oracle() {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto scene = testing::random_scene(1000 + seed, 100, 64);
        worst = std::max(worst, testing::max_oracle_error(rasterize(scene.cloud, scene.camera),
                                                          testing::oracle_blend(scene.cloud, scene.camera)));
    }
    return {worst <= 1e-5, "20 scenes, max abs err " + fmt("%.2e", worst)};
}

// ------------------------------------------------------------- split sum

Outcome split_sum() {
    int spec_fail = 0, diff_fail = 0, plain_fail = 0, probes = 0;
    double worst_ratio = 0.0;
    const auto envs = testing::analytic_envs();
    for (std::size_t e = 0; e < envs.size(); ++e) {
        const Cubemap src = make_cubemap(64, envs[e].radiance);
        const EnvironmentLight env = bake_environment(src, {}, envs[e].name);
        for (const auto& p : testing::random_probes(500 + e, 20)) {
            ShadingSample s;
            s.albedo = p.albedo;
            s.roughness = p.roughness;
            s.f0 = p.f0;
            s.normal = p.n;
            const ShadedTerms got = shade_sample(s, p.v, env);
            const auto ref = mc_reference(src, p.n, p.v, p.albedo, p.roughness, p.f0, 65536, 900 + probes);
            // Same lookups composed with the bare f0, for the record only.
            const LutSample lut = sample_brdf_lut(env, p.roughness, p.n.dot(p.v));
            const Vec3 plain = sample_prefiltered(env, reflect(p.n, p.v), p.roughness) * (p.f0 * lut.scale + lut.bias);
            bool spec_ok = true, diff_ok = true, plain_ok = true;
            for (int c = 0; c < 3; ++c) {
                const double tol = std::max(0.1 * ref.specular[c], 0.01);
                const double err = std::abs(got.specular[c] - ref.specular[c]);
                worst_ratio = std::max(worst_ratio, err / tol);
                spec_ok &= err <= tol;
                plain_ok &= std::abs(plain[c] - ref.specular[c]) <= tol;
                diff_ok &= std::abs(got.diffuse[c] - ref.diffuse[c]) <= 0.02 * ref.diffuse[c];
            }
            spec_fail += !spec_ok;
            diff_fail += !diff_ok;
            plain_fail += !plain_ok;
            ++probes;
        }
    }
    std::ostringstream d;
    d << probes << " probes, specular out of bound " << spec_fail << ", diffuse out of bound " << diff_fail
      << ", worst specular err " << fmt("%.1f", worst_ratio) << "x tolerance (bare-f0 composition: "
      << plain_fail << " out of bound)";
    return {spec_fail == 0 && diff_fail == 0, d.str()};
}

// ----------------------------------------------------------- deformation

Outcome deformation() {
    const Rig rig = testing::make_octahedron_rig(7);
    GaussianCloud cloud = init_from_rig(rig, {300, 11});
    std::mt19937_64 rng(5);
    for (std::size_t i = 0; i < cloud.size(); ++i)
        cloud.set_rotation(i, Quat(Eigen::AngleAxisd(1.0, random_vec(rng, 1.0).normalized())));

    // Rest pose: bit-exact positions, scales and materials; rotations are the stored ones.
    const GaussianCloud rest_posed = pose_cloud(cloud, rig, PoseState::rest(4, 3, 3));
    const bool identity = rest_posed.positions == cloud.positions && rest_posed.rotations == cloud.rotations &&
                          rest_posed.log_scales == cloud.log_scales && rest_posed.albedo == cloud.albedo &&
                          rest_posed.roughness == cloud.roughness && rest_posed.f0 == cloud.f0 &&
                          rest_posed.opacities == cloud.opacities;

    double rigid = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        PoseState rest = PoseState::rest(4, 3, 3);
        for (double& b : rest.beta) b = random_vec(rng, 1.0).x();
        for (double& x : rest.psi) x = random_vec(rng, 1.0).x();
        for (std::size_t k = 1; k < rest.theta.size(); ++k) rest.theta[k] = random_vec(rng, 0.5);
        PoseState global = rest;
        global.theta[0] = random_vec(rng, 2.0);
        global.translation = random_vec(rng, 0.5);
        const GaussianCloud a = pose_cloud(cloud, rig, rest), b = pose_cloud(cloud, rig, global);
        const Mat3 r = rodrigues(global.theta[0]);
        const Vec3 j0 = rig.rest_joint(0);
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const Vec3 expected = r * (a.position(i) - j0) + j0 + global.translation;
            rigid = std::max(rigid, (b.position(i) - expected).cwiseAbs().maxCoeff());
            const Quat qe = (Quat(r) * a.rotation(i)).normalized();
            rigid = std::max(rigid, std::min((b.rotation(i).coeffs() - qe.coeffs()).cwiseAbs().maxCoeff(),
                                             (b.rotation(i).coeffs() + qe.coeffs()).cwiseAbs().maxCoeff()));
        }
    }

    double one_hot = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        JointTransforms jt;
        for (int k = 0; k < 4; ++k) {
            Mat34 g;
            g.leftCols<3>() = rodrigues(random_vec(rng, 3.0));
            g.col(3) = random_vec(rng, 1.0);
            jt.transforms.push_back(g);
        }
        for (int k = 0; k < 4; ++k) {
            const std::vector<Vec3> pts = {random_vec(rng, 1.0), random_vec(rng, 1.0)};
            std::vector<float> w(8, 0.0f);
            w[k] = w[4 + k] = 1.0f;
            const auto out = lbs(pts, jt, w);
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const Vec3 expected = jt.transforms[k].leftCols<3>() * pts[i] + jt.transforms[k].col(3);
                one_hot = std::max(one_hot, (out.positions[i] - expected).cwiseAbs().maxCoeff());
                one_hot = std::max(one_hot, (out.rotations[i] - jt.transforms[k].leftCols<3>()).cwiseAbs().maxCoeff());
            }
        }
    }

    double ortho = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Mat3 r = rodrigues(random_vec(rng, 4.0));
        ortho = std::max({ortho, (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff(),
                          std::abs(r.determinant() - 1.0)});
    }
    std::ostringstream d;
    d << "rest " << (identity ? "exact" : "NOT exact") << ", rigid " << fmt("%.1e", rigid) << ", one-hot "
      << fmt("%.1e", one_hot) << ", rodrigues " << fmt("%.1e", ortho);
    return {identity && rigid <= 1e-6 && one_hot <= 1e-9 && ortho <= 1e-6, d.str()};
}

// ------------------------------------------------------------- gradients

const EnvironmentLight& studio() {
    static const EnvironmentLight env = [] {
        BakeOptions o;
        o.prefilter_samples = 256;
        o.lut_samples = 256;
        return bake_environment(equirect_to_cubemap(toy::toy_environment("studio"), 32), o, "studio");
    }();
    return env;
}

double knot_distance(double x, int n) {
    const double u = x * n;
    return std::abs(u - std::round(u)) / n;
}

Outcome gradient_check() {
    const EnvironmentLight& env = studio();
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double h = 1e-4;
    int checked = 0, bad = 0;
    double worst = 0.0;
    while (checked < 100) {
        ShadingSample s;
        s.albedo = Vec3(u(rng), u(rng), u(rng));
        s.roughness = 0.05 + 0.9 * u(rng);
        s.f0 = 0.02 + 0.18 * u(rng);
        const double z = 2 * u(rng) - 1, phi = 2 * kPi * u(rng);
        s.normal = Vec3(std::sqrt(1 - z * z) * std::cos(phi), std::sqrt(1 - z * z) * std::sin(phi), z);
        const Vec3 view = (s.normal + Vec3(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5)).normalized();
        const ShadeParams p{0.5 + u(rng), 0.8 + 0.4 * u(rng), 2 * kPi * u(rng), 1.0};
        if (view.dot(s.normal) <= 0.0) continue;
        const double o = s.roughness * p.roughness_scale, f = s.f0 * p.f0_scale;
        const double reach = 2.0 * h * p.roughness_scale;
        if (knot_distance(o, env.brdf_lut.res - 1) < reach || knot_distance(o, env.mips() - 1) < reach ||
            std::abs(1.0 - o - f) < 2.0 * h || o >= 1.0 - reach || f >= 1.0 - 2.0 * h)
            continue;
        auto eval = [&](const ShadingSample& t) -> Vec3 {
            const ShadedTerms r = shade_sample(t, view, env, p);
            return r.diffuse + r.specular;
        };
        const ShadingGradients g = shading_gradients(s, view, env, p);
        auto check = [&](const Vec3& analytic, const std::function<void(ShadingSample&, double)>& perturb) {
            ShadingSample up = s, down = s;
            perturb(up, h);
            perturb(down, -h);
            const Vec3 fd = (eval(up) - eval(down)) / (2.0 * h);
            for (int c = 0; c < 3; ++c) {
                const double rel = std::abs(fd[c] - analytic[c]) / std::max(std::abs(fd[c]), 1e-6);
                worst = std::max(worst, rel);
                bad += rel > 1e-3;
            }
        };
        check(g.d_albedo, [](ShadingSample& t, double d) { t.albedo += Vec3::Constant(d); });
        check(g.d_roughness, [](ShadingSample& t, double d) { t.roughness += d; });
        check(g.d_f0, [](ShadingSample& t, double d) { t.f0 += d; });
        ++checked;
    }
    return {bad == 0, "100 pixels x 3 parameters x 3 channels, worst rel err " + fmt("%.2e", worst)};
}

// ------------------------------------------------------------------- fit

Outcome self_consistency_fit() {
    toy::SceneOptions so;
    so.num_points = 50;
    so.width = so.height = 64;
    const toy::ToyScene scene = toy::make_scene({}, so);
    std::vector<FitFrame> frames;
    for (std::size_t f = 0; f < scene.animation.frames.size(); ++f) {
        FitFrame fr;
        fr.pose = scene.animation.frames[f];
        fr.camera = scene.cameras[f % scene.cameras.size()];
        fr.target = shade(rasterize(pose_cloud(scene.cloud, scene.rig, fr.pose), fr.camera), fr.camera, studio());
        frames.push_back(std::move(fr));
    }
    GaussianCloud start = scene.cloud;
    std::fill(start.albedo.begin(), start.albedo.end(), kInitAlbedo);
    std::fill(start.roughness.begin(), start.roughness.end(), kInitRoughness);
    std::fill(start.f0.begin(), start.f0.end(), kInitF0);
    const FitResult r = fit_materials(start, scene.rig, frames, studio());
    double err = 0.0;
    int seen = 0;
    for (std::size_t i = 0; i < r.cloud.size(); ++i) {
        if (!(r.coverage[i] > 0.0)) continue;
        ++seen;
        for (int c = 0; c < 3; ++c) err += std::abs(r.cloud.albedo[3 * i + c] - scene.cloud.albedo[3 * i + c]);
    }
    const double albedo_mae = seen ? err / (3.0 * seen) : 1.0;
    const double final_mae = r.trace.back().mae_star;
    std::ostringstream d;
    d << scene.cloud.size() << " points, " << frames.size() << " frames, " << r.trace.size() - 1
      << " iterations, albedo MAE " << fmt("%.4f", albedo_mae) << " over " << seen << " observed points, MAE* "
      << fmt("%.3f", r.trace.front().mae_star) << " -> " << fmt("%.3f", final_mae);
    return {seen > 0 && albedo_mae < 0.05 && final_mae < 1.0, d.str()};
}

// ------------------------------------------------------------ CLI checks

class CliFixture {
public:
    CliFixture() : dir_("acceptance") {}
    const fs::path& dir() const { return dir_.path(); }

    /// Shared light asset, baked on first use.
    bool light() {
        if (!light_ok_) {
            light_ok_ = gsav(dir(), "make-env studio studio.hdr --width 256 --height 128").status == 0 &&
                        gsav(dir(), "prefilter studio.hdr lights/studio.gslt").status == 0;
        }
        return *light_ok_;
    }

private:
    testing::ScratchDir dir_;
    std::optional<bool> light_ok_;
};

Outcome f0_monotonicity(CliFixture& fx) {
    if (!fx.light() || gsav(fx.dir(), "toy --out mono").status != 0) return {false, "could not build fixture"};
    std::vector<double> lum;
    for (int s = 1; s <= 3; ++s) {
        const std::string out = "mono_f0_" + std::to_string(s);
        const auto r = gsav(fx.dir(), "render --avatar mono/avatar.gsav --rig mono/rig.gsrg --pose mono/animation.jsonl "
                                      "--camera mono/cameras.json --light lights/studio.gslt --channels specular "
                                      "--f0-scale " + std::to_string(s) + " --out " + out);
        if (r.status != 0) return {false, "render failed: " + r.output};
        double sum = 0.0;
        int n = 0;
        for (const auto& e : fs::directory_iterator(fx.dir() / out))
            if (e.path().extension() == ".pfm") {
                sum += cli::mean_luminance(io::read_pfm(e.path().string()));
                ++n;
            }
        lum.push_back(n ? sum / n : 0.0);
    }
    const bool ok = lum[0] < lum[1] && lum[1] < lum[2];
    return {ok, "mean specular luminance " + fmt("%.5f", lum[0]) + " < " + fmt("%.5f", lum[1]) + " < " +
                    fmt("%.5f", lum[2])};
}

Outcome benchmark(CliFixture& fx, int points) {
    if (!fx.light()) return {false, "could not bake light"};
    const std::string toy = "toy --out bench --points " + std::to_string(points) + " --res 512 --frames 1 --cameras 1";
    if (gsav(fx.dir(), toy).status != 0) return {false, "toy generation failed"};
    const auto r = gsav(fx.dir(), "--threads 8 bench --avatar bench/avatar.gsav --rig bench/rig.gsrg --camera "
                                  "bench/cameras.json --light lights/studio.gslt --frames 3 --warmup 1 "
                                  "--report bench/report.json");
    if (r.status != 0) return {false, "bench failed: " + r.output};
    const io::Bytes b = testing::bytes_of(fx.dir() / "bench/report.json");
    const auto j = nlohmann::json::parse(std::string(b.begin(), b.end()));
    std::ostringstream d;
    d << j["points"].get<std::size_t>() << " points at " << j["width"].get<int>() << "x" << j["height"].get<int>()
      << ", " << j["threads"].get<int>() << " threads: deform " << fmt("%.1f", j["deform_ms"].get<double>())
      << " ms, rasterize " << fmt("%.1f", j["rasterize_ms"].get<double>()) << " ms, shade "
      << fmt("%.1f", j["shade_ms"].get<double>()) << " ms, " << fmt("%.2f", j["fps"].get<double>())
      << " fps (soft target 5 fps, not gating)";
    const bool reported = j["points"].get<std::size_t>() == std::size_t(points) && j["rasterize_ms"].get<double>() > 0;
    return {reported, d.str()};
}

/// Every file under `a` has a byte-identical twin under `b` and vice versa.
bool same_tree(const fs::path& a, const fs::path& b, std::string& why, std::size_t& files) {
    std::set<fs::path> rel_a, rel_b;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) rel_a.insert(fs::relative(e.path(), a));
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) rel_b.insert(fs::relative(e.path(), b));
    if (rel_a != rel_b) {
        why = "file sets differ";
        return false;
    }
    for (const auto& r : rel_a)
        if (testing::bytes_of(a / r) != testing::bytes_of(b / r)) {
            why = r.string() + " differs";
            return false;
        }
    files = rel_a.size();
    return true;
}

Outcome determinism(CliFixture& fx) {
    const char* commands[] = {
        "toy --out toy --points 600 --res 48 --seed 5",
        "make-env sky sky.hdr --width 128 --height 64",
        "prefilter sky.hdr sky.gslt --samples 256 --lut-samples 256 --seed 3",
        "render --avatar toy/avatar.gsav --rig toy/rig.gsrg --pose toy/animation.jsonl --camera toy/cameras.json "
        "--light sky.gslt --channels color,albedo,roughness,f0,normal,depth,alpha,diffuse,specular --out render",
        "render --avatar toy/avatar.gsav --rig toy/rig.gsrg --pose toy/animation.jsonl --camera toy/cameras.json "
        "--light sky.gslt --camera-per-frame --channels color --out targets",
        "fit --avatar toy/avatar.gsav --rig toy/rig.gsrg --animation toy/animation.jsonl --cameras toy/cameras.json "
        "--targets targets --light sky.gslt --iters 5 --reset-materials --out fit/avatar.gsav --trace fit/trace.csv",
        "validate --avatar fit/avatar.gsav --rig toy/rig.gsrg",
        "bench --avatar toy/avatar.gsav --rig toy/rig.gsrg --camera toy/cameras.json --light sky.gslt --frames 1 "
        "--report bench.json",
    };
    std::vector<std::string> logs[2];
    for (int run = 0; run < 2; ++run) {
        const fs::path dir = fx.dir() / ("det" + std::to_string(run));
        fs::create_directories(dir);
        for (const char* c : commands) {
            const auto r = gsav(dir, c);
            if (r.status != 0) return {false, std::string("'") + c + "' failed: " + r.output};
            logs[run].push_back(r.output);
        }
        // Wall-clock figures are the only run-dependent output.
        const io::Bytes b = testing::bytes_of(dir / "bench.json");
        auto j = nlohmann::ordered_json::parse(std::string(b.begin(), b.end()));
        for (const char* k : {"deform_ms", "rasterize_ms", "shade_ms", "frame_ms", "fps"}) j.erase(k);
        fs::remove(dir / "bench.json");
        std::ofstream(dir / "bench_counts.json") << j.dump();
        logs[run].pop_back();
    }
    std::string why;
    std::size_t files = 0;
    if (!same_tree(fx.dir() / "det0", fx.dir() / "det1", why, files)) return {false, why};
    if (logs[0] != logs[1]) return {false, "console output differs"};
    return {true, std::to_string(files) + " output files byte-identical across two runs of " +
                      std::to_string(std::size(commands)) + " commands (bench timings excluded)"};
}

}  // namespace
}  // namespace gsav

int main(int argc, char** argv) {
    using namespace gsav;
    CLI::App app{"gsav acceptance run"};
    std::vector<std::string> only, expect_fail;
    int bench_points = 75000;
    app.add_option("--only", only, "Run only these criteria");
    app.add_option("--expect-fail", expect_fail, "Criteria known to fail");
    app.add_option("--bench-points", bench_points, "Point count for the benchmark");
    CLI11_PARSE(app, argc, argv);

    CliFixture fx;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"constants", constants},
        {"loss-weights", loss_weights},
        {"rasterizer-oracle", rasterizer_oracle},
        {"split-sum", split_sum},
        {"deformation", deformation},
        {"gradient-check", gradient_check},
        {"self-consistency-fit", self_consistency_fit},
        {"f0-monotonicity", [&] { return f0_monotonicity(fx); }},
        {"benchmark", [&] { return benchmark(fx, bench_points); }},
        {"determinism", [&] { return determinism(fx); }},
    };
    int unexpected = 0;
    for (const auto& [name, run] : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool expected_fail = std::find(expect_fail.begin(), expect_fail.end(), name) != expect_fail.end();
        unexpected += o.pass == expected_fail;
        std::printf("%s %-21s %s (%.1f s)%s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs,
                    expected_fail ? (o.pass ? " [expected FAIL]" : " [known failure]") : "");
        std::fflush(stdout);
    }
    return unexpected == 0 ? 0 : 1;
}
