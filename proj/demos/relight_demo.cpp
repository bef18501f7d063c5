// SPDX-License-Identifier: Apache-2.0
// Renders the toy head under a rotating studio light and an f0 sweep.
//
//   relight_demo [out_dir]
#include "gsav/cli/frame.hpp"
#include "gsav/envlight.hpp"
#include "gsav/io/png.hpp"
#include "gsav/toyrig.hpp"

#include <cstdio>
#include <filesystem>
#include <string>

int main(int argc, char** argv) {
    using namespace gsav;
    const std::filesystem::path out = argc > 1 ? argv[1] : "relight_demo_out";
    std::filesystem::create_directories(out);

    toy::SceneOptions so;
    so.num_points = 6000;
    so.width = so.height = 192;
    const toy::ToyScene scene = toy::make_scene({}, so);
    const Camera& cam = scene.cameras[1];
    const PoseState& pose = scene.animation.frames[1];

    BakeOptions bake;
    bake.prefilter_samples = 512;
    bake.lut_samples = 512;
    const EnvironmentLight light =
        bake_environment(equirect_to_cubemap(toy::toy_environment("studio"), 64), bake, "studio");

    char name[64];
    for (int k = 0; k < 8; ++k) {
        ShadeParams p;
        p.env_yaw = 2.0 * kPi * k / 8.0;
        const cli::Frame f = cli::render_frame(scene.cloud, scene.rig, pose, cam, light, p, Vec3::Zero());
        std::snprintf(name, sizeof name, "yaw_%d.png", k);
        io::write_png((out / name).string(), f.color);
    }
    for (int s = 1; s <= 3; ++s) {
        ShadeParams p;
        p.f0_scale = s;
        const cli::Frame f = cli::render_frame(scene.cloud, scene.rig, pose, cam, light, p, Vec3::Zero());
        std::snprintf(name, sizeof name, "f0_x%d.png", s);
        io::write_png((out / name).string(), f.color);
        std::printf("f0 x%d: mean specular luminance %.5f\n", s, cli::mean_luminance(f.layers.specular));
    }
    std::printf("wrote frames to %s\n", out.string().c_str());
    return 0;
}
