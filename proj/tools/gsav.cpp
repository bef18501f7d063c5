// SPDX-License-Identifier: Apache-2.0
// gsav: command-line front end for the avatar engine.
#include "gsav/cli/frame.hpp"
#include "gsav/cli/server.hpp"
#include "gsav/cli/session.hpp"
#include "gsav/envlight.hpp"
#include "gsav/fit.hpp"
#include "gsav/io/animation.hpp"
#include "gsav/io/avatar_asset.hpp"
#include "gsav/io/camera_io.hpp"
#include "gsav/io/hdr.hpp"
#include "gsav/io/light_asset.hpp"
#include "gsav/io/pfm.hpp"
#include "gsav/io/png.hpp"
#include "gsav/io/rig_asset.hpp"
#include "gsav/parallel.hpp"
#include "gsav/toyrig.hpp"
#include "gsav/validate.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace gsav;

namespace {

std::string frame_name(std::size_t frame, std::size_t cam, bool suffix, const std::string& channel,
                       const std::string& ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "frame_%04zu", frame);
    std::string s = buf;
    if (suffix) s += "_cam" + std::to_string(cam);
    if (!channel.empty()) s += "_" + channel;
    return s + "." + ext;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

void ensure_parent(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

Image read_equirect(const std::string& path) {
    const std::string ext = fs::path(path).extension().string();
    if (ext == ".hdr") return io::read_hdr(path);
    if (ext == ".pfm") return io::read_pfm(path);
    throw std::invalid_argument("environment map must be .hdr or .pfm: " + path);
}

void write_image(const std::string& path, const Image& img) {
    ensure_parent(path);
    const std::string ext = fs::path(path).extension().string();
    if (ext == ".hdr") io::write_hdr(path, img);
    else if (ext == ".pfm") io::write_pfm(path, img);
    else if (ext == ".png") io::write_png(path, img);
    else throw std::invalid_argument("unsupported image extension: " + path);
}

io::Animation load_poses(const std::string& path, const Rig& rig) {
    if (path.empty()) {
        io::Animation a;
        a.frames.push_back(PoseState::rest(rig.num_shape, rig.num_expr, rig.num_joints, rig.jaw_index));
        return a;
    }
    io::Animation a = io::load_animation(path);
    for (PoseState& p : a.frames) {
        if (p.beta.empty() && rig.num_shape > 0) p.beta.assign(rig.num_shape, 0.0);
        p.check(rig.num_shape, rig.num_expr, rig.num_joints);
    }
    return a;
}

void check_pair(const GaussianCloud& cloud, const Rig& rig) {
    if (cloud.num_shape != rig.num_shape || cloud.num_expr != rig.num_expr || cloud.num_joints != rig.num_joints)
        throw io::AssetError(io::AssetError::Code::DimMismatch,
                             "avatar dims (B=" + std::to_string(cloud.num_shape) + ", E=" +
                                 std::to_string(cloud.num_expr) + ", K=" + std::to_string(cloud.num_joints) +
                                 ") do not match the rig (B=" + std::to_string(rig.num_shape) + ", E=" +
                                 std::to_string(rig.num_expr) + ", K=" + std::to_string(rig.num_joints) + ")");
}

// ------------------------------------------------------------------ toy

struct ToyArgs {
    std::string out;
    std::size_t points = 2000, frames = 3, cameras = 3;
    int res = 128, subdiv = 3;
    std::uint64_t seed = 0;
};

int run_toy(const ToyArgs& a) {
    toy::ToyRigSpec spec;
    spec.seed = a.seed;
    spec.subdivisions = a.subdiv;
    toy::SceneOptions o;
    o.num_points = a.points;
    o.frames = a.frames;
    o.cameras = a.cameras;
    o.width = o.height = a.res;
    const toy::ToyScene s = toy::make_scene(spec, o);
    fs::create_directories(a.out);
    io::save_avatar((fs::path(a.out) / "avatar.gsav").string(), s.cloud);
    io::save_rig((fs::path(a.out) / "rig.gsrg").string(), s.rig);
    io::save_animation((fs::path(a.out) / "animation.jsonl").string(), s.animation);
    io::save_cameras((fs::path(a.out) / "cameras.json").string(), s.cameras);
    std::cout << "wrote toy scene to " << a.out << ": " << s.cloud.size() << " points, "
              << s.rig.num_vertices() << " rig vertices, " << s.animation.frames.size() << " frames, "
              << s.cameras.size() << " cameras\n";
    return 0;
}

// ------------------------------------------------------------------ make-env

int run_make_env(const std::string& name, const std::string& out, int width, int height) {
    write_image(out, toy::toy_environment(name, width, height));
    std::cout << "wrote " << name << " environment " << width << "x" << height << " to " << out << "\n";
    return 0;
}

// ------------------------------------------------------------------ prefilter

struct PrefilterArgs {
    std::string in, out, name;
    BakeOptions bake;
    int source_res = 64;
};

int run_prefilter(PrefilterArgs a) {
    const Image equirect = read_equirect(a.in);
    const Cubemap source = equirect_to_cubemap(equirect, a.source_res);
    if (a.name.empty()) a.name = fs::path(a.out).stem().string();
    const EnvironmentLight light = bake_environment(source, a.bake, a.name);
    ensure_parent(a.out);
    io::save_light(a.out, light);
    std::cout << "baked " << a.name << ": irradiance " << a.bake.irradiance_res << ", prefiltered "
              << a.bake.env_res << " x " << a.bake.mips << " mips, lut " << a.bake.lut_res << ", seed "
              << a.bake.seed << "\n";
    return 0;
}

// ------------------------------------------------------------------ render

struct RenderArgs {
    std::string avatar, rig, pose, camera, light, out, channels, bg = "black";
    ShadeParams shade;
    bool camera_per_frame = false;
};

int run_render(const RenderArgs& a) {
    const GaussianCloud cloud = io::load_avatar(a.avatar);
    const Rig rig = io::load_rig(a.rig);
    check_pair(cloud, rig);
    const io::Animation anim = load_poses(a.pose, rig);
    const std::vector<Camera> cams = io::load_cameras(a.camera);
    const EnvironmentLight light = io::load_light(a.light);
    const Vec3 bg = cli::parse_background(a.bg);
    a.shade.check();

    static const std::set<std::string> known = {"color", "albedo", "roughness", "f0", "normal",
                                                "depth", "alpha", "diffuse", "specular"};
    const std::vector<std::string> channels = split(a.channels, ',');
    for (const std::string& c : channels)
        if (!known.count(c)) throw std::invalid_argument("unknown channel '" + c + "'");

    fs::create_directories(a.out);
    const bool suffix = cams.size() > 1 && !a.camera_per_frame;
    std::size_t written = 0;
    for (std::size_t f = 0; f < anim.frames.size(); ++f) {
        std::vector<std::size_t> which;
        if (cams.size() == 1) which = {0};
        else if (a.camera_per_frame) which = {f % cams.size()};
        else for (std::size_t c = 0; c < cams.size(); ++c) which.push_back(c);
        for (std::size_t c : which) {
            const cli::Frame fr = cli::render_frame(cloud, rig, anim.frames[f], cams[c], light, a.shade, bg);
            const fs::path dir(a.out);
            io::write_png((dir / frame_name(f, c, suffix, "", "png")).string(), fr.color);
            ++written;
            for (const std::string& ch : channels) {
                const Image* img = nullptr;
                if (ch == "color") img = &fr.color;
                else if (ch == "albedo") img = &fr.gbuffer.albedo;
                else if (ch == "roughness") img = &fr.gbuffer.roughness;
                else if (ch == "f0") img = &fr.gbuffer.f0;
                else if (ch == "normal") img = &fr.gbuffer.normal;
                else if (ch == "depth") img = &fr.gbuffer.depth;
                else if (ch == "alpha") img = &fr.gbuffer.alpha;
                else if (ch == "diffuse") img = &fr.layers.diffuse;
                else img = &fr.layers.specular;
                io::write_pfm((dir / frame_name(f, c, suffix, ch, "pfm")).string(), *img);
            }
        }
    }
    std::cout << "rendered " << written << " frame(s) to " << a.out << "\n";
    return 0;
}

// ------------------------------------------------------------------ fit

struct FitArgs {
    std::string avatar, rig, animation, cameras, targets, light, out, trace;
    FitOptions options;
    bool reset = false;
};

Image load_target(const fs::path& dir, std::size_t f) {
    const fs::path pfm = dir / frame_name(f, 0, false, "color", "pfm");
    if (fs::exists(pfm)) return io::read_pfm(pfm.string());
    const fs::path png = dir / frame_name(f, 0, false, "", "png");
    if (fs::exists(png)) return io::read_png(png.string());
    throw std::runtime_error("missing target for frame " + std::to_string(f) + ": expected " + pfm.string() +
                             " or " + png.string());
}

int run_fit(FitArgs a) {
    GaussianCloud cloud = io::load_avatar(a.avatar);
    const Rig rig = io::load_rig(a.rig);
    check_pair(cloud, rig);
    const io::Animation anim = load_poses(a.animation, rig);
    const std::vector<Camera> cams = io::load_cameras(a.cameras);
    const EnvironmentLight light = io::load_light(a.light);
    if (anim.frames.size() > a.options.max_frames)
        throw std::length_error("fit: " + std::to_string(anim.frames.size()) + " frames exceeds the limit of " +
                                std::to_string(a.options.max_frames));
    if (a.reset) {
        for (float& v : cloud.albedo) v = kInitAlbedo;
        for (float& v : cloud.roughness) v = kInitRoughness;
        for (float& v : cloud.f0) v = kInitF0;
    }
    std::vector<FitFrame> frames;
    for (std::size_t f = 0; f < anim.frames.size(); ++f) {
        FitFrame fr;
        fr.pose = anim.frames[f];
        fr.camera = cams[f % cams.size()];
        fr.target = load_target(a.targets, f);
        frames.push_back(std::move(fr));
    }
    const FitResult r = fit_materials(cloud, rig, frames, light, a.options);
    ensure_parent(a.out);
    io::save_avatar(a.out, r.cloud);
    if (!a.trace.empty()) {
        ensure_parent(a.trace);
        const std::string csv = trace_csv(r.trace, a.options.weights);
        io::write_file(a.trace, std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()));
    }
    std::printf("fit %zu points over %zu frames: total %.6g -> %.6g, MAE* %.4f -> %.4f\n", cloud.size(),
                frames.size(), r.trace.front().total, r.trace.back().total, r.trace.front().mae_star,
                r.trace.back().mae_star);
    return 0;
}

// ------------------------------------------------------------------ bench

struct BenchArgs {
    std::string avatar, rig, camera, light, animation, report;
    int frames = 10, threads = 0, warmup = 1;
};

int run_bench(const BenchArgs& a) {
    if (a.threads > 0) set_num_threads(a.threads);
    const GaussianCloud cloud = io::load_avatar(a.avatar);
    const Rig rig = io::load_rig(a.rig);
    check_pair(cloud, rig);
    const io::Animation anim = load_poses(a.animation, rig);
    const Camera cam = io::load_cameras(a.camera).front();
    const EnvironmentLight light = io::load_light(a.light);
    if (a.frames <= 0) throw std::invalid_argument("bench: --frames must be > 0");

    for (int w = 0; w < a.warmup; ++w)
        cli::render_frame(cloud, rig, anim.frames[0], cam, light, {}, Vec3::Zero());
    cli::StageTimings t;
    const auto start = std::chrono::steady_clock::now();
    for (int f = 0; f < a.frames; ++f)
        cli::render_frame(cloud, rig, anim.frames[std::size_t(f) % anim.frames.size()], cam, light, {},
                          Vec3::Zero(), &t);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double fps = a.frames / wall;
    nlohmann::ordered_json j = {{"points", cloud.size()},
                                {"width", cam.width},
                                {"height", cam.height},
                                {"frames", a.frames},
                                {"threads", num_threads()},
                                {"deform_ms", 1000.0 * t.deform / a.frames},
                                {"rasterize_ms", 1000.0 * t.rasterize / a.frames},
                                {"shade_ms", 1000.0 * t.shade / a.frames},
                                {"frame_ms", 1000.0 * wall / a.frames},
                                {"fps", fps}};
    std::printf("points %zu  %dx%d  frames %d  threads %d\n", cloud.size(), cam.width, cam.height, a.frames,
                num_threads());
    std::printf("deform    %9.3f ms/frame\nrasterize %9.3f ms/frame\nshade     %9.3f ms/frame\n",
                1000.0 * t.deform / a.frames, 1000.0 * t.rasterize / a.frames, 1000.0 * t.shade / a.frames);
    std::printf("total     %9.3f ms/frame  (%.2f fps)\n", 1000.0 * wall / a.frames, fps);
    if (!a.report.empty()) {
        ensure_parent(a.report);
        const std::string s = j.dump(2) + "\n";
        io::write_file(a.report, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    }
    return 0;
}

// ------------------------------------------------------------------ serve

struct ServeArgs {
    std::string avatar, rig, lights, host = "127.0.0.1", bg = "black";
    int port = 8080, width = 256, height = 256;
};

int run_serve(const ServeArgs& a) {
    GaussianCloud cloud = io::load_avatar(a.avatar);
    Rig rig = io::load_rig(a.rig);
    check_pair(cloud, rig);
    cli::Session session(std::move(cloud), std::move(rig), cli::load_light_dir(a.lights), a.width, a.height,
                         cli::parse_background(a.bg));
    httplib::Server server;
    cli::exclusive_port(server);
    cli::install_routes(server, session);
    if (!server.bind_to_port(a.host, a.port)) {
        std::cerr << "error: cannot bind " << a.host << ":" << a.port << " (port busy?)\n";
        return 1;
    }
    std::cout << "serving on http://" << a.host << ":" << a.port << " (lights:";
    for (const auto& n : session.light_names()) std::cout << " " << n;
    std::cout << ")" << std::endl;
    server.listen_after_bind();
    return 0;
}

// ------------------------------------------------------------------ validate

int run_validate(const std::string& avatar, const std::string& rig_path) {
    std::vector<Violation> v;
    if (!rig_path.empty()) {
        const Rig rig = io::load_rig(rig_path);
        v = validate(rig);
        if (!avatar.empty()) {
            const auto more = validate(io::load_avatar(avatar), rig);
            v.insert(v.end(), more.begin(), more.end());
        }
    } else if (!avatar.empty()) {
        const GaussianCloud cloud = io::load_avatar(avatar);
        Rig dummy;
        dummy.num_shape = cloud.num_shape;
        dummy.num_expr = cloud.num_expr;
        dummy.num_joints = cloud.num_joints;
        v = validate(cloud, dummy);
    } else {
        throw std::invalid_argument("validate: give --avatar and/or --rig");
    }
    for (const Violation& x : v)
        std::printf("%s[%zu] = %.9g: %s\n", x.field.c_str(), x.index, x.value, x.message.c_str());
    std::printf("%zu violation(s)\n", v.size());
    return v.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gsav: relightable Gaussian head avatars.\n"
                 "PNG output is linear values encoded with a plain 1/2.2 gamma (not the sRGB curve).\n"
                 "GSAV_THREADS overrides the worker thread count."};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (0: GSAV_THREADS or all cores)");

    ToyArgs toy_args;
    auto* toy = app.add_subcommand("toy", "Write a procedural toy head scene");
    toy->add_option("--out", toy_args.out, "Output directory")->required();
    toy->add_option("--points", toy_args.points, "Gaussian count")->capture_default_str();
    toy->add_option("--frames", toy_args.frames, "Animation frames")->capture_default_str();
    toy->add_option("--cameras", toy_args.cameras, "Orbit cameras")->capture_default_str();
    toy->add_option("--res", toy_args.res, "Camera resolution")->capture_default_str();
    toy->add_option("--subdiv", toy_args.subdiv, "Skull subdivision level")->capture_default_str();
    toy->add_option("--seed", toy_args.seed, "Seed")->capture_default_str();

    std::string env_name, env_out;
    int env_w = 256, env_h = 128;
    auto* make_env = app.add_subcommand("make-env", "Write a procedural environment map (.hdr or .pfm)");
    make_env->add_option("name", env_name, "studio | sky | sunset | constant | black")->required();
    make_env->add_option("out", env_out, "Output path")->required();
    make_env->add_option("--width", env_w)->capture_default_str();
    make_env->add_option("--height", env_h)->capture_default_str();

    PrefilterArgs pre;
    auto* prefilter = app.add_subcommand("prefilter", "Bake an equirect HDR into a light asset");
    prefilter->add_option("in", pre.in, "Equirect .hdr or .pfm")->required()->check(CLI::ExistingFile);
    prefilter->add_option("out", pre.out, "Output .gslt")->required();
    prefilter->add_option("--irr-res", pre.bake.irradiance_res)->capture_default_str();
    prefilter->add_option("--env-res", pre.bake.env_res)->capture_default_str();
    prefilter->add_option("--mips", pre.bake.mips)->capture_default_str();
    prefilter->add_option("--lut-res", pre.bake.lut_res)->capture_default_str();
    prefilter->add_option("--seed", pre.bake.seed)->capture_default_str();
    prefilter->add_option("--samples", pre.bake.prefilter_samples, "Prefilter samples per texel")->capture_default_str();
    prefilter->add_option("--lut-samples", pre.bake.lut_samples)->capture_default_str();
    prefilter->add_option("--source-res", pre.source_res, "Cube face size of the resampled input")->capture_default_str();
    prefilter->add_option("--name", pre.name, "Light name (default: output stem)");

    RenderArgs ren;
    auto* render = app.add_subcommand("render", "Render posed, shaded frames");
    render->add_option("--avatar", ren.avatar)->required()->check(CLI::ExistingFile);
    render->add_option("--rig", ren.rig)->required()->check(CLI::ExistingFile);
    render->add_option("--pose", ren.pose, "Pose or animation (.jsonl); default rest pose")->check(CLI::ExistingFile);
    render->add_option("--camera", ren.camera, "Camera JSON (object or array)")->required()->check(CLI::ExistingFile);
    render->add_option("--light", ren.light)->required()->check(CLI::ExistingFile);
    render->add_option("--out", ren.out, "Output directory")->required();
    render->add_option("--channels", ren.channels,
                       "Extra PFM outputs: color,albedo,roughness,f0,normal,depth,alpha,diffuse,specular");
    render->add_option("--f0-scale", ren.shade.f0_scale)->capture_default_str();
    render->add_option("--roughness-scale", ren.shade.roughness_scale)->capture_default_str();
    render->add_option("--env-yaw", ren.shade.env_yaw, "Radians")->capture_default_str();
    render->add_option("--exposure", ren.shade.exposure)->capture_default_str();
    render->add_option("--bg", ren.bg, "black | white | gray | r,g,b")->capture_default_str();
    render->add_flag("--camera-per-frame", ren.camera_per_frame, "Frame f uses camera f mod count");

    FitArgs fit;
    auto* fitc = app.add_subcommand("fit", "Fit per-point materials to target frames");
    fitc->add_option("--avatar", fit.avatar)->required()->check(CLI::ExistingFile);
    fitc->add_option("--rig", fit.rig)->required()->check(CLI::ExistingFile);
    fitc->add_option("--animation", fit.animation)->required()->check(CLI::ExistingFile);
    fitc->add_option("--cameras", fit.cameras, "Frame f uses camera f mod count")->required()->check(CLI::ExistingFile);
    fitc->add_option("--targets", fit.targets, "frame_NNNN_color.pfm or frame_NNNN.png per frame")
        ->required()->check(CLI::ExistingDirectory);
    fitc->add_option("--light", fit.light)->required()->check(CLI::ExistingFile);
    fitc->add_option("--out", fit.out, "Fitted avatar")->required();
    fitc->add_option("--trace", fit.trace, "CSV loss trace");
    fitc->add_option("--iters", fit.options.iterations)->capture_default_str();
    fitc->add_option("--step", fit.options.step)->capture_default_str();
    fitc->add_option("--lambda-jaw", fit.options.weights.jaw)->capture_default_str();
    fitc->add_option("--lambda-l1", fit.options.weights.l1)->capture_default_str();
    fitc->add_option("--lambda-normal", fit.options.weights.normal)->capture_default_str();
    fitc->add_option("--lambda-albedo", fit.options.weights.albedo)->capture_default_str();
    fitc->add_option("--lambda-tv", fit.options.weights.tv)->capture_default_str();
    fitc->add_flag("--reset-materials", fit.reset, "Start from albedo 0.5, roughness 0.9, f0 0.04");

    BenchArgs bench;
    auto* benchc = app.add_subcommand("bench", "Time deform / rasterize / shade");
    benchc->add_option("--avatar", bench.avatar)->required()->check(CLI::ExistingFile);
    benchc->add_option("--rig", bench.rig)->required()->check(CLI::ExistingFile);
    benchc->add_option("--camera", bench.camera)->required()->check(CLI::ExistingFile);
    benchc->add_option("--light", bench.light)->required()->check(CLI::ExistingFile);
    benchc->add_option("--animation", bench.animation)->check(CLI::ExistingFile);
    benchc->add_option("--frames", bench.frames)->capture_default_str();
    benchc->add_option("--warmup", bench.warmup)->capture_default_str();
    benchc->add_option("--report", bench.report, "JSON report path");

    ServeArgs srv;
    auto* serve = app.add_subcommand("serve", "HTTP session for the viewer");
    serve->add_option("--avatar", srv.avatar)->required()->check(CLI::ExistingFile);
    serve->add_option("--rig", srv.rig)->required()->check(CLI::ExistingFile);
    serve->add_option("--lights", srv.lights, "Directory of .gslt assets")->required()->check(CLI::ExistingDirectory);
    serve->add_option("--host", srv.host)->capture_default_str();
    serve->add_option("--port", srv.port)->capture_default_str();
    serve->add_option("--width", srv.width)->capture_default_str();
    serve->add_option("--height", srv.height)->capture_default_str();
    serve->add_option("--bg", srv.bg)->capture_default_str();

    std::string val_avatar, val_rig;
    auto* val = app.add_subcommand("validate", "Check asset invariants");
    val->add_option("--avatar", val_avatar)->check(CLI::ExistingFile);
    val->add_option("--rig", val_rig)->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);
    if (threads > 0) set_num_threads(threads);
    bench.threads = threads;

    try {
        if (*toy) return run_toy(toy_args);
        if (*make_env) return run_make_env(env_name, env_out, env_w, env_h);
        if (*prefilter) return run_prefilter(pre);
        if (*render) return run_render(ren);
        if (*fitc) return run_fit(fit);
        if (*benchc) return run_bench(bench);
        if (*serve) return run_serve(srv);
        if (*val) return run_validate(val_avatar, val_rig);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
