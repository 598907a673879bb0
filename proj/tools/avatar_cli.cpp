// SPDX-License-Identifier: Apache-2.0
// Command-line front end: fixtures, fitting, texture unwrap/blend, evaluation.

#include "avatar/error.hpp"
#include "avatar/fit.hpp"
#include "avatar/fit_io.hpp"
#include "avatar/fixtures.hpp"
#include "avatar/imaging.hpp"
#include "avatar/metrics.hpp"
#include "avatar/pyramid.hpp"
#include "avatar/uvtex.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace avatar;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct UsageError : Error
{
    using Error::Error;
};

ViewPaths parse_view_spec(const std::string& spec)
{
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ',');) {
        parts.push_back(item);
    }
    if (parts.size() < 2 || parts.size() > 3) {
        throw UsageError("view must be <image,landmarks[,mask]>, got '" + spec + "'");
    }
    ViewPaths vp{parts[0], parts[1], std::nullopt};
    if (parts.size() == 3) {
        vp.mask = parts[2];
    }
    return vp;
}

MorphableModel read_model(const fs::path& path)
{
    if (!fs::exists(path)) {
        throw UsageError("cannot read model '" + path.string() + "': no such file");
    }
    return load_model(path);
}

void ensure_parent(const fs::path& file)
{
    if (file.has_parent_path()) {
        fs::create_directories(file.parent_path());
    }
}

// ---------------------------------------------------------------------------

struct FixturesArgs
{
    std::string out;
    int size = FixtureOptions{}.image_size;
    int uv = FixtureOptions{}.uv_resolution;
    std::string lighting = "ambient";
    std::uint64_t seed = FixtureOptions{}.seed;
};

int run_fixtures(const FixturesArgs& a)
{
    FixtureOptions opt;
    opt.image_size = a.size;
    opt.uv_resolution = a.uv;
    opt.seed = a.seed;
    opt.lighting = a.lighting == "directional" ? FixtureLighting::directional : FixtureLighting::ambient;
    write_fixtures(make_fixtures(opt), a.out);
    return kExitOk;
}

struct FitArgs
{
    std::string model;
    std::vector<std::string> views;
    std::string config;
    std::string out;
    std::optional<int> max_iters;
    std::optional<double> tolerance;
    std::optional<int> history;
    std::optional<double> w_rgb, w_lm, w_id, w_reg;
    std::string identity_cmd;
};

int run_fit(const FitArgs& a)
{
    FitConfig cfg;
    if (!a.config.empty()) {
        if (!fs::exists(a.config)) {
            throw UsageError("cannot read config '" + a.config + "': no such file");
        }
        cfg = load_fit_config(a.config);
    }
    if (!a.views.empty()) {
        cfg.views.clear();
        for (const auto& v : a.views) {
            cfg.views.push_back(parse_view_spec(v));
        }
    }
    if (!a.model.empty()) {
        cfg.model = a.model;
    }
    if (!cfg.model) {
        throw UsageError("no model given (--model or config 'model')");
    }
    if (cfg.views.empty()) {
        throw UsageError("at least one view is required");
    }
    if (a.max_iters) cfg.optimizer.max_iters = *a.max_iters;
    if (a.tolerance) cfg.optimizer.tolerance = *a.tolerance;
    if (a.history) cfg.optimizer.history_size = *a.history;
    if (a.w_rgb) cfg.weights.rgb = *a.w_rgb;
    if (a.w_lm) cfg.weights.landmark = *a.w_lm;
    if (a.w_id) cfg.weights.identity = *a.w_id;
    if (a.w_reg) cfg.weights.regularization = *a.w_reg;
    if (!a.identity_cmd.empty()) cfg.identity_provider = a.identity_cmd;

    const MorphableModel model = read_model(*cfg.model);
    std::vector<FitView> views;
    for (const ViewPaths& vp : cfg.views) {
        for (const fs::path& p : {vp.image, vp.landmarks}) {
            if (!fs::exists(p)) {
                throw UsageError("cannot read view input '" + p.string() + "': no such file");
            }
        }
        views.push_back(load_view(vp));
    }
    FitProblem problem = make_fit_problem(model, std::move(views), cfg.weights, cfg.optimizer);
    if (cfg.identity_provider) {
        problem.identity_provider = std::make_shared<ExternalEmbeddingProvider>(*cfg.identity_provider);
    }
    const FitResult result = optimize(problem, model);

    const fs::path out(a.out);
    fs::create_directories(out);
    save_fit_result(result, out / "fit.json");
    {
        std::ofstream id(out / "identity.txt");
        for (double c : result.shared_identity) {
            id << c << '\n';
        }
    }
    for (std::size_t k = 0; k < result.view_params.size(); ++k) {
        save_obj(fitted_mesh(model, result, k), out / ("view_" + std::to_string(k) + ".obj"));
    }
    save_obj(decode_shape(model, ShapeParams{result.shared_identity, Eigen::VectorXd::Zero(model.expression_count())}),
             out / "identity.obj");
    std::cerr << "fit: " << result.status << " after " << result.iterations << " iterations, loss " << result.loss.total
              << '\n';
    return result.converged ? kExitOk : kExitNumerical;
}

struct UnwrapArgs
{
    std::string model, fit, image, mask, out;
    int view = 0;
    int resolution = 256;
};

int run_unwrap(const UnwrapArgs& a)
{
    const MorphableModel model = read_model(a.model);
    const FitResult fit = load_fit_result(a.fit);
    if (a.view < 0 || static_cast<std::size_t>(a.view) >= fit.view_params.size()) {
        throw UsageError("view index " + std::to_string(a.view) + " out of range");
    }
    const Image source = load_image(a.image);
    std::optional<Image> mask;
    if (!a.mask.empty()) {
        mask = load_image(a.mask);
    }
    const auto k = static_cast<std::size_t>(a.view);
    const UVMap uv =
        unwrap(source, fitted_mesh(model, fit, k), fit.view_params[k].camera, mask ? &*mask : nullptr, a.resolution);
    ensure_parent(a.out);
    save_uvmap(uv, a.out);
    return kExitOk;
}

struct BlendArgs
{
    std::vector<std::string> inputs;
    std::string out;
};

int run_blend(const BlendArgs& a)
{
    std::vector<UVMap> maps;
    for (const auto& p : a.inputs) {
        maps.push_back(load_uvmap(p));
    }
    const UVMap blended = blend_multiview(maps);
    ensure_parent(a.out);
    save_uvmap(blended, a.out);
    return kExitOk;
}

struct LpBlendArgs
{
    std::string source, templ, out;
    int transfer = -1;
    int depth = 0;
    bool normal = false;
};

int run_lpblend(const LpBlendArgs& a)
{
    const UVMap source = load_uvmap(a.source);
    const UVMap templ = make_full_uvmap(load_image(a.templ));
    const int depth = a.depth > 0 ? a.depth : default_pyramid_depth(source.color.width(), source.color.height());
    const int transfer = a.transfer >= 0 ? a.transfer : default_transfer_levels(depth);
    const UVMap out = a.normal ? lp_blend_normal(source, templ, transfer, depth) : lp_blend(source, templ, transfer, depth);
    ensure_parent(a.out);
    save_uvmap(out, a.out);
    return kExitOk;
}

struct BseArgs
{
    std::string texture;
    int kernel = 55;
};

int run_bse(const BseArgs& a)
{
    std::printf("%.6f\n", bse(load_uvmap(a.texture), a.kernel));
    return kExitOk;
}

struct DegradeArgs
{
    std::string input, out, ranges;
    DegradationParams params;
};

int run_degrade(const DegradeArgs& a)
{
    DegradationParams p = a.params;
    if (!a.ranges.empty()) {
        p = sample_degradation(load_degradation_ranges(a.ranges), a.params.seed);
    }
    const Image out = degrade(load_image(a.input), p);
    ensure_parent(a.out);
    save_image(out, a.out);
    return kExitOk;
}

struct RenderArgs
{
    std::string model, fit, texture, out;
    int view = 0;
    int width = 256;
    int height = 256;
    bool fitted_lighting = false;
    float background = ShadeOptions{}.background;
};

int run_render(const RenderArgs& a)
{
    const MorphableModel model = read_model(a.model);
    const FitResult fit = load_fit_result(a.fit);
    if (a.view < 0 || static_cast<std::size_t>(a.view) >= fit.view_params.size()) {
        throw UsageError("view index " + std::to_string(a.view) + " out of range");
    }
    const UVMap texture = load_uvmap(a.texture);
    const Illumination ambient = Illumination::ambient(1.0);
    const RenderOutput out = render_fitted_view(model, fit, static_cast<std::size_t>(a.view), a.width, a.height,
                                                &texture, a.fitted_lighting ? nullptr : &ambient,
                                                ShadeOptions{a.background});
    ensure_parent(a.out);
    save_image(out.color, a.out);
    return kExitOk;
}

struct CompareArgs
{
    std::string a, b, perceptual_cmd;
};

int run_compare(const CompareArgs& a)
{
    const Image x = load_image(a.a);
    const Image y = load_image(a.b);
    std::printf("psnr %.6f\nssim %.6f\n", psnr(x, y), ssim(x, y));
    if (!a.perceptual_cmd.empty()) {
        std::printf("perceptual %.6f\n", external_perceptual_distance(ExternalCommand(a.perceptual_cmd), x, y));
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-view head avatar reconstruction tools"};
    app.require_subcommand(1);

    FixturesArgs fx;
    auto* c_fix = app.add_subcommand("make-fixtures", "Generate the synthetic toy model and three-view captures");
    c_fix->add_option("--out", fx.out, "Output directory")->required();
    c_fix->add_option("--size", fx.size, "View image size in pixels")->capture_default_str();
    c_fix->add_option("--uv", fx.uv, "UV texture resolution")->capture_default_str();
    c_fix->add_option("--lighting", fx.lighting, "ambient or directional")
        ->check(CLI::IsMember({"ambient", "directional"}))
        ->capture_default_str();
    c_fix->add_option("--seed", fx.seed, "Random seed")->capture_default_str();

    FitArgs ft;
    auto* c_fit = app.add_subcommand("fit", "Fit the morphable model to one or more views");
    c_fit->add_option("--model", ft.model, "Model file (.avf)");
    c_fit->add_option("--views", ft.views, "Views as image,landmarks[,mask]");
    c_fit->add_option("--config", ft.config, "JSON fit configuration");
    c_fit->add_option("--out", ft.out, "Output directory")->required();
    c_fit->add_option("--max-iters", ft.max_iters, "Maximum LBFGS iterations (default 200)");
    c_fit->add_option("--tolerance", ft.tolerance, "Relative parameter change tolerance (default 1e-6)");
    c_fit->add_option("--history", ft.history, "LBFGS history size (default 10)");
    c_fit->add_option("--w-rgb", ft.w_rgb, "RGB loss weight (default 1)");
    c_fit->add_option("--w-lm", ft.w_lm, "Landmark loss weight (default 50)");
    c_fit->add_option("--w-id", ft.w_id, "Identity loss weight (default 0)");
    c_fit->add_option("--w-reg", ft.w_reg, "Regularizer weight (default 1e-3)");
    c_fit->add_option("--identity-cmd", ft.identity_cmd, "External embedding provider command");

    UnwrapArgs uw;
    auto* c_unwrap = app.add_subcommand("unwrap", "Sample a view into UV space through its fitted mesh");
    c_unwrap->add_option("--model", uw.model, "Model file")->required();
    c_unwrap->add_option("--fit", uw.fit, "fit.json from the fit command")->required();
    c_unwrap->add_option("--view", uw.view, "View index in the fit")->capture_default_str();
    c_unwrap->add_option("--image", uw.image, "Source image")->required();
    c_unwrap->add_option("--mask", uw.mask, "Segmentation mask");
    c_unwrap->add_option("--resolution", uw.resolution, "UV resolution")->capture_default_str();
    c_unwrap->add_option("--out", uw.out, "Output UV color raster (validity written alongside)")->required();

    BlendArgs bl;
    auto* c_blend = app.add_subcommand("blend", "Blend unwrapped UV maps");
    c_blend->add_option("--inputs", bl.inputs, "UV color rasters")->required();
    c_blend->add_option("--out", bl.out, "Output UV color raster")->required();

    LpBlendArgs lp;
    auto* c_lp = app.add_subcommand("lpblend", "Replace low-frequency bands with those of a template");
    c_lp->add_option("--source", lp.source, "Source UV raster")->required();
    c_lp->add_option("--template", lp.templ, "Template texture")->required();
    c_lp->add_option("--out", lp.out, "Output UV raster")->required();
    c_lp->add_option("--transfer", lp.transfer, "Detail levels kept from the source (default depth - 2)");
    c_lp->add_option("--depth", lp.depth, "Pyramid depth (default floor(log2(min side)) - 1)");
    c_lp->add_flag("--normal", lp.normal, "Inputs are encoded normal maps");

    BseArgs bs;
    auto* c_bse = app.add_subcommand("bse", "Brightness symmetry error of a UV texture");
    c_bse->add_option("--texture", bs.texture, "Texture raster")->required();
    c_bse->add_option("--kernel", bs.kernel, "Blur kernel size (odd)")->capture_default_str();

    DegradeArgs dg;
    auto* c_deg = app.add_subcommand("degrade", "Synthetic blur, resample, noise and denoise degradation");
    c_deg->add_option("--input", dg.input, "Input image")->required();
    c_deg->add_option("--out", dg.out, "Output image")->required();
    c_deg->add_option("--blur", dg.params.blur_sigma, "Gaussian blur sigma")->capture_default_str();
    c_deg->add_option("--down", dg.params.down_factor, "Downsampling factor")->capture_default_str();
    c_deg->add_option("--noise", dg.params.noise_sigma, "Noise standard deviation")->capture_default_str();
    c_deg->add_option("--nlm", dg.params.nlm_strength, "Non-local means strength")->capture_default_str();
    c_deg->add_option("--seed", dg.params.seed, "Random seed")->capture_default_str();
    c_deg->add_option("--ranges", dg.ranges, "JSON parameter ranges; samples parameters from --seed");

    RenderArgs rd;
    auto* c_render = app.add_subcommand("render", "Render a fitted view with a UV texture");
    c_render->add_option("--model", rd.model, "Model file")->required();
    c_render->add_option("--fit", rd.fit, "fit.json")->required();
    c_render->add_option("--view", rd.view, "View index")->capture_default_str();
    c_render->add_option("--texture", rd.texture, "UV texture raster")->required();
    c_render->add_option("--out", rd.out, "Output image")->required();
    c_render->add_option("--width", rd.width, "Image width")->capture_default_str();
    c_render->add_option("--height", rd.height, "Image height")->capture_default_str();
    c_render->add_flag("--use-fitted-lighting", rd.fitted_lighting, "Shade with the fitted SH lighting instead of ambient");
    c_render->add_option("--background", rd.background, "Background gray level")->capture_default_str();

    CompareArgs cp;
    auto* c_cmp = app.add_subcommand("compare", "PSNR and SSIM between two images");
    c_cmp->add_option("a", cp.a, "First image")->required();
    c_cmp->add_option("b", cp.b, "Second image")->required();
    c_cmp->add_option("--perceptual-cmd", cp.perceptual_cmd, "External perceptual distance command");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*c_fix) return run_fixtures(fx);
        if (*c_fit) return run_fit(ft);
        if (*c_unwrap) return run_unwrap(uw);
        if (*c_blend) return run_blend(bl);
        if (*c_lp) return run_lpblend(lp);
        if (*c_bse) return run_bse(bs);
        if (*c_deg) return run_degrade(dg);
        if (*c_render) return run_render(rd);
        if (*c_cmp) return run_compare(cp);
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
