// SPDX-License-Identifier: Apache-2.0
#include "avatar/fixtures.hpp"

#include "avatar/error.hpp"
#include "avatar/pyramid.hpp"
#include "avatar/render.hpp"
#include "avatar/toy_model.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

namespace avatar {

using nlohmann::json;

namespace {

constexpr double kYawDegrees = 35.0;
const char* const kViewNames[3] = {"left", "front", "right"};

const Eigen::Vector3d kLightDirection(-0.7, -0.3, -0.65); // head frame, toward the light

Image symmetric_pattern(int size)
{
    Image img(size, size, 3);
    const double pi = std::numbers::pi;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double u = std::abs((x + 0.5) / size - 0.5), v = (y + 0.5) / size;
            const double a = 0.5 + 0.3 * std::cos(10.0 * pi * u) * std::sin(3.0 * pi * v);
            img.at(x, y, 0) = static_cast<float>(a);
            img.at(x, y, 1) = static_cast<float>(0.4 + 0.4 * u);
            img.at(x, y, 2) = static_cast<float>(0.3 + 0.5 * v * v);
        }
    }
    return img;
}

json vec_json(const Eigen::VectorXd& v)
{
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vec_from(const json& j)
{
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

} // namespace

GroundTruth make_ground_truth(const MorphableModel& model, int image_size, FixtureLighting lighting, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    GroundTruth t;
    t.identity = Eigen::VectorXd(model.identity_count());
    for (auto& c : t.identity) {
        c = 0.4 * unit(rng);
    }
    t.texture.coefficients = Eigen::VectorXd(model.texture_count());
    for (auto& c : t.texture.coefficients) {
        c = 0.5 * unit(rng);
    }
    const double deg = std::numbers::pi / 180.0;
    for (int k = 0; k < 3; ++k) {
        ViewTruth v;
        v.name = kViewNames[k];
        CameraParams& cam = v.params.camera;
        cam.rotation = Eigen::Vector3d(0.05 * unit(rng), (k - 1) * kYawDegrees * deg + 0.03 * unit(rng), 0.03 * unit(rng));
        cam.scale = 0.36 * image_size * (1.0 + 0.03 * unit(rng));
        cam.translation = Eigen::Vector2d(0.5 * image_size + 3.0 * unit(rng), 0.5 * image_size + 3.0 * unit(rng));
        v.params.expression = Eigen::VectorXd(model.expression_count());
        for (auto& c : v.params.expression) {
            c = 0.25 * unit(rng);
        }
        if (lighting == FixtureLighting::directional) {
            const Eigen::Vector3d dir = rotation_matrix(cam.rotation) * kLightDirection.normalized();
            v.params.illumination = Illumination::directional(0.75, 0.45, dir);
        } else {
            v.params.illumination = Illumination::ambient(1.0);
        }
        t.views.push_back(std::move(v));
    }
    return t;
}

SyntheticView render_view(const MorphableModel& model, const GroundTruth& truth, std::size_t view, const UVMap& albedo,
                          int image_size)
{
    const ViewTruth& vt = truth.views.at(view);
    const ShapeParams shape{truth.identity, vt.params.expression};
    const Mesh mesh = decode_shape(model, shape);
    const RenderOutput out =
        render(mesh, vt.params.camera, albedo, vt.params.illumination, image_size, image_size);
    SyntheticView sv;
    sv.name = vt.name;
    sv.image = out.color;
    sv.mask = Image(image_size, image_size, 1);
    for (int y = 0; y < image_size; ++y) {
        for (int x = 0; x < image_size; ++x) {
            sv.mask.at(x, y) = out.covered(x, y) ? 1.0f : 0.0f;
        }
    }
    const Projection proj = project(landmark_positions(model, shape), vt.params.camera);
    sv.landmarks.points = proj.pixels;
    sv.landmarks.confidence.assign(proj.pixels.size(), 1.0);
    return sv;
}

Image make_reference(const MorphableModel& model, const GroundTruth& truth, const UVMap& albedo,
                     const Image& template_texture, int image_size)
{
    const int depth = default_pyramid_depth(albedo.color.width(), albedo.color.height());
    const UVMap blended = lp_blend(albedo, make_full_uvmap(template_texture), default_transfer_levels(depth), depth);
    const ViewTruth& front = truth.views.at(1);
    const Mesh mesh = decode_shape(model, ShapeParams{truth.identity, front.params.expression});
    return render(mesh, front.params.camera, blended, Illumination::ambient(1.0), image_size, image_size).color;
}

FixtureSet make_fixtures(const FixtureOptions& options)
{
    if (options.image_size < 16 || options.uv_resolution < 16) {
        throw ArgumentError("fixture image and uv sizes must be at least 16");
    }
    FixtureSet f;
    f.model = make_toy_model(ToyModelOptions{options.uv_resolution});
    f.truth = make_ground_truth(f.model, options.image_size, options.lighting, options.seed);
    f.albedo = decode_texture(f.model, f.truth.texture);
    for (std::size_t k = 0; k < f.truth.views.size(); ++k) {
        f.views.push_back(render_view(f.model, f.truth, k, f.albedo, options.image_size));
    }
    f.template_texture = f.model.mean_texture;
    f.symmetric_texture = symmetric_pattern(options.uv_resolution);
    f.reference = make_reference(f.model, f.truth, f.albedo, f.template_texture, options.image_size);
    return f;
}

void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path)
{
    json j;
    j["identity"] = vec_json(truth.identity);
    j["texture"] = vec_json(truth.texture.coefficients);
    j["views"] = json::array();
    for (const ViewTruth& v : truth.views) {
        const CameraParams& c = v.params.camera;
        j["views"].push_back({{"name", v.name},
                              {"rotation", {c.rotation.x(), c.rotation.y(), c.rotation.z()}},
                              {"translation", {c.translation.x(), c.translation.y()}},
                              {"scale", c.scale},
                              {"expression", vec_json(v.params.expression)},
                              {"sh", v.params.illumination.sh}});
    }
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    out << j.dump(2) << '\n';
}

GroundTruth load_ground_truth(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open ground truth '" + path.string() + "'");
    }
    GroundTruth t;
    try {
        const json j = json::parse(in);
        t.identity = vec_from(j.at("identity"));
        t.texture.coefficients = vec_from(j.at("texture"));
        for (const json& v : j.at("views")) {
            ViewTruth vt;
            vt.name = v.at("name").get<std::string>();
            vt.params.camera.rotation = vec_from(v.at("rotation"));
            vt.params.camera.translation = vec_from(v.at("translation"));
            vt.params.camera.scale = v.at("scale").get<double>();
            vt.params.expression = vec_from(v.at("expression"));
            vt.params.illumination.sh = v.at("sh").get<std::array<double, 3 * kShCoefficients>>();
            t.views.push_back(std::move(vt));
        }
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return t;
}

void write_fixtures(const FixtureSet& f, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    save_model(f.model, dir / "model.avf");
    json cfg;
    cfg["model"] = "model.avf";
    cfg["weights"] = {{"rgb", LossWeights{}.rgb},
                      {"landmark", LossWeights{}.landmark},
                      {"identity", LossWeights{}.identity},
                      {"regularization", LossWeights{}.regularization}};
    cfg["optimizer"] = {{"max_iters", OptimizerSettings{}.max_iters},
                        {"tolerance", OptimizerSettings{}.tolerance},
                        {"history_size", OptimizerSettings{}.history_size}};
    cfg["views"] = json::array();
    for (const SyntheticView& v : f.views) {
        const std::string stem = "view_" + v.name;
        save_image(v.image, dir / (stem + ".ppm"));
        save_landmarks(v.landmarks, dir / (stem + ".lm.txt"));
        save_image(v.mask, dir / (stem + ".mask.pgm"));
        cfg["views"].push_back({{"image", stem + ".ppm"}, {"landmarks", stem + ".lm.txt"}, {"mask", stem + ".mask.pgm"}});
    }
    {
        std::ofstream out(dir / "fit_config.json");
        if (!out) {
            throw Error("cannot write '" + (dir / "fit_config.json").string() + "'");
        }
        out << cfg.dump(2) << '\n';
    }
    save_ground_truth(f.truth, dir / "ground_truth.json");
    save_uvmap(f.albedo, dir / "albedo.ppm");
    save_image(f.template_texture, dir / "template.ppm");
    save_image(f.symmetric_texture, dir / "symmetric.ppm");
    save_image(f.reference, dir / "reference.ppm");
}

} // namespace avatar
