// SPDX-License-Identifier: Apache-2.0
#include "avatar/fit_io.hpp"

#include "avatar/error.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace avatar {

using nlohmann::json;

namespace {

json read_json(const std::filesystem::path& path, const char* what)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(std::string("cannot open ") + what + " '" + path.string() + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

json to_json(const Eigen::VectorXd& v)
{
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from(const json& j, const char* key)
{
    if (!j.contains(key) || !j.at(key).is_array()) {
        throw ParseError(std::string("missing numeric array '") + key + "'");
    }
    const auto values = j.at(key).get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

double number_or(const json& j, const char* key, double fallback)
{
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j.at(key).is_number()) {
        throw ConfigError(std::string("'") + key + "' must be a number");
    }
    return j.at(key).get<double>();
}

// Non-finite doubles have no JSON representation.
json finite_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

} // namespace

FitConfig load_fit_config(const std::filesystem::path& path)
{
    const json j = read_json(path, "fit configuration");
    const auto base = path.parent_path();
    auto resolve = [&base](const std::string& p) {
        const std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };
    FitConfig cfg;
    try {
        if (j.contains("weights")) {
            const json& w = j.at("weights");
            cfg.weights.rgb = number_or(w, "rgb", cfg.weights.rgb);
            cfg.weights.landmark = number_or(w, "landmark", cfg.weights.landmark);
            cfg.weights.identity = number_or(w, "identity", cfg.weights.identity);
            cfg.weights.regularization = number_or(w, "regularization", cfg.weights.regularization);
        }
        if (j.contains("optimizer")) {
            const json& o = j.at("optimizer");
            cfg.optimizer.max_iters = static_cast<int>(number_or(o, "max_iters", cfg.optimizer.max_iters));
            cfg.optimizer.tolerance = number_or(o, "tolerance", cfg.optimizer.tolerance);
            cfg.optimizer.history_size = static_cast<int>(number_or(o, "history_size", cfg.optimizer.history_size));
        }
        if (j.contains("identity_provider")) {
            cfg.identity_provider = j.at("identity_provider").get<std::string>();
        }
        if (j.contains("model")) {
            cfg.model = resolve(j.at("model").get<std::string>());
        }
        if (j.contains("views")) {
            for (const json& v : j.at("views")) {
                ViewPaths vp;
                vp.image = resolve(v.at("image").get<std::string>());
                vp.landmarks = resolve(v.at("landmarks").get<std::string>());
                if (v.contains("mask")) {
                    vp.mask = resolve(v.at("mask").get<std::string>());
                }
                cfg.views.push_back(std::move(vp));
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    const LossWeights& w = cfg.weights;
    if (w.rgb < 0 || w.landmark < 0 || w.identity < 0 || w.regularization < 0) {
        throw ConfigError(path.string() + ": loss weights must be nonnegative");
    }
    return cfg;
}

FitView load_view(const ViewPaths& paths)
{
    FitView v;
    v.image = load_image(paths.image);
    v.landmarks = load_landmarks(paths.landmarks);
    if (paths.mask) {
        v.mask = load_image(*paths.mask);
        if (v.mask->channels() != 1 || v.mask->width() != v.image.width() || v.mask->height() != v.image.height()) {
            throw ValidationError(paths.mask->string() + ": mask must be single-channel and match its image");
        }
    }
    return v;
}

void save_fit_result(const FitResult& result, const std::filesystem::path& path)
{
    json j;
    j["shared_identity"] = to_json(result.shared_identity);
    j["texture"] = to_json(result.texture.coefficients);
    json views = json::array();
    for (const auto& vp : result.view_params) {
        json v;
        v["rotation"] = {vp.camera.rotation.x(), vp.camera.rotation.y(), vp.camera.rotation.z()};
        v["translation"] = {vp.camera.translation.x(), vp.camera.translation.y()};
        v["scale"] = vp.camera.scale;
        v["expression"] = to_json(vp.expression);
        v["sh"] = std::vector<double>(vp.illumination.sh.begin(), vp.illumination.sh.end());
        views.push_back(std::move(v));
    }
    j["views"] = std::move(views);
    j["loss"] = {{"rgb", finite_or_null(result.loss.rgb)},
                 {"landmark", finite_or_null(result.loss.landmark)},
                 {"identity", finite_or_null(result.loss.identity)},
                 {"regularizer", finite_or_null(result.loss.regularizer)},
                 {"total", finite_or_null(result.loss.total)}};
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    j["status"] = result.status;
    j["loss_history"] = result.loss_history;
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write fit result '" + path.string() + "'");
    }
    out << j.dump(2) << '\n';
}

FitResult load_fit_result(const std::filesystem::path& path)
{
    const json j = read_json(path, "fit result");
    FitResult r;
    try {
        r.shared_identity = vector_from(j, "shared_identity");
        r.texture.coefficients = vector_from(j, "texture");
        for (const json& v : j.at("views")) {
            ViewParams vp;
            const Eigen::VectorXd rot = vector_from(v, "rotation");
            const Eigen::VectorXd tr = vector_from(v, "translation");
            if (rot.size() != 3 || tr.size() != 2) {
                throw ParseError(path.string() + ": camera rotation/translation have wrong length");
            }
            vp.camera.rotation = rot;
            vp.camera.translation = tr;
            vp.camera.scale = v.at("scale").get<double>();
            vp.expression = vector_from(v, "expression");
            const Eigen::VectorXd sh = vector_from(v, "sh");
            if (sh.size() != 3 * kShCoefficients) {
                throw ParseError(path.string() + ": illumination must have 27 coefficients");
            }
            for (int k = 0; k < sh.size(); ++k) {
                vp.illumination.sh[static_cast<std::size_t>(k)] = sh[k];
            }
            r.view_params.push_back(std::move(vp));
        }
        auto loss_value = [&](const char* key) {
            const json& l = j.at("loss");
            return l.contains(key) && l.at(key).is_number() ? l.at(key).get<double>()
                                                            : std::numeric_limits<double>::quiet_NaN();
        };
        if (j.contains("loss")) {
            r.loss = {loss_value("rgb"), loss_value("landmark"), loss_value("identity"), loss_value("regularizer"),
                      loss_value("total")};
        }
        r.iterations = j.value("iterations", 0);
        r.converged = j.value("converged", false);
        r.status = j.value("status", std::string());
        if (j.contains("loss_history")) {
            r.loss_history = j.at("loss_history").get<std::vector<double>>();
        }
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return r;
}

} // namespace avatar
