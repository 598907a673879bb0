// SPDX-License-Identifier: Apache-2.0
#include "avatar/fit.hpp"

#include "avatar/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace avatar {

namespace {

constexpr int kPoseEntries = 6; // rotation 3, translation 2, scale 1
constexpr int kShEntries = 3 * kShCoefficients;
// Texture and SH coordinates are scaled so their effect on pixel colors is comparable to
// a one-pixel shift of the geometry.
constexpr double kAppearanceUnit = 0.3;

struct Extent
{
    Eigen::Vector2d min = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector2d max = Eigen::Vector2d::Constant(-std::numeric_limits<double>::infinity());
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    int count = 0;

    void add(const Eigen::Vector2d& p)
    {
        min = min.cwiseMin(p);
        max = max.cwiseMax(p);
        sum += p;
        ++count;
    }
    Eigen::Vector2d centroid() const { return sum / count; }
    double diagonal() const { return (max - min).norm(); }
};

} // namespace

void FitProblem::validate(const MorphableModel& model) const
{
    if (views.empty()) {
        throw ArgumentError("fitting needs at least one view");
    }
    if (views.size() != view_params.size()) {
        throw DimensionError("fit problem has " + std::to_string(views.size()) + " views but " +
                             std::to_string(view_params.size()) + " view parameter sets");
    }
    if (shared_identity.size() != model.identity_count()) {
        throw DimensionError("shared identity length does not match the model");
    }
    if (texture.coefficients.size() != model.texture_count()) {
        throw DimensionError("texture parameter length does not match the model");
    }
    for (std::size_t i = 0; i < views.size(); ++i) {
        const FitView& v = views[i];
        if (static_cast<int>(v.landmarks.size()) != model.landmark_count()) {
            throw DimensionError("view " + std::to_string(i) + " has " + std::to_string(v.landmarks.size()) +
                                 " landmarks, model has " + std::to_string(model.landmark_count()));
        }
        if (v.image.channels() != 3) {
            throw DimensionError("view " + std::to_string(i) + " image must be RGB");
        }
        if (v.mask && (v.mask->width() != v.image.width() || v.mask->height() != v.image.height())) {
            throw DimensionError("view " + std::to_string(i) + " mask does not match its image");
        }
        if (view_params[i].expression.size() != model.expression_count()) {
            throw DimensionError("view " + std::to_string(i) + " expression length does not match the model");
        }
        view_params[i].camera.validate();
    }
    const LossWeights& w = weights;
    if (w.rgb < 0.0 || w.landmark < 0.0 || w.identity < 0.0 || w.regularization < 0.0) {
        throw ArgumentError("loss weights must be nonnegative");
    }
    if (optimizer.max_iters < 0 || optimizer.history_size < 1 || !(optimizer.tolerance >= 0.0)) {
        throw ArgumentError("invalid optimizer settings");
    }
}

FitProblem make_fit_problem(const MorphableModel& model, std::vector<FitView> views, const LossWeights& weights,
                            const OptimizerSettings& optimizer)
{
    FitProblem p;
    p.shared_identity = Eigen::VectorXd::Zero(model.identity_count());
    p.texture = TextureParams::zeros(model);
    p.weights = weights;
    p.optimizer = optimizer;

    const auto model_points = landmark_positions(model, ShapeParams::zeros(model));
    for (const FitView& view : views) {
        if (view.landmarks.size() != model_points.size()) {
            throw DimensionError("view has " + std::to_string(view.landmarks.size()) + " landmarks, model has " +
                                 std::to_string(model_points.size()));
        }
        Extent detected;
        Extent reference;
        for (std::size_t j = 0; j < model_points.size(); ++j) {
            const double conf = view.landmarks.confidence.empty() ? 1.0 : view.landmarks.confidence[j];
            if (conf <= 0.0) {
                continue;
            }
            detected.add(view.landmarks.points[j]);
            reference.add(model_points[j].head<2>());
        }
        ViewParams vp;
        vp.expression = Eigen::VectorXd::Zero(model.expression_count());
        vp.illumination = Illumination::ambient(1.0);
        if (detected.count >= 2 && reference.diagonal() > 0.0 && detected.diagonal() > 0.0) {
            vp.camera.scale = detected.diagonal() / reference.diagonal();
            vp.camera.translation = detected.centroid() - vp.camera.scale * reference.centroid();
        } else {
            vp.camera.scale = 0.25 * std::min(view.image.width(), view.image.height());
            vp.camera.translation = Eigen::Vector2d(view.image.width() / 2.0, view.image.height() / 2.0);
        }
        p.view_params.push_back(vp);
    }
    p.views = std::move(views);
    p.validate(model);
    return p;
}

FitObjective::FitObjective(const MorphableModel& model, const FitProblem& problem) : model_(model), problem_(problem)
{
    problem.validate(model);
    view_block_ = kPoseEntries + model.expression_count() + kShEntries;
    size_ = model.identity_count() + model.texture_count() +
            static_cast<Eigen::Index>(problem.views.size()) * view_block_;
    for (const auto& vp : problem.view_params) {
        rotation_units_.push_back(1.0 / vp.camera.scale);
    }

    // Shape coordinates: one unit moves the vertices by about one pixel (RMS).
    double mean_scale = 0.0;
    for (const auto& vp : problem.view_params) {
        mean_scale += vp.camera.scale / static_cast<double>(problem.view_params.size());
    }
    auto units = [&](const Eigen::MatrixXf& basis) {
        Eigen::VectorXd u = Eigen::VectorXd::Ones(basis.cols());
        const double vertices = std::max<Eigen::Index>(1, basis.rows() / 3);
        for (Eigen::Index k = 0; k < basis.cols(); ++k) {
            const double rms = std::sqrt(basis.col(k).cast<double>().squaredNorm() / vertices);
            if (rms > 0.0 && mean_scale > 0.0) {
                u[k] = 1.0 / (mean_scale * rms);
            }
        }
        return u;
    };
    identity_units_ = units(model.identity_basis);
    expression_units_ = units(model.expression_basis);
    coverage_ = uv_coverage(model.uv_coords, model.uv_triangles, model.mean_texture.width(), model.mean_texture.height());
}

Eigen::VectorXd FitObjective::pack(const FitState& s) const
{
    Eigen::VectorXd x(size_);
    const int kid = model_.identity_count(), ktex = model_.texture_count(), kexp = model_.expression_count();
    x.head(kid) = s.identity.cwiseQuotient(identity_units_);
    x.segment(kid, ktex) = s.texture.coefficients / kAppearanceUnit;
    for (std::size_t v = 0; v < s.views.size(); ++v) {
        const Eigen::Index o = kid + ktex + static_cast<Eigen::Index>(v) * view_block_;
        const ViewParams& vp = s.views[v];
        x.segment<3>(o) = vp.camera.rotation / rotation_units_[v];
        x.segment<2>(o + 3) = vp.camera.translation;
        x[o + 5] = vp.camera.scale;
        x.segment(o + kPoseEntries, kexp) = vp.expression.cwiseQuotient(expression_units_);
        for (int k = 0; k < kShEntries; ++k) {
            x[o + kPoseEntries + kexp + k] = vp.illumination.sh[static_cast<std::size_t>(k)] / kAppearanceUnit;
        }
    }
    return x;
}

FitState FitObjective::unpack(const Eigen::VectorXd& x) const
{
    FitState s;
    const int kid = model_.identity_count(), ktex = model_.texture_count(), kexp = model_.expression_count();
    s.identity = x.head(kid).cwiseProduct(identity_units_);
    s.texture.coefficients = x.segment(kid, ktex) * kAppearanceUnit;
    for (std::size_t v = 0; v < problem_.views.size(); ++v) {
        const Eigen::Index o = kid + ktex + static_cast<Eigen::Index>(v) * view_block_;
        ViewParams vp;
        const Eigen::VectorXd b = x.segment(o, view_block_);
        vp.camera.rotation = b.segment<3>(0) * rotation_units_[v];
        vp.camera.translation = b.segment<2>(3);
        vp.camera.scale = b[5];
        vp.expression = b.segment(kPoseEntries, kexp).cwiseProduct(expression_units_);
        for (int k = 0; k < kShEntries; ++k) {
            vp.illumination.sh[static_cast<std::size_t>(k)] = b[kPoseEntries + kexp + k] * kAppearanceUnit;
        }
        s.views.push_back(std::move(vp));
    }
    return s;
}

Eigen::VectorXd FitObjective::change_scale() const
{
    const int kid = model_.identity_count(), ktex = model_.texture_count(), kexp = model_.expression_count();
    Eigen::VectorXd d(size_);
    d.head(kid) = identity_units_;
    d.segment(kid, ktex).setConstant(kAppearanceUnit);
    for (std::size_t v = 0; v < problem_.views.size(); ++v) {
        const Eigen::Index o = kid + ktex + static_cast<Eigen::Index>(v) * view_block_;
        d.segment<3>(o).setConstant(rotation_units_[v]);
        d.segment<3>(o + 3).setOnes();
        d.segment(o + kPoseEntries, kexp) = expression_units_;
        d.segment(o + kPoseEntries + kexp, kShEntries).setConstant(kAppearanceUnit);
    }
    return d;
}

namespace {

// Mean of per-view values written as a0 + sum (ak - a0) / N, which returns a0 bit for bit when
// every view contributes the same value.
double view_mean(const std::vector<double>& values)
{
    const double n = static_cast<double>(values.size());
    double m = values.front();
    for (std::size_t k = 1; k < values.size(); ++k) {
        m += (values[k] - values.front()) / n;
    }
    return m;
}

Eigen::VectorXd view_mean(const std::vector<Eigen::VectorXd>& values)
{
    const double n = static_cast<double>(values.size());
    Eigen::VectorXd m = values.front();
    for (std::size_t k = 1; k < values.size(); ++k) {
        m += (values[k] - values.front()) / n;
    }
    return m;
}

} // namespace

struct FitObjective::Parts
{
    LossBreakdown breakdown;
    double shared_value = 0.0;           // identity and texture priors
    std::vector<double> view_values;     // per view: weighted landmark, rgb and expression prior
    Eigen::VectorXd shared_prior;        // gradient of shared_value, packed units
    std::vector<Eigen::VectorXd> shared; // per view: gradient of its value w.r.t. the shared block
    std::vector<Eigen::VectorXd> blocks; // per view: gradient w.r.t. its own block
};

bool FitObjective::compute(const Eigen::VectorXd& x, Parts& out) const
{
    const FitState s = unpack(x);
    const LossWeights& w = problem_.weights;
    const int kid = model_.identity_count(), ktex = model_.texture_count(), kexp = model_.expression_count();
    const Eigen::Index shared_size = kid + ktex;
    const auto n_views = static_cast<double>(problem_.views.size());
    LossBreakdown& lb = out.breakdown;

    for (const auto& vp : s.views) {
        if (!(vp.camera.scale > 0.0) || !std::isfinite(vp.camera.scale)) {
            return false;
        }
    }

    const bool use_rgb = w.rgb > 0.0;
    Eigen::VectorXd tex_linear;
    UVMap texture;
    if (use_rgb) {
        tex_linear = decode_texture_linear(model_, s.texture);
        texture.color = Image(model_.mean_texture.width(), model_.mean_texture.height(), 3);
        for (Eigen::Index i = 0; i < tex_linear.size(); ++i) {
            const bool covered = coverage_.data()[static_cast<std::size_t>(i) / 3] != 0.0f;
            texture.color.data()[static_cast<std::size_t>(i)] =
                covered ? static_cast<float>(std::clamp(tex_linear[i], 0.0, 1.0)) : 0.0f;
        }
        texture.validity = coverage_;
    }

    for (std::size_t v = 0; v < problem_.views.size(); ++v) {
        const FitView& view = problem_.views[v];
        const ViewParams& vp = s.views[v];
        Eigen::VectorXd shared = Eigen::VectorXd::Zero(shared_size);
        Eigen::VectorXd block = Eigen::VectorXd::Zero(view_block_);
        double value = 0.0;

        if (w.landmark > 0.0) {
            const LandmarkLoss lm =
                loss_landmark(model_, s.identity, vp, view.landmarks, view.image.width(), view.image.height());
            lb.landmark += lm.value;
            value += w.landmark * lm.value;
            shared.head(kid) += w.landmark * lm.d_identity;
            block.segment<3>(0) += w.landmark * lm.d_rotation * rotation_units_[v];
            block.segment<2>(3) += w.landmark * lm.d_translation;
            block[5] += w.landmark * lm.d_scale;
            block.segment(kPoseEntries, kexp) += w.landmark * lm.d_expression;
        }

        if (use_rgb) {
            const Mesh mesh = decode_shape(model_, ShapeParams{s.identity, vp.expression});
            RenderOutput rendered = rasterize(mesh, vp.camera, view.image.width(), view.image.height());
            rendered.color = shade(rendered, mesh, texture, vp.illumination);
            const RgbLoss rgb = loss_rgb(rendered, view.image, view.mask ? &*view.mask : nullptr);
            lb.rgb += rgb.value;
            value += w.rgb * rgb.value;
            if (rgb.pixel_count > 0) {
                Image scaled = rgb.gradient;
                for (float& g : scaled.data()) {
                    g *= static_cast<float>(w.rgb);
                }
                const RenderGradients rg = render_backward(rendered, mesh, texture, vp.illumination, scaled);
                Eigen::VectorXd d_flat(3 * static_cast<Eigen::Index>(mesh.vertices.size()));
                for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
                    d_flat.segment<3>(3 * static_cast<Eigen::Index>(i)) = rg.vertices[i];
                }
                shared.head(kid) += model_.identity_basis.cast<double>().transpose() * d_flat;
                block.segment(kPoseEntries, kexp) += model_.expression_basis.cast<double>().transpose() * d_flat;
                block.segment<3>(0) += rg.rotation * rotation_units_[v];
                block.segment<2>(3) += rg.translation;
                block[5] += rg.scale;
                for (int k = 0; k < kShEntries; ++k) {
                    block[kPoseEntries + kexp + k] += rg.sh[static_cast<std::size_t>(k)];
                }
                Eigen::VectorXd masked(static_cast<Eigen::Index>(rg.texture.size()));
                for (std::size_t i = 0; i < rg.texture.size(); ++i) {
                    const double lin = tex_linear[static_cast<Eigen::Index>(i)];
                    const bool inside = lin >= 0.0 && lin <= 1.0 && coverage_.data()[i / 3] != 0.0f;
                    masked[static_cast<Eigen::Index>(i)] = inside ? rg.texture[i] : 0.0;
                }
                for (int k = 0; k < ktex; ++k) {
                    shared[kid + k] += model_.texture_basis.col(k).cast<double>().dot(masked);
                }
            }
        }

        const double e2 = vp.expression.squaredNorm();
        lb.regularizer += e2;
        value += w.regularization * e2;
        block.segment(kPoseEntries, kexp) += 2.0 * w.regularization * vp.expression;

        shared.head(kid) = shared.head(kid).cwiseProduct(identity_units_);
        shared.segment(kid, ktex) *= kAppearanceUnit;
        block.segment(kPoseEntries, kexp) = block.segment(kPoseEntries, kexp).cwiseProduct(expression_units_);
        block.segment(kPoseEntries + kexp, kShEntries) *= kAppearanceUnit;
        out.view_values.push_back(value);
        out.shared.push_back(std::move(shared));
        out.blocks.push_back(std::move(block));
    }

    // Shared priors count once per view in the reported sum, so per view they match a single-view fit.
    const double id2 = s.identity.squaredNorm();
    const double tex2 = s.texture.coefficients.squaredNorm();
    lb.regularizer += n_views * (id2 + tex2);
    out.shared_value = w.regularization * (id2 + tex2);
    out.shared_prior = Eigen::VectorXd(shared_size);
    out.shared_prior.head(kid) = 2.0 * w.regularization * s.identity.cwiseProduct(identity_units_);
    out.shared_prior.segment(kid, ktex) = 2.0 * w.regularization * kAppearanceUnit * s.texture.coefficients;
    lb.total = w.rgb * lb.rgb + w.landmark * lb.landmark + w.regularization * lb.regularizer;
    return true;
}

double FitObjective::evaluate(const Eigen::VectorXd& x, Eigen::VectorXd& gradient, LossBreakdown* parts) const
{
    Parts p;
    gradient = Eigen::VectorXd::Zero(size_);
    if (!compute(x, p)) {
        return std::numeric_limits<double>::infinity();
    }
    const Eigen::Index shared_size = model_.identity_count() + model_.texture_count();
    const auto n_views = static_cast<double>(problem_.views.size());
    gradient.head(shared_size) = n_views * p.shared_prior;
    for (std::size_t v = 0; v < p.blocks.size(); ++v) {
        gradient.head(shared_size) += p.shared[v];
        gradient.segment(shared_size + static_cast<Eigen::Index>(v) * view_block_, view_block_) = p.blocks[v];
    }
    if (parts != nullptr) {
        *parts = p.breakdown;
    }
    return p.breakdown.total;
}

double FitObjective::evaluate_mean(const Eigen::VectorXd& x, Eigen::VectorXd& gradient) const
{
    Parts p;
    gradient = Eigen::VectorXd::Zero(size_);
    if (!compute(x, p)) {
        return std::numeric_limits<double>::infinity();
    }
    const Eigen::Index shared_size = model_.identity_count() + model_.texture_count();
    gradient.head(shared_size) = p.shared_prior + view_mean(p.shared);
    for (std::size_t v = 0; v < p.blocks.size(); ++v) {
        // Under the view-averaged inner product a block's gradient is N times its partial derivative.
        gradient.segment(shared_size + static_cast<Eigen::Index>(v) * view_block_, view_block_) = p.blocks[v];
    }
    return p.shared_value + view_mean(p.view_values);
}

double FitObjective::inner_product(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const
{
    const Eigen::Index shared_size = model_.identity_count() + model_.texture_count();
    std::vector<double> blocks;
    for (std::size_t v = 0; v < problem_.views.size(); ++v) {
        const Eigen::Index o = shared_size + static_cast<Eigen::Index>(v) * view_block_;
        blocks.push_back(a.segment(o, view_block_).dot(b.segment(o, view_block_)));
    }
    return a.head(shared_size).dot(b.head(shared_size)) + view_mean(blocks);
}

FitResult optimize(const FitProblem& problem, const MorphableModel& model)
{
    const FitObjective objective(model, problem);
    FitState init{problem.shared_identity, problem.texture, problem.view_params};
    Eigen::VectorXd x0 = objective.pack(init);
    const double n_views = static_cast<double>(problem.views.size());

    const auto settings_for = [&](const FitObjective& obj) {
        LbfgsSettings settings;
        settings.max_iterations = problem.optimizer.max_iters;
        settings.tolerance = problem.optimizer.tolerance;
        settings.history_size = problem.optimizer.history_size;
        settings.change_scale = obj.change_scale();
        settings.inner_product = [&obj](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
            return obj.inner_product(a, b);
        };
        return settings;
    };
    LbfgsSettings settings = settings_for(objective);

    int warmup_iterations = 0;
    const int warmup = std::min(problem.optimizer.landmark_warmup, problem.optimizer.max_iters);
    if (problem.weights.rgb > 0.0 && problem.weights.landmark > 0.0 && warmup > 0) {
        FitProblem landmarks_only = problem;
        landmarks_only.weights.rgb = 0.0;
        const FitObjective pre(model, landmarks_only);
        LbfgsSettings pre_settings = settings_for(pre);
        pre_settings.max_iterations = warmup;
        const LbfgsResult stage = minimize_lbfgs(
            [&pre](const Eigen::VectorXd& x, Eigen::VectorXd& g) { return pre.evaluate_mean(x, g); }, x0,
            pre_settings);
        // Texture and lighting are untouched by this stage.
        FitState moved = pre.unpack(stage.x);
        moved.texture = problem.texture;
        for (std::size_t v = 0; v < moved.views.size(); ++v) {
            moved.views[v].illumination = problem.view_params[v].illumination;
        }
        x0 = objective.pack(moved);
        warmup_iterations = stage.iterations;
        settings.max_iterations -= warmup_iterations;
    }

    const LbfgsResult run = minimize_lbfgs(
        [&objective](const Eigen::VectorXd& x, Eigen::VectorXd& g) { return objective.evaluate_mean(x, g); }, x0,
        settings);
    std::vector<double> history;
    for (double f : run.history) {
        history.push_back(f * n_views);
    }

    FitState best = objective.unpack(run.x);
    FitResult result;
    result.shared_identity = best.identity;
    result.texture = best.texture;
    result.view_params = best.views;
    result.iterations = warmup_iterations + run.iterations;
    result.converged = run.converged();
    result.status = to_string(run.status);
    result.loss_history = std::move(history);

    Eigen::VectorXd g;
    objective.evaluate(run.x, g, &result.loss);

    if (problem.identity_provider && problem.weights.identity > 0.0) {
        for (std::size_t v = 0; v < problem.views.size(); ++v) {
            const FitView& view = problem.views[v];
            const RenderOutput out =
                render_fitted_view(model, result, v, view.image.width(), view.image.height());
            result.loss.identity += loss_identity(out.color, view.image, problem.identity_provider.get()).value;
        }
        result.loss.total += problem.weights.identity * result.loss.identity;
    }
    return result;
}

Mesh fitted_mesh(const MorphableModel& model, const FitResult& fit, std::size_t view)
{
    if (view >= fit.view_params.size()) {
        throw ArgumentError("view index " + std::to_string(view) + " out of range");
    }
    return decode_shape(model, ShapeParams{fit.shared_identity, fit.view_params[view].expression});
}

RenderOutput render_fitted_view(const MorphableModel& model, const FitResult& fit, std::size_t view, int width,
                                int height, const UVMap* texture, const Illumination* illumination,
                                const ShadeOptions& options)
{
    const Mesh mesh = fitted_mesh(model, fit, view);
    const ViewParams& vp = fit.view_params[view];
    if (texture != nullptr) {
        return render(mesh, vp.camera, *texture, illumination ? *illumination : vp.illumination, width, height, options);
    }
    const UVMap fitted = decode_texture(model, fit.texture);
    return render(mesh, vp.camera, fitted, illumination ? *illumination : vp.illumination, width, height, options);
}

} // namespace avatar
