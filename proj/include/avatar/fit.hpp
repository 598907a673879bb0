// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "avatar/image.hpp"
#include "avatar/landmarks.hpp"
#include "avatar/lbfgs.hpp"
#include "avatar/losses.hpp"
#include "avatar/model.hpp"
#include "avatar/morphable.hpp"
#include "avatar/provider.hpp"

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace avatar {

struct FitView
{
    Image image;
    LandmarkSet landmarks;
    std::optional<SegMask> mask;
};

struct LossWeights
{
    double rgb = 1.0;
    double landmark = 50.0;
    double identity = 0.0;
    double regularization = 1e-3;
};

struct OptimizerSettings
{
    int max_iters = 200;
    double tolerance = 1e-6;
    int history_size = 10;
    int landmark_warmup = 20; // landmark-only iterations before the joint stage when w_rgb > 0
};

struct FitProblem
{
    std::vector<FitView> views;
    Eigen::VectorXd shared_identity;
    TextureParams texture;
    std::vector<ViewParams> view_params;
    LossWeights weights;
    OptimizerSettings optimizer;
    std::shared_ptr<EmbeddingProvider> identity_provider; // optional

    void validate(const MorphableModel& model) const;
};

/**
 * Builds a problem with the standard initialization: all coefficients zero, ambient unit
 * illumination, zero rotation, scale from the landmark bounding box relative to the model's
 * landmark extent and translation from the landmark centroid.
 */
FitProblem make_fit_problem(const MorphableModel& model, std::vector<FitView> views, const LossWeights& weights = {},
                            const OptimizerSettings& optimizer = {});

/// Unweighted per-term sums over views plus the weighted total.
struct LossBreakdown
{
    double rgb = 0.0;
    double landmark = 0.0;
    double identity = 0.0;
    double regularizer = 0.0;
    double total = 0.0;
};

struct FitResult
{
    Eigen::VectorXd shared_identity;
    std::vector<ViewParams> view_params;
    TextureParams texture;
    LossBreakdown loss;
    int iterations = 0;
    bool converged = false;
    std::string status;
    std::vector<double> loss_history;
};

/// Concrete parameter values of a fitting problem.
struct FitState
{
    Eigen::VectorXd identity;
    TextureParams texture;
    std::vector<ViewParams> views;
};

/**
 * Objective over the concatenated parameter vector
 * [identity | texture | per view: rotation, translation, scale, expression, SH].
 *
 * Per-view pose entries are stored in rescaled units so one unit moves the projection by roughly
 * one pixel, and identity and expression units move the vertices by about one pixel.
 */
class FitObjective
{
public:
    FitObjective(const MorphableModel& model, const FitProblem& problem);

    Eigen::Index size() const noexcept { return size_; }
    Eigen::VectorXd pack(const FitState& state) const;
    FitState unpack(const Eigen::VectorXd& x) const;

    /// Factors that turn packed coordinates back into model units (radians, pixels, coefficients).
    Eigen::VectorXd change_scale() const;

    /// Total loss (identity-provider term excluded) and its gradient in packed units.
    double evaluate(const Eigen::VectorXd& x, Eigen::VectorXd& gradient, LossBreakdown* parts = nullptr) const;

    /**
     * Shared priors plus the mean over views of each view's loss, with the gradient taken under
     * inner_product. N identical views give the same value, gradient and geometry as one view, so
     * the optimizer path does not depend on duplication.
     */
    double evaluate_mean(const Eigen::VectorXd& x, Eigen::VectorXd& gradient) const;

    /// Dot product over the shared block plus the mean over views of the per-view block dot products.
    double inner_product(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

private:
    struct Parts;
    bool compute(const Eigen::VectorXd& x, Parts& out) const;

    const MorphableModel& model_;
    const FitProblem& problem_;
    std::vector<double> rotation_units_;
    Eigen::VectorXd identity_units_;
    Eigen::VectorXd expression_units_;
    Eigen::Index size_ = 0;
    Eigen::Index view_block_ = 0;
    Image coverage_;
};

/**
 * LBFGS over the full parameter vector. When w_rgb > 0, a landmark-only stage of at most
 * `landmark_warmup` iterations first moves pose and shape into the basin of the joint objective.
 * Both stages share the max_iters budget.
 */
FitResult optimize(const FitProblem& problem, const MorphableModel& model);

/// Decoded mesh of one fitted view (shared identity plus that view's expression).
Mesh fitted_mesh(const MorphableModel& model, const FitResult& fit, std::size_t view);

/**
 * Renders one fitted view. Defaults: the fitted 3DMM texture and the fitted illumination.
 */
RenderOutput render_fitted_view(const MorphableModel& model, const FitResult& fit, std::size_t view, int width,
                                int height, const UVMap* texture = nullptr, const Illumination* illumination = nullptr,
                                const ShadeOptions& options = {});

} // namespace avatar
