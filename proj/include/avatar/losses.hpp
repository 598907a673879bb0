// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "avatar/camera.hpp"
#include "avatar/image.hpp"
#include "avatar/landmarks.hpp"
#include "avatar/model.hpp"
#include "avatar/provider.hpp"
#include "avatar/render.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace avatar {

/// Per-source-image parameters.
struct ViewParams
{
    CameraParams camera;
    Eigen::VectorXd expression;
    Illumination illumination;
};

struct LandmarkLoss
{
    double value = 0.0;
    Eigen::VectorXd d_identity;
    Eigen::VectorXd d_expression;
    Eigen::Vector3d d_rotation = Eigen::Vector3d::Zero();
    Eigen::Vector2d d_translation = Eigen::Vector2d::Zero();
    double d_scale = 0.0;
};

/**
 * Mean over landmarks of confidence * |project(model landmark) - detected|^2, divided by the
 * squared image diagonal (width^2 + height^2).
 */
LandmarkLoss loss_landmark(const MorphableModel& model, const Eigen::VectorXd& identity, const ViewParams& view,
                           const LandmarkSet& landmarks, int image_width, int image_height);

struct RgbLoss
{
    double value = 0.0;
    Image gradient; // dLoss/dColor, zero outside the evaluated pixels
    std::size_t pixel_count = 0;
};

/// Mean absolute RGB difference over covered pixels (intersected with mask > 0.5 when given).
RgbLoss loss_rgb(const RenderOutput& rendered, const Image& source, const SegMask* mask = nullptr);

struct IdentityLoss
{
    double value = 0.0;
    bool enabled = false;
};

/**
 * Squared L2 distance between provider embeddings of the two images. Without a provider the term
 * is disabled and contributes 0. No gradient is produced.
 */
IdentityLoss loss_identity(const Image& rendered, const Image& source, EmbeddingProvider* provider);

struct RegularizerWeights
{
    double identity = 1.0;
    double expression = 1.0;
    double texture = 1.0;
};

struct RegularizerTerm
{
    double value = 0.0;
    Eigen::VectorXd d_identity;
    std::vector<Eigen::VectorXd> d_expressions;
    Eigen::VectorXd d_texture;
};

/// Weighted sum of squared coefficients per group.
RegularizerTerm regularizer(const Eigen::VectorXd& identity, std::span<const Eigen::VectorXd> expressions,
                            const Eigen::VectorXd& texture, const RegularizerWeights& weights = {});

} // namespace avatar
