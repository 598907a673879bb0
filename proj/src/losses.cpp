// SPDX-License-Identifier: Apache-2.0
#include "avatar/losses.hpp"

#include "avatar/error.hpp"

#include <cmath>
#include <string>

namespace avatar {

LandmarkLoss loss_landmark(const MorphableModel& model, const Eigen::VectorXd& identity, const ViewParams& view,
                           const LandmarkSet& landmarks, int image_width, int image_height)
{
    const int count = model.landmark_count();
    if (static_cast<int>(landmarks.size()) != count) {
        throw DimensionError("landmark set has " + std::to_string(landmarks.size()) + " points, model has " +
                             std::to_string(count));
    }
    if (identity.size() != model.identity_count() || view.expression.size() != model.expression_count()) {
        throw DimensionError("shape parameter lengths do not match the model");
    }
    LandmarkLoss out;
    out.d_identity = Eigen::VectorXd::Zero(model.identity_count());
    out.d_expression = Eigen::VectorXd::Zero(model.expression_count());
    if (count == 0) {
        return out;
    }
    const double diag2 = static_cast<double>(image_width) * image_width + static_cast<double>(image_height) * image_height;
    const double norm = 1.0 / (count * diag2);
    const CameraParams& cam = view.camera;
    const Eigen::Matrix3d r = rotation_matrix(cam.rotation);
    Eigen::Matrix3d d_r = Eigen::Matrix3d::Zero();
    for (int j = 0; j < count; ++j) {
        const double conf = landmarks.confidence.empty() ? 1.0 : landmarks.confidence[static_cast<std::size_t>(j)];
        if (conf == 0.0) {
            continue;
        }
        const Eigen::Index row = 3 * model.landmark_vertex_ids[static_cast<std::size_t>(j)];
        const Eigen::Matrix<double, 3, Eigen::Dynamic> b_id = model.identity_basis.middleRows<3>(row).cast<double>();
        const Eigen::Matrix<double, 3, Eigen::Dynamic> b_ex = model.expression_basis.middleRows<3>(row).cast<double>();
        const Eigen::Vector3d p = model.mean_shape.segment<3>(row).cast<double>() + b_id * identity + b_ex * view.expression;
        const Eigen::Vector3d w = r * p;
        const Eigen::Vector2d q = cam.scale * w.head<2>() + cam.translation;
        const Eigen::Vector2d res = q - landmarks.points[static_cast<std::size_t>(j)];
        out.value += conf * res.squaredNorm() * norm;
        const Eigen::Vector2d dq = 2.0 * conf * norm * res;
        out.d_translation += dq;
        out.d_scale += dq.dot(w.head<2>());
        Eigen::Vector3d dw = Eigen::Vector3d::Zero();
        dw.head<2>() = cam.scale * dq;
        const Eigen::Vector3d dp = r.transpose() * dw;
        d_r += dw * p.transpose();
        out.d_identity += b_id.transpose() * dp;
        out.d_expression += b_ex.transpose() * dp;
    }
    const auto dr = rotation_matrix_derivatives(cam.rotation);
    for (int i = 0; i < 3; ++i) {
        out.d_rotation[i] = (d_r.array() * dr[i].array()).sum();
    }
    return out;
}

RgbLoss loss_rgb(const RenderOutput& rendered, const Image& source, const SegMask* mask)
{
    const Image& color = rendered.color;
    if (color.width() != source.width() || color.height() != source.height() || source.channels() != 3 ||
        color.channels() != 3) {
        throw DimensionError("rendered and source images must be 3-channel images of equal size");
    }
    if (mask != nullptr && (mask->width() != source.width() || mask->height() != source.height() ||
                            mask->channels() != 1)) {
        throw DimensionError("segmentation mask must be single-channel and match the source image size");
    }
    RgbLoss out;
    out.gradient = Image(color.width(), color.height(), 3, 0.0f);
    for (int y = 0; y < color.height(); ++y) {
        for (int x = 0; x < color.width(); ++x) {
            if (rendered.covered(x, y) && (mask == nullptr || mask->at(x, y) > 0.5f)) {
                ++out.pixel_count;
            }
        }
    }
    if (out.pixel_count == 0) {
        return out;
    }
    const double inv = 1.0 / (3.0 * static_cast<double>(out.pixel_count));
    double sum = 0.0;
    for (int y = 0; y < color.height(); ++y) {
        for (int x = 0; x < color.width(); ++x) {
            if (!rendered.covered(x, y) || (mask != nullptr && mask->at(x, y) <= 0.5f)) {
                continue;
            }
            for (int c = 0; c < 3; ++c) {
                const double d = static_cast<double>(color.at(x, y, c)) - source.at(x, y, c);
                sum += std::abs(d);
                out.gradient.at(x, y, c) = static_cast<float>(d > 0.0 ? inv : (d < 0.0 ? -inv : 0.0));
            }
        }
    }
    out.value = sum * inv;
    return out;
}

IdentityLoss loss_identity(const Image& rendered, const Image& source, EmbeddingProvider* provider)
{
    if (provider == nullptr) {
        return {};
    }
    const Image pair[2] = {rendered, source};
    const auto emb = provider->embed(pair);
    if (emb.size() != 2 || emb[0].size() != emb[1].size() || emb[0].size() == 0) {
        throw ConfigError("embedding provider returned inconsistent vectors");
    }
    return {(emb[0] - emb[1]).squaredNorm(), true};
}

RegularizerTerm regularizer(const Eigen::VectorXd& identity, std::span<const Eigen::VectorXd> expressions,
                            const Eigen::VectorXd& texture, const RegularizerWeights& weights)
{
    RegularizerTerm out;
    out.value = weights.identity * identity.squaredNorm() + weights.texture * texture.squaredNorm();
    out.d_identity = 2.0 * weights.identity * identity;
    out.d_texture = 2.0 * weights.texture * texture;
    for (const auto& e : expressions) {
        out.value += weights.expression * e.squaredNorm();
        out.d_expressions.push_back(2.0 * weights.expression * e);
    }
    return out;
}

} // namespace avatar
