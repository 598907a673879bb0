// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "avatar/image.hpp"
#include "avatar/mesh.hpp"
#include "avatar/model.hpp"

#include <Eigen/Core>

#include <vector>

namespace avatar {

struct ShapeParams
{
    Eigen::VectorXd identity;
    Eigen::VectorXd expression;

    static ShapeParams zeros(const MorphableModel& model);
};

struct TextureParams
{
    Eigen::VectorXd coefficients;

    static TextureParams zeros(const MorphableModel& model);
};

/// mean_shape + identity_basis * identity + expression_basis * expression, with the model topology.
Mesh decode_shape(const MorphableModel& model, const ShapeParams& params);

/// Unclamped texture vector mean + texture_basis * coefficients (layout of Image data).
Eigen::VectorXd decode_texture_linear(const MorphableModel& model, const TextureParams& params);

/// Clamped texture; validity is 1 where the model's UV layout covers a texel center, 0 elsewhere.
UVMap decode_texture(const MorphableModel& model, const TextureParams& params);

/// Decoded vertex positions at landmark_vertex_ids, in landmark order.
std::vector<Eigen::Vector3d> landmark_positions(const MorphableModel& model, const ShapeParams& params);

/// Texels whose centers fall inside some UV triangle (1) or not (0).
Image uv_coverage(const std::vector<Eigen::Vector2d>& uv_coords, const std::vector<Triangle>& uv_triangles,
                  int width, int height);

} // namespace avatar
