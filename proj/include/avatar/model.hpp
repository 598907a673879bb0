// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "avatar/image.hpp"
#include "avatar/mesh.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <vector>

namespace avatar {

/**
 * Linear 3D morphable model.
 *
 * Shape vectors are laid out as (x0, y0, z0, x1, y1, z1, ...). Texture vectors follow the
 * interleaved row-major layout of Image, i.e. index (y * width + x) * 3 + c.
 */
struct MorphableModel
{
    Eigen::VectorXf mean_shape;       // 3V
    Eigen::MatrixXf identity_basis;   // 3V x K_id
    Eigen::MatrixXf expression_basis; // 3V x K_exp
    Image mean_texture;               // uv_width x uv_height x 3
    Eigen::MatrixXf texture_basis;    // (uv texels * 3) x K_tex
    std::vector<int> landmark_vertex_ids;
    std::vector<Triangle> triangles;
    std::vector<Eigen::Vector2d> uv_coords;
    std::vector<Triangle> uv_triangles;

    int vertex_count() const noexcept { return static_cast<int>(mean_shape.size() / 3); }
    int identity_count() const noexcept { return static_cast<int>(identity_basis.cols()); }
    int expression_count() const noexcept { return static_cast<int>(expression_basis.cols()); }
    int texture_count() const noexcept { return static_cast<int>(texture_basis.cols()); }
    int landmark_count() const noexcept { return static_cast<int>(landmark_vertex_ids.size()); }

    /// Cross-checks every dimension; throws ValidationError on the first mismatch.
    void validate() const;
};

/**
 * Container layout ("AVF1", all integers and floats little-endian, 4 bytes wide):
 *
 *   char[4]  magic "AVF1"
 *   u32      version (1)
 *   u32 x 9  V, K_id, K_exp, K_tex, uv_width, uv_height, landmark count, triangle count, uv coord count
 *   u32      section count (9)
 *
 * followed by sections in this order, each with a 24-byte descriptor
 * (char[16] zero-padded name, u32 rows, u32 cols) and rows*cols row-major elements:
 *
 *   mean_shape        f32  V x 3
 *   identity_basis    f32  3V x K_id
 *   expression_basis  f32  3V x K_exp
 *   mean_texture      f32  (uv_width*uv_height) x 3
 *   texture_basis     f32  (uv_width*uv_height*3) x K_tex
 *   landmark_ids      u32  landmarks x 1
 *   triangles         u32  triangles x 3
 *   uv_coords         f32  uv coords x 2
 *   uv_triangles      u32  triangles x 3
 */
MorphableModel load_model(const std::filesystem::path& path);
void save_model(const MorphableModel& model, const std::filesystem::path& path);

} // namespace avatar
