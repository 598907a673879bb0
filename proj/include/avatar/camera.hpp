// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <array>
#include <vector>

namespace avatar {

/// Weak-perspective camera: pixel = scale * (R(rotation) * v).xy + translation, depth = (R * v).z.
struct CameraParams
{
    Eigen::Vector3d rotation = Eigen::Vector3d::Zero(); // axis-angle, radians
    Eigen::Vector2d translation = Eigen::Vector2d::Zero(); // pixels
    double scale = 1.0; // pixels per model unit

    void validate() const;
};

/// Rodrigues' formula.
Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& axis_angle);

/// Partial derivatives dR/d(axis_angle[i]) for i = 0, 1, 2.
std::array<Eigen::Matrix3d, 3> rotation_matrix_derivatives(const Eigen::Vector3d& axis_angle);

struct Projection
{
    std::vector<Eigen::Vector2d> pixels;
    std::vector<double> depth;
};

Projection project(const std::vector<Eigen::Vector3d>& vertices, const CameraParams& camera);

} // namespace avatar
