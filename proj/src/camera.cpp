// SPDX-License-Identifier: Apache-2.0
#include "avatar/camera.hpp"

#include "avatar/error.hpp"

#include <Eigen/Geometry>

#include <cmath>

namespace avatar {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& v)
{
    Eigen::Matrix3d m;
    m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
    return m;
}

constexpr double kSmallAngle = 1e-10;

} // namespace

void CameraParams::validate() const
{
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw DimensionError("camera scale must be positive and finite");
    }
    if (!rotation.allFinite() || !translation.allFinite()) {
        throw DimensionError("camera pose must be finite");
    }
}

Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& axis_angle)
{
    const double theta = axis_angle.norm();
    if (theta < kSmallAngle) {
        return Eigen::Matrix3d::Identity() + skew(axis_angle);
    }
    return Eigen::AngleAxisd(theta, axis_angle / theta).toRotationMatrix();
}

std::array<Eigen::Matrix3d, 3> rotation_matrix_derivatives(const Eigen::Vector3d& axis_angle)
{
    std::array<Eigen::Matrix3d, 3> d;
    const double theta2 = axis_angle.squaredNorm();
    if (theta2 < kSmallAngle * kSmallAngle) {
        for (int i = 0; i < 3; ++i) {
            d[i] = skew(Eigen::Vector3d::Unit(i));
        }
        return d;
    }
    // dR/dv_i = (v_i [v]x + [v x ((I - R) e_i)]x) R / |v|^2
    const Eigen::Matrix3d r = rotation_matrix(axis_angle);
    const Eigen::Matrix3d i_minus_r = Eigen::Matrix3d::Identity() - r;
    for (int i = 0; i < 3; ++i) {
        const Eigen::Vector3d tmp = axis_angle.cross(i_minus_r.col(i));
        d[i] = (axis_angle[i] * skew(axis_angle) + skew(tmp)) * r / theta2;
    }
    return d;
}

Projection project(const std::vector<Eigen::Vector3d>& vertices, const CameraParams& camera)
{
    const Eigen::Matrix3d r = rotation_matrix(camera.rotation);
    Projection out;
    out.pixels.reserve(vertices.size());
    out.depth.reserve(vertices.size());
    for (const auto& v : vertices) {
        const Eigen::Vector3d w = r * v;
        out.pixels.emplace_back(camera.scale * w.head<2>() + camera.translation);
        out.depth.push_back(w.z());
    }
    return out;
}

} // namespace avatar
