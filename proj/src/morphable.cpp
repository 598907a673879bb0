// SPDX-License-Identifier: Apache-2.0
#include "avatar/morphable.hpp"

#include "avatar/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace avatar {

namespace {

void check_length(Eigen::Index got, int expected, const char* what)
{
    if (got != expected) {
        throw DimensionError(std::string(what) + " has length " + std::to_string(got) + ", model expects " +
                             std::to_string(expected));
    }
}

void check_shape_params(const MorphableModel& model, const ShapeParams& p)
{
    check_length(p.identity.size(), model.identity_count(), "identity vector");
    check_length(p.expression.size(), model.expression_count(), "expression vector");
}

} // namespace

ShapeParams ShapeParams::zeros(const MorphableModel& model)
{
    return {Eigen::VectorXd::Zero(model.identity_count()), Eigen::VectorXd::Zero(model.expression_count())};
}

TextureParams TextureParams::zeros(const MorphableModel& model)
{
    return {Eigen::VectorXd::Zero(model.texture_count())};
}

Mesh decode_shape(const MorphableModel& model, const ShapeParams& params)
{
    check_shape_params(model, params);
    const Eigen::VectorXd flat = model.mean_shape.cast<double>() +
                                 model.identity_basis.cast<double>() * params.identity +
                                 model.expression_basis.cast<double>() * params.expression;
    Mesh mesh;
    const int v = model.vertex_count();
    mesh.vertices.resize(static_cast<std::size_t>(v));
    for (int i = 0; i < v; ++i) {
        mesh.vertices[static_cast<std::size_t>(i)] = flat.segment<3>(3 * i);
    }
    mesh.triangles = model.triangles;
    mesh.uv_coords = model.uv_coords;
    mesh.uv_triangles = model.uv_triangles;
    return mesh;
}

Eigen::VectorXd decode_texture_linear(const MorphableModel& model, const TextureParams& params)
{
    check_length(params.coefficients.size(), model.texture_count(), "texture vector");
    const Eigen::Map<const Eigen::VectorXf> mean(model.mean_texture.data().data(),
                                                 static_cast<Eigen::Index>(model.mean_texture.size()));
    // The texture basis is large; keep the product in single precision.
    const Eigen::VectorXf offset = model.texture_basis * params.coefficients.cast<float>();
    return mean.cast<double>() + offset.cast<double>();
}

UVMap decode_texture(const MorphableModel& model, const TextureParams& params)
{
    const Eigen::VectorXd linear = decode_texture_linear(model, params);
    const int w = model.mean_texture.width();
    const int h = model.mean_texture.height();
    Image color(w, h, 3);
    auto out = color.data();
    for (Eigen::Index i = 0; i < linear.size(); ++i) {
        out[static_cast<std::size_t>(i)] = static_cast<float>(std::clamp(linear[i], 0.0, 1.0));
    }
    Image validity = uv_coverage(model.uv_coords, model.uv_triangles, w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (validity.at(x, y) == 0.0f) {
                for (int c = 0; c < 3; ++c) {
                    color.at(x, y, c) = 0.0f;
                }
            }
        }
    }
    return UVMap{std::move(color), std::move(validity)};
}

std::vector<Eigen::Vector3d> landmark_positions(const MorphableModel& model, const ShapeParams& params)
{
    check_shape_params(model, params);
    std::vector<Eigen::Vector3d> out;
    out.reserve(model.landmark_vertex_ids.size());
    const Eigen::MatrixXf& id = model.identity_basis;
    const Eigen::MatrixXf& ex = model.expression_basis;
    for (int vid : model.landmark_vertex_ids) {
        const Eigen::Index r = 3 * vid;
        Eigen::Vector3d p = model.mean_shape.segment<3>(r).cast<double>();
        p += id.middleRows<3>(r).cast<double>() * params.identity;
        p += ex.middleRows<3>(r).cast<double>() * params.expression;
        out.push_back(p);
    }
    return out;
}

Image uv_coverage(const std::vector<Eigen::Vector2d>& uv_coords, const std::vector<Triangle>& uv_triangles, int width,
                  int height)
{
    Image mask(width, height, 1, 0.0f);
    constexpr double kEdgeSlack = 1e-9;
    for (const auto& tri : uv_triangles) {
        const Eigen::Vector2d a(uv_coords[tri[0]].x() * width, uv_coords[tri[0]].y() * height);
        const Eigen::Vector2d b(uv_coords[tri[1]].x() * width, uv_coords[tri[1]].y() * height);
        const Eigen::Vector2d c(uv_coords[tri[2]].x() * width, uv_coords[tri[2]].y() * height);
        const double area = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
        if (std::abs(area) < 1e-12) {
            continue;
        }
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x(), b.x(), c.x()}) - 0.5)));
        const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::max({a.x(), b.x(), c.x()}) - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y(), b.y(), c.y()}) - 0.5)));
        const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::max({a.y(), b.y(), c.y()}) - 0.5)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const Eigen::Vector2d p(x + 0.5, y + 0.5);
                const double w0 = ((b - p).x() * (c - p).y() - (b - p).y() * (c - p).x()) / area;
                const double w1 = ((c - p).x() * (a - p).y() - (c - p).y() * (a - p).x()) / area;
                const double w2 = 1.0 - w0 - w1;
                if (w0 >= -kEdgeSlack && w1 >= -kEdgeSlack && w2 >= -kEdgeSlack) {
                    mask.at(x, y) = 1.0f;
                }
            }
        }
    }
    return mask;
}

} // namespace avatar
