// SPDX-License-Identifier: Apache-2.0
#include "avatar/render.hpp"

#include "avatar/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>

namespace avatar {

namespace {

constexpr double kY0 = 0.282094791773878;
constexpr double kY1 = 0.488602511902920;
constexpr double kY2 = 1.092548430592079;
constexpr double kY20 = 0.315391565252520;
constexpr double kY22 = 0.546274215296040;

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b)
{
    return a.x() * b.y() - a.y() * b.x();
}

// Adds g * d(cross2(a, b)) to the gradients of a and b.
void cross2_backward(const Eigen::Vector2d& a, const Eigen::Vector2d& b, double g, Eigen::Vector2d& da,
                     Eigen::Vector2d& db)
{
    da += g * Eigen::Vector2d(b.y(), -b.x());
    db += g * Eigen::Vector2d(-a.y(), a.x());
}

// Camera-frame geometry shared by the forward and backward passes.
struct Geometry
{
    Eigen::Matrix3d rotation;
    std::vector<Eigen::Vector3d> rotated;
    std::vector<Eigen::Vector2d> pixels;
    std::vector<Eigen::Vector3d> normal_sums; // unnormalized area-weighted
    std::vector<Eigen::Vector3d> normals;
};

Geometry build_geometry(const Mesh& mesh, const CameraParams& camera)
{
    Geometry g;
    g.rotation = rotation_matrix(camera.rotation);
    g.rotated.reserve(mesh.vertices.size());
    g.pixels.reserve(mesh.vertices.size());
    for (const auto& v : mesh.vertices) {
        const Eigen::Vector3d w = g.rotation * v;
        g.rotated.push_back(w);
        g.pixels.emplace_back(camera.scale * w.head<2>() + camera.translation);
    }
    g.normal_sums.assign(mesh.vertices.size(), Eigen::Vector3d::Zero());
    for (const auto& tri : mesh.triangles) {
        const Eigen::Vector3d face =
            (g.rotated[tri[1]] - g.rotated[tri[0]]).cross(g.rotated[tri[2]] - g.rotated[tri[0]]);
        for (int idx : tri) {
            g.normal_sums[idx] += face;
        }
    }
    g.normals.resize(mesh.vertices.size());
    for (std::size_t i = 0; i < g.normals.size(); ++i) {
        const double len = g.normal_sums[i].norm();
        g.normals[i] = len > 0.0 ? Eigen::Vector3d(g.normal_sums[i] / len) : Eigen::Vector3d::Zero();
    }
    return g;
}

struct Barycentric
{
    std::array<double, 3> edge{}; // sub-triangle signed areas E_i
    double area = 0.0;            // sum of E_i
    std::array<double, 3> weight{};
};

Barycentric barycentric(const Eigen::Vector2d& q0, const Eigen::Vector2d& q1, const Eigen::Vector2d& q2,
                        const Eigen::Vector2d& p)
{
    Barycentric b;
    b.edge[0] = cross2(q1 - p, q2 - p);
    b.edge[1] = cross2(q2 - p, q0 - p);
    b.edge[2] = cross2(q0 - p, q1 - p);
    b.area = b.edge[0] + b.edge[1] + b.edge[2];
    for (int i = 0; i < 3; ++i) {
        b.weight[i] = b.edge[i] / b.area;
    }
    return b;
}

// Clamp-to-edge bilinear lookup, with derivatives in texel units.
struct TexelSample
{
    int x0 = 0, x1 = 0, y0 = 0, y1 = 0;
    double fx = 0.0, fy = 0.0;
    bool clamped_x = false, clamped_y = false;
};

TexelSample texel_sample(const Image& tex, const Eigen::Vector2d& uv)
{
    TexelSample s;
    double x = uv.x() * tex.width() - 0.5;
    double y = uv.y() * tex.height() - 0.5;
    if (x <= 0.0 || x >= tex.width() - 1) {
        s.clamped_x = true;
        x = std::clamp(x, 0.0, static_cast<double>(tex.width() - 1));
    }
    if (y <= 0.0 || y >= tex.height() - 1) {
        s.clamped_y = true;
        y = std::clamp(y, 0.0, static_cast<double>(tex.height() - 1));
    }
    s.x0 = static_cast<int>(std::floor(x));
    s.y0 = static_cast<int>(std::floor(y));
    s.x1 = std::min(s.x0 + 1, tex.width() - 1);
    s.y1 = std::min(s.y0 + 1, tex.height() - 1);
    s.fx = x - s.x0;
    s.fy = y - s.y0;
    return s;
}

double sample_channel(const Image& tex, const TexelSample& s, int c)
{
    const double top = (1.0 - s.fx) * tex.at(s.x0, s.y0, c) + s.fx * tex.at(s.x1, s.y0, c);
    const double bottom = (1.0 - s.fx) * tex.at(s.x0, s.y1, c) + s.fx * tex.at(s.x1, s.y1, c);
    return (1.0 - s.fy) * top + s.fy * bottom;
}

// Everything the shading of one covered pixel depends on.
struct PixelState
{
    int tri = 0;
    Barycentric bary;
    Eigen::Vector2d uv;
    TexelSample texel;
    Eigen::Vector3d normal_sum;
    double normal_len = 0.0;
    Eigen::Vector3d normal;
    std::array<double, kShCoefficients> basis{};
    std::array<double, 3> albedo{};
    std::array<double, 3> irradiance{};
    std::array<double, 3> value{}; // before clamping
};

PixelState evaluate_pixel(const Geometry& g, const Mesh& mesh, const Image& tex, const Illumination& illum, int tri,
                          int x, int y)
{
    PixelState s;
    s.tri = tri;
    const auto& t = mesh.triangles[static_cast<std::size_t>(tri)];
    const auto& ut = mesh.uv_triangles[static_cast<std::size_t>(tri)];
    s.bary = barycentric(g.pixels[t[0]], g.pixels[t[1]], g.pixels[t[2]], Eigen::Vector2d(x + 0.5, y + 0.5));
    const auto& b = s.bary.weight;
    s.uv = b[0] * mesh.uv_coords[ut[0]] + b[1] * mesh.uv_coords[ut[1]] + b[2] * mesh.uv_coords[ut[2]];
    s.texel = texel_sample(tex, s.uv);
    s.normal_sum = b[0] * g.normals[t[0]] + b[1] * g.normals[t[1]] + b[2] * g.normals[t[2]];
    s.normal_len = s.normal_sum.norm();
    s.normal = s.normal_len > 0.0 ? Eigen::Vector3d(s.normal_sum / s.normal_len) : Eigen::Vector3d(0.0, 0.0, -1.0);
    s.basis = sh_basis(s.normal);
    for (int c = 0; c < 3; ++c) {
        const int tc = tex.channels() == 1 ? 0 : c;
        s.albedo[c] = sample_channel(tex, s.texel, tc);
        double irr = 0.0;
        for (int k = 0; k < kShCoefficients; ++k) {
            irr += illum.coefficient(c, k) * s.basis[k];
        }
        s.irradiance[c] = irr;
        s.value[c] = s.albedo[c] * irr;
    }
    return s;
}

void check_raster(const RenderOutput& raster)
{
    const auto n = static_cast<std::size_t>(raster.width) * static_cast<std::size_t>(raster.height);
    if (raster.coverage.size() != n || raster.triangle_id.size() != n) {
        throw DimensionError("render buffers do not match the raster dimensions");
    }
}

} // namespace

Illumination Illumination::ambient(double level)
{
    Illumination illum;
    for (int c = 0; c < 3; ++c) {
        illum.coefficient(c, 0) = level / kY0;
    }
    return illum;
}

Illumination Illumination::directional(double ambient_level, double strength, const Eigen::Vector3d& direction)
{
    Illumination illum = ambient(ambient_level);
    const Eigen::Vector3d d = direction.normalized();
    for (int c = 0; c < 3; ++c) {
        // Y_1 ordering is (y, z, x).
        illum.coefficient(c, 1) = strength * d.y() / kY1;
        illum.coefficient(c, 2) = strength * d.z() / kY1;
        illum.coefficient(c, 3) = strength * d.x() / kY1;
    }
    return illum;
}

std::array<double, kShCoefficients> sh_basis(const Eigen::Vector3d& n)
{
    const double x = n.x(), y = n.y(), z = n.z();
    return {kY0,
            kY1 * y,
            kY1 * z,
            kY1 * x,
            kY2 * x * y,
            kY2 * y * z,
            kY20 * (3.0 * z * z - 1.0),
            kY2 * x * z,
            kY22 * (x * x - y * y)};
}

std::array<Eigen::Vector3d, kShCoefficients> sh_basis_gradient(const Eigen::Vector3d& n)
{
    const double x = n.x(), y = n.y(), z = n.z();
    return {Eigen::Vector3d::Zero(),
            Eigen::Vector3d(0.0, kY1, 0.0),
            Eigen::Vector3d(0.0, 0.0, kY1),
            Eigen::Vector3d(kY1, 0.0, 0.0),
            Eigen::Vector3d(kY2 * y, kY2 * x, 0.0),
            Eigen::Vector3d(0.0, kY2 * z, kY2 * y),
            Eigen::Vector3d(0.0, 0.0, 6.0 * kY20 * z),
            Eigen::Vector3d(kY2 * z, 0.0, kY2 * x),
            Eigen::Vector3d(2.0 * kY22 * x, -2.0 * kY22 * y, 0.0)};
}

RenderOutput rasterize(const Mesh& mesh, const CameraParams& camera, int width, int height)
{
    if (width <= 0 || height <= 0) {
        throw DimensionError("render target must have positive dimensions");
    }
    camera.validate();
    mesh.validate();
    RenderOutput out;
    out.width = width;
    out.height = height;
    out.camera = camera;
    const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    out.coverage.assign(n, 0);
    out.depth.assign(n, std::numeric_limits<float>::infinity());
    out.triangle_id.assign(n, kNoTriangle);
    out.barycentrics.assign(n, {0.0f, 0.0f, 0.0f});
    std::vector<double> zbuf(n, std::numeric_limits<double>::infinity());

    const Geometry g = build_geometry(mesh, camera);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Eigen::Vector2d& q0 = g.pixels[tri[0]];
        const Eigen::Vector2d& q1 = g.pixels[tri[1]];
        const Eigen::Vector2d& q2 = g.pixels[tri[2]];
        const double area = cross2(q1 - q0, q2 - q0);
        // Negative screen area is front-facing (normal toward -z); zero area is skipped.
        if (!(area < -1e-12)) {
            continue;
        }
        const double minx = std::min({q0.x(), q1.x(), q2.x()});
        const double maxx = std::max({q0.x(), q1.x(), q2.x()});
        const double miny = std::min({q0.y(), q1.y(), q2.y()});
        const double maxy = std::max({q0.y(), q1.y(), q2.y()});
        const int x0 = std::max(0, static_cast<int>(std::ceil(minx - 0.5)));
        const int x1 = std::min(width - 1, static_cast<int>(std::floor(maxx - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::ceil(miny - 0.5)));
        const int y1 = std::min(height - 1, static_cast<int>(std::floor(maxy - 0.5)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const Barycentric b = barycentric(q0, q1, q2, Eigen::Vector2d(x + 0.5, y + 0.5));
                if (b.weight[0] < 0.0 || b.weight[1] < 0.0 || b.weight[2] < 0.0) {
                    continue;
                }
                const double z = b.weight[0] * g.rotated[tri[0]].z() + b.weight[1] * g.rotated[tri[1]].z() +
                                 b.weight[2] * g.rotated[tri[2]].z();
                const std::size_t p = out.pixel(x, y);
                if (z < zbuf[p]) {
                    zbuf[p] = z;
                    out.depth[p] = static_cast<float>(z);
                    out.coverage[p] = 1;
                    out.triangle_id[p] = static_cast<int>(t);
                    out.barycentrics[p] = {static_cast<float>(b.weight[0]), static_cast<float>(b.weight[1]),
                                           static_cast<float>(b.weight[2])};
                }
            }
        }
    }
    return out;
}

Image shade(const RenderOutput& raster, const Mesh& mesh, const UVMap& texture, const Illumination& illumination,
            const ShadeOptions& options)
{
    check_raster(raster);
    const Image& tex = texture.color;
    if (tex.empty()) {
        throw DimensionError("cannot shade with an empty texture");
    }
    const Geometry g = build_geometry(mesh, raster.camera);
    Image out(raster.width, raster.height, 3, options.background);
    for (int y = 0; y < raster.height; ++y) {
        for (int x = 0; x < raster.width; ++x) {
            const int tri = raster.triangle_id[raster.pixel(x, y)];
            if (tri == kNoTriangle) {
                continue;
            }
            const PixelState s = evaluate_pixel(g, mesh, tex, illumination, tri, x, y);
            for (int c = 0; c < 3; ++c) {
                out.at(x, y, c) = static_cast<float>(std::clamp(s.value[c], 0.0, 1.0));
            }
        }
    }
    return out;
}

RenderOutput render(const Mesh& mesh, const CameraParams& camera, const UVMap& texture,
                    const Illumination& illumination, int width, int height, const ShadeOptions& options)
{
    RenderOutput out = rasterize(mesh, camera, width, height);
    out.color = shade(out, mesh, texture, illumination, options);
    return out;
}

RenderGradients render_backward(const RenderOutput& raster, const Mesh& mesh, const UVMap& texture,
                                const Illumination& illumination, const Image& output_gradient)
{
    check_raster(raster);
    if (output_gradient.width() != raster.width || output_gradient.height() != raster.height ||
        output_gradient.channels() != 3) {
        throw DimensionError("output gradient must be a 3-channel image of the render size");
    }
    const Image& tex = texture.color;
    const Geometry g = build_geometry(mesh, raster.camera);
    const std::size_t nv = mesh.vertices.size();

    RenderGradients grad;
    grad.vertices.assign(nv, Eigen::Vector3d::Zero());
    grad.texture.assign(tex.size(), 0.0);
    std::vector<Eigen::Vector2d> d_pixels(nv, Eigen::Vector2d::Zero());
    std::vector<Eigen::Vector3d> d_normals(nv, Eigen::Vector3d::Zero());

    for (int y = 0; y < raster.height; ++y) {
        for (int x = 0; x < raster.width; ++x) {
            const int tri = raster.triangle_id[raster.pixel(x, y)];
            if (tri == kNoTriangle) {
                continue;
            }
            std::array<double, 3> gc{};
            bool any = false;
            for (int c = 0; c < 3; ++c) {
                gc[c] = output_gradient.at(x, y, c);
                any = any || gc[c] != 0.0;
            }
            if (!any) {
                continue;
            }
            const PixelState s = evaluate_pixel(g, mesh, tex, illumination, tri, x, y);
            std::array<double, 3> d_albedo{};
            std::array<double, 3> d_irr{};
            for (int c = 0; c < 3; ++c) {
                if (s.value[c] < 0.0 || s.value[c] > 1.0) {
                    gc[c] = 0.0;
                }
                d_albedo[c] = gc[c] * s.irradiance[c];
                d_irr[c] = gc[c] * s.albedo[c];
            }

            // Illumination and normal.
            Eigen::Vector3d d_normal = Eigen::Vector3d::Zero();
            const auto basis_grad = sh_basis_gradient(s.normal);
            for (int k = 0; k < kShCoefficients; ++k) {
                double d_basis = 0.0;
                for (int c = 0; c < 3; ++c) {
                    grad.sh[static_cast<std::size_t>(c * kShCoefficients + k)] += d_irr[c] * s.basis[k];
                    d_basis += d_irr[c] * illumination.coefficient(c, k);
                }
                d_normal += d_basis * basis_grad[k];
            }
            std::array<double, 3> d_bary{};
            const auto& t = mesh.triangles[static_cast<std::size_t>(tri)];
            const auto& ut = mesh.uv_triangles[static_cast<std::size_t>(tri)];
            if (s.normal_len > 0.0) {
                const Eigen::Vector3d d_sum = (d_normal - s.normal * s.normal.dot(d_normal)) / s.normal_len;
                for (int i = 0; i < 3; ++i) {
                    d_normals[t[i]] += s.bary.weight[i] * d_sum;
                    d_bary[i] += g.normals[t[i]].dot(d_sum);
                }
            }

            // Texture sampling.
            const TexelSample& ts = s.texel;
            const double w00 = (1.0 - ts.fx) * (1.0 - ts.fy);
            const double w10 = ts.fx * (1.0 - ts.fy);
            const double w01 = (1.0 - ts.fx) * ts.fy;
            const double w11 = ts.fx * ts.fy;
            Eigen::Vector2d d_uv = Eigen::Vector2d::Zero();
            for (int c = 0; c < 3; ++c) {
                const int tc = tex.channels() == 1 ? 0 : c;
                const double da = d_albedo[c];
                if (da == 0.0) {
                    continue;
                }
                grad.texture[tex.index(ts.x0, ts.y0, tc)] += w00 * da;
                grad.texture[tex.index(ts.x1, ts.y0, tc)] += w10 * da;
                grad.texture[tex.index(ts.x0, ts.y1, tc)] += w01 * da;
                grad.texture[tex.index(ts.x1, ts.y1, tc)] += w11 * da;
                const double t00 = tex.at(ts.x0, ts.y0, tc), t10 = tex.at(ts.x1, ts.y0, tc);
                const double t01 = tex.at(ts.x0, ts.y1, tc), t11 = tex.at(ts.x1, ts.y1, tc);
                if (!ts.clamped_x) {
                    const double dx = (1.0 - ts.fy) * (t10 - t00) + ts.fy * (t11 - t01);
                    d_uv.x() += da * dx * tex.width();
                }
                if (!ts.clamped_y) {
                    const double dy = (1.0 - ts.fx) * (t01 - t00) + ts.fx * (t11 - t10);
                    d_uv.y() += da * dy * tex.height();
                }
            }
            for (int i = 0; i < 3; ++i) {
                d_bary[i] += mesh.uv_coords[ut[i]].dot(d_uv);
            }

            // Barycentrics b_i = E_i / sum(E) back to the projected vertices.
            double weighted = 0.0;
            for (int i = 0; i < 3; ++i) {
                weighted += s.bary.weight[i] * d_bary[i];
            }
            std::array<double, 3> d_edge{};
            for (int i = 0; i < 3; ++i) {
                d_edge[i] = (d_bary[i] - weighted) / s.bary.area;
            }
            const Eigen::Vector2d p(x + 0.5, y + 0.5);
            const Eigen::Vector2d a0 = g.pixels[t[0]] - p;
            const Eigen::Vector2d a1 = g.pixels[t[1]] - p;
            const Eigen::Vector2d a2 = g.pixels[t[2]] - p;
            cross2_backward(a1, a2, d_edge[0], d_pixels[t[1]], d_pixels[t[2]]);
            cross2_backward(a2, a0, d_edge[1], d_pixels[t[2]], d_pixels[t[0]]);
            cross2_backward(a0, a1, d_edge[2], d_pixels[t[0]], d_pixels[t[1]]);
        }
    }

    // Vertex normals back to the camera-frame positions through the face cross products.
    std::vector<Eigen::Vector3d> d_rotated(nv, Eigen::Vector3d::Zero());
    std::vector<Eigen::Vector3d> d_sums(nv, Eigen::Vector3d::Zero());
    for (std::size_t i = 0; i < nv; ++i) {
        const double len = g.normal_sums[i].norm();
        if (len > 0.0) {
            d_sums[i] = (d_normals[i] - g.normals[i] * g.normals[i].dot(d_normals[i])) / len;
        }
    }
    for (const auto& tri : mesh.triangles) {
        const Eigen::Vector3d d_face = d_sums[tri[0]] + d_sums[tri[1]] + d_sums[tri[2]];
        if (d_face.isZero(0.0)) {
            continue;
        }
        const Eigen::Vector3d e1 = g.rotated[tri[1]] - g.rotated[tri[0]];
        const Eigen::Vector3d e2 = g.rotated[tri[2]] - g.rotated[tri[0]];
        const Eigen::Vector3d d_e1 = e2.cross(d_face);
        const Eigen::Vector3d d_e2 = d_face.cross(e1);
        d_rotated[tri[1]] += d_e1;
        d_rotated[tri[2]] += d_e2;
        d_rotated[tri[0]] -= d_e1 + d_e2;
    }

    // Projection.
    const CameraParams& cam = raster.camera;
    Eigen::Matrix3d d_rot = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < nv; ++i) {
        const Eigen::Vector2d& dq = d_pixels[i];
        d_rotated[i].head<2>() += cam.scale * dq;
        grad.scale += dq.dot(g.rotated[i].head<2>());
        grad.translation += dq;
        grad.vertices[i] = g.rotation.transpose() * d_rotated[i];
        d_rot += d_rotated[i] * mesh.vertices[i].transpose();
    }
    const auto d_r = rotation_matrix_derivatives(cam.rotation);
    for (int i = 0; i < 3; ++i) {
        grad.rotation[i] = (d_rot.array() * d_r[i].array()).sum();
    }
    return grad;
}

} // namespace avatar
