// SPDX-License-Identifier: Apache-2.0
#include "avatar/uvtex.hpp"

#include "avatar/error.hpp"
#include "avatar/imaging.hpp"
#include "avatar/render.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>

namespace avatar {

namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b)
{
    return a.x() * b.y() - a.y() * b.x();
}

std::array<double, 3> barycentric(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
                                  const Eigen::Vector2d& p)
{
    const double area = cross2(b - a, c - a);
    const double w0 = cross2(b - p, c - p) / area;
    const double w1 = cross2(c - p, a - p) / area;
    return {w0, w1, 1.0 - w0 - w1};
}

void sample_bilinear(const Image& img, double px, double py, double* out)
{
    const double x = std::clamp(px - 0.5, 0.0, static_cast<double>(img.width() - 1));
    const double y = std::clamp(py - 0.5, 0.0, static_cast<double>(img.height() - 1));
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int x1 = std::min(x0 + 1, img.width() - 1);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double fx = x - x0, fy = y - y0;
    for (int c = 0; c < img.channels(); ++c) {
        const double top = (1.0 - fx) * img.at(x0, y0, c) + fx * img.at(x1, y0, c);
        const double bottom = (1.0 - fx) * img.at(x0, y1, c) + fx * img.at(x1, y1, c);
        out[c] = (1.0 - fy) * top + fy * bottom;
    }
}

} // namespace

UVMap unwrap(const Image& source, const Mesh& mesh, const CameraParams& camera, const SegMask* mask,
             int uv_resolution)
{
    if (uv_resolution <= 0) {
        throw ArgumentError("uv resolution must be positive");
    }
    if (source.channels() != 3) {
        throw DimensionError("unwrap expects an RGB source image");
    }
    if (mask != nullptr && (mask->width() != source.width() || mask->height() != source.height())) {
        throw DimensionError("segmentation mask does not match the source image size");
    }
    mesh.validate();
    const int w = source.width(), h = source.height();
    const RenderOutput raster = rasterize(mesh, camera, w, h);

    const Eigen::Matrix3d r = rotation_matrix(camera.rotation);
    std::vector<Eigen::Vector3d> rotated;
    rotated.reserve(mesh.vertices.size());
    double zmin = std::numeric_limits<double>::infinity(), zmax = -zmin;
    for (const auto& v : mesh.vertices) {
        rotated.push_back(r * v);
        zmin = std::min(zmin, rotated.back().z());
        zmax = std::max(zmax, rotated.back().z());
    }
    const double eps = mesh.vertices.empty() ? 0.0 : 1e-3 * (zmax - zmin);
    Mesh rotated_mesh = mesh;
    rotated_mesh.vertices = rotated;
    const auto normals = vertex_normals(rotated_mesh);
    auto to_pixel = [&camera](const Eigen::Vector3d& p) -> Eigen::Vector2d {
        return camera.scale * p.head<2>() + camera.translation;
    };

    const int res = uv_resolution;
    UVMap out{Image(res, res, 3, 0.0f), Image(res, res, 1, 0.0f)};
    double sample[3];
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const auto& ut = mesh.uv_triangles[t];
        const Eigen::Vector3d face = (rotated[tri[1]] - rotated[tri[0]]).cross(rotated[tri[2]] - rotated[tri[0]]);
        if (!(face.z() < 0.0)) {
            continue; // back-facing or degenerate: its chart stays invalid
        }
        std::array<Eigen::Vector2d, 3> uv;
        for (int k = 0; k < 3; ++k) {
            uv[k] = Eigen::Vector2d(mesh.uv_coords[ut[k]].x() * res, mesh.uv_coords[ut[k]].y() * res);
        }
        if (std::abs(cross2(uv[1] - uv[0], uv[2] - uv[0])) < 1e-12) {
            continue;
        }
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min({uv[0].x(), uv[1].x(), uv[2].x()}) - 0.5)));
        const int x1 = std::min(res - 1, static_cast<int>(std::ceil(std::max({uv[0].x(), uv[1].x(), uv[2].x()}) - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({uv[0].y(), uv[1].y(), uv[2].y()}) - 0.5)));
        const int y1 = std::min(res - 1, static_cast<int>(std::ceil(std::max({uv[0].y(), uv[1].y(), uv[2].y()}) - 0.5)));
        for (int ty = y0; ty <= y1; ++ty) {
            for (int tx = x0; tx <= x1; ++tx) {
                const auto b = barycentric(uv[0], uv[1], uv[2], Eigen::Vector2d(tx + 0.5, ty + 0.5));
                if (b[0] < -1e-9 || b[1] < -1e-9 || b[2] < -1e-9) {
                    continue;
                }
                const Eigen::Vector3d p = b[0] * rotated[tri[0]] + b[1] * rotated[tri[1]] + b[2] * rotated[tri[2]];
                const Eigen::Vector2d q = to_pixel(p);
                if (q.x() < 0.0 || q.y() < 0.0 || q.x() >= w || q.y() >= h) {
                    continue;
                }
                const int px = static_cast<int>(q.x());
                const int py = static_cast<int>(q.y());
                const int occluder = raster.triangle_id[raster.pixel(px, py)];
                const auto& ot = mesh.triangles[static_cast<std::size_t>(std::max(occluder, 0))];
                const bool adjacent = std::any_of(ot.begin(), ot.end(), [&tri](int a) {
                    return a == tri[0] || a == tri[1] || a == tri[2];
                });
                if (occluder != kNoTriangle && !adjacent) {
                    // Depth of the visible surface at the exact projected point.
                    const auto ob = barycentric(to_pixel(rotated[ot[0]]), to_pixel(rotated[ot[1]]),
                                                to_pixel(rotated[ot[2]]), q);
                    const double z_visible =
                        ob[0] * rotated[ot[0]].z() + ob[1] * rotated[ot[1]].z() + ob[2] * rotated[ot[2]].z();
                    if (p.z() > z_visible + eps) {
                        continue;
                    }
                }
                Eigen::Vector3d n = b[0] * normals[tri[0]] + b[1] * normals[tri[1]] + b[2] * normals[tri[2]];
                const double len = n.norm();
                const double facing = len > 0.0 ? std::max(0.0, -n.z() / len) : 0.0;
                const double mask_value = mask != nullptr ? std::clamp(mask->at(px, py), 0.0f, 1.0f) : 1.0;
                const double validity = facing * mask_value;
                if (validity <= 0.0 || validity <= out.validity.at(tx, ty)) {
                    continue;
                }
                sample_bilinear(source, q.x(), q.y(), sample);
                out.validity.at(tx, ty) = static_cast<float>(validity);
                for (int c = 0; c < 3; ++c) {
                    out.color.at(tx, ty, c) = static_cast<float>(sample[c]);
                }
            }
        }
    }
    return out;
}

Image inpaint(const Image& color, const Image& known)
{
    const int w = color.width(), h = color.height(), ch = color.channels();
    Image out = color;
    std::vector<std::uint8_t> state(color.texel_count(), 0); // 1 known, 2 filled
    std::size_t unknown = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const bool k = known.at(x, y) != 0.0f;
            state[static_cast<std::size_t>(y) * w + x] = k ? 1 : 0;
            unknown += k ? 0 : 1;
        }
    }
    if (unknown == 0) {
        return out;
    }
    if (unknown == color.texel_count()) {
        return Image(w, h, ch, 0.0f);
    }
    auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };

    // Grow inward from the known region one ring at a time.
    std::vector<std::size_t> ring;
    std::vector<float> values(static_cast<std::size_t>(ch));
    while (unknown > 0) {
        ring.clear();
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (state[idx(x, y)] != 0) {
                    continue;
                }
                std::fill(values.begin(), values.end(), 0.0f);
                int count = 0;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h || state[idx(nx, ny)] == 0) {
                            continue;
                        }
                        for (int c = 0; c < ch; ++c) {
                            values[static_cast<std::size_t>(c)] += out.at(nx, ny, c);
                        }
                        ++count;
                    }
                }
                if (count == 0) {
                    continue;
                }
                for (int c = 0; c < ch; ++c) {
                    out.at(x, y, c) = values[static_cast<std::size_t>(c)] / static_cast<float>(count);
                }
                ring.push_back(idx(x, y));
            }
        }
        for (std::size_t i : ring) {
            state[i] = 2;
        }
        unknown -= ring.size();
    }

    // Relax the filled texels with 3x3 averaging until they settle.
    constexpr int kMaxSweeps = 500;
    constexpr float kStable = 1e-5f;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        float max_change = 0.0f;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (state[idx(x, y)] != 2) {
                    continue;
                }
                std::fill(values.begin(), values.end(), 0.0f);
                int count = 0;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h) {
                            continue;
                        }
                        for (int c = 0; c < ch; ++c) {
                            values[static_cast<std::size_t>(c)] += out.at(nx, ny, c);
                        }
                        ++count;
                    }
                }
                for (int c = 0; c < ch; ++c) {
                    const float v = values[static_cast<std::size_t>(c)] / static_cast<float>(count);
                    max_change = std::max(max_change, std::abs(v - out.at(x, y, c)));
                    out.at(x, y, c) = v;
                }
            }
        }
        if (max_change < kStable) {
            break;
        }
    }
    return out;
}

UVMap blend_multiview(std::span<const UVMap> maps)
{
    if (maps.empty()) {
        throw ArgumentError("blend needs at least one UV map");
    }
    const Image& first = maps.front().color;
    for (const UVMap& m : maps) {
        if (!m.color.same_shape(first) || m.validity.width() != first.width() || m.validity.height() != first.height() ||
            m.validity.channels() != 1) {
            throw DimensionError("all UV maps must share one resolution");
        }
    }
    const int w = first.width(), h = first.height(), ch = first.channels();
    const double sigma = w / 64.0;
    std::vector<double> weight_sum(first.texel_count(), 0.0);
    std::vector<double> color_sum(first.size(), 0.0);
    for (const UVMap& m : maps) {
        const Image feathered = gaussian_blur(m.validity, sigma);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (m.validity.at(x, y) <= 0.0f) {
                    continue;
                }
                const double wt = feathered.at(x, y);
                const std::size_t t = static_cast<std::size_t>(y) * w + x;
                weight_sum[t] += wt;
                for (int c = 0; c < ch; ++c) {
                    color_sum[t * ch + c] += wt * m.color.at(x, y, c);
                }
            }
        }
    }
    UVMap out{Image(w, h, ch, 0.0f), Image(w, h, 1, 0.0f)};
    Image known(w, h, 1, 0.0f);
    constexpr double kMinWeight = 1e-6;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t t = static_cast<std::size_t>(y) * w + x;
            if (weight_sum[t] < kMinWeight) {
                continue;
            }
            known.at(x, y) = 1.0f;
            out.validity.at(x, y) = static_cast<float>(std::min(1.0, weight_sum[t]));
            for (int c = 0; c < ch; ++c) {
                out.color.at(x, y, c) = static_cast<float>(color_sum[t * ch + c] / weight_sum[t]);
            }
        }
    }
    out.color = inpaint(out.color, known);
    bool any_known = false;
    for (float k : known.data()) {
        any_known = any_known || k != 0.0f;
    }
    if (any_known) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (known.at(x, y) == 0.0f) {
                    out.validity.at(x, y) = kInpaintedValidity;
                }
            }
        }
    }
    return out;
}

} // namespace avatar
