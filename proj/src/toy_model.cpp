// SPDX-License-Identifier: Apache-2.0
#include "avatar/toy_model.hpp"

#include "avatar/error.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>
#include <numbers>

namespace avatar {

namespace {

constexpr int kRows = 25;
constexpr int kCols = 20;
constexpr double kThetaMin = 20.0;
constexpr double kThetaMax = 160.0;
constexpr double kPhiExtent = 120.0;
constexpr double kDeg = std::numbers::pi / 180.0;

const Eigen::Vector3d kRadii(0.8, 1.0, 0.9);

// Basis columns are scaled so plausible faces have coefficients of magnitude below 0.5.
constexpr double kModeGain = 2.5;

// Surface angles (degrees) for texture coordinate (u, v).
double phi_at(double u) { return -kPhiExtent + 2.0 * kPhiExtent * u; }
double theta_at(double v) { return kThetaMin + (kThetaMax - kThetaMin) * v; }

double bump(double phi, double theta, double phi0, double theta0, double sphi, double stheta)
{
    const double a = (phi - phi0) / sphi;
    const double b = (theta - theta0) / stheta;
    return std::exp(-0.5 * (a * a + b * b));
}

// Mirror-symmetric pair of bumps at +-phi0.
double bump_pair(double phi, double theta, double phi0, double theta0, double sphi, double stheta)
{
    return bump(phi, theta, phi0, theta0, sphi, stheta) + bump(phi, theta, -phi0, theta0, sphi, stheta);
}

double smoothstep(double e0, double e1, double x)
{
    const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

Eigen::Vector3d ellipsoid(double phi_deg, double theta_deg)
{
    const double p = phi_deg * kDeg, t = theta_deg * kDeg;
    return {kRadii.x() * std::sin(t) * std::sin(p), -kRadii.y() * std::cos(t), -kRadii.z() * std::sin(t) * std::cos(p)};
}

Eigen::Vector3d outward(const Eigen::Vector3d& p)
{
    return Eigen::Vector3d(p.x() / (kRadii.x() * kRadii.x()), p.y() / (kRadii.y() * kRadii.y()),
                           p.z() / (kRadii.z() * kRadii.z()))
        .normalized();
}

// Deterministic lattice noise, symmetric in u about 0.5.
double hash01(std::uint32_t x, std::uint32_t y)
{
    std::uint32_t h = x * 0x8da6b343u ^ y * 0xd8163841u;
    h ^= h >> 13;
    h *= 0x5bd1e995u;
    h ^= h >> 15;
    return (h & 0xffffffu) / static_cast<double>(0xffffff);
}

double value_noise(double x, double y)
{
    const double fx = std::floor(x), fy = std::floor(y);
    const auto ix = static_cast<std::uint32_t>(static_cast<std::int64_t>(fx) + 4096);
    const auto iy = static_cast<std::uint32_t>(static_cast<std::int64_t>(fy) + 4096);
    const double tx = smoothstep(0.0, 1.0, x - fx), ty = smoothstep(0.0, 1.0, y - fy);
    const double a = hash01(ix, iy), b = hash01(ix + 1, iy);
    const double c = hash01(ix, iy + 1), d = hash01(ix + 1, iy + 1);
    return (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
}

double skin_detail(double u, double v)
{
    const double mu = std::abs(u - 0.5);
    return value_noise(mu * 96.0, v * 96.0) - 0.5 + 0.5 * (value_noise(mu * 40.0, v * 40.0) - 0.5);
}

} // namespace

MorphableModel make_toy_model(const ToyModelOptions& options)
{
    if (options.uv_resolution < 8) {
        throw ArgumentError("toy model uv resolution must be at least 8");
    }
    MorphableModel m;
    const int v_count = kRows * kCols;
    constexpr int k_id = 8, k_exp = 4, k_tex = 8;

    std::vector<Eigen::Vector3d> base(static_cast<std::size_t>(v_count));
    std::vector<Eigen::Vector3d> normal(static_cast<std::size_t>(v_count));
    std::vector<double> phis(static_cast<std::size_t>(v_count)), thetas(static_cast<std::size_t>(v_count));
    m.uv_coords.resize(static_cast<std::size_t>(v_count));
    for (int i = 0; i < kRows; ++i) {
        for (int j = 0; j < kCols; ++j) {
            const auto k = static_cast<std::size_t>(i * kCols + j);
            const double u = j / static_cast<double>(kCols - 1);
            const double v = i / static_cast<double>(kRows - 1);
            phis[k] = phi_at(u);
            thetas[k] = theta_at(v);
            base[k] = ellipsoid(phis[k], thetas[k]);
            normal[k] = outward(base[k]);
            m.uv_coords[k] = Eigen::Vector2d(u, v);
        }
    }

    // Mean shape: shell plus facial relief along the outward normal.
    m.mean_shape.resize(3 * v_count);
    for (int k = 0; k < v_count; ++k) {
        const double ph = phis[static_cast<std::size_t>(k)], th = thetas[static_cast<std::size_t>(k)];
        const double relief = 0.22 * bump(ph, th, 0.0, 97.0, 9.0, 14.0)     // nose
                               - 0.08 * bump_pair(ph, th, 24.0, 80.0, 10.0, 7.0) // eye sockets
                               + 0.05 * bump_pair(ph, th, 24.0, 68.0, 14.0, 4.0) // brows
                               + 0.04 * bump(ph, th, 0.0, 128.0, 18.0, 6.0);   // lips
        const Eigen::Vector3d p = base[static_cast<std::size_t>(k)] + relief * normal[static_cast<std::size_t>(k)];
        m.mean_shape.segment<3>(3 * k) = p.cast<float>();
    }

    m.identity_basis = Eigen::MatrixXf::Zero(3 * v_count, k_id);
    m.expression_basis = Eigen::MatrixXf::Zero(3 * v_count, k_exp);
    for (int k = 0; k < v_count; ++k) {
        const auto s = static_cast<std::size_t>(k);
        const double ph = phis[s], th = thetas[s];
        const Eigen::Vector3d p = m.mean_shape.segment<3>(3 * k).cast<double>();
        const Eigen::Vector3d& n = normal[s];
        const double lower = smoothstep(100.0, 150.0, th);
        const double upper = 1.0 - smoothstep(30.0, 75.0, th);
        const double side = ph >= 0.0 ? 1.0 : -1.0;
        const Eigen::Vector3d chin_dir = Eigen::Vector3d(0.0, 0.5, -1.0).normalized();
        std::array<Eigen::Vector3d, k_id> id{
            0.25 * bump(ph, th, 0.0, 97.0, 9.0, 14.0) * n,                                         // nose prominence
            0.20 * bump_pair(ph, th, 45.0, 105.0, 18.0, 16.0) * n,                                 // cheeks
            Eigen::Vector3d(0.25 * lower * p.x(), 0.0, 0.0),                                        // jaw width
            0.15 * bump_pair(ph, th, 24.0, 68.0, 16.0, 6.0) * n,                                   // brow ridge
            Eigen::Vector3d(0.20 * side * bump_pair(ph, th, 24.0, 80.0, 14.0, 12.0), 0.0, 0.0),     // eye spacing
            0.20 * bump(ph, th, 0.0, 145.0, 25.0, 10.0) * chin_dir,                                // chin
            Eigen::Vector3d(0.20 * p.x() * bump_pair(ph, th, 70.0, 70.0, 25.0, 20.0), 0.0, 0.0),    // temples
            0.20 * upper * n,                                                                      // forehead
        };
        for (int c = 0; c < k_id; ++c) {
            m.identity_basis.block<3, 1>(3 * k, c) = (kModeGain * id[static_cast<std::size_t>(c)]).cast<float>();
        }
        std::array<Eigen::Vector3d, k_exp> ex{
            Eigen::Vector3d(0.0, 0.20 * bump(ph, th, 0.0, 138.0, 30.0, 12.0), 0.0),                                // jaw drop
            Eigen::Vector3d(0.15 * std::sin(ph * kDeg) * bump(ph, th, 0.0, 125.0, 25.0, 8.0),
                            -0.06 * bump(ph, th, 0.0, 125.0, 25.0, 8.0), 0.0),                                    // smile
            Eigen::Vector3d(0.0, -0.12 * bump_pair(ph, th, 24.0, 66.0, 18.0, 9.0), 0.0),                           // brow raise
            Eigen::Vector3d(0.0, 0.0, -0.12 * bump(ph, th, 0.0, 128.0, 14.0, 6.0)),                               // pucker
        };
        for (int c = 0; c < k_exp; ++c) {
            m.expression_basis.block<3, 1>(3 * k, c) = (kModeGain * ex[static_cast<std::size_t>(c)]).cast<float>();
        }
    }

    // Triangles with front faces wound so their screen-space normal points toward the camera.
    for (int i = 0; i + 1 < kRows; ++i) {
        for (int j = 0; j + 1 < kCols; ++j) {
            const int a = i * kCols + j, b = a + 1, c = a + kCols, d = c + 1;
            m.triangles.push_back({a, c, b});
            m.triangles.push_back({b, c, d});
        }
    }
    {
        const auto& t = m.triangles[static_cast<std::size_t>(2 * ((kRows / 2) * (kCols - 1) + kCols / 2))];
        auto vert = [&](int idx) { return Eigen::Vector3d(m.mean_shape.segment<3>(3 * idx).cast<double>()); };
        const Eigen::Vector3d nrm = (vert(t[1]) - vert(t[0])).cross(vert(t[2]) - vert(t[0]));
        if (nrm.z() > 0.0) {
            for (auto& tri : m.triangles) {
                std::swap(tri[1], tri[2]);
            }
        }
    }
    m.uv_triangles = m.triangles;

    for (int i = 4; i <= 22; i += 2) {
        for (int j : {3, 5, 7, 9, 10, 12, 14, 16}) {
            m.landmark_vertex_ids.push_back(i * kCols + j);
        }
    }

    // Texture: mean skin with features, smooth variation modes.
    const int res = options.uv_resolution;
    m.mean_texture = Image(res, res, 3);
    m.texture_basis = Eigen::MatrixXf::Zero(static_cast<Eigen::Index>(res) * res * 3, k_tex);
    const double skin[3] = {0.78, 0.58, 0.47};
    const double pi = std::numbers::pi;
    for (int y = 0; y < res; ++y) {
        for (int x = 0; x < res; ++x) {
            const double u = (x + 0.5) / res, v = (y + 0.5) / res;
            const double ph = phi_at(u), th = theta_at(v);
            const double eyes = bump_pair(ph, th, 24.0, 80.0, 6.0, 3.0);
            const double brows = bump_pair(ph, th, 24.0, 69.0, 10.0, 2.0);
            const double lips = bump(ph, th, 0.0, 128.0, 14.0, 3.0);
            const double cheeks = bump_pair(ph, th, 40.0, 105.0, 14.0, 12.0);
            const double hair = 1.0 - smoothstep(28.0, 45.0, th);
            const double detail = skin_detail(u, v);
            const double lip_col[3] = {0.70, 0.30, 0.30};
            const double dark[3] = {0.20, 0.13, 0.10};
            for (int c = 0; c < 3; ++c) {
                double val = skin[c] * (1.0 + 0.08 * detail) + (c == 0 ? 0.05 : -0.02) * cheeks;
                val = val * (1.0 - lips) + lip_col[c] * lips;
                val = val * (1.0 - 0.8 * eyes) + 0.15 * 0.8 * eyes;
                val = val * (1.0 - 0.7 * brows) + dark[c] * 0.7 * brows;
                val = val * (1.0 - hair) + dark[c] * (1.0 + 0.3 * detail) * hair;
                m.mean_texture.at(x, y, c) = static_cast<float>(std::clamp(val, 0.0, 1.0));
            }
            const double modes[k_tex][3] = {
                {0.06, 0.06, 0.06},                                                        // brightness
                {0.05, -0.03, -0.03},                                                      // redness
                {0.05 * (v - 0.5), 0.05 * (v - 0.5), 0.05 * (v - 0.5)},                    // vertical ramp
                {0.06 * (u - 0.5), 0.04 * (u - 0.5), 0.03 * (u - 0.5)},                    // horizontal ramp
                {0.03 * std::cos(2 * pi * u), 0.02 * std::cos(2 * pi * u), 0.02 * std::cos(2 * pi * u)},
                {0.02 * std::cos(2 * pi * v), 0.03 * std::cos(2 * pi * v), 0.02 * std::cos(2 * pi * v)},
                {0.03 * std::sin(2 * pi * u) * std::sin(pi * v), 0.0, -0.03 * std::sin(2 * pi * u) * std::sin(pi * v)},
                {0.05 * cheeks, 0.01 * cheeks, 0.0},
            };
            for (int k = 0; k < k_tex; ++k) {
                for (int c = 0; c < 3; ++c) {
                    m.texture_basis(static_cast<Eigen::Index>(m.mean_texture.index(x, y, c)), k) =
                        static_cast<float>(kModeGain * modes[k][c]);
                }
            }
        }
    }
    m.validate();
    return m;
}

} // namespace avatar
