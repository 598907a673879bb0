// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "avatar/camera.hpp"
#include "avatar/image.hpp"
#include "avatar/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <vector>

namespace avatar {

inline constexpr int kShCoefficients = 9;

/// Second-order spherical harmonics irradiance, 9 coefficients per color channel.
struct Illumination
{
    // Channel-major: sh[c * 9 + k].
    std::array<double, 3 * kShCoefficients> sh{};

    double& coefficient(int channel, int k) noexcept { return sh[static_cast<std::size_t>(channel * kShCoefficients + k)]; }
    double coefficient(int channel, int k) const noexcept
    {
        return sh[static_cast<std::size_t>(channel * kShCoefficients + k)];
    }

    /// Constant irradiance `level` in every direction.
    static Illumination ambient(double level = 1.0);

    /// Ambient term plus a first-order lobe toward `direction` (camera frame).
    static Illumination directional(double ambient_level, double strength, const Eigen::Vector3d& direction);
};

/// Real SH basis Y_0..Y_8 evaluated at a unit normal.
std::array<double, kShCoefficients> sh_basis(const Eigen::Vector3d& n);

/// Gradients of Y_0..Y_8 with respect to the (unconstrained) normal components.
std::array<Eigen::Vector3d, kShCoefficients> sh_basis_gradient(const Eigen::Vector3d& n);

inline constexpr int kNoTriangle = -1;

struct RenderOutput
{
    int width = 0;
    int height = 0;
    CameraParams camera;
    Image color;
    std::vector<std::uint8_t> coverage;
    std::vector<float> depth;
    std::vector<int> triangle_id;
    std::vector<std::array<float, 3>> barycentrics;

    std::size_t pixel(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
    }
    bool covered(int x, int y) const noexcept { return coverage[pixel(x, y)] != 0; }
};

/**
 * Rasterizes front-facing triangles with a pixel-center inclusion test and a depth buffer.
 *
 * Depth of uncovered pixels is +infinity; color is left empty until shade().
 */
RenderOutput rasterize(const Mesh& mesh, const CameraParams& camera, int width, int height);

struct ShadeOptions
{
    float background = 0.5f;
};

/// Lambertian SH shading of bilinearly sampled albedo at the interpolated UV.
Image shade(const RenderOutput& raster, const Mesh& mesh, const UVMap& texture, const Illumination& illumination,
            const ShadeOptions& options = {});

/// rasterize() followed by shade(), with the color stored in the output.
RenderOutput render(const Mesh& mesh, const CameraParams& camera, const UVMap& texture,
                    const Illumination& illumination, int width, int height, const ShadeOptions& options = {});

struct RenderGradients
{
    std::vector<Eigen::Vector3d> vertices; // model frame, one per mesh vertex
    std::vector<double> texture;           // same layout as texture.color data
    std::array<double, 3 * kShCoefficients> sh{};
    Eigen::Vector3d rotation = Eigen::Vector3d::Zero();
    Eigen::Vector2d translation = Eigen::Vector2d::Zero();
    double scale = 0.0;
};

/**
 * Backpropagates dLoss/dColor through shading, UV sampling, barycentric interpolation and
 * projection. Only covered pixels contribute; changes of coverage (silhouettes, occlusion
 * boundaries) have zero gradient.
 */
RenderGradients render_backward(const RenderOutput& raster, const Mesh& mesh, const UVMap& texture,
                                const Illumination& illumination, const Image& output_gradient);

} // namespace avatar
