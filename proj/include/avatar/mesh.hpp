// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <vector>

namespace avatar {

using Triangle = std::array<int, 3>;

/// Triangle mesh with a separate UV layout. Image-style axes: x right, y down, camera looking along +z.
struct Mesh
{
    std::vector<Eigen::Vector3d> vertices;
    std::vector<Triangle> triangles;
    std::vector<Eigen::Vector2d> uv_coords;
    std::vector<Triangle> uv_triangles;

    /// Throws ValidationError on out-of-range indices or mismatched triangle counts.
    void validate() const;
};

/// Area-weighted vertex normals (sum of unnormalized face normals, then normalized).
std::vector<Eigen::Vector3d> vertex_normals(const Mesh& mesh);

/// Writes a Wavefront OBJ with positions, uv coordinates (v flipped to bottom-up) and v/vt faces.
void save_obj(const Mesh& mesh, const std::filesystem::path& path);

/// Reads the subset of OBJ written by save_obj (v, vt, triangular f with v/vt).
Mesh load_obj(const std::filesystem::path& path);

} // namespace avatar
