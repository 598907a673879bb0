// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <vector>

namespace avatar {

/// Detected 2D landmarks in pixel coordinates (pixel centers at +0.5).
struct LandmarkSet
{
    std::vector<Eigen::Vector2d> points;
    std::vector<double> confidence;

    std::size_t size() const noexcept { return points.size(); }

    /// Indices of points lying outside a width x height image. These are kept, not rejected.
    std::vector<std::size_t> out_of_bounds(int width, int height) const;
};

/**
 * Reads one landmark per line: "x y [confidence]", separated by whitespace or commas.
 * Blank lines and '#' comments are skipped; a missing confidence defaults to 1.
 */
LandmarkSet load_landmarks(const std::filesystem::path& path);
void save_landmarks(const LandmarkSet& landmarks, const std::filesystem::path& path);

} // namespace avatar
