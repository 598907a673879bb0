// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "avatar/fit.hpp"
#include "avatar/model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace avatar {

enum class FixtureLighting
{
    ambient,
    directional,
};

struct FixtureOptions
{
    int image_size = 256;
    int uv_resolution = 256;
    FixtureLighting lighting = FixtureLighting::ambient;
    std::uint64_t seed = 2024;
};

struct ViewTruth
{
    std::string name;
    ViewParams params;
};

struct GroundTruth
{
    Eigen::VectorXd identity;
    TextureParams texture;
    std::vector<ViewTruth> views;
};

struct SyntheticView
{
    std::string name;
    Image image;
    LandmarkSet landmarks;
    SegMask mask;
};

struct FixtureSet
{
    MorphableModel model;
    GroundTruth truth;
    std::vector<SyntheticView> views; // left, front, right
    UVMap albedo;                     // ground-truth texture
    Image template_texture;           // symmetric template (model mean texture)
    Image symmetric_texture;          // mirror-symmetric test pattern
    Image reference;                  // golden front render
};

/// Random ground-truth parameters for the three default views (yaw -35, 0, +35 degrees).
GroundTruth make_ground_truth(const MorphableModel& model, int image_size, FixtureLighting lighting,
                              std::uint64_t seed);

/// Renders one synthetic capture: shaded image, projected landmarks and coverage mask.
SyntheticView render_view(const MorphableModel& model, const GroundTruth& truth, std::size_t view, const UVMap& albedo,
                          int image_size);

/**
 * Golden front render: ground-truth mesh and camera, ambient light, texture
 * lp_blend(albedo, template) at default pyramid settings.
 */
Image make_reference(const MorphableModel& model, const GroundTruth& truth, const UVMap& albedo,
                     const Image& template_texture, int image_size);

FixtureSet make_fixtures(const FixtureOptions& options = {});

/**
 * Writes model.avf, view_<name>.ppm/.lm.txt/.mask.pgm, ground_truth.json, albedo.ppm,
 * template.ppm, symmetric.ppm, reference.ppm and fit_config.json into `dir`.
 */
void write_fixtures(const FixtureSet& fixtures, const std::filesystem::path& dir);

void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth load_ground_truth(const std::filesystem::path& path);

} // namespace avatar
