// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "avatar/fit.hpp"
#include "avatar/fixtures.hpp"
#include "avatar/image.hpp"
#include "avatar/model.hpp"
#include "avatar/render.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace avatar::test {

/// Uniform random image in [lo, hi).
Image random_image(int width, int height, int channels, std::uint64_t seed, float lo = 0.0f, float hi = 1.0f);

double max_abs_diff(const Image& a, const Image& b);

/// Toy models are deterministic, so tests share one instance per resolution.
const MorphableModel& toy_model(int uv_resolution = 256);

/// Fixture sets are cached per (size, uv, lighting).
const FixtureSet& fixtures(int image_size, int uv_resolution, FixtureLighting lighting = FixtureLighting::ambient);

std::vector<FitView> fit_views(const FixtureSet& set);

// Scalar-loop references, written independently of the library code paths.
double bse_oracle(const Image& texture, int kernel_size);
double psnr_oracle(const Image& a, const Image& b);

struct GradientReport
{
    double sh_max_rel = 0.0;
    double texture_max_rel = 0.0;
    double vertex_max_rel = 0.0;
    int sh_checked = 0;
    int texture_checked = 0;
    int vertex_checked = 0;
    int vertex_skipped = 0; // finite differences straddled a kink
};

/**
 * Central differences (h = 1e-3) of L = sum over interior pixels of G * color on a 32x32 toy render,
 * compared with render_backward. Interior pixels are covered pixels whose 5x5 neighbourhood is
 * covered without depth jumps. G is uniform in [0, 1).
 */
GradientReport check_render_gradients(std::uint64_t seed);

} // namespace avatar::test
