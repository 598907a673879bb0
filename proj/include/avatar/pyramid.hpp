// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "avatar/image.hpp"

#include <vector>

namespace avatar {

enum class PyramidKind
{
    gaussian,
    laplacian,
};

/// Multi-scale decomposition; level 0 is the finest. A Laplacian pyramid ends with its Gaussian base.
struct Pyramid
{
    std::vector<Image> levels;
    PyramidKind kind = PyramidKind::gaussian;

    int depth() const noexcept { return static_cast<int>(levels.size()); }
};

/// Deepest pyramid admitted for the given size: min(width, height) / 2^(levels - 1) >= 2.
int max_pyramid_depth(int width, int height);

/// floor(log2(min dimension)) - 1, capped at max_pyramid_depth.
int default_pyramid_depth(int width, int height);

/// Blur with the separable binomial (1, 4, 6, 4, 1) / 16 kernel, mirror padded.
Image blur5(const Image& img);

/// blur5 followed by keeping every even row and column; output is ceil(size / 2).
Image pyr_down(const Image& img);

/// Zero insertion to width x height, then blur5 with 4x gain.
Image pyr_up(const Image& img, int width, int height);

Pyramid gaussian_pyramid(const Image& img, int levels);
Pyramid laplacian_pyramid(const Image& img, int levels);

/// Collapses a Laplacian pyramid. Throws ValidationError on inconsistent level sizes.
Image reconstruct(const Pyramid& pyramid);

/**
 * Keeps the finest `transfer_levels` detail levels of `source` and takes every coarser level,
 * including the base, from `template_map`. Validity of the result is the source validity.
 * `depth` 0 selects default_pyramid_depth.
 */
UVMap lp_blend(const UVMap& source, const UVMap& template_map, int transfer_levels, int depth = 0);

/// Default transfer count: depth - 2.
int default_transfer_levels(int depth);

/// lp_blend on normal-encoded rasters (c = (n + 1) / 2), renormalizing every decoded normal.
UVMap lp_blend_normal(const UVMap& source_normal, const UVMap& template_normal, int transfer_levels, int depth = 0);

} // namespace avatar
