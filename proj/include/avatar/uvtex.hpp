// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "avatar/camera.hpp"
#include "avatar/image.hpp"
#include "avatar/mesh.hpp"

#include <span>

namespace avatar {

/**
 * Samples the source image into UV space through the fitted mesh and camera.
 *
 * Validity per texel is the viewing cosine max(0, -n.z) times the mask value at the projected
 * pixel (1 without a mask). Texels that project outside the image, lie on back-facing triangles
 * or are hidden behind nearer surfaces get validity 0 and color 0.
 */
UVMap unwrap(const Image& source, const Mesh& mesh, const CameraParams& camera, const SegMask* mask,
             int uv_resolution);

/// Validity assigned to texels filled by inpainting (no view saw them); survives 8-bit storage.
inline constexpr float kInpaintedValidity = 1.0f / 255.0f;

/**
 * Feathered weighted average of several unwrapped maps. Weights are the Gaussian-smoothed
 * validity (sigma = resolution / 64) restricted to texels each map saw. Texels with total weight
 * below 1e-6 are inpainted from their neighbours.
 */
UVMap blend_multiview(std::span<const UVMap> maps);

/// Fills texels where `known` is 0 by 3x3 neighbour averaging until the values settle.
Image inpaint(const Image& color, const Image& known);

} // namespace avatar
