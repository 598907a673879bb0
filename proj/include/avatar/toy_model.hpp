// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "avatar/model.hpp"

namespace avatar {

struct ToyModelOptions
{
    int uv_resolution = 256;
};

/**
 * Small synthetic head model: an ellipsoidal shell (25 x 20 vertex grid, longitude +-120 degrees,
 * facing -z) with a nose, brows and eye sockets, 8 identity modes, 4 expression modes, 8 texture
 * modes and 80 landmarks. Geometry, texture and UV layout are left-right mirror symmetric.
 */
MorphableModel make_toy_model(const ToyModelOptions& options = {});

} // namespace avatar
