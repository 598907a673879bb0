// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "avatar/image.hpp"

namespace avatar {

/// Y = 0.299 R + 0.587 G + 0.114 B. Single-channel inputs are returned unchanged.
Image to_luma(const Image& img);

/// Brightness symmetry error: mean |B(Y) - mirror(B(Y))| with B a Gaussian blur of odd size kernel_size.
double bse(const Image& texture, int kernel_size = 55);
double bse(const UVMap& texture, int kernel_size = 55);

/// Peak signal-to-noise ratio in dB for unit dynamic range; +infinity for identical images.
double psnr(const Image& a, const Image& b);

/// Mean SSIM over all pixels and channels (11-tap Gaussian window, sigma 1.5, k1 0.01, k2 0.03).
double ssim(const Image& a, const Image& b);

} // namespace avatar
