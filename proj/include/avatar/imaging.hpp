// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "avatar/image.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace avatar {

/// Mirror (reflect-101) addressing: ... 2 1 | 0 1 2 ... n-1 | n-2 ...
int mirror_index(int i, int n) noexcept;

/// Normalized sampled Gaussian of the given radius, 2 * radius + 1 taps.
std::vector<double> gaussian_kernel(double sigma, int radius);

/// Separable convolution with the same odd-length kernel along both axes, mirror padded.
Image convolve_separable(const Image& img, std::span<const double> kernel);

/// Gaussian blur with radius ceil(3 sigma). sigma = 0 returns the input.
Image gaussian_blur(const Image& img, double sigma);

/// Gaussian blur with an explicit odd kernel size; sigma = size / 6.
Image gaussian_blur_sized(const Image& img, int kernel_size);

/// Bilinear resampling with half-texel-centered coordinates and clamp-to-edge addressing.
Image resample(const Image& img, int new_width, int new_height);

/// Nonlocal means with weights exp(-d^2 / h^2), d^2 the mean squared patch difference.
Image nlm_denoise(const Image& img, double strength, int patch_radius = 1, int search_radius = 5);

/// Adds i.i.d. normal noise from a seeded generator and clamps to [0, 1].
Image add_gaussian_noise(const Image& img, double sigma, std::uint64_t seed);

struct DegradationParams
{
    double blur_sigma = 2.0;
    double down_factor = 3.0;
    double noise_sigma = 0.02;
    double nlm_strength = 0.08;
    std::uint64_t seed = 0;

    void validate() const;
};

/// blur -> downsample -> noise -> nonlocal means -> bilinear upsample back to the input size.
Image degrade(const Image& img, const DegradationParams& params);

struct Range
{
    double min = 0.0;
    double max = 0.0;
};

struct DegradationRanges
{
    Range blur_sigma{0.5, 3.0};
    Range down_factor{2.0, 4.0};
    Range noise_sigma{0.005, 0.04};
    Range nlm_strength{0.04, 0.12};

    void validate() const;
};

/// Uniform sampling of every parameter within its range; the seed also becomes the noise seed.
DegradationParams sample_degradation(const DegradationRanges& ranges, std::uint64_t seed);

/// JSON object with optional keys blur_sigma, down_factor, noise_sigma, nlm_strength, each [min, max].
DegradationRanges load_degradation_ranges(const std::filesystem::path& path);

} // namespace avatar
