// SPDX-License-Identifier: Apache-2.0
#include "avatar/imaging.hpp"

#include "avatar/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace avatar {

int mirror_index(int i, int n) noexcept
{
    if (n == 1) {
        return 0;
    }
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) {
        i += period;
    }
    return i < n ? i : period - i;
}

std::vector<double> gaussian_kernel(double sigma, int radius)
{
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : k) {
        v /= sum;
    }
    return k;
}

Image convolve_separable(const Image& img, std::span<const double> kernel)
{
    const int radius = static_cast<int>(kernel.size() / 2);
    const int w = img.width(), h = img.height(), ch = img.channels();
    std::vector<double> tmp(img.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    acc += kernel[static_cast<std::size_t>(k + radius)] * img.at(mirror_index(x + k, w), y, c);
                }
                tmp[img.index(x, y, c)] = acc;
            }
        }
    }
    Image out(w, h, ch);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    acc += kernel[static_cast<std::size_t>(k + radius)] * tmp[img.index(x, mirror_index(y + k, h), c)];
                }
                out.at(x, y, c) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

Image gaussian_blur(const Image& img, double sigma)
{
    if (sigma < 0.0 || !std::isfinite(sigma)) {
        throw ArgumentError("blur sigma must be nonnegative and finite");
    }
    if (sigma == 0.0) {
        return img;
    }
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    const auto kernel = gaussian_kernel(sigma, radius);
    return convolve_separable(img, kernel);
}

Image gaussian_blur_sized(const Image& img, int kernel_size)
{
    if (kernel_size <= 0 || kernel_size % 2 == 0) {
        throw ArgumentError("blur kernel size must be a positive odd number, got " + std::to_string(kernel_size));
    }
    const auto kernel = gaussian_kernel(kernel_size / 6.0, kernel_size / 2);
    return convolve_separable(img, kernel);
}

Image resample(const Image& img, int new_width, int new_height)
{
    if (new_width <= 0 || new_height <= 0) {
        throw ArgumentError("resample target must have positive dimensions");
    }
    if (new_width == img.width() && new_height == img.height()) {
        return img;
    }
    const int w = img.width(), h = img.height(), ch = img.channels();
    const double sx = static_cast<double>(w) / new_width;
    const double sy = static_cast<double>(h) / new_height;
    Image out(new_width, new_height, ch);
    for (int y = 0; y < new_height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(h - 1));
        const int y0 = static_cast<int>(std::floor(fy));
        const int y1 = std::min(y0 + 1, h - 1);
        const double ty = fy - y0;
        for (int x = 0; x < new_width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(w - 1));
            const int x0 = static_cast<int>(std::floor(fx));
            const int x1 = std::min(x0 + 1, w - 1);
            const double tx = fx - x0;
            for (int c = 0; c < ch; ++c) {
                const double top = (1.0 - tx) * img.at(x0, y0, c) + tx * img.at(x1, y0, c);
                const double bottom = (1.0 - tx) * img.at(x0, y1, c) + tx * img.at(x1, y1, c);
                out.at(x, y, c) = static_cast<float>((1.0 - ty) * top + ty * bottom);
            }
        }
    }
    return out;
}

Image nlm_denoise(const Image& img, double strength, int patch_radius, int search_radius)
{
    if (strength < 0.0 || patch_radius < 0 || search_radius < 0) {
        throw ArgumentError("nonlocal means parameters must be nonnegative");
    }
    if (strength == 0.0) {
        return img;
    }
    const int w = img.width(), h = img.height(), ch = img.channels();
    const double inv_h2 = 1.0 / (strength * strength);
    const double patch_count = static_cast<double>((2 * patch_radius + 1) * (2 * patch_radius + 1) * ch);
    Image out(w, h, ch);
    std::vector<double> acc(static_cast<std::size_t>(ch));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::fill(acc.begin(), acc.end(), 0.0);
            double weight_sum = 0.0;
            for (int dy = -search_radius; dy <= search_radius; ++dy) {
                for (int dx = -search_radius; dx <= search_radius; ++dx) {
                    const int qx = mirror_index(x + dx, w);
                    const int qy = mirror_index(y + dy, h);
                    double d2 = 0.0;
                    for (int py = -patch_radius; py <= patch_radius; ++py) {
                        const int ay = mirror_index(y + py, h);
                        const int by = mirror_index(qy + py, h);
                        for (int px = -patch_radius; px <= patch_radius; ++px) {
                            const int ax = mirror_index(x + px, w);
                            const int bx = mirror_index(qx + px, w);
                            for (int c = 0; c < ch; ++c) {
                                const double diff = static_cast<double>(img.at(ax, ay, c)) - img.at(bx, by, c);
                                d2 += diff * diff;
                            }
                        }
                    }
                    d2 /= patch_count;
                    const double weight = std::exp(-std::max(0.0, d2) * inv_h2);
                    weight_sum += weight;
                    for (int c = 0; c < ch; ++c) {
                        acc[static_cast<std::size_t>(c)] += weight * img.at(qx, qy, c);
                    }
                }
            }
            for (int c = 0; c < ch; ++c) {
                out.at(x, y, c) = static_cast<float>(acc[static_cast<std::size_t>(c)] / weight_sum);
            }
        }
    }
    return out;
}

Image add_gaussian_noise(const Image& img, double sigma, std::uint64_t seed)
{
    if (sigma < 0.0) {
        throw ArgumentError("noise sigma must be nonnegative");
    }
    if (sigma == 0.0) {
        return img;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    Image out = img;
    for (float& v : out.data()) {
        v = static_cast<float>(std::clamp(v + normal(rng), 0.0, 1.0));
    }
    return out;
}

void DegradationParams::validate() const
{
    if (blur_sigma < 0.0 || noise_sigma < 0.0 || nlm_strength < 0.0 || down_factor < 1.0) {
        throw ArgumentError("degradation parameters must be nonnegative with down_factor >= 1");
    }
}

Image degrade(const Image& img, const DegradationParams& params)
{
    params.validate();
    const int w = img.width(), h = img.height();
    Image x = gaussian_blur(img, params.blur_sigma);
    const int dw = std::max(1, static_cast<int>(std::lround(w / params.down_factor)));
    const int dh = std::max(1, static_cast<int>(std::lround(h / params.down_factor)));
    x = resample(x, dw, dh);
    x = add_gaussian_noise(x, params.noise_sigma, params.seed);
    x = nlm_denoise(x, params.nlm_strength);
    return resample(x, w, h);
}

void DegradationRanges::validate() const
{
    for (const Range* r : {&blur_sigma, &down_factor, &noise_sigma, &nlm_strength}) {
        if (!(r->min <= r->max) || r->min < 0.0) {
            throw ConfigError("degradation range must satisfy 0 <= min <= max");
        }
    }
    if (down_factor.min < 1.0) {
        throw ConfigError("down_factor range must start at 1 or above");
    }
}

DegradationParams sample_degradation(const DegradationRanges& ranges, std::uint64_t seed)
{
    ranges.validate();
    std::mt19937_64 rng(seed);
    auto draw = [&rng](const Range& r) {
        if (r.min == r.max) {
            return r.min;
        }
        return std::uniform_real_distribution<double>(r.min, r.max)(rng);
    };
    DegradationParams p;
    p.blur_sigma = draw(ranges.blur_sigma);
    p.down_factor = draw(ranges.down_factor);
    p.noise_sigma = draw(ranges.noise_sigma);
    p.nlm_strength = draw(ranges.nlm_strength);
    p.seed = seed;
    return p;
}

DegradationRanges load_degradation_ranges(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open degradation ranges '" + path.string() + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    DegradationRanges r;
    auto read = [&](const char* key, Range& out) {
        if (!j.contains(key)) {
            return;
        }
        const auto& v = j.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            throw ConfigError(path.string() + ": '" + key + "' must be a [min, max] pair");
        }
        out = {v[0].get<double>(), v[1].get<double>()};
    };
    read("blur_sigma", r.blur_sigma);
    read("down_factor", r.down_factor);
    read("noise_sigma", r.noise_sigma);
    read("nlm_strength", r.nlm_strength);
    r.validate();
    return r;
}

} // namespace avatar
