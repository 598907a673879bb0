// SPDX-License-Identifier: Apache-2.0
#include "avatar/pyramid.hpp"

#include "avatar/error.hpp"
#include "avatar/imaging.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace avatar {

namespace {

constexpr std::array<double, 5> kBinomial = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
constexpr std::array<double, 5> kBinomialGain2 = {2.0 / 16, 8.0 / 16, 12.0 / 16, 8.0 / 16, 2.0 / 16};

int half_up(int n)
{
    return (n + 1) / 2;
}

Image subtract(const Image& a, const Image& b)
{
    Image out = a;
    auto o = out.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] -= bd[i];
    }
    return out;
}

void add_in_place(Image& a, const Image& b)
{
    auto o = a.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] += bd[i];
    }
}

void check_levels(const Image& img, int levels)
{
    if (levels < 1) {
        throw ArgumentError("pyramid needs at least one level");
    }
    if (img.empty()) {
        throw ArgumentError("cannot build a pyramid of an empty image");
    }
    if (levels > max_pyramid_depth(img.width(), img.height())) {
        throw ArgumentError("pyramid depth " + std::to_string(levels) + " too large for a " +
                            std::to_string(img.width()) + "x" + std::to_string(img.height()) + " image");
    }
}

} // namespace

int max_pyramid_depth(int width, int height)
{
    int depth = 1;
    const int m = std::min(width, height);
    // Need m / 2^depth >= 2 for one more level.
    while (static_cast<double>(m) / std::ldexp(1.0, depth) >= 2.0) {
        ++depth;
    }
    return m >= 2 ? depth : 1;
}

int default_pyramid_depth(int width, int height)
{
    const int m = std::min(width, height);
    const int d = static_cast<int>(std::floor(std::log2(static_cast<double>(std::max(m, 1))))) - 1;
    return std::clamp(d, 1, max_pyramid_depth(width, height));
}

int default_transfer_levels(int depth)
{
    return std::max(0, depth - 2);
}

Image blur5(const Image& img)
{
    return convolve_separable(img, kBinomial);
}

Image pyr_down(const Image& img)
{
    const Image blurred = blur5(img);
    const int w = half_up(img.width()), h = half_up(img.height()), ch = img.channels();
    Image out(w, h, ch);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                out.at(x, y, c) = blurred.at(2 * x, 2 * y, c);
            }
        }
    }
    return out;
}

Image pyr_up(const Image& img, int width, int height)
{
    if (half_up(width) != img.width() || half_up(height) != img.height()) {
        throw ValidationError("pyr_up target " + std::to_string(width) + "x" + std::to_string(height) +
                              " does not halve to " + std::to_string(img.width()) + "x" +
                              std::to_string(img.height()));
    }
    Image up(width, height, img.channels(), 0.0f);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < img.channels(); ++c) {
                up.at(2 * x, 2 * y, c) = img.at(x, y, c);
            }
        }
    }
    // Gain 2 per axis restores unit DC gain after zero insertion.
    return convolve_separable(up, kBinomialGain2);
}

Pyramid gaussian_pyramid(const Image& img, int levels)
{
    check_levels(img, levels);
    Pyramid p;
    p.kind = PyramidKind::gaussian;
    p.levels.reserve(static_cast<std::size_t>(levels));
    p.levels.push_back(img);
    for (int k = 1; k < levels; ++k) {
        p.levels.push_back(pyr_down(p.levels.back()));
    }
    return p;
}

Pyramid laplacian_pyramid(const Image& img, int levels)
{
    const Pyramid g = gaussian_pyramid(img, levels);
    Pyramid p;
    p.kind = PyramidKind::laplacian;
    p.levels.reserve(g.levels.size());
    for (int k = 0; k + 1 < levels; ++k) {
        const Image& fine = g.levels[static_cast<std::size_t>(k)];
        p.levels.push_back(subtract(fine, pyr_up(g.levels[static_cast<std::size_t>(k + 1)], fine.width(), fine.height())));
    }
    p.levels.push_back(g.levels.back());
    return p;
}

Image reconstruct(const Pyramid& pyramid)
{
    if (pyramid.kind != PyramidKind::laplacian) {
        throw ValidationError("only Laplacian pyramids can be reconstructed");
    }
    if (pyramid.levels.empty()) {
        throw ValidationError("cannot reconstruct an empty pyramid");
    }
    for (std::size_t k = 0; k + 1 < pyramid.levels.size(); ++k) {
        const Image& fine = pyramid.levels[k];
        const Image& coarse = pyramid.levels[k + 1];
        if (coarse.width() != half_up(fine.width()) || coarse.height() != half_up(fine.height()) ||
            coarse.channels() != fine.channels()) {
            throw ValidationError("pyramid level " + std::to_string(k + 1) + " has inconsistent dimensions");
        }
    }
    Image current = pyramid.levels.back();
    for (std::size_t k = pyramid.levels.size() - 1; k-- > 0;) {
        const Image& detail = pyramid.levels[k];
        Image up = pyr_up(current, detail.width(), detail.height());
        add_in_place(up, detail);
        current = std::move(up);
    }
    return current;
}

UVMap lp_blend(const UVMap& source, const UVMap& template_map, int transfer_levels, int depth)
{
    if (!source.color.same_shape(template_map.color)) {
        throw DimensionError("lp_blend source and template resolutions differ");
    }
    if (depth == 0) {
        depth = default_pyramid_depth(source.color.width(), source.color.height());
    }
    if (transfer_levels < 0 || transfer_levels > depth - 1) {
        throw ArgumentError("transfer_levels must lie in [0, " + std::to_string(depth - 1) + "]");
    }
    const Pyramid src = laplacian_pyramid(source.color, depth);
    Pyramid mixed = laplacian_pyramid(template_map.color, depth);
    for (int k = 0; k < transfer_levels; ++k) {
        mixed.levels[static_cast<std::size_t>(k)] = src.levels[static_cast<std::size_t>(k)];
    }
    UVMap out;
    out.color = reconstruct(mixed);
    out.validity = source.validity.empty() ? Image(out.color.width(), out.color.height(), 1, 1.0f) : source.validity;
    for (int y = 0; y < out.color.height(); ++y) {
        for (int x = 0; x < out.color.width(); ++x) {
            if (out.validity.at(x, y) == 0.0f) {
                for (int c = 0; c < out.color.channels(); ++c) {
                    out.color.at(x, y, c) = 0.0f;
                }
            }
        }
    }
    return out;
}

UVMap lp_blend_normal(const UVMap& source_normal, const UVMap& template_normal, int transfer_levels, int depth)
{
    if (source_normal.color.channels() != 3) {
        throw DimensionError("normal maps must have 3 channels");
    }
    UVMap out = lp_blend(source_normal, template_normal, transfer_levels, depth);
    Image& c = out.color;
    for (int y = 0; y < c.height(); ++y) {
        for (int x = 0; x < c.width(); ++x) {
            if (out.validity.at(x, y) == 0.0f) {
                continue;
            }
            Eigen::Vector3d n(2.0 * c.at(x, y, 0) - 1.0, 2.0 * c.at(x, y, 1) - 1.0, 2.0 * c.at(x, y, 2) - 1.0);
            const double len = n.norm();
            n = len > 1e-12 ? Eigen::Vector3d(n / len) : Eigen::Vector3d(0.0, 0.0, 1.0);
            for (int k = 0; k < 3; ++k) {
                c.at(x, y, k) = static_cast<float>(0.5 * (n[k] + 1.0));
            }
        }
    }
    return out;
}

} // namespace avatar
