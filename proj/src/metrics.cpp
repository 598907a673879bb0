// SPDX-License-Identifier: Apache-2.0
#include "avatar/metrics.hpp"

#include "avatar/error.hpp"
#include "avatar/imaging.hpp"

#include <cmath>
#include <limits>

namespace avatar {

namespace {

void check_same(const Image& a, const Image& b)
{
    if (!a.same_shape(b) || a.empty()) {
        throw DimensionError("metric inputs must be non-empty images of identical shape");
    }
}

Image channel(const Image& img, int c)
{
    Image out(img.width(), img.height(), 1);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            out.at(x, y) = img.at(x, y, c);
        }
    }
    return out;
}

} // namespace

Image to_luma(const Image& img)
{
    if (img.channels() == 1) {
        return img;
    }
    if (img.channels() != 3) {
        throw DimensionError("luma conversion needs a 1- or 3-channel image");
    }
    Image out(img.width(), img.height(), 1);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            out.at(x, y) = 0.299f * img.at(x, y, 0) + 0.587f * img.at(x, y, 1) + 0.114f * img.at(x, y, 2);
        }
    }
    return out;
}

double bse(const Image& texture, int kernel_size)
{
    if (texture.channels() != 3) {
        throw DimensionError("brightness symmetry error expects a 3-channel texture");
    }
    const Image blurred = gaussian_blur_sized(to_luma(texture), kernel_size);
    const int w = blurred.width();
    double sum = 0.0;
    for (int y = 0; y < blurred.height(); ++y) {
        for (int x = 0; x < w; ++x) {
            sum += std::abs(static_cast<double>(blurred.at(x, y)) - blurred.at(w - 1 - x, y));
        }
    }
    return sum / static_cast<double>(blurred.texel_count());
}

double bse(const UVMap& texture, int kernel_size)
{
    return bse(texture.color, kernel_size);
}

double psnr(const Image& a, const Image& b)
{
    check_same(a, b);
    double se = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a.data()[i]) - b.data()[i];
        se += d * d;
    }
    if (se == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double mse = se / static_cast<double>(a.size());
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b)
{
    check_same(a, b);
    constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
    constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
    const auto window = gaussian_kernel(1.5, 5);
    double total = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
        const Image x = channel(a, c);
        const Image y = channel(b, c);
        Image xx = x, yy = y, xy = x;
        for (std::size_t i = 0; i < x.size(); ++i) {
            xx.data()[i] = x.data()[i] * x.data()[i];
            yy.data()[i] = y.data()[i] * y.data()[i];
            xy.data()[i] = x.data()[i] * y.data()[i];
        }
        const Image mx = convolve_separable(x, window);
        const Image my = convolve_separable(y, window);
        const Image sxx = convolve_separable(xx, window);
        const Image syy = convolve_separable(yy, window);
        const Image sxy = convolve_separable(xy, window);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double mux = mx.data()[i], muy = my.data()[i];
            const double vx = sxx.data()[i] - mux * mux;
            const double vy = syy.data()[i] - muy * muy;
            const double cov = sxy.data()[i] - mux * muy;
            total += ((2.0 * mux * muy + c1) * (2.0 * cov + c2)) / ((mux * mux + muy * muy + c1) * (vx + vy + c2));
        }
    }
    return total / static_cast<double>(a.size());
}

} // namespace avatar
