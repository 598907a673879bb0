// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include "avatar/error.hpp"
#include "avatar/imaging.hpp"
#include "avatar/metrics.hpp"

#include <doctest.h>

#include <cmath>

using namespace avatar;

namespace {

Image symmetrize(const Image& img)
{
    const Image mirror = flip_horizontal(img);
    Image out = img;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = 0.5f * (img.data()[i] + mirror.data()[i]);
    }
    return out;
}

double ssim_oracle(const Image& a, const Image& b)
{
    const double c1 = 1e-4, c2 = 9e-4;
    double g[11], norm = 0.0;
    for (int i = 0; i < 11; ++i) {
        g[i] = std::exp(-(i - 5) * (i - 5) / (2 * 1.5 * 1.5));
        norm += g[i];
    }
    const auto refl = [](int i, int n) { return i < 0 ? -i : (i >= n ? 2 * (n - 1) - i : i); };
    double total = 0.0;
    const int w = a.width(), h = a.height();
    for (int c = 0; c < a.channels(); ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
                for (int dy = -5; dy <= 5; ++dy) {
                    for (int dx = -5; dx <= 5; ++dx) {
                        const double wgt = g[dx + 5] * g[dy + 5] / (norm * norm);
                        const double va = a.at(refl(x + dx, w), refl(y + dy, h), c);
                        const double vb = b.at(refl(x + dx, w), refl(y + dy, h), c);
                        mx += wgt * va;
                        my += wgt * vb;
                        sxx += wgt * va * va;
                        syy += wgt * vb * vb;
                        sxy += wgt * va * vb;
                    }
                }
                const double vx = sxx - mx * mx, vy = syy - my * my, cov = sxy - mx * my;
                total += (2 * mx * my + c1) * (2 * cov + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            }
        }
    }
    return total / (double(w) * h * a.channels());
}

} // namespace

TEST_SUITE("metrics")
{
    TEST_CASE("luma examples")
    {
        const Image white(2, 2, 3, 1.0f);
        CHECK(to_luma(white).at(1, 1) == doctest::Approx(1.0).epsilon(1e-6));
        Image red(1, 1, 3, 0.0f);
        red.at(0, 0, 0) = 1.0f;
        CHECK(to_luma(red).at(0, 0) == doctest::Approx(0.299).epsilon(1e-6));
        const Image gray = test::random_image(5, 5, 1, 1);
        CHECK(to_luma(gray) == gray);
        CHECK_THROWS_AS(to_luma(Image(2, 2, 2)), DimensionError);
    }

    TEST_CASE("luma matches a scalar loop exactly")
    {
        const Image img = test::random_image(23, 17, 3, 2);
        const Image y = to_luma(img);
        for (int j = 0; j < 17; ++j) {
            for (int i = 0; i < 23; ++i) {
                const float expected = 0.299f * img.at(i, j, 0) + 0.587f * img.at(i, j, 1) + 0.114f * img.at(i, j, 2);
                CHECK(y.at(i, j) == expected);
            }
        }
    }

    TEST_CASE("bse of symmetric and constant textures is zero")
    {
        for (std::uint64_t seed : {3u, 4u, 5u}) {
            const Image sym = symmetrize(test::random_image(64, 48, 3, seed));
            CHECK(bse(sym) < 1e-6);
            CHECK(bse(sym, 11) < 1e-6);
        }
        CHECK(bse(Image(32, 32, 3, 0.7f)) == 0.0);
        CHECK(bse(symmetrize(test::toy_model(256).mean_texture)) < 1e-6);
    }

    TEST_CASE("bse of split halves matches the scalar oracle")
    {
        Image split(256, 256, 3, 0.0f);
        for (int y = 0; y < 256; ++y) {
            for (int x = 0; x < 128; ++x) {
                for (int c = 0; c < 3; ++c) {
                    split.at(x, y, c) = 1.0f;
                }
            }
        }
        const double value = bse(split, 55);
        CHECK(value > 0.0);
        CHECK(std::abs(value - test::bse_oracle(split, 55)) < 1e-6);
    }

    TEST_CASE("bse matches the scalar oracle on random textures")
    {
        for (std::uint64_t seed : {6u, 7u}) {
            const Image img = test::random_image(64, 64, 3, seed);
            CHECK(std::abs(bse(img, 15) - test::bse_oracle(img, 15)) < 1e-6);
        }
    }

    TEST_CASE("bse symmetry properties")
    {
        const Image img = test::random_image(48, 40, 3, 8);
        CHECK(bse(img) == bse(flip_horizontal(img)));
        CHECK(std::abs(bse(img) - bse(flip_vertical(img))) < 1e-6);
        CHECK(bse(img) >= 0.0);
        CHECK_THROWS_AS(bse(Image(8, 8, 1)), DimensionError);
        CHECK_THROWS_AS(bse(img, 54), ArgumentError);
        UVMap m = make_full_uvmap(img);
        CHECK(bse(m) == bse(img));
    }

    TEST_CASE("psnr examples")
    {
        const Image a = test::random_image(16, 16, 3, 9, 0.0f, 0.8f);
        CHECK(std::isinf(psnr(a, a)));
        Image b = a;
        for (float& v : b.data()) {
            v += 0.1f;
        }
        CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-5));
        const Image c = test::random_image(16, 16, 3, 10);
        CHECK(psnr(a, c) == psnr(c, a));
        CHECK(std::abs(psnr(a, c) - test::psnr_oracle(a, c)) < 1e-6);
        CHECK_THROWS_AS(psnr(a, Image(16, 15, 3)), DimensionError);
    }

    TEST_CASE("ssim")
    {
        const Image a = test::random_image(24, 20, 3, 11);
        CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-9));
        const Image b = test::random_image(24, 20, 3, 12);
        const double s = ssim(a, b);
        CHECK(s >= -1.0);
        CHECK(s <= 1.0);
        CHECK(std::abs(s - ssim_oracle(a, b)) < 1e-6);
        const Image blurred = gaussian_blur(a, 1.0);
        CHECK(std::abs(ssim(a, blurred) - ssim_oracle(a, blurred)) < 1e-6);
    }
}
