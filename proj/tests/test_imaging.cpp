// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include "avatar/error.hpp"
#include "avatar/imaging.hpp"
#include "avatar/metrics.hpp"
#include "avatar/provider.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>

using namespace avatar;

namespace {

double variance(const Image& img)
{
    double mean = 0.0;
    for (float v : img.data()) {
        mean += v;
    }
    mean /= static_cast<double>(img.size());
    double var = 0.0;
    for (float v : img.data()) {
        var += (v - mean) * (v - mean);
    }
    return var / static_cast<double>(img.size());
}

bool in_unit_range(const Image& img)
{
    for (float v : img.data()) {
        if (!(v >= 0.0f && v <= 1.0f)) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST_SUITE("imaging")
{
    TEST_CASE("mirror addressing")
    {
        CHECK(mirror_index(-1, 5) == 1);
        CHECK(mirror_index(-2, 5) == 2);
        CHECK(mirror_index(5, 5) == 3);
        CHECK(mirror_index(6, 5) == 2);
        CHECK(mirror_index(2, 5) == 2);
        CHECK(mirror_index(-3, 1) == 0);
    }

    TEST_CASE("gaussian blur examples")
    {
        const Image img = test::random_image(19, 13, 3, 1);
        CHECK(gaussian_blur(img, 0.0) == img);
        const Image flat(19, 13, 3, 0.42f);
        CHECK(test::max_abs_diff(gaussian_blur(flat, 2.3), flat) < 1e-6);
        CHECK(test::max_abs_diff(gaussian_blur_sized(flat, 9), flat) < 1e-6);
        CHECK_THROWS_AS(gaussian_blur(img, -1.0), ArgumentError);
        CHECK_THROWS_AS(gaussian_blur_sized(img, 4), ArgumentError);
    }

    TEST_CASE("blurred impulse is the sampled gaussian")
    {
        Image impulse(21, 21, 1, 0.0f);
        impulse.at(10, 10) = 1.0f;
        const Image out = gaussian_blur(impulse, 1.0);
        double norm = 0.0;
        for (int i = -3; i <= 3; ++i) {
            norm += std::exp(-0.5 * i * i);
        }
        double sum = 0.0, err = 0.0;
        for (int y = 0; y < 21; ++y) {
            for (int x = 0; x < 21; ++x) {
                const int dx = x - 10, dy = y - 10;
                const double expected = std::abs(dx) <= 3 && std::abs(dy) <= 3
                                            ? std::exp(-0.5 * (dx * dx + dy * dy)) / (norm * norm)
                                            : 0.0;
                err = std::max(err, std::abs(out.at(x, y) - expected));
                sum += out.at(x, y);
            }
        }
        CHECK(err < 1e-7);
        CHECK(std::abs(sum - 1.0) < 1e-6);
    }

    TEST_CASE("resample examples")
    {
        const Image img = test::random_image(9, 7, 3, 2);
        CHECK(resample(img, 9, 7) == img);
        const Image ramp(2, 1, 1, std::vector<float>{0.0f, 1.0f});
        const Image up = resample(ramp, 4, 1);
        CHECK(up.at(0, 0) == 0.0f);
        CHECK(up.at(3, 0) == 1.0f);
        for (int x = 1; x < 4; ++x) {
            CHECK(up.at(x, 0) >= up.at(x - 1, 0));
        }
        CHECK_THROWS_AS(resample(img, 0, 3), ArgumentError);
    }

    TEST_CASE("downsampling matches a double loop")
    {
        const Image img = test::random_image(8, 8, 2, 3);
        const Image out = resample(img, 4, 4);
        double err = 0.0;
        for (int y = 0; y < 4; ++y) {
            for (int x = 0; x < 4; ++x) {
                // Output centers land between source texels 2x and 2x + 1.
                for (int c = 0; c < 2; ++c) {
                    const double expected = 0.25 * (double(img.at(2 * x, 2 * y, c)) + img.at(2 * x + 1, 2 * y, c) +
                                                    img.at(2 * x, 2 * y + 1, c) + img.at(2 * x + 1, 2 * y + 1, c));
                    err = std::max(err, std::abs(out.at(x, y, c) - expected));
                }
            }
        }
        CHECK(err < 1e-6);
    }

    TEST_CASE("upsampling matches a double loop")
    {
        const Image img = test::random_image(5, 4, 1, 4);
        const Image out = resample(img, 13, 9);
        double err = 0.0;
        for (int y = 0; y < 9; ++y) {
            for (int x = 0; x < 13; ++x) {
                double sx = (x + 0.5) * 5.0 / 13.0 - 0.5, sy = (y + 0.5) * 4.0 / 9.0 - 0.5;
                sx = std::min(std::max(sx, 0.0), 4.0);
                sy = std::min(std::max(sy, 0.0), 3.0);
                const int x0 = int(sx), y0 = int(sy);
                const int x1 = std::min(x0 + 1, 4), y1 = std::min(y0 + 1, 3);
                const double ax = sx - x0, ay = sy - y0;
                const double expected = (1 - ax) * (1 - ay) * img.at(x0, y0) + ax * (1 - ay) * img.at(x1, y0) +
                                        (1 - ax) * ay * img.at(x0, y1) + ax * ay * img.at(x1, y1);
                err = std::max(err, std::abs(out.at(x, y) - expected));
            }
        }
        CHECK(err < 1e-6);
    }

    TEST_CASE("nonlocal means")
    {
        const Image flat(16, 16, 3, 0.3f);
        CHECK(test::max_abs_diff(nlm_denoise(flat, 0.1), flat) < 1e-6);
        const Image img = test::random_image(16, 16, 3, 5);
        CHECK(test::max_abs_diff(nlm_denoise(img, 1e-4), img) < 1e-6);
        CHECK(nlm_denoise(img, 0.0) == img);

        const Image noisy = add_gaussian_noise(Image(48, 48, 1, 0.5f), 0.05, 6);
        const Image den = nlm_denoise(noisy, 0.08);
        CHECK(variance(den) < variance(noisy));
        CHECK(in_unit_range(den));
        CHECK_THROWS_AS(nlm_denoise(img, -1.0), ArgumentError);
    }

    TEST_CASE("gaussian noise")
    {
        const Image img = test::random_image(16, 16, 3, 7);
        CHECK(add_gaussian_noise(img, 0.0, 1) == img);
        CHECK(add_gaussian_noise(img, 0.1, 1) == add_gaussian_noise(img, 0.1, 1));
        CHECK_FALSE(add_gaussian_noise(img, 0.1, 1) == add_gaussian_noise(img, 0.1, 2));
        CHECK(in_unit_range(add_gaussian_noise(img, 0.5, 3)));

        const int n = 256;
        const double sigma = 0.05;
        const Image flat(n, n, 1, 0.5f);
        const Image out = add_gaussian_noise(flat, sigma, 8);
        double mean = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            mean += out.data()[i] - 0.5;
        }
        mean /= static_cast<double>(out.size());
        CHECK(std::abs(mean) < 3.0 * sigma / std::sqrt(double(out.size())));
    }

    TEST_CASE("degradation chain")
    {
        const Image img = test::random_image(40, 30, 3, 9);
        const DegradationParams identity{0.0, 1.0, 0.0, 0.0, 5};
        CHECK(test::max_abs_diff(degrade(img, identity), img) < 1e-5);

        const DegradationParams p{};
        const Image a = degrade(img, p), b = degrade(img, p);
        CHECK(a == b);
        CHECK(a.width() == 40);
        CHECK(a.height() == 30);
        CHECK(in_unit_range(a));

        const Image& texture = test::toy_model(256).mean_texture;
        const double degraded = psnr(degrade(texture, p), texture);
        CHECK(psnr(texture, texture) == std::numeric_limits<double>::infinity());
        CHECK(degraded < 40.0);

        CHECK_THROWS_AS(degrade(img, DegradationParams{1.0, 0.5, 0.0, 0.0, 0}), ArgumentError);
        CHECK_THROWS_AS(degrade(img, DegradationParams{-1.0, 2.0, 0.0, 0.0, 0}), ArgumentError);
    }

    TEST_CASE("degradation sampling")
    {
        DegradationRanges fixed;
        fixed.blur_sigma = {1.5, 1.5};
        fixed.down_factor = {3.0, 3.0};
        fixed.noise_sigma = {0.01, 0.01};
        fixed.nlm_strength = {0.05, 0.05};
        const DegradationParams f = sample_degradation(fixed, 3);
        CHECK(f.blur_sigma == 1.5);
        CHECK(f.down_factor == 3.0);
        CHECK(f.noise_sigma == 0.01);
        CHECK(f.nlm_strength == 0.05);

        const DegradationRanges r;
        const DegradationParams s1 = sample_degradation(r, 77), s2 = sample_degradation(r, 77);
        CHECK(s1.blur_sigma == s2.blur_sigma);
        CHECK(s1.nlm_strength == s2.nlm_strength);
        CHECK(s1.seed == 77);

        const int n = 10000;
        double sums[4] = {0, 0, 0, 0};
        bool inside = true;
        for (int i = 0; i < n; ++i) {
            const DegradationParams p = sample_degradation(r, static_cast<std::uint64_t>(i));
            const double v[4] = {p.blur_sigma, p.down_factor, p.noise_sigma, p.nlm_strength};
            const Range* ranges[4] = {&r.blur_sigma, &r.down_factor, &r.noise_sigma, &r.nlm_strength};
            for (int k = 0; k < 4; ++k) {
                inside = inside && v[k] >= ranges[k]->min && v[k] <= ranges[k]->max;
                sums[k] += v[k];
            }
        }
        CHECK(inside);
        const Range* ranges[4] = {&r.blur_sigma, &r.down_factor, &r.noise_sigma, &r.nlm_strength};
        for (int k = 0; k < 4; ++k) {
            const double mid = 0.5 * (ranges[k]->min + ranges[k]->max);
            CHECK(std::abs(sums[k] / n - mid) < 0.01 * mid);
        }
    }

    TEST_CASE("degradation range files")
    {
        TempDir dir;
        std::ofstream(dir.path() / "r.json") << R"({"blur_sigma": [1, 2], "noise_sigma": [0, 0.1]})";
        const DegradationRanges r = load_degradation_ranges(dir.path() / "r.json");
        CHECK(r.blur_sigma.max == 2.0);
        CHECK(r.noise_sigma.min == 0.0);
        CHECK(r.down_factor.min == 2.0);
        std::ofstream(dir.path() / "bad.json") << R"({"down_factor": [0.5, 2]})";
        CHECK_THROWS_AS(load_degradation_ranges(dir.path() / "bad.json"), ConfigError);
        std::ofstream(dir.path() / "worse.json") << R"({"blur_sigma": 3})";
        CHECK_THROWS_AS(load_degradation_ranges(dir.path() / "worse.json"), ConfigError);
    }
}
