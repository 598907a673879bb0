// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include "avatar/morphable.hpp"
#include "avatar/toy_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace avatar::test {

Image random_image(int width, int height, int channels, std::uint64_t seed, float lo, float hi)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(lo, hi);
    Image img(width, height, channels);
    for (float& v : img.data()) {
        v = dist(rng);
    }
    return img;
}

double max_abs_diff(const Image& a, const Image& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(static_cast<double>(a.data()[i]) - b.data()[i]));
    }
    return m;
}

const MorphableModel& toy_model(int uv_resolution)
{
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<MorphableModel>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[uv_resolution];
    if (!slot) {
        slot = std::make_unique<MorphableModel>(make_toy_model(ToyModelOptions{uv_resolution}));
    }
    return *slot;
}

const FixtureSet& fixtures(int image_size, int uv_resolution, FixtureLighting lighting)
{
    static std::mutex mutex;
    static std::map<std::tuple<int, int, int>, std::unique_ptr<FixtureSet>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{image_size, uv_resolution, static_cast<int>(lighting)}];
    if (!slot) {
        FixtureOptions options;
        options.image_size = image_size;
        options.uv_resolution = uv_resolution;
        options.lighting = lighting;
        slot = std::make_unique<FixtureSet>(make_fixtures(options));
    }
    return *slot;
}

std::vector<FitView> fit_views(const FixtureSet& set)
{
    std::vector<FitView> views;
    for (const auto& v : set.views) {
        views.push_back(FitView{v.image, v.landmarks, v.mask});
    }
    return views;
}

namespace {

int reflect(int i, int n)
{
    while (i < 0 || i >= n) {
        if (i < 0) {
            i = -i;
        }
        if (i >= n) {
            i = 2 * (n - 1) - i;
        }
    }
    return i;
}

} // namespace

double bse_oracle(const Image& texture, int kernel_size)
{
    const int w = texture.width(), h = texture.height();
    const int r = kernel_size / 2;
    const double sigma = kernel_size / 6.0;
    std::vector<double> k1(static_cast<std::size_t>(kernel_size));
    double norm = 0.0;
    for (int i = 0; i < kernel_size; ++i) {
        k1[i] = std::exp(-double(i - r) * double(i - r) / (2.0 * sigma * sigma));
        norm += k1[i];
    }
    std::vector<double> luma(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            luma[y * w + x] = 0.299 * texture.at(x, y, 0) + 0.587 * texture.at(x, y, 1) + 0.114 * texture.at(x, y, 2);
        }
    }
    // Direct 2D convolution with the outer-product kernel.
    std::vector<double> blurred(luma.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
                const int yy = reflect(y + dy, h);
                for (int dx = -r; dx <= r; ++dx) {
                    acc += k1[dy + r] * k1[dx + r] * luma[yy * w + reflect(x + dx, w)];
                }
            }
            blurred[y * w + x] = acc / (norm * norm);
        }
    }
    double sum = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            sum += std::abs(blurred[y * w + x] - blurred[y * w + (w - 1 - x)]);
        }
    }
    return sum / (double(w) * h);
}

double psnr_oracle(const Image& a, const Image& b)
{
    double se = 0.0;
    int n = 0;
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            for (int c = 0; c < a.channels(); ++c) {
                const double d = double(a.at(x, y, c)) - double(b.at(x, y, c));
                se += d * d;
                ++n;
            }
        }
    }
    return -10.0 * std::log10(se / n);
}

namespace {

constexpr int kSize = 32;
constexpr double kStep = 1e-3;

struct GradientScene
{
    Mesh mesh;
    CameraParams camera;
    UVMap texture;
    Illumination illumination;
    Image weights; // G masked to interior pixels
};

double weighted_sum(const GradientScene& s, const Mesh& mesh, const UVMap& texture, const Illumination& illum)
{
    const RenderOutput out = render(mesh, s.camera, texture, illum, kSize, kSize);
    double sum = 0.0;
    for (std::size_t i = 0; i < out.color.size(); ++i) {
        sum += static_cast<double>(s.weights.data()[i]) * out.color.data()[i];
    }
    return sum;
}

double relative_error(double analytic, double numeric, double floor = 1e-12)
{
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

} // namespace

GradientReport check_render_gradients(std::uint64_t seed)
{
    const MorphableModel& model = toy_model(32);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    GradientScene s;
    ShapeParams shape = ShapeParams::zeros(model);
    for (Eigen::Index i = 0; i < shape.identity.size(); ++i) {
        shape.identity[i] = 0.3 * u(rng);
    }
    s.mesh = decode_shape(model, shape);
    s.camera.rotation = Eigen::Vector3d(0.1 * u(rng), 0.2 * u(rng), 0.05 * u(rng));
    s.camera.scale = 0.36 * kSize;
    s.camera.translation = Eigen::Vector2d(kSize / 2.0 + u(rng), kSize / 2.0 + u(rng));
    TextureParams tex = TextureParams::zeros(model);
    for (Eigen::Index i = 0; i < tex.coefficients.size(); ++i) {
        tex.coefficients[i] = 0.3 * u(rng);
    }
    s.texture = decode_texture(model, tex);
    // Mild light so no shaded value reaches the clamp.
    s.illumination = Illumination::directional(0.6, 0.2, Eigen::Vector3d(u(rng), u(rng), -1.0));
    for (int c = 0; c < 3; ++c) {
        for (int k = 4; k < kShCoefficients; ++k) {
            s.illumination.coefficient(c, k) += 0.05 * u(rng);
        }
    }

    const RenderOutput base = render(s.mesh, s.camera, s.texture, s.illumination, kSize, kSize);
    s.weights = Image(kSize, kSize, 3);
    std::vector<std::uint8_t> interior(static_cast<std::size_t>(kSize) * kSize, 0);
    constexpr int kMargin = 2;
    constexpr double kDepthJump = 0.3;
    for (int y = kMargin; y < kSize - kMargin; ++y) {
        for (int x = kMargin; x < kSize - kMargin; ++x) {
            bool ok = true;
            for (int dy = -kMargin; dy <= kMargin && ok; ++dy) {
                for (int dx = -kMargin; dx <= kMargin && ok; ++dx) {
                    const std::size_t p = base.pixel(x + dx, y + dy);
                    ok = base.coverage[p] != 0;
                    // A depth jump between neighbours marks an occlusion boundary.
                    if (ok && dx < kMargin) {
                        ok = std::abs(base.depth[base.pixel(x + dx + 1, y + dy)] - base.depth[p]) < kDepthJump;
                    }
                    if (ok && dy < kMargin) {
                        ok = std::abs(base.depth[base.pixel(x + dx, y + dy + 1)] - base.depth[p]) < kDepthJump;
                    }
                }
            }
            if (!ok) {
                continue;
            }
            interior[base.pixel(x, y)] = 1;
            for (int c = 0; c < 3; ++c) {
                s.weights.at(x, y, c) = static_cast<float>(0.5 * (1.0 + u(rng)));
            }
        }
    }

    const RenderGradients g = render_backward(base, s.mesh, s.texture, s.illumination, s.weights);
    GradientReport report;

    std::vector<double> sh_fd(s.illumination.sh.size());
    double sh_scale = 0.0;
    for (std::size_t k = 0; k < sh_fd.size(); ++k) {
        Illumination plus = s.illumination, minus = s.illumination;
        plus.sh[k] += kStep;
        minus.sh[k] -= kStep;
        sh_fd[k] = (weighted_sum(s, s.mesh, s.texture, plus) - weighted_sum(s, s.mesh, s.texture, minus)) /
                   (2.0 * kStep);
        sh_scale = std::max(sh_scale, std::abs(sh_fd[k]));
    }
    // Float color storage puts a noise floor under the differences; coefficients whose gradient
    // nearly cancels are measured against 1% of the largest one.
    for (std::size_t k = 0; k < sh_fd.size(); ++k) {
        report.sh_max_rel = std::max(report.sh_max_rel, relative_error(g.sh[k], sh_fd[k], 0.01 * sh_scale));
        ++report.sh_checked;
    }

    // The texels with the largest analytic gradients, one per channel run.
    std::vector<std::size_t> order(g.texture.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::partial_sort(order.begin(), order.begin() + 24, order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(g.texture[a]) > std::abs(g.texture[b]);
    });
    for (int i = 0; i < 24; ++i) {
        const std::size_t t = order[static_cast<std::size_t>(i)];
        UVMap plus = s.texture, minus = s.texture;
        plus.color.data()[t] += static_cast<float>(kStep);
        minus.color.data()[t] -= static_cast<float>(kStep);
        const double h = static_cast<double>(plus.color.data()[t]) - minus.color.data()[t];
        const double fd =
            (weighted_sum(s, s.mesh, plus, s.illumination) - weighted_sum(s, s.mesh, minus, s.illumination)) / h;
        report.texture_max_rel = std::max(report.texture_max_rel, relative_error(g.texture[t], fd));
        ++report.texture_checked;
    }

    // Vertices whose projection sits well inside the interior region.
    const Projection proj = project(s.mesh.vertices, s.camera);
    for (std::size_t v = 0; v < s.mesh.vertices.size() && report.vertex_checked < 12; v += 7) {
        const int px = static_cast<int>(std::floor(proj.pixels[v].x()));
        const int py = static_cast<int>(std::floor(proj.pixels[v].y()));
        bool inside = px >= 1 && py >= 1 && px < kSize - 1 && py < kSize - 1;
        for (int dy = -1; dy <= 1 && inside; ++dy) {
            for (int dx = -1; dx <= 1 && inside; ++dx) {
                inside = interior[base.pixel(px + dx, py + dy)] != 0;
            }
        }
        if (!inside || proj.depth[v] > 0.0) {
            continue;
        }
        const auto central = [&](int axis, double h) {
            Mesh plus = s.mesh, minus = s.mesh;
            plus.vertices[v][axis] += h;
            minus.vertices[v][axis] -= h;
            return (weighted_sum(s, plus, s.texture, s.illumination) -
                    weighted_sum(s, minus, s.texture, s.illumination)) /
                   (2.0 * h);
        };
        // Bilinear texel boundaries and edges between the vertex's own triangles make the sum
        // piecewise smooth. A step pair whose differences disagree has straddled such a kink.
        Eigen::Vector2d fd;
        bool smooth = true;
        for (int axis = 0; axis < 2 && smooth; ++axis) {
            fd[axis] = central(axis, kStep);
            smooth = std::abs(central(axis, 2.0 * kStep) - fd[axis]) <= 5e-4 + 1e-3 * std::abs(fd[axis]);
        }
        if (!smooth) {
            ++report.vertex_skipped;
            continue;
        }
        const Eigen::Vector2d analytic = g.vertices[v].head<2>();
        const double denom = std::max({analytic.norm(), fd.norm(), 1e-12});
        report.vertex_max_rel = std::max(report.vertex_max_rel, (analytic - fd).norm() / denom);
        ++report.vertex_checked;
    }
    return report;
}

} // namespace avatar::test
