// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include "avatar/error.hpp"
#include "avatar/fit_io.hpp"
#include "avatar/lbfgs.hpp"
#include "avatar/losses.hpp"
#include "avatar/morphable.hpp"
#include "avatar/provider.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

using namespace avatar;

namespace {

ViewParams front_params(const MorphableModel& m)
{
    ViewParams v;
    v.camera.scale = 90.0;
    v.camera.translation = Eigen::Vector2d(128, 128);
    v.camera.rotation = Eigen::Vector3d(0.05, -0.2, 0.02);
    v.expression = Eigen::VectorXd::Zero(m.expression_count());
    v.illumination = Illumination::ambient(1.0);
    return v;
}

LandmarkSet project_landmarks(const MorphableModel& m, const Eigen::VectorXd& identity, const ViewParams& v)
{
    const auto pts = landmark_positions(m, ShapeParams{identity, v.expression});
    LandmarkSet lm;
    lm.points = project(pts, v.camera).pixels;
    lm.confidence.assign(lm.points.size(), 1.0);
    return lm;
}

RenderOutput full_raster(int w, int h, float value)
{
    RenderOutput r;
    r.width = w;
    r.height = h;
    r.color = Image(w, h, 3, value);
    r.coverage.assign(static_cast<std::size_t>(w) * h, 1);
    r.triangle_id.assign(r.coverage.size(), 0);
    return r;
}

class ConstantProvider final : public EmbeddingProvider
{
public:
    std::vector<Eigen::VectorXd> embed(std::span<const Image> images) override
    {
        return std::vector<Eigen::VectorXd>(images.size(), Eigen::Vector3d(0.1, 0.2, 0.3));
    }
};

Image erode(const Image& mask, int radius)
{
    Image out(mask.width(), mask.height(), 1);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            float v = 1.0f;
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int xx = x + dx, yy = y + dy;
                    const bool in = xx >= 0 && yy >= 0 && xx < mask.width() && yy < mask.height();
                    v = std::min(v, in ? mask.at(xx, yy) : 0.0f);
                }
            }
            out.at(x, y) = v;
        }
    }
    return out;
}

} // namespace

TEST_SUITE("fit")
{
    TEST_CASE("landmark loss is zero at the generating parameters")
    {
        const MorphableModel& m = test::toy_model(32);
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(-1, 1);
        Eigen::VectorXd id(m.identity_count());
        for (auto& c : id) {
            c = 0.5 * u(rng);
        }
        ViewParams v = front_params(m);
        v.expression[1] = 0.3;
        const LandmarkSet lm = project_landmarks(m, id, v);
        CHECK(std::abs(loss_landmark(m, id, v, lm, 256, 256).value) < 1e-10);

        LandmarkSet zero = lm;
        for (auto& p : zero.points) {
            p += Eigen::Vector2d(5, -7);
        }
        std::fill(zero.confidence.begin(), zero.confidence.end(), 0.0);
        CHECK(loss_landmark(m, id, v, zero, 256, 256).value == 0.0);

        LandmarkSet short_set = lm;
        short_set.points.pop_back();
        short_set.confidence.pop_back();
        CHECK_THROWS_AS(loss_landmark(m, id, v, short_set, 256, 256), DimensionError);
    }

    TEST_CASE("single landmark offset by (3, 4)")
    {
        MorphableModel m = test::toy_model(32);
        m.landmark_vertex_ids = {m.landmark_vertex_ids[10]};
        const Eigen::VectorXd id = Eigen::VectorXd::Zero(m.identity_count());
        const ViewParams v = front_params(m);
        LandmarkSet lm = project_landmarks(m, id, v);
        lm.points[0] += Eigen::Vector2d(3, 4);
        const double d2 = 200.0 * 200.0 + 150.0 * 150.0;
        CHECK(loss_landmark(m, id, v, lm, 200, 150).value == doctest::Approx(25.0 / d2).epsilon(1e-9));
    }

    TEST_CASE("landmark loss gradients match central differences")
    {
        const MorphableModel& m = test::toy_model(32);
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> u(-1, 1);
        Eigen::VectorXd id(m.identity_count());
        for (auto& c : id) {
            c = 0.3 * u(rng);
        }
        ViewParams v = front_params(m);
        LandmarkSet lm = project_landmarks(m, id, v);
        for (auto& p : lm.points) {
            p += Eigen::Vector2d(4 * u(rng), 4 * u(rng));
        }
        for (auto& c : lm.confidence) {
            c = 0.5 + 0.5 * std::abs(u(rng));
        }
        const LandmarkLoss g = loss_landmark(m, id, v, lm, 256, 256);
        const double h = 1e-5;
        const auto value = [&](const Eigen::VectorXd& i2, const ViewParams& v2) {
            return loss_landmark(m, i2, v2, lm, 256, 256).value;
        };
        const auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12}); };
        for (int k = 0; k < m.identity_count(); ++k) {
            Eigen::VectorXd p = id, q = id;
            p[k] += h;
            q[k] -= h;
            CHECK(rel(g.d_identity[k], (value(p, v) - value(q, v)) / (2 * h)) < 1e-5);
        }
        for (int k = 0; k < 3; ++k) {
            ViewParams p = v, q = v;
            p.camera.rotation[k] += h;
            q.camera.rotation[k] -= h;
            CHECK(rel(g.d_rotation[k], (value(id, p) - value(id, q)) / (2 * h)) < 1e-5);
        }
        for (int k = 0; k < m.expression_count(); ++k) {
            ViewParams p = v, q = v;
            p.expression[k] += h;
            q.expression[k] -= h;
            CHECK(rel(g.d_expression[k], (value(id, p) - value(id, q)) / (2 * h)) < 1e-5);
        }
        ViewParams p = v, q = v;
        p.camera.scale += h;
        q.camera.scale -= h;
        CHECK(rel(g.d_scale, (value(id, p) - value(id, q)) / (2 * h)) < 1e-5);
        p = v;
        q = v;
        p.camera.translation.x() += h;
        q.camera.translation.x() -= h;
        CHECK(rel(g.d_translation.x(), (value(id, p) - value(id, q)) / (2 * h)) < 1e-5);
    }

    TEST_CASE("rgb loss examples")
    {
        const RenderOutput a = full_raster(8, 6, 0.25f);
        CHECK(loss_rgb(a, a.color).value == 0.0);
        const RgbLoss l = loss_rgb(a, Image(8, 6, 3, 0.75f));
        CHECK(l.value == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(l.pixel_count == 48);
        CHECK_THROWS_AS(loss_rgb(a, Image(8, 5, 3)), DimensionError);
        CHECK_THROWS_AS(loss_rgb(a, a.color, &a.color), DimensionError);
    }

    TEST_CASE("rgb loss matches a double loop")
    {
        for (std::uint64_t seed : {3u, 4u, 5u}) {
            RenderOutput r = full_raster(20, 14, 0.0f);
            r.color = test::random_image(20, 14, 3, seed);
            const Image src = test::random_image(20, 14, 3, seed + 10);
            const Image mask = test::random_image(20, 14, 1, seed + 20);
            std::mt19937_64 rng(seed);
            for (auto& c : r.coverage) {
                c = rng() % 4 != 0;
            }
            double sum = 0.0;
            int n = 0;
            for (int y = 0; y < 14; ++y) {
                for (int x = 0; x < 20; ++x) {
                    if (!r.coverage[y * 20 + x] || mask.at(x, y) <= 0.5f) {
                        continue;
                    }
                    ++n;
                    for (int c = 0; c < 3; ++c) {
                        sum += std::abs(double(r.color.at(x, y, c)) - src.at(x, y, c));
                    }
                }
            }
            CHECK(std::abs(loss_rgb(r, src, &mask).value - sum / (3.0 * n)) < 1e-6);
        }
    }

    TEST_CASE("identity loss")
    {
        const Image a = Image(4, 4, 3, 0.2f), b = Image(4, 4, 3, 0.6f);
        const IdentityLoss off = loss_identity(a, b, nullptr);
        CHECK_FALSE(off.enabled);
        CHECK(off.value == 0.0);

        ConstantProvider constant;
        CHECK(loss_identity(a, b, &constant).value == 0.0);

        // Mean colors on the 8-bit grid so the stub sees exactly these values.
        Image c(6, 4, 3), d(6, 4, 3);
        double mean_c[3] = {0, 0, 0}, mean_d[3] = {0, 0, 0};
        std::mt19937_64 rng(6);
        for (int y = 0; y < 4; ++y) {
            for (int x = 0; x < 6; ++x) {
                for (int ch = 0; ch < 3; ++ch) {
                    c.at(x, y, ch) = static_cast<float>(rng() % 256) / 255.0f;
                    d.at(x, y, ch) = static_cast<float>(rng() % 256) / 255.0f;
                    mean_c[ch] += c.at(x, y, ch) / 24.0;
                    mean_d[ch] += d.at(x, y, ch) / 24.0;
                }
            }
        }
        double expected = 0.0;
        for (int ch = 0; ch < 3; ++ch) {
            expected += (mean_c[ch] - mean_d[ch]) * (mean_c[ch] - mean_d[ch]);
        }
        ExternalEmbeddingProvider stub(STUB_EMBEDDER);
        const IdentityLoss l = loss_identity(c, d, &stub);
        CHECK(l.enabled);
        CHECK(l.value == doctest::Approx(expected).epsilon(1e-6));
    }

    TEST_CASE("provider failures are configuration errors carrying stderr")
    {
        ExternalEmbeddingProvider failing("echo embedder-broke >&2; exit 4");
        const Image a(4, 4, 3, 0.5f);
        try {
            loss_identity(a, a, &failing);
            FAIL("failing provider accepted");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("embedder-broke") != std::string::npos);
        }
        ExternalEmbeddingProvider junk("while read l; do echo nan-ish; done");
        CHECK_THROWS_AS(loss_identity(a, a, &junk), ConfigError);
        ExternalEmbeddingProvider silent("cat > /dev/null");
        CHECK_THROWS_AS(loss_identity(a, a, &silent), ConfigError);
    }

    TEST_CASE("regularizer")
    {
        const Eigen::VectorXd z8 = Eigen::VectorXd::Zero(8), z4 = Eigen::VectorXd::Zero(4);
        const std::vector<Eigen::VectorXd> ez = {z4, z4};
        CHECK(regularizer(z8, ez, z8).value == 0.0);

        Eigen::VectorXd e1 = z8;
        e1[0] = 1.0;
        CHECK(regularizer(e1, ez, z8).value == 1.0);
        CHECK(regularizer(e1, ez, z8, {2.5, 1.0, 1.0}).value == 2.5);

        std::mt19937_64 rng(7);
        std::normal_distribution<double> n(0, 1);
        Eigen::VectorXd id(8), tex(8);
        std::vector<Eigen::VectorXd> ex(3, Eigen::VectorXd(4));
        for (auto& v : id) v = n(rng);
        for (auto& v : tex) v = n(rng);
        for (auto& e : ex) {
            for (auto& v : e) v = n(rng);
        }
        const RegularizerWeights w{0.3, 0.7, 1.1};
        const RegularizerTerm r = regularizer(id, ex, tex, w);
        const double expected = w.identity * id.dot(id) + w.texture * tex.dot(tex) + w.expression * ex[0].dot(ex[0]) +
                                w.expression * ex[1].dot(ex[1]) + w.expression * ex[2].dot(ex[2]);
        CHECK(r.value == expected);
        CHECK(r.d_identity == 2.0 * w.identity * id);
        CHECK(r.d_expressions.size() == 3);
    }

    TEST_CASE("lbfgs minimizes a Rosenbrock valley")
    {
        const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
            const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
            g.resize(2);
            g[0] = -2.0 * a - 400.0 * x[0] * b;
            g[1] = 200.0 * b;
            return a * a + 100.0 * b * b;
        };
        LbfgsSettings s;
        s.max_iterations = 500;
        s.tolerance = 1e-10;
        const LbfgsResult r = minimize_lbfgs(f, Eigen::Vector2d(-1.2, 1.0), s);
        CHECK(r.converged());
        CHECK((r.x - Eigen::Vector2d(1, 1)).norm() < 1e-4);
        for (std::size_t i = 1; i < r.history.size(); ++i) {
            CHECK(r.history[i] <= r.history[i - 1]);
        }
        CHECK(r.history.size() == static_cast<std::size_t>(r.iterations) + 1);
    }

    TEST_CASE("lbfgs edge cases")
    {
        const Objective bad = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
            g = Eigen::VectorXd::Zero(x.size());
            return std::nan("");
        };
        CHECK_THROWS_AS(minimize_lbfgs(bad, Eigen::Vector2d(0, 0)), NumericalError);

        const Objective quad = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
            g = 2.0 * x;
            return x.squaredNorm();
        };
        LbfgsSettings s;
        s.max_iterations = 0;
        const LbfgsResult none = minimize_lbfgs(quad, Eigen::Vector2d(3, 4), s);
        CHECK(none.x == Eigen::Vector2d(3, 4));
        CHECK_FALSE(none.converged());

        s.max_iterations = 50;
        s.change_scale = Eigen::Vector3d(1, 1, 1);
        CHECK_THROWS_AS(minimize_lbfgs(quad, Eigen::Vector2d(3, 4), s), DimensionError);
    }

    TEST_CASE("problem validation")
    {
        const FixtureSet& fx = test::fixtures(64, 32);
        CHECK_THROWS_AS(make_fit_problem(fx.model, {}), ArgumentError);
        std::vector<FitView> views = test::fit_views(fx);
        views[1].landmarks.points.pop_back();
        views[1].landmarks.confidence.pop_back();
        CHECK_THROWS_AS(make_fit_problem(fx.model, views), DimensionError);
        views = test::fit_views(fx);
        views[0].mask = Image(10, 10, 1);
        CHECK_THROWS_AS(make_fit_problem(fx.model, views), DimensionError);
        LossWeights w;
        w.rgb = -1.0;
        CHECK_THROWS_AS(make_fit_problem(fx.model, test::fit_views(fx), w), ArgumentError);
    }

    TEST_CASE("initialization overlaps the landmarks")
    {
        const FixtureSet& fx = test::fixtures(64, 32);
        const FitProblem p = make_fit_problem(fx.model, test::fit_views(fx));
        REQUIRE(p.view_params.size() == 3);
        CHECK(p.shared_identity.isZero(0.0));
        CHECK(p.texture.coefficients.isZero(0.0));
        for (std::size_t k = 0; k < 3; ++k) {
            const ViewParams& v = p.view_params[k];
            CHECK(v.camera.rotation.isZero(0.0));
            CHECK(v.expression.isZero(0.0));
            // The initial landmark projection shares its centroid with the detected landmarks.
            const auto model_points = landmark_positions(fx.model, ShapeParams::zeros(fx.model));
            Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
            Eigen::Vector2d projected = Eigen::Vector2d::Zero();
            for (std::size_t j = 0; j < model_points.size(); ++j) {
                centroid += fx.views[k].landmarks.points[j] / double(model_points.size());
                projected += (v.camera.scale * model_points[j].head<2>() + v.camera.translation) /
                             double(model_points.size());
            }
            CHECK((projected - centroid).norm() < 1e-9);
            CHECK(v.camera.scale / fx.truth.views[k].params.camera.scale == doctest::Approx(1.0).epsilon(0.2));
        }
    }

    TEST_CASE("objective gradient matches central differences")
    {
        const FixtureSet& fx = test::fixtures(64, 32);
        // Gently rotated views with masks eroded away from the silhouette, so a small step never
        // moves a coverage boundary across an evaluated pixel.
        GroundTruth truth = fx.truth;
        const double yaws[3] = {-0.15, 0.0, 0.15};
        std::vector<FitView> views;
        for (std::size_t k = 0; k < 3; ++k) {
            truth.views[k].params.camera.rotation.y() = yaws[k];
            const SyntheticView sv = render_view(fx.model, truth, k, fx.albedo, 64);
            views.push_back(FitView{sv.image, sv.landmarks, erode(sv.mask, 3)});
        }
        LossWeights w;
        w.regularization = 0.05;
        FitProblem p = make_fit_problem(fx.model, views, w);
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(-1, 1);
        FitState state{truth.identity, truth.texture, {}};
        for (auto& c : state.identity) c += 0.1 * u(rng);
        for (auto& c : state.texture.coefficients) c += 0.1 * u(rng);
        for (std::size_t k = 0; k < 3; ++k) {
            ViewParams v = truth.views[k].params;
            v.camera.rotation += Eigen::Vector3d(0.02 * u(rng), 0.02 * u(rng), 0.02 * u(rng));
            v.camera.translation += Eigen::Vector2d(0.5 * u(rng), 0.5 * u(rng));
            v.camera.scale *= 1.0 + 0.02 * u(rng);
            for (auto& c : v.expression) c += 0.1 * u(rng);
            for (auto& c : v.illumination.sh) c += 0.02 * u(rng);
            state.views.push_back(v);
        }
        const FitObjective objective(fx.model, p);
        const Eigen::VectorXd x = objective.pack(state);
        Eigen::VectorXd g;
        LossBreakdown parts;
        objective.evaluate(x, g, &parts);
        CHECK(parts.rgb > 0.0);
        CHECK(parts.landmark > 0.0);

        const FitState round = objective.unpack(x);
        CHECK((round.identity - state.identity).norm() < 1e-12);
        CHECK(std::abs(round.views[2].camera.scale - state.views[2].camera.scale) < 1e-9);

        Eigen::VectorXd fd(x.size()), scratch;
        const double h = 1e-4;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            Eigen::VectorXd xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            fd[i] = (objective.evaluate(xp, scratch) - objective.evaluate(xm, scratch)) / (2 * h);
        }
        const double rel = (g - fd).norm() / fd.norm();
        INFO("relative gradient error " << rel);
        CHECK(rel < 1e-2);
    }

    TEST_CASE("zero iterations return the initialization")
    {
        const FixtureSet& fx = test::fixtures(64, 32);
        OptimizerSettings o;
        o.max_iters = 0;
        const FitProblem p = make_fit_problem(fx.model, test::fit_views(fx), {}, o);
        const FitResult r = optimize(p, fx.model);
        CHECK_FALSE(r.converged);
        CHECK(r.iterations == 0);
        CHECK(r.shared_identity == p.shared_identity);
        CHECK(r.texture.coefficients == p.texture.coefficients);
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK((r.view_params[k].camera.translation - p.view_params[k].camera.translation).norm() < 1e-9);
            CHECK(std::abs(r.view_params[k].camera.scale - p.view_params[k].camera.scale) < 1e-9);
            CHECK(r.view_params[k].camera.rotation.norm() < 1e-12);
        }
    }

    TEST_CASE("regularizer-only fitting shrinks every coefficient")
    {
        const FixtureSet& fx = test::fixtures(64, 32);
        LossWeights w{0.0, 0.0, 0.0, 1.0};
        FitProblem p = make_fit_problem(fx.model, test::fit_views(fx), w);
        p.shared_identity = fx.truth.identity;
        p.texture = fx.truth.texture;
        for (std::size_t k = 0; k < 3; ++k) {
            p.view_params[k].expression = fx.truth.views[k].params.expression;
        }
        const auto norm = [](const FitResult& r) {
            double n = r.shared_identity.squaredNorm() + r.texture.coefficients.squaredNorm();
            for (const auto& v : r.view_params) {
                n += v.expression.squaredNorm();
            }
            return std::sqrt(n);
        };
        double previous = std::numeric_limits<double>::infinity();
        for (int iters = 0; iters <= 8; ++iters) {
            p.optimizer.max_iters = iters;
            const FitResult r = optimize(p, fx.model);
            CHECK(r.loss.total <= previous);
            previous = r.loss.total;
        }
        p.optimizer.max_iters = 200;
        const FitResult done = optimize(p, fx.model);
        CHECK(done.converged);
        CHECK(norm(done) < 1e-3);
    }

    TEST_CASE("landmark-only fit recovers pose and identity")
    {
        const FixtureSet& fx = test::fixtures(256, 32);
        LossWeights w;
        w.rgb = 0.0;
        w.identity = 0.0;
        const FitResult r = optimize(make_fit_problem(fx.model, test::fit_views(fx), w), fx.model);
        CHECK(r.converged);
        CHECK(r.shared_identity.size() == fx.model.identity_count());
        CHECK((r.shared_identity - fx.truth.identity).cwiseAbs().maxCoeff() < 0.05);
        for (std::size_t k = 0; k < 3; ++k) {
            const CameraParams& a = r.view_params[k].camera;
            const CameraParams& b = fx.truth.views[k].params.camera;
            CHECK((a.translation - b.translation).cwiseAbs().maxCoeff() < 0.5);
        }
        for (std::size_t i = 1; i < r.loss_history.size(); ++i) {
            CHECK(r.loss_history[i] <= r.loss_history[i - 1]);
        }
        // Differently posed targets yield distinct per-view expressions.
        for (std::size_t a = 0; a < 3; ++a) {
            for (std::size_t b = a + 1; b < 3; ++b) {
                CHECK((r.view_params[a].expression - r.view_params[b].expression).norm() > 1e-2);
            }
        }
        CHECK(r.loss.landmark >= 0.0);
        CHECK(std::isfinite(r.loss.total));
    }

    TEST_CASE("identical views share the single-view identity")
    {
        const FixtureSet& fx = test::fixtures(96, 32);
        const FitView front{fx.views[1].image, fx.views[1].landmarks, fx.views[1].mask};
        const FitResult one = optimize(make_fit_problem(fx.model, {front}), fx.model);
        const FitResult three = optimize(make_fit_problem(fx.model, {front, front, front}), fx.model);
        CHECK(three.shared_identity.size() == one.shared_identity.size());
        CHECK((three.shared_identity - one.shared_identity).cwiseAbs().maxCoeff() < 1e-4);
    }

    TEST_CASE("fit configuration and result files")
    {
        TempDir dir;
        {
            std::ofstream cfg(dir.path() / "fit.json");
            cfg << R"({"weights": {"landmark": 20}, "optimizer": {"max_iters": 7},
                       "views": [{"image": "a.ppm", "landmarks": "a.txt"}]})";
        }
        const FitConfig c = load_fit_config(dir.path() / "fit.json");
        CHECK(c.weights.landmark == 20.0);
        CHECK(c.weights.rgb == 1.0);
        CHECK(c.weights.regularization == 1e-3);
        CHECK(c.optimizer.max_iters == 7);
        CHECK(c.optimizer.history_size == 10);
        REQUIRE(c.views.size() == 1);
        CHECK(c.views[0].image == dir.path() / "a.ppm");
        CHECK_FALSE(c.views[0].mask.has_value());

        {
            std::ofstream cfg(dir.path() / "bad.json");
            cfg << R"({"weights": {"rgb": -2}})";
        }
        CHECK_THROWS_AS(load_fit_config(dir.path() / "bad.json"), ConfigError);
        CHECK_THROWS_AS(load_fit_config(dir.path() / "none.json"), ConfigError);

        const FixtureSet& fx = test::fixtures(64, 32);
        FitResult r;
        r.shared_identity = fx.truth.identity;
        r.texture = fx.truth.texture;
        for (const auto& v : fx.truth.views) {
            r.view_params.push_back(v.params);
        }
        r.iterations = 12;
        r.converged = true;
        r.status = "converged";
        save_fit_result(r, dir.path() / "fit_out.json");
        const FitResult back = load_fit_result(dir.path() / "fit_out.json");
        CHECK((back.shared_identity - r.shared_identity).norm() < 1e-12);
        CHECK(back.view_params.size() == 3);
        CHECK((back.view_params[2].camera.translation - r.view_params[2].camera.translation).norm() < 1e-12);
        CHECK(back.view_params[0].illumination.sh == r.view_params[0].illumination.sh);
        CHECK(back.iterations == 12);
        CHECK(back.converged);
    }
}
