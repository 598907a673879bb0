// SPDX-License-Identifier: Apache-2.0
#include "avatar/lbfgs.hpp"

#include "avatar/error.hpp"

#include <cmath>
#include <deque>
#include <functional>

namespace avatar {

namespace {

struct CurvaturePair
{
    Eigen::VectorXd s;
    Eigen::VectorXd y;
    double rho = 0.0;
};

using Dot = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

Eigen::VectorXd two_loop(const std::deque<CurvaturePair>& history, const Eigen::VectorXd& g, const Dot& dot)
{
    Eigen::VectorXd q = g;
    std::vector<double> alpha(history.size());
    for (std::size_t i = history.size(); i-- > 0;) {
        alpha[i] = history[i].rho * dot(history[i].s, q);
        q -= alpha[i] * history[i].y;
    }
    if (!history.empty()) {
        const auto& last = history.back();
        q *= dot(last.s, last.y) / dot(last.y, last.y);
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
        const double beta = history[i].rho * dot(history[i].y, q);
        q += (alpha[i] - beta) * history[i].s;
    }
    return -q;
}

enum class SearchOutcome
{
    accepted,
    below_resolution,
    exhausted,
};

} // namespace

std::string to_string(LbfgsStatus status)
{
    switch (status) {
    case LbfgsStatus::converged:
        return "converged";
    case LbfgsStatus::max_iterations:
        return "max_iterations";
    case LbfgsStatus::line_search_failed:
        return "line_search_failed";
    }
    return "unknown";
}

LbfgsResult minimize_lbfgs(const Objective& f, Eigen::VectorXd x0, const LbfgsSettings& settings)
{
    LbfgsResult result;
    Eigen::VectorXd g(x0.size());
    double fx = f(x0, g);
    if (!std::isfinite(fx) || !g.allFinite()) {
        throw NumericalError("objective is not finite at the initial point");
    }
    result.x = std::move(x0);
    result.value = fx;
    result.history.push_back(fx);

    const Eigen::VectorXd& d = settings.change_scale;
    if (d.size() != 0 && d.size() != result.x.size()) {
        throw DimensionError("change_scale length does not match the parameter vector");
    }
    const Dot dot = settings.inner_product
                        ? settings.inner_product
                        : Dot([](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b); });
    auto norm = [&dot](const Eigen::VectorXd& v) { return std::sqrt(dot(v, v)); };
    auto scaled_norm = [&](const Eigen::VectorXd& v) { return d.size() == 0 ? norm(v) : norm(v.cwiseProduct(d)); };

    std::deque<CurvaturePair> history;
    Eigen::VectorXd x_trial(result.x.size());
    Eigen::VectorXd g_trial(result.x.size());

    for (int iter = 0; iter < settings.max_iterations; ++iter) {
        if (dot(g, g) == 0.0) {
            result.status = LbfgsStatus::converged;
            return result;
        }
        const double resolution = settings.tolerance * std::max(1.0, scaled_norm(result.x));

        double f_new = fx;
        auto search = [&](const Eigen::VectorXd& direction, double step) {
            const double slope = dot(g, direction);
            for (int k = 0; k < settings.max_backtracks; ++k) {
                if (step * scaled_norm(direction) < resolution) {
                    return SearchOutcome::below_resolution;
                }
                x_trial = result.x + step * direction;
                const double f_trial = f(x_trial, g_trial);
                if (std::isfinite(f_trial) && g_trial.allFinite() && f_trial <= fx + settings.armijo_c * step * slope) {
                    f_new = f_trial;
                    return SearchOutcome::accepted;
                }
                step *= settings.shrink;
            }
            return SearchOutcome::exhausted;
        };

        Eigen::VectorXd direction = two_loop(history, g, dot);
        double step = history.empty() ? 1.0 / std::max(1.0, norm(g)) : 1.0;
        if (dot(g, direction) >= 0.0) {
            history.clear();
            direction = -g;
            step = 1.0 / std::max(1.0, norm(g));
        }
        SearchOutcome outcome = search(direction, step);
        if (outcome != SearchOutcome::accepted && !history.empty()) {
            history.clear();
            outcome = search(-g, 1.0 / std::max(1.0, norm(g)));
        }
        if (outcome == SearchOutcome::below_resolution) {
            result.status = LbfgsStatus::converged;
            return result;
        }
        if (outcome == SearchOutcome::exhausted) {
            result.status = LbfgsStatus::line_search_failed;
            return result;
        }

        if (f_new > fx) {
            throw NumericalError("accepted step increased the objective");
        }
        CurvaturePair pair{x_trial - result.x, g_trial - g, 0.0};
        const double sy = dot(pair.s, pair.y);
        const double change = scaled_norm(pair.s) / std::max(1.0, scaled_norm(result.x));
        result.x = x_trial;
        g = g_trial;
        fx = f_new;
        result.value = fx;
        result.iterations = iter + 1;
        result.history.push_back(fx);
        if (sy > 1e-12 * dot(pair.y, pair.y) && sy > 0.0) {
            pair.rho = 1.0 / sy;
            history.push_back(std::move(pair));
            if (static_cast<int>(history.size()) > settings.history_size) {
                history.pop_front();
            }
        }
        if (change < settings.tolerance) {
            result.status = LbfgsStatus::converged;
            return result;
        }
    }
    result.status = LbfgsStatus::max_iterations;
    return result;
}

} // namespace avatar
