// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

namespace avatar {

struct LbfgsSettings
{
    int max_iterations = 200;
    double tolerance = 1e-6; // on |D(x_{k+1} - x_k)| / max(1, |D x_k|), D = change_scale
    int history_size = 10;
    double armijo_c = 1e-4;
    double shrink = 0.5;
    int max_backtracks = 60;
    // Optional per-coordinate factors applied to x before measuring the relative change
    // (empty: compare x directly).
    Eigen::VectorXd change_scale;
    // Optional inner product for curvature pairs, slopes and norms (empty: Euclidean). The
    // objective must then return its gradient with respect to this inner product.
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> inner_product;
};

enum class LbfgsStatus
{
    converged,
    max_iterations,
    line_search_failed,
};

struct LbfgsResult
{
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    LbfgsStatus status = LbfgsStatus::max_iterations;
    std::vector<double> history; // objective after every accepted step, starting with f(x0)

    bool converged() const noexcept { return status == LbfgsStatus::converged; }
};

/// Returns f(x) and writes the gradient into the second argument.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/**
 * Limited-memory BFGS with a backtracking Armijo line search.
 *
 * A failed search first restarts from steepest descent with the history dropped. If even that
 * finds no decrease before the trial step shrinks below the tolerance, no admissible step can
 * exceed the stopping threshold and the run is reported as converged. Non-finite trial values
 * count as rejected steps. Throws NumericalError when f(x0) is not finite.
 */
LbfgsResult minimize_lbfgs(const Objective& f, Eigen::VectorXd x0, const LbfgsSettings& settings = {});

std::string to_string(LbfgsStatus status);

} // namespace avatar
