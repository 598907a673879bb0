// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "avatar/fit.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace avatar {

struct ViewPaths
{
    std::filesystem::path image;
    std::filesystem::path landmarks;
    std::optional<std::filesystem::path> mask;
};

/**
 * Fit configuration (JSON):
 *
 *   {
 *     "weights":   {"rgb": 1, "landmark": 50, "identity": 0, "regularization": 0.001},
 *     "optimizer": {"max_iters": 200, "tolerance": 1e-6, "history_size": 10},
 *     "identity_provider": "command line",            (optional)
 *     "model": "toy_model.avf",                       (optional)
 *     "views": [{"image": "a.ppm", "landmarks": "a.txt", "mask": "a.pgm"}]   (optional)
 *   }
 *
 * Relative paths resolve against the directory of the configuration file. Missing keys keep defaults.
 */
struct FitConfig
{
    LossWeights weights;
    OptimizerSettings optimizer;
    std::optional<std::string> identity_provider;
    std::optional<std::filesystem::path> model;
    std::vector<ViewPaths> views;
};

FitConfig load_fit_config(const std::filesystem::path& path);

/// Loads image, landmarks and optional mask of one view.
FitView load_view(const ViewPaths& paths);

void save_fit_result(const FitResult& result, const std::filesystem::path& path);
FitResult load_fit_result(const std::filesystem::path& path);

} // namespace avatar
