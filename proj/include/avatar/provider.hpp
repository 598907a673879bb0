// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "avatar/image.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace avatar {

/**
 * Runs an external command through /bin/sh with a line protocol.
 *
 * Each request line is written to the command's standard input, the command's standard output
 * must contain one whitespace-separated float vector per request line, and a nonzero exit status
 * is a failure (reported as ConfigError with the command's stderr attached).
 */
class ExternalCommand
{
public:
    explicit ExternalCommand(std::string command);

    const std::string& command() const noexcept { return command_; }

    std::vector<std::vector<double>> run(std::span<const std::string> request_lines) const;

private:
    std::string command_;
};

/// Maps images to identity embeddings.
class EmbeddingProvider
{
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<Eigen::VectorXd> embed(std::span<const Image> images) = 0;
};

/// Embedding provider backed by an ExternalCommand; one raster path per request line.
class ExternalEmbeddingProvider final : public EmbeddingProvider
{
public:
    explicit ExternalEmbeddingProvider(std::string command);
    std::vector<Eigen::VectorXd> embed(std::span<const Image> images) override;

private:
    ExternalCommand command_;
};

/**
 * External perceptual distance. Each request line holds two raster paths separated by a tab;
 * the command answers with one scalar per line.
 */
double external_perceptual_distance(const ExternalCommand& command, const Image& a, const Image& b);

/// Scratch directory removed on destruction.
class TempDir
{
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace avatar
