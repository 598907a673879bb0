// SPDX-License-Identifier: Apache-2.0
#include "avatar/provider.hpp"

#include "avatar/error.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

namespace avatar {

namespace {

std::string shell_quote(const std::string& s)
{
    std::string out = "'";
    for (char ch : s) {
        if (ch == '\'') {
            out += "'\\''";
        } else {
            out.push_back(ch);
        }
    }
    out += "'";
    return out;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TempDir::TempDir()
{
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    const auto base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto candidate = base / ("avatar-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
                                 std::to_string(rd()));
        if (std::filesystem::create_directory(candidate)) {
            path_ = std::move(candidate);
            return;
        }
    }
    throw Error("cannot create a temporary directory");
}

TempDir::~TempDir()
{
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

ExternalCommand::ExternalCommand(std::string command) : command_(std::move(command))
{
    if (command_.empty()) {
        throw ConfigError("external command must not be empty");
    }
}

std::vector<std::vector<double>> ExternalCommand::run(std::span<const std::string> request_lines) const
{
    TempDir dir;
    const auto in_path = dir.path() / "request.txt";
    const auto out_path = dir.path() / "response.txt";
    const auto err_path = dir.path() / "stderr.txt";
    {
        std::ofstream req(in_path);
        for (const auto& line : request_lines) {
            req << line << '\n';
        }
    }
    const std::string shell = "(" + command_ + ") < " + shell_quote(in_path.string()) + " > " +
                              shell_quote(out_path.string()) + " 2> " + shell_quote(err_path.string());
    const int status = std::system(shell.c_str());
    const bool ok = status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
    if (!ok) {
        const int code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
        throw ConfigError("external command '" + command_ + "' failed with status " + std::to_string(code) +
                          "; stderr: " + read_file(err_path));
    }
    std::vector<std::vector<double>> rows;
    std::ifstream out(out_path);
    std::string line;
    while (rows.size() < request_lines.size() && std::getline(out, line)) {
        std::istringstream ls(line);
        std::vector<double> row;
        std::string tok;
        while (ls >> tok) {
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0') {
                throw ConfigError("external command '" + command_ + "' produced non-numeric output '" + tok + "'");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() != request_lines.size()) {
        throw ConfigError("external command '" + command_ + "' answered " + std::to_string(rows.size()) +
                          " lines for " + std::to_string(request_lines.size()) + " requests; stderr: " +
                          read_file(err_path));
    }
    return rows;
}

ExternalEmbeddingProvider::ExternalEmbeddingProvider(std::string command) : command_(std::move(command)) {}

std::vector<Eigen::VectorXd> ExternalEmbeddingProvider::embed(std::span<const Image> images)
{
    TempDir dir;
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto path = dir.path() / ("image" + std::to_string(i) + (images[i].channels() == 1 ? ".pgm" : ".ppm"));
        save_image(images[i], path);
        lines.push_back(path.string());
    }
    const auto rows = command_.run(lines);
    std::vector<Eigen::VectorXd> out;
    for (const auto& row : rows) {
        out.push_back(Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size())));
    }
    return out;
}

double external_perceptual_distance(const ExternalCommand& command, const Image& a, const Image& b)
{
    TempDir dir;
    const auto pa = dir.path() / (a.channels() == 1 ? "a.pgm" : "a.ppm");
    const auto pb = dir.path() / (b.channels() == 1 ? "b.pgm" : "b.ppm");
    save_image(a, pa);
    save_image(b, pb);
    const std::vector<std::string> lines = {pa.string() + "\t" + pb.string()};
    const auto rows = command.run(lines);
    if (rows.front().size() != 1) {
        throw ConfigError("perceptual metric command must print exactly one scalar per line");
    }
    return rows.front().front();
}

} // namespace avatar
