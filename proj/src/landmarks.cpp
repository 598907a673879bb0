// SPDX-License-Identifier: Apache-2.0
#include "avatar/landmarks.hpp"

#include "avatar/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <string>

namespace avatar {

std::vector<std::size_t> LandmarkSet::out_of_bounds(int width, int height) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (p.x() < 0.0 || p.y() < 0.0 || p.x() > width || p.y() > height) {
            out.push_back(i);
        }
    }
    return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> fields;
    std::string current;
    for (char ch : line) {
        if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\r') {
            if (!current.empty()) {
                fields.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(ch);
        }
    }
    if (!current.empty()) {
        fields.push_back(std::move(current));
    }
    return fields;
}

bool parse_double(const std::string& s, double& out)
{
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

} // namespace

LandmarkSet load_landmarks(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open landmarks '" + path.string() + "'");
    }
    LandmarkSet set;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        const auto fields = split_fields(line);
        if (fields.empty()) {
            continue;
        }
        auto fail = [&](const std::string& why) {
            throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": " + why);
        };
        if (fields.size() < 2 || fields.size() > 3) {
            fail("expected 'x y [confidence]', got " + std::to_string(fields.size()) + " fields");
        }
        double values[3] = {0.0, 0.0, 1.0};
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (!parse_double(fields[i], values[i])) {
                fail("non-numeric field '" + fields[i] + "'");
            }
        }
        if (values[2] < 0.0 || values[2] > 1.0) {
            fail("confidence " + fields[2] + " outside [0, 1]");
        }
        set.points.emplace_back(values[0], values[1]);
        set.confidence.push_back(values[2]);
    }
    return set;
}

void save_landmarks(const LandmarkSet& landmarks, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write landmarks '" + path.string() + "'");
    }
    out << "# x y confidence\n" << std::setprecision(10);
    for (std::size_t i = 0; i < landmarks.points.size(); ++i) {
        const double conf = i < landmarks.confidence.size() ? landmarks.confidence[i] : 1.0;
        out << landmarks.points[i].x() << ' ' << landmarks.points[i].y() << ' ' << conf << '\n';
    }
}

} // namespace avatar
