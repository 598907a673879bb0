// SPDX-License-Identifier: Apache-2.0
#include "avatar/image.hpp"

#include "avatar/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace avatar {

Image::Image(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels)
{
    if (width < 0 || height < 0 || channels < 0) {
        throw DimensionError("image dimensions must be nonnegative");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * static_cast<std::size_t>(channels),
                 fill);
}

Image::Image(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data))
{
    if (width < 0 || height < 0 || channels < 0) {
        throw DimensionError("image dimensions must be nonnegative");
    }
    const auto expected =
        static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * static_cast<std::size_t>(channels);
    if (data_.size() != expected) {
        throw DimensionError("image data length " + std::to_string(data_.size()) + " does not match " +
                             std::to_string(width) + "x" + std::to_string(height) + "x" + std::to_string(channels));
    }
}

void UVMap::validate() const
{
    if (validity.channels() != 1 || validity.width() != color.width() || validity.height() != color.height()) {
        throw ValidationError("UV map color and validity dimensions differ");
    }
    for (int y = 0; y < color.height(); ++y) {
        for (int x = 0; x < color.width(); ++x) {
            if (validity.at(x, y) != 0.0f) {
                continue;
            }
            for (int c = 0; c < color.channels(); ++c) {
                if (color.at(x, y, c) != 0.0f) {
                    throw ValidationError("UV map texel with zero validity carries nonzero color");
                }
            }
        }
    }
}

UVMap make_full_uvmap(Image color)
{
    Image validity(color.width(), color.height(), 1, 1.0f);
    return UVMap{std::move(color), std::move(validity)};
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in)
{
    std::string token;
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') {
                ch = in.get();
            }
        } else if (std::isspace(ch)) {
            if (!token.empty()) {
                return token;
            }
        } else {
            token.push_back(static_cast<char>(ch));
        }
        ch = in.get();
    }
    return token;
}

int parse_header_int(std::istream& in, const std::filesystem::path& path, const char* field)
{
    const std::string token = next_token(in);
    try {
        std::size_t used = 0;
        const int value = std::stoi(token, &used);
        if (used != token.size() || value <= 0) {
            throw std::invalid_argument(token);
        }
        return value;
    } catch (const std::exception&) {
        throw FormatError(path.string() + ": invalid " + field + " '" + token + "' in raster header");
    }
}

std::uint8_t to_byte(float v)
{
    const float scaled = std::round(std::clamp(v, 0.0f, 1.0f) * 255.0f);
    return static_cast<std::uint8_t>(scaled);
}

} // namespace

Image load_image(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open image '" + path.string() + "'");
    }
    const std::string magic = next_token(in);
    int channels = 0;
    if (magic == "P5") {
        channels = 1;
    } else if (magic == "P6") {
        channels = 3;
    } else {
        throw FormatError(path.string() + ": unsupported raster type '" + magic + "' (expected binary PGM/PPM)");
    }
    const int width = parse_header_int(in, path, "width");
    const int height = parse_header_int(in, path, "height");
    const int maxval = parse_header_int(in, path, "maxval");
    if (maxval != 255) {
        throw FormatError(path.string() + ": unsupported bit depth (maxval " + std::to_string(maxval) +
                          "), only 8-bit rasters are accepted");
    }
    const std::size_t count =
        static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * static_cast<std::size_t>(channels);
    std::vector<unsigned char> bytes(count);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count) {
        throw FormatError(path.string() + ": truncated pixel data");
    }
    std::vector<float> data(count);
    std::transform(bytes.begin(), bytes.end(), data.begin(),
                   [](unsigned char b) { return static_cast<float>(b) / 255.0f; });
    return Image(width, height, channels, std::move(data));
}

void save_image(const Image& image, const std::filesystem::path& path)
{
    if (image.channels() != 1 && image.channels() != 3) {
        throw FormatError("cannot save image with " + std::to_string(image.channels()) + " channels");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot write image '" + path.string() + "'");
    }
    out << (image.channels() == 1 ? "P5" : "P6") << '\n' << image.width() << ' ' << image.height() << "\n255\n";
    std::vector<unsigned char> bytes(image.size());
    std::transform(image.data().begin(), image.data().end(), bytes.begin(), to_byte);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw FormatError("failed writing image '" + path.string() + "'");
    }
}

Image quantize8(const Image& image)
{
    Image out = image;
    for (float& v : out.data()) {
        v = static_cast<float>(to_byte(v)) / 255.0f;
    }
    return out;
}

std::filesystem::path validity_path_for(const std::filesystem::path& color_path)
{
    std::filesystem::path p = color_path;
    p.replace_extension(".validity.pgm");
    return p;
}

void save_uvmap(const UVMap& map, const std::filesystem::path& color_path)
{
    save_image(map.color, color_path);
    save_image(map.validity, validity_path_for(color_path));
}

UVMap load_uvmap(const std::filesystem::path& color_path)
{
    Image color = load_image(color_path);
    const auto vpath = validity_path_for(color_path);
    if (!std::filesystem::exists(vpath)) {
        return make_full_uvmap(std::move(color));
    }
    Image validity = load_image(vpath);
    if (validity.channels() != 1 || validity.width() != color.width() || validity.height() != color.height()) {
        throw ValidationError(vpath.string() + ": validity raster does not match color raster dimensions");
    }
    // Validity may quantize to zero on disk; keep the zero-validity/zero-color invariant.
    for (int y = 0; y < color.height(); ++y) {
        for (int x = 0; x < color.width(); ++x) {
            if (validity.at(x, y) == 0.0f) {
                for (int c = 0; c < color.channels(); ++c) {
                    color.at(x, y, c) = 0.0f;
                }
            }
        }
    }
    return UVMap{std::move(color), std::move(validity)};
}

Image flip_horizontal(const Image& image)
{
    Image out(image.width(), image.height(), image.channels());
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            for (int c = 0; c < image.channels(); ++c) {
                out.at(image.width() - 1 - x, y, c) = image.at(x, y, c);
            }
        }
    }
    return out;
}

Image flip_vertical(const Image& image)
{
    Image out(image.width(), image.height(), image.channels());
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            for (int c = 0; c < image.channels(); ++c) {
                out.at(x, image.height() - 1 - y, c) = image.at(x, y, c);
            }
        }
    }
    return out;
}

} // namespace avatar
