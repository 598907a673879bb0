// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace avatar {

/// Row-major float raster with interleaved channels. Values are nominally in [0, 1].
class Image
{
public:
    Image() = default;
    Image(int width, int height, int channels, float fill = 0.0f);
    Image(int width, int height, int channels, std::vector<float> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t texel_count() const noexcept
    {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }
    bool empty() const noexcept { return data_.empty(); }

    float& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }
    float at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }

    std::size_t index(int x, int y, int c = 0) const noexcept
    {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(channels_) +
               static_cast<std::size_t>(c);
    }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }

    bool same_shape(const Image& other) const noexcept
    {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

/// Single-channel face segmentation; values > 0.5 are face.
using SegMask = Image;

/// Texture in UV space with a per-texel validity weight in [0, 1].
struct UVMap
{
    Image color;
    Image validity;

    /// Throws ValidationError when color/validity disagree in size or invalid texels carry color.
    void validate() const;
};

/// Creates a UVMap with validity 1 everywhere.
UVMap make_full_uvmap(Image color);

/// Loads an 8-bit binary PGM (P5) or PPM (P6) raster. Values are mapped by v/255.
Image load_image(const std::filesystem::path& path);

/// Saves as 8-bit PGM (1 channel) or PPM (3 channels), rounding and clamping to [0, 255].
void save_image(const Image& image, const std::filesystem::path& path);

/// Quantizes to the same 8-bit grid used by save_image.
Image quantize8(const Image& image);

/// Path of the validity raster that accompanies a UV color raster: "x.ppm" -> "x.validity.pgm".
std::filesystem::path validity_path_for(const std::filesystem::path& color_path);

/// Writes color and validity side by side (see validity_path_for).
void save_uvmap(const UVMap& map, const std::filesystem::path& color_path);

/// Loads a UV map; when no validity raster exists next to it, validity is 1 everywhere.
UVMap load_uvmap(const std::filesystem::path& color_path);

/// Horizontal mirror (column x maps to width-1-x).
Image flip_horizontal(const Image& image);
Image flip_vertical(const Image& image);

} // namespace avatar
