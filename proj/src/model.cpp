// SPDX-License-Identifier: Apache-2.0
#include "avatar/model.hpp"

#include "avatar/error.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>

namespace avatar {

static_assert(std::endian::native == std::endian::little, "model container I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'A', 'V', 'F', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kNameLength = 16;

struct Header
{
    std::uint32_t vertices = 0;
    std::uint32_t k_id = 0;
    std::uint32_t k_exp = 0;
    std::uint32_t k_tex = 0;
    std::uint32_t uv_width = 0;
    std::uint32_t uv_height = 0;
    std::uint32_t landmarks = 0;
    std::uint32_t triangles = 0;
    std::uint32_t uv_coords = 0;
};

class Writer
{
public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path)
    {
        if (!out_) {
            throw Error("cannot write model '" + path.string() + "'");
        }
    }

    void raw(const void* data, std::size_t bytes) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes)); }
    void u32(std::uint32_t v) { raw(&v, sizeof v); }

    void section(std::string_view name, std::uint32_t rows, std::uint32_t cols)
    {
        std::array<char, kNameLength> buf{};
        std::memcpy(buf.data(), name.data(), name.size());
        raw(buf.data(), buf.size());
        u32(rows);
        u32(cols);
    }

    void finish()
    {
        out_.flush();
        if (!out_) {
            throw Error("failed writing model '" + path_.string() + "'");
        }
    }

private:
    std::ofstream out_;
    std::filesystem::path path_;
};

class Reader
{
public:
    explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path)
    {
        if (!in_) {
            throw ParseError("cannot open model '" + path.string() + "'");
        }
    }

    void raw(void* data, std::size_t bytes, std::string_view where)
    {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
        if (static_cast<std::size_t>(in_.gcount()) != bytes) {
            throw ParseError(path_.string() + ": truncated data in section '" + std::string(where) + "'");
        }
    }

    std::uint32_t u32(std::string_view where)
    {
        std::uint32_t v = 0;
        raw(&v, sizeof v, where);
        return v;
    }

    // Reads a section descriptor and checks its name; returns (rows, cols).
    std::pair<std::uint32_t, std::uint32_t> section(std::string_view expected)
    {
        std::array<char, kNameLength> buf{};
        raw(buf.data(), buf.size(), expected);
        const std::string name(buf.data(), strnlen(buf.data(), buf.size()));
        if (name != expected) {
            throw ParseError(path_.string() + ": expected section '" + std::string(expected) + "', found '" + name + "'");
        }
        const auto rows = u32(expected);
        const auto cols = u32(expected);
        return {rows, cols};
    }

    bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::ifstream in_;
    std::filesystem::path path_;
};

void expect_shape(const Reader& r, std::string_view section, std::pair<std::uint32_t, std::uint32_t> got,
                  std::uint64_t rows, std::uint64_t cols)
{
    if (got.first != rows || got.second != cols) {
        throw ValidationError(r.path().string() + ": section '" + std::string(section) + "' is " +
                              std::to_string(got.first) + "x" + std::to_string(got.second) + ", header declares " +
                              std::to_string(rows) + "x" + std::to_string(cols));
    }
}

Eigen::MatrixXf read_matrix(Reader& r, std::string_view name, std::uint64_t rows, std::uint64_t cols)
{
    const auto shape = r.section(name);
    expect_shape(r, name, shape, rows, cols);
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(rows, cols);
    r.raw(m.data(), sizeof(float) * rows * cols, name);
    return m;
}

void write_matrix(Writer& w, std::string_view name, const Eigen::MatrixXf& m)
{
    w.section(name, static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols()));
    const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
    w.raw(rm.data(), sizeof(float) * static_cast<std::size_t>(rm.size()));
}

std::vector<Triangle> read_triangles(Reader& r, std::string_view name, std::uint64_t count)
{
    const auto shape = r.section(name);
    expect_shape(r, name, shape, count, 3);
    std::vector<std::uint32_t> raw(count * 3);
    r.raw(raw.data(), raw.size() * sizeof(std::uint32_t), name);
    std::vector<Triangle> tris(count);
    for (std::size_t t = 0; t < count; ++t) {
        for (int k = 0; k < 3; ++k) {
            tris[t][k] = static_cast<int>(raw[t * 3 + k]);
        }
    }
    return tris;
}

void write_triangles(Writer& w, std::string_view name, const std::vector<Triangle>& tris)
{
    w.section(name, static_cast<std::uint32_t>(tris.size()), 3);
    for (const auto& t : tris) {
        for (int idx : t) {
            w.u32(static_cast<std::uint32_t>(idx));
        }
    }
}

} // namespace

void MorphableModel::validate() const
{
    const auto n3 = mean_shape.size();
    if (n3 == 0 || n3 % 3 != 0) {
        throw ValidationError("mean shape length " + std::to_string(n3) + " is not a positive multiple of 3");
    }
    if (identity_basis.rows() != n3) {
        throw ValidationError("identity basis has " + std::to_string(identity_basis.rows()) + " rows, expected " +
                              std::to_string(n3));
    }
    if (expression_basis.rows() != n3) {
        throw ValidationError("expression basis has " + std::to_string(expression_basis.rows()) + " rows, expected " +
                              std::to_string(n3));
    }
    if (mean_texture.channels() != 3 || mean_texture.empty()) {
        throw ValidationError("mean texture must be a non-empty 3-channel raster");
    }
    if (static_cast<std::size_t>(texture_basis.rows()) != mean_texture.size()) {
        throw ValidationError("texture basis has " + std::to_string(texture_basis.rows()) + " rows, expected " +
                              std::to_string(mean_texture.size()));
    }
    const int v = vertex_count();
    for (int id : landmark_vertex_ids) {
        if (id < 0 || id >= v) {
            throw ValidationError("landmark vertex id " + std::to_string(id) + " out of range " + std::to_string(v));
        }
    }
    Mesh topology;
    topology.vertices.resize(static_cast<std::size_t>(v));
    topology.triangles = triangles;
    topology.uv_coords = uv_coords;
    topology.uv_triangles = uv_triangles;
    topology.validate();
}

MorphableModel load_model(const std::filesystem::path& path)
{
    Reader r(path);
    char magic[4];
    r.raw(magic, sizeof magic, "header");
    if (std::memcmp(magic, kMagic, sizeof magic) != 0) {
        throw ParseError(path.string() + ": bad magic in section 'header' (not an AVF1 model)");
    }
    const auto version = r.u32("header");
    if (version != kVersion) {
        throw ParseError(path.string() + ": unsupported version " + std::to_string(version) + " in section 'header'");
    }
    Header h;
    h.vertices = r.u32("header");
    h.k_id = r.u32("header");
    h.k_exp = r.u32("header");
    h.k_tex = r.u32("header");
    h.uv_width = r.u32("header");
    h.uv_height = r.u32("header");
    h.landmarks = r.u32("header");
    h.triangles = r.u32("header");
    h.uv_coords = r.u32("header");
    const auto sections = r.u32("header");
    if (sections != 9) {
        throw ParseError(path.string() + ": header declares " + std::to_string(sections) + " sections, expected 9");
    }
    if (h.vertices == 0 || h.uv_width == 0 || h.uv_height == 0) {
        throw ValidationError(path.string() + ": header declares an empty mesh or texture");
    }

    MorphableModel m;
    const std::uint64_t v3 = 3ull * h.vertices;
    const std::uint64_t texels = static_cast<std::uint64_t>(h.uv_width) * h.uv_height;
    const Eigen::MatrixXf mean = read_matrix(r, "mean_shape", h.vertices, 3);
    m.mean_shape.resize(static_cast<Eigen::Index>(v3));
    for (std::uint32_t i = 0; i < h.vertices; ++i) {
        m.mean_shape.segment<3>(3 * i) = mean.row(i).transpose();
    }
    m.identity_basis = read_matrix(r, "identity_basis", v3, h.k_id);
    m.expression_basis = read_matrix(r, "expression_basis", v3, h.k_exp);
    const Eigen::MatrixXf tex = read_matrix(r, "mean_texture", texels, 3);
    std::vector<float> tex_data(texels * 3);
    for (std::uint64_t i = 0; i < texels; ++i) {
        for (int c = 0; c < 3; ++c) {
            tex_data[i * 3 + c] = tex(static_cast<Eigen::Index>(i), c);
        }
    }
    m.mean_texture = Image(static_cast<int>(h.uv_width), static_cast<int>(h.uv_height), 3, std::move(tex_data));
    m.texture_basis = read_matrix(r, "texture_basis", texels * 3, h.k_tex);

    const auto lm_shape = r.section("landmark_ids");
    expect_shape(r, "landmark_ids", lm_shape, h.landmarks, 1);
    std::vector<std::uint32_t> ids(h.landmarks);
    r.raw(ids.data(), ids.size() * sizeof(std::uint32_t), "landmark_ids");
    m.landmark_vertex_ids.assign(ids.begin(), ids.end());

    m.triangles = read_triangles(r, "triangles", h.triangles);
    const Eigen::MatrixXf uv = read_matrix(r, "uv_coords", h.uv_coords, 2);
    m.uv_coords.resize(h.uv_coords);
    for (std::uint32_t i = 0; i < h.uv_coords; ++i) {
        m.uv_coords[i] = uv.row(i).transpose().cast<double>();
    }
    m.uv_triangles = read_triangles(r, "uv_triangles", h.triangles);
    if (!r.at_end()) {
        throw ParseError(path.string() + ": trailing bytes after section 'uv_triangles'");
    }
    m.validate();
    return m;
}

void save_model(const MorphableModel& model, const std::filesystem::path& path)
{
    model.validate();
    Writer w(path);
    w.raw(kMagic, sizeof kMagic);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(model.vertex_count()));
    w.u32(static_cast<std::uint32_t>(model.identity_count()));
    w.u32(static_cast<std::uint32_t>(model.expression_count()));
    w.u32(static_cast<std::uint32_t>(model.texture_count()));
    w.u32(static_cast<std::uint32_t>(model.mean_texture.width()));
    w.u32(static_cast<std::uint32_t>(model.mean_texture.height()));
    w.u32(static_cast<std::uint32_t>(model.landmark_count()));
    w.u32(static_cast<std::uint32_t>(model.triangles.size()));
    w.u32(static_cast<std::uint32_t>(model.uv_coords.size()));
    w.u32(9);

    const int v = model.vertex_count();
    Eigen::MatrixXf mean(v, 3);
    for (int i = 0; i < v; ++i) {
        mean.row(i) = model.mean_shape.segment<3>(3 * i).transpose();
    }
    write_matrix(w, "mean_shape", mean);
    write_matrix(w, "identity_basis", model.identity_basis);
    write_matrix(w, "expression_basis", model.expression_basis);
    const auto texels = static_cast<Eigen::Index>(model.mean_texture.texel_count());
    Eigen::MatrixXf tex(texels, 3);
    for (Eigen::Index i = 0; i < texels; ++i) {
        for (int c = 0; c < 3; ++c) {
            tex(i, c) = model.mean_texture.data()[static_cast<std::size_t>(i) * 3 + c];
        }
    }
    write_matrix(w, "mean_texture", tex);
    write_matrix(w, "texture_basis", model.texture_basis);
    w.section("landmark_ids", static_cast<std::uint32_t>(model.landmark_count()), 1);
    for (int id : model.landmark_vertex_ids) {
        w.u32(static_cast<std::uint32_t>(id));
    }
    write_triangles(w, "triangles", model.triangles);
    Eigen::MatrixXf uv(static_cast<Eigen::Index>(model.uv_coords.size()), 2);
    for (std::size_t i = 0; i < model.uv_coords.size(); ++i) {
        uv.row(static_cast<Eigen::Index>(i)) = model.uv_coords[i].transpose().cast<float>();
    }
    write_matrix(w, "uv_coords", uv);
    write_triangles(w, "uv_triangles", model.uv_triangles);
    w.finish();
}

} // namespace avatar
