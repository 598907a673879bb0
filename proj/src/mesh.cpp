// SPDX-License-Identifier: Apache-2.0
#include "avatar/mesh.hpp"

#include "avatar/error.hpp"

#include <Eigen/Geometry>

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace avatar {

namespace {

void check_indices(const std::vector<Triangle>& tris, std::size_t count, const char* what)
{
    for (std::size_t t = 0; t < tris.size(); ++t) {
        for (int idx : tris[t]) {
            if (idx < 0 || static_cast<std::size_t>(idx) >= count) {
                throw ValidationError(std::string(what) + " " + std::to_string(t) + " references index " +
                                      std::to_string(idx) + " out of range " + std::to_string(count));
            }
        }
    }
}

} // namespace

void Mesh::validate() const
{
    check_indices(triangles, vertices.size(), "triangle");
    check_indices(uv_triangles, uv_coords.size(), "uv triangle");
    if (triangles.size() != uv_triangles.size()) {
        throw ValidationError("mesh has " + std::to_string(triangles.size()) + " triangles but " +
                              std::to_string(uv_triangles.size()) + " uv triangles");
    }
}

std::vector<Eigen::Vector3d> vertex_normals(const Mesh& mesh)
{
    std::vector<Eigen::Vector3d> normals(mesh.vertices.size(), Eigen::Vector3d::Zero());
    for (const auto& tri : mesh.triangles) {
        const Eigen::Vector3d& a = mesh.vertices[tri[0]];
        const Eigen::Vector3d& b = mesh.vertices[tri[1]];
        const Eigen::Vector3d& c = mesh.vertices[tri[2]];
        const Eigen::Vector3d face = (b - a).cross(c - a);
        for (int idx : tri) {
            normals[idx] += face;
        }
    }
    for (auto& n : normals) {
        const double len = n.norm();
        if (len > 0.0) {
            n /= len;
        }
    }
    return normals;
}

void save_obj(const Mesh& mesh, const std::filesystem::path& path)
{
    mesh.validate();
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write mesh '" + path.string() + "'");
    }
    out << std::setprecision(9);
    out << "# " << mesh.vertices.size() << " vertices, " << mesh.triangles.size() << " triangles\n";
    for (const auto& v : mesh.vertices) {
        out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    }
    for (const auto& uv : mesh.uv_coords) {
        out << "vt " << uv.x() << ' ' << 1.0 - uv.y() << '\n';
    }
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        out << 'f';
        for (int k = 0; k < 3; ++k) {
            out << ' ' << mesh.triangles[t][k] + 1 << '/' << mesh.uv_triangles[t][k] + 1;
        }
        out << '\n';
    }
}

Mesh load_obj(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open mesh '" + path.string() + "'");
    }
    Mesh mesh;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') {
            continue;
        }
        auto fail = [&] { throw ParseError(path.string() + ":" + std::to_string(line_no) + ": malformed '" + tag + "' record"); };
        if (tag == "v") {
            Eigen::Vector3d v;
            if (!(ls >> v.x() >> v.y() >> v.z())) {
                fail();
            }
            mesh.vertices.push_back(v);
        } else if (tag == "vt") {
            Eigen::Vector2d uv;
            if (!(ls >> uv.x() >> uv.y())) {
                fail();
            }
            uv.y() = 1.0 - uv.y();
            mesh.uv_coords.push_back(uv);
        } else if (tag == "f") {
            Triangle tri{};
            Triangle uvtri{};
            for (int k = 0; k < 3; ++k) {
                std::string ref;
                if (!(ls >> ref)) {
                    fail();
                }
                const auto slash = ref.find('/');
                if (slash == std::string::npos) {
                    fail();
                }
                try {
                    tri[k] = std::stoi(ref.substr(0, slash)) - 1;
                    uvtri[k] = std::stoi(ref.substr(slash + 1)) - 1;
                } catch (const std::exception&) {
                    fail();
                }
            }
            mesh.triangles.push_back(tri);
            mesh.uv_triangles.push_back(uvtri);
        }
    }
    mesh.validate();
    return mesh;
}

} // namespace avatar
