#include "vpinn/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "vpinn/io.hpp"

namespace vpinn {

void Mesh::finalize() {
    const int nt = num_triangles();
    edges.clear();
    tri_edges.assign(nt, {-1, -1, -1});

    std::map<std::array<int, 2>, int> edge_ids;
    for (int t = 0; t < nt; ++t) {
        if (area(t) <= 0.0) {
            throw std::runtime_error("triangle " + std::to_string(t) +
                                     " is not positively oriented");
        }
        for (int local = 0; local < 3; ++local) {
            // edge opposite local vertex `local`
            int a = triangles[t][(local + 1) % 3];
            int b = triangles[t][(local + 2) % 3];
            std::array<int, 2> key{std::min(a, b), std::max(a, b)};
            auto it = edge_ids.find(key);
            if (it == edge_ids.end()) {
                edge_ids.emplace(key, num_edges());
                tri_edges[t][local] = num_edges();
                edges.push_back(Edge{key, {t, -1}});
            } else {
                Edge& e = edges[it->second];
                if (e.tri[1] >= 0) {
                    throw std::runtime_error("edge shared by more than two triangles");
                }
                e.tri[1] = t;
                tri_edges[t][local] = it->second;
            }
        }
    }

    boundary_vertex.assign(vertices.size(), 0);
    for (const Edge& e : edges) {
        if (e.boundary()) {
            boundary_vertex[e.v[0]] = 1;
            boundary_vertex[e.v[1]] = 1;
        }
    }

    diameter.resize(nt);
    h = 0.0;
    for (int t = 0; t < nt; ++t) {
        diameter[t] = triangle_diameter(vertex(t, 0), vertex(t, 1), vertex(t, 2));
        h = std::max(h, diameter[t]);
    }
}

double Mesh::shape_regularity() const {
    double worst = 0.0;
    for (int t = 0; t < num_triangles(); ++t) {
        const double rho = triangle_inradius(vertex(t, 0), vertex(t, 1), vertex(t, 2));
        worst = std::max(worst, diameter[t] / rho);
    }
    return worst;
}

Mesh build_structured_unit_square(int n) {
    if (n < 1) {
        throw std::invalid_argument("build_structured_unit_square: n must be >= 1");
    }
    Mesh mesh;
    const int np = n + 1;
    mesh.vertices.reserve(static_cast<size_t>(np) * np);
    for (int j = 0; j < np; ++j) {
        for (int i = 0; i < np; ++i) {
            mesh.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
        }
    }
    auto vid = [np](int i, int j) { return j * np + i; };
    mesh.triangles.reserve(static_cast<size_t>(2) * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            // split along the lower-left to upper-right diagonal
            const int v00 = vid(i, j);
            const int v10 = vid(i + 1, j);
            const int v01 = vid(i, j + 1);
            const int v11 = vid(i + 1, j + 1);
            mesh.triangles.push_back({v00, v10, v11});
            mesh.triangles.push_back({v00, v11, v01});
        }
    }
    mesh.finalize();
    return mesh;
}

Mesh refine_red(const Mesh& mesh) {
    Mesh fine;
    fine.vertices = mesh.vertices;
    std::map<std::array<int, 2>, int> midpoint;
    auto mid = [&](int a, int b) {
        std::array<int, 2> key{std::min(a, b), std::max(a, b)};
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const int id = static_cast<int>(fine.vertices.size());
        fine.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
        midpoint.emplace(key, id);
        return id;
    };
    fine.triangles.reserve(mesh.triangles.size() * 4);
    for (const auto& tri : mesh.triangles) {
        const int v0 = tri[0], v1 = tri[1], v2 = tri[2];
        const int m01 = mid(v0, v1), m12 = mid(v1, v2), m02 = mid(v0, v2);
        fine.triangles.push_back({v0, m01, m02});
        fine.triangles.push_back({m01, v1, m12});
        fine.triangles.push_back({m02, m12, v2});
        fine.triangles.push_back({m01, m12, m02});
    }
    fine.finalize();
    return fine;
}

std::vector<int> interior_vertices(const Mesh& mesh) {
    std::vector<int> interior;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (!mesh.boundary_vertex[v]) interior.push_back(v);
    }
    return interior;
}

void save_mesh(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << mesh.num_vertices() << ' ' << mesh.num_triangles() << '\n';
    for (const Vec2& v : mesh.vertices) {
        out << format_shortest(v.x) << ' ' << format_shortest(v.y) << '\n';
    }
    for (const auto& t : mesh.triangles) {
        out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
}

Mesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    int nv = 0, nt = 0;
    in >> nv >> nt;
    if (!in || nv < 3 || nt < 1) throw std::runtime_error("bad mesh header in " + path);
    Mesh mesh;
    mesh.vertices.resize(nv);
    for (auto& v : mesh.vertices) {
        std::string sx, sy;
        in >> sx >> sy;
        v.x = parse_double(sx);
        v.y = parse_double(sy);
    }
    mesh.triangles.resize(nt);
    for (auto& t : mesh.triangles) {
        in >> t[0] >> t[1] >> t[2];
    }
    if (!in) throw std::runtime_error("truncated mesh file " + path);
    mesh.finalize();
    return mesh;
}

}  // namespace vpinn
