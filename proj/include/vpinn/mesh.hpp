#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vpinn/geometry.hpp"

namespace vpinn {

struct Edge {
    std::array<int, 2> v;         // vertex indices, sorted ascending
    std::array<int, 2> tri;       // adjacent triangles; tri[1] == -1 on the boundary
    bool boundary() const { return tri[1] < 0; }
};

// Conforming triangulation of a polygonal domain. Immutable after construction.
class Mesh {
public:
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  // counterclockwise vertex triples
    std::vector<Edge> edges;
    std::vector<std::array<int, 3>> tri_edges;  // edge ids opposite each local vertex slot
    std::vector<char> boundary_vertex;          // 1 if the vertex lies on the domain boundary
    std::vector<double> diameter;               // h_E = longest edge of E
    double h = 0.0;                             // max_E h_E

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }

    Vec2 vertex(int t, int local) const { return vertices[triangles[t][local]]; }
    double area(int t) const {
        return signed_area(vertex(t, 0), vertex(t, 1), vertex(t, 2));
    }

    // max over elements of h_E / inradius_E
    double shape_regularity() const;

    // derives edges, boundary flags, diameters from vertices + triangles;
    // throws std::runtime_error on non-conforming or inverted input
    void finalize();
};

Mesh build_structured_unit_square(int n);
Mesh refine_red(const Mesh& mesh);
std::vector<int> interior_vertices(const Mesh& mesh);

// plain-text dump: "nv nt" header, vertex lines "x y", triangle lines "i j k"
void save_mesh(const Mesh& mesh, const std::string& path);
Mesh load_mesh(const std::string& path);

}  // namespace vpinn
