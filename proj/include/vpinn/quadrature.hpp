#pragma once

#include <array>
#include <functional>
#include <vector>

#include "vpinn/geometry.hpp"
#include "vpinn/mesh.hpp"

namespace vpinn {

struct QuadNode {
    std::array<double, 3> bary;  // barycentric coordinates on the reference triangle
    double weight;               // reference weight; all weights sum to 1/2
};

struct QuadRule {
    int precision = 0;  // highest total degree integrated exactly
    std::vector<QuadNode> nodes;
};

// tabulated positive-weight rules; precision must be 3 or 7
const QuadRule& reference_rule(int precision);

struct MappedRule {
    int element = -1;
    std::vector<Vec2> points;     // physical node positions
    std::vector<double> weights;  // reference weights x 2|E|; sum to |E|
};

MappedRule map_rule(const Mesh& mesh, int element, const QuadRule& rule);

using PointFn = std::function<double(Vec2)>;

// sum of f(x_i) w_i over the mapped rule; throws on non-finite values
double integrate(const Mesh& mesh, int element, const PointFn& f, const QuadRule& rule);
double integrate(const MappedRule& mapped, const PointFn& f);

// quadrature-based discrete seminorm (sum of f^2 w)^{1/2}
double discrete_seminorm(const Mesh& mesh, int element, const PointFn& f, const QuadRule& rule);
double discrete_seminorm(const MappedRule& mapped, const PointFn& f);

// 1D Gauss-Legendre rule on [0,1], exact through degree 2n-1
struct GaussSegment {
    std::vector<double> points;
    std::vector<double> weights;
};
const GaussSegment& gauss_segment(int n);

}  // namespace vpinn
