#pragma once

#include <array>
#include <string>
#include <vector>

#include "vpinn/field.hpp"
#include "vpinn/mesh.hpp"
#include "vpinn/polynomial.hpp"
#include "vpinn/problems.hpp"
#include "vpinn/quadrature.hpp"
#include "vpinn/testspace.hpp"

namespace vpinn {

// mean-preserving elemental projection: Lagrange interpolation at the
// degree-k principal lattice plus a constant shift restoring the element
// integral (computed with the order-7 rule)
struct PolyProjection {
    int element = -1;
    ElementPoly poly;
};

PolyProjection project(const Mesh& mesh, int element, int degree, const PointFn& f);

struct VectorProjection {
    int element = -1;
    ElementPoly x, y;
};

VectorProjection project_vector(const Mesh& mesh, int element, int degree,
                                const std::function<Vec2(Vec2)>& f);

// trace of the projected-flux discontinuity across one edge; identically zero
// on boundary edges
class EdgeJump {
public:
    // t in [0,1] parameterizes the edge from its first to its second vertex
    double eval(double t) const;
    double l2_norm() const;  // 4-point Gauss, exact for the degree-q trace

    bool zero = true;
    Vec2 a, b;
    double length = 0.0;
    ElementFrame frame1, frame2;
    ElementPoly flux1_x, flux1_y, flux2_x, flux2_y;
    Vec2 n1, n2;
};

EdgeJump edge_jump(const Mesh& mesh, int edge, const ProblemSpec& data, const Field& field);

// polynomial bulk residual on one element (degree q-1)
ElementPoly bulk_residual(const Mesh& mesh, int element, const ProblemSpec& data,
                          const Field& field);

double eta_res(const Mesh& mesh, int element, const ProblemSpec& data, const Field& field);
std::array<double, 2> eta_rhs(const Mesh& mesh, int element, const ProblemSpec& data);
std::array<double, 6> eta_coef(const Mesh& mesh, int element, const ProblemSpec& data,
                               const Field& field);

double eta_loss_local(const Mesh& mesh, const InteriorIndexMap& map, int element,
                      const ResidualVector& r, double C_h);
double eta_loss_global(const ResidualVector& r, double C_h);

struct EstimatorBreakdown {
    // per element
    std::vector<double> res;
    std::vector<double> loss;
    std::vector<std::array<double, 6>> coef;
    std::vector<std::array<double, 2>> rhs;
    std::vector<double> total;  // eta(E)

    // global aggregates
    double eta_res = 0.0;
    double eta_loss = 0.0;  // C_h R_h
    double eta_coef = 0.0;
    double eta_rhs = 0.0;
    double eta = 0.0;            // eta_res + eta_loss + eta_coef + eta_rhs
    double eta_localized = 0.0;  // (sum_E eta(E)^2)^{1/2}
    double C_h = 0.0;
};

EstimatorBreakdown assemble_breakdown(const Mesh& mesh, const Field& field,
                                      const ProblemSpec& data, const ResidualVector& r,
                                      double C_h);

double efficiency_index(const EstimatorBreakdown& breakdown, double true_error);

// one row per element plus a trailing global-summary row
void save_breakdown_csv(const EstimatorBreakdown& breakdown, const std::string& path);

}  // namespace vpinn
