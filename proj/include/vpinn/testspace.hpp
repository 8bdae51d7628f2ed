#pragma once

#include <vector>

#include "vpinn/field.hpp"
#include "vpinn/linalg.hpp"
#include "vpinn/mesh.hpp"
#include "vpinn/problems.hpp"
#include "vpinn/quadrature.hpp"

namespace vpinn {

// numbering of the interior vertices, which index the hat-function basis
class InteriorIndexMap {
public:
    explicit InteriorIndexMap(const Mesh& mesh);

    int size() const { return static_cast<int>(interior_.size()); }
    const std::vector<int>& vertices() const { return interior_; }
    // index into the residual vector, or -1 for boundary vertices
    int index_of(int vertex) const { return vertex_to_index_[vertex]; }

private:
    std::vector<int> interior_;
    std::vector<int> vertex_to_index_;
};

// residuals r_i = F_h(phi_i) - a_h(w, phi_i) over the interior-vertex hats
struct ResidualVector {
    std::vector<double> values;

    double loss() const {
        double sum = 0.0;
        for (double r : values) sum += r * r;
        return sum;
    }
};

inline double loss(const ResidualVector& r) { return r.loss(); }

// constant gradient of the hat function of `vertex` on `element`;
// throws std::invalid_argument when the vertex is not a corner of the element
Vec2 hat_gradient(const Mesh& mesh, int vertex, int element);

// interior vertices whose hat support contains the element (at most 3)
std::vector<int> elemental_index_set(const Mesh& mesh, const InteriorIndexMap& map, int element);

ResidualVector assemble_residuals(const Mesh& mesh, const Field& field, const ProblemSpec& data,
                                  const QuadRule& rule);

// per-element quadrature data reused across repeated assemblies on one mesh
struct AssemblyWorkspace {
    const Mesh* mesh = nullptr;
    InteriorIndexMap index_map;
    std::vector<Vec2> points;                     // all quadrature points, element-major
    std::vector<double> weights;                  // physical weights
    int nodes_per_element = 0;
    std::vector<std::array<double, 3>> hat_values;   // per reference node
    std::vector<std::array<Vec2, 3>> hat_gradients;  // per element
    std::vector<std::array<int, 3>> residual_index;  // per element; -1 on boundary vertices
    std::vector<double> f_values, mu_values, sigma_values;
    std::vector<Vec2> beta_values;

    AssemblyWorkspace(const Mesh& mesh, const ProblemSpec& data, const QuadRule& rule);
};

// same reduction as assemble_residuals, on precomputed field values
ResidualVector accumulate_residuals(const AssemblyWorkspace& ws,
                                    std::span<const double> field_values,
                                    std::span<const Vec2> field_gradients);

// constants of  c_h |v_h|_{1} <= ||v||_2 <= C_h |v_h|_{1}  on V_h
struct NormEquivConstants {
    double c_h = 0.0;
    double C_h = 0.0;
};

// exact P1 stiffness (H1-seminorm Gram) matrix over interior vertices
DenseMatrix stiffness_matrix(const Mesh& mesh, const InteriorIndexMap& map);

NormEquivConstants measure_norm_constants(const Mesh& mesh);

}  // namespace vpinn
