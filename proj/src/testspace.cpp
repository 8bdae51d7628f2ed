#include "vpinn/testspace.hpp"

#include <cmath>
#include <stdexcept>

namespace vpinn {

InteriorIndexMap::InteriorIndexMap(const Mesh& mesh)
    : interior_(interior_vertices(mesh)), vertex_to_index_(mesh.num_vertices(), -1) {
    for (int i = 0; i < size(); ++i) vertex_to_index_[interior_[i]] = i;
}

Vec2 hat_gradient(const Mesh& mesh, int vertex, int element) {
    const auto& tri = mesh.triangles[element];
    int local = -1;
    for (int k = 0; k < 3; ++k) {
        if (tri[k] == vertex) local = k;
    }
    if (local < 0) {
        throw std::invalid_argument("hat_gradient: vertex not in element");
    }
    // grad lambda_local = perp(opposite edge) / (2 |E|)
    const Vec2 a = mesh.vertices[tri[(local + 1) % 3]];
    const Vec2 b = mesh.vertices[tri[(local + 2) % 3]];
    const double inv = 1.0 / (2.0 * mesh.area(element));
    return inv * perp(b - a);
}

std::vector<int> elemental_index_set(const Mesh& mesh, const InteriorIndexMap& map, int element) {
    std::vector<int> set;
    for (int k = 0; k < 3; ++k) {
        const int idx = map.index_of(mesh.triangles[element][k]);
        if (idx >= 0) set.push_back(idx);
    }
    return set;
}

AssemblyWorkspace::AssemblyWorkspace(const Mesh& mesh_in, const ProblemSpec& data,
                                     const QuadRule& rule)
    : mesh(&mesh_in), index_map(mesh_in) {
    const int nt = mesh_in.num_triangles();
    nodes_per_element = static_cast<int>(rule.nodes.size());

    hat_values.resize(nodes_per_element);
    for (int q = 0; q < nodes_per_element; ++q) {
        hat_values[q] = rule.nodes[q].bary;  // hats restrict to barycentric coordinates
    }

    points.reserve(static_cast<size_t>(nt) * nodes_per_element);
    weights.reserve(points.capacity());
    hat_gradients.resize(nt);
    residual_index.resize(nt);
    for (int t = 0; t < nt; ++t) {
        const MappedRule mapped = map_rule(mesh_in, t, rule);
        points.insert(points.end(), mapped.points.begin(), mapped.points.end());
        weights.insert(weights.end(), mapped.weights.begin(), mapped.weights.end());
        for (int k = 0; k < 3; ++k) {
            hat_gradients[t][k] = hat_gradient(mesh_in, mesh_in.triangles[t][k], t);
            residual_index[t][k] = index_map.index_of(mesh_in.triangles[t][k]);
        }
    }

    const size_t np = points.size();
    f_values.resize(np);
    mu_values.resize(np);
    sigma_values.resize(np);
    beta_values.resize(np);
    for (size_t i = 0; i < np; ++i) {
        f_values[i] = data.f(points[i]);
        mu_values[i] = data.mu(points[i]);
        sigma_values[i] = data.sigma(points[i]);
        beta_values[i] = data.beta(points[i]);
        if (!std::isfinite(f_values[i]) || !std::isfinite(mu_values[i]) ||
            !std::isfinite(sigma_values[i]) || !std::isfinite(beta_values[i].x) ||
            !std::isfinite(beta_values[i].y)) {
            throw std::domain_error("assemble_residuals: non-finite problem data");
        }
    }
}

ResidualVector accumulate_residuals(const AssemblyWorkspace& ws,
                                    std::span<const double> field_values,
                                    std::span<const Vec2> field_gradients) {
    ResidualVector r;
    r.values.assign(ws.index_map.size(), 0.0);
    const int nt = ws.mesh->num_triangles();
    const int nq = ws.nodes_per_element;
    for (int t = 0; t < nt; ++t) {
        const size_t base = static_cast<size_t>(t) * nq;
        for (int q = 0; q < nq; ++q) {
            const size_t i = base + q;
            const double w = ws.weights[i];
            const double u = field_values[i];
            const Vec2 grad_u = field_gradients[i];
            if (!std::isfinite(u) || !std::isfinite(grad_u.x) || !std::isfinite(grad_u.y)) {
                throw std::domain_error("assemble_residuals: non-finite field value");
            }
            const double advected = dot(ws.beta_values[i], grad_u) + ws.sigma_values[i] * u;
            for (int k = 0; k < 3; ++k) {
                const int idx = ws.residual_index[t][k];
                if (idx < 0) continue;
                const double phi = ws.hat_values[q][k];
                const Vec2 grad_phi = ws.hat_gradients[t][k];
                r.values[idx] += w * (ws.f_values[i] * phi -
                                      ws.mu_values[i] * dot(grad_u, grad_phi) - advected * phi);
            }
        }
    }
    return r;
}

ResidualVector assemble_residuals(const Mesh& mesh, const Field& field, const ProblemSpec& data,
                                  const QuadRule& rule) {
    if (rule.precision < 2) {
        throw std::invalid_argument("assemble_residuals: rule precision must be >= 2");
    }
    AssemblyWorkspace ws(mesh, data, rule);
    std::vector<double> values(ws.points.size());
    std::vector<Vec2> gradients(ws.points.size());
    field.eval_batch(ws.points, values, gradients);
    return accumulate_residuals(ws, values, gradients);
}

DenseMatrix stiffness_matrix(const Mesh& mesh, const InteriorIndexMap& map) {
    const int n = map.size();
    DenseMatrix s(n, n);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double area = mesh.area(t);
        std::array<Vec2, 3> grads;
        std::array<int, 3> idx;
        for (int k = 0; k < 3; ++k) {
            grads[k] = hat_gradient(mesh, mesh.triangles[t][k], t);
            idx[k] = map.index_of(mesh.triangles[t][k]);
        }
        for (int a = 0; a < 3; ++a) {
            if (idx[a] < 0) continue;
            for (int b = 0; b < 3; ++b) {
                if (idx[b] < 0) continue;
                s(idx[a], idx[b]) += area * dot(grads[a], grads[b]);
            }
        }
    }
    return s;
}

NormEquivConstants measure_norm_constants(const Mesh& mesh) {
    const InteriorIndexMap map(mesh);
    if (map.size() < 1) {
        throw std::invalid_argument("measure_norm_constants: mesh has no interior vertices");
    }
    const DenseMatrix s = stiffness_matrix(mesh, map);
    // ||v||_2^2 / |v_h|_1^2 ranges over [1/lambda_max(S), 1/lambda_min(S)]
    const double lambda_max = power_iteration_max(s, 1e-8, 100000);
    const double lambda_min = inverse_iteration_min(s, 1e-8, 100000);
    return {1.0 / std::sqrt(lambda_max), 1.0 / std::sqrt(lambda_min)};
}

}  // namespace vpinn
