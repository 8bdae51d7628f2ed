#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "vpinn/field.hpp"
#include "vpinn/mesh.hpp"
#include "vpinn/quadrature.hpp"

namespace vpinn {

// Data of -div(mu grad u) + beta . grad u + sigma u = f with Dirichlet data g.
// lift (and its gradient) is a smooth extension of g used to impose the
// boundary condition exactly; for manufactured problems it is the exact solution.
struct ProblemSpec {
    std::string name;
    std::function<double(Vec2)> mu;
    std::function<Vec2(Vec2)> beta;
    std::function<double(Vec2)> sigma;
    std::function<double(Vec2)> f;
    std::function<double(Vec2)> g;
    std::function<double(Vec2)> lift;
    std::function<Vec2(Vec2)> lift_gradient;
    std::shared_ptr<const Field> exact;  // null when no manufactured solution is known

    bool has_exact() const { return exact != nullptr; }
};

ProblemSpec poisson_tanh();
ProblemSpec polynomial_diffusion();
const ProblemSpec& problem_by_name(const std::string& name);

// |f + div(mu grad u) - beta . grad u - sigma u| at `count` seeded sample
// points, where div(mu grad u) is rebuilt by central differences of the
// analytic flux; returns the worst scaled mismatch
double manufactured_consistency(const ProblemSpec& spec, int count, unsigned seed);

// H1 seminorm of (exact - field) accumulated element-wise with the given rule
double h1_error(const Mesh& mesh, const Field& field, const ProblemSpec& spec,
                const QuadRule& rule = reference_rule(7));

// H1 seminorm distance between two fields
double h1_distance(const Mesh& mesh, const Field& a, const Field& b, const QuadRule& rule);

}  // namespace vpinn
