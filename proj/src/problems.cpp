#include "vpinn/problems.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace vpinn {

namespace {

// u(x,y) = tanh(2 (x^3 - y^4))
double tanh_u(Vec2 p) {
    return std::tanh(2.0 * (p.x * p.x * p.x - p.y * p.y * p.y * p.y));
}

Vec2 tanh_grad(Vec2 p) {
    const double s = 2.0 * (p.x * p.x * p.x - p.y * p.y * p.y * p.y);
    const double t = std::tanh(s);
    const double sech2 = 1.0 - t * t;
    return {sech2 * 6.0 * p.x * p.x, sech2 * (-8.0 * p.y * p.y * p.y)};
}

// f = -Lap u = -(sech^2(s) Lap s - 2 sech^2(s) tanh(s) |grad s|^2)
double tanh_forcing(Vec2 p) {
    const double s = 2.0 * (p.x * p.x * p.x - p.y * p.y * p.y * p.y);
    const double t = std::tanh(s);
    const double sech2 = 1.0 - t * t;
    const double sx = 6.0 * p.x * p.x;
    const double sy = -8.0 * p.y * p.y * p.y;
    const double lap_s = 12.0 * p.x - 24.0 * p.y * p.y;
    return -sech2 * (lap_s - 2.0 * t * (sx * sx + sy * sy));
}

}  // namespace

ProblemSpec poisson_tanh() {
    ProblemSpec spec;
    spec.name = "poisson_tanh";
    spec.mu = [](Vec2) { return 1.0; };
    spec.beta = [](Vec2) { return Vec2{0.0, 0.0}; };
    spec.sigma = [](Vec2) { return 0.0; };
    spec.f = tanh_forcing;
    spec.g = tanh_u;
    spec.lift = tanh_u;
    spec.lift_gradient = tanh_grad;
    spec.exact = std::make_shared<AnalyticField>(tanh_u, tanh_grad);
    return spec;
}

ProblemSpec polynomial_diffusion() {
    ProblemSpec spec;
    spec.name = "polynomial_diffusion";
    auto u = [](Vec2 p) { return p.x * p.x + p.y * p.y; };
    auto grad = [](Vec2 p) { return Vec2{2.0 * p.x, 2.0 * p.y}; };
    spec.mu = [](Vec2) { return 1.0; };
    spec.beta = [](Vec2) { return Vec2{0.0, 0.0}; };
    spec.sigma = [](Vec2) { return 0.0; };
    spec.f = [](Vec2) { return -4.0; };
    spec.g = u;
    spec.lift = u;
    spec.lift_gradient = grad;
    spec.exact = std::make_shared<AnalyticField>(u, grad);
    return spec;
}

const ProblemSpec& problem_by_name(const std::string& name) {
    static const ProblemSpec tanh_spec = poisson_tanh();
    static const ProblemSpec poly_spec = polynomial_diffusion();
    if (name == "poisson_tanh") return tanh_spec;
    if (name == "polynomial_diffusion") return poly_spec;
    throw std::invalid_argument("unknown problem: " + name);
}

double manufactured_consistency(const ProblemSpec& spec, int count, unsigned seed) {
    if (!spec.has_exact()) {
        throw std::invalid_argument("manufactured_consistency requires an exact solution");
    }
    std::mt19937_64 rng(seed);
    auto unit = [&rng]() {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    const double step = 1e-5;
    double worst = 0.0;
    for (int i = 0; i < count; ++i) {
        // keep the finite-difference stencil inside the closed unit square
        const Vec2 p{step + (1.0 - 2.0 * step) * unit(), step + (1.0 - 2.0 * step) * unit()};
        auto flux = [&spec](Vec2 q) {
            return spec.mu(q) * spec.exact->gradient(q);
        };
        const double div_flux =
            (flux({p.x + step, p.y}).x - flux({p.x - step, p.y}).x) / (2.0 * step) +
            (flux({p.x, p.y + step}).y - flux({p.x, p.y - step}).y) / (2.0 * step);
        auto [u, grad_u] = spec.exact->value_and_gradient(p);
        const double residual = -div_flux + dot(spec.beta(p), grad_u) + spec.sigma(p) * u;
        const double fval = spec.f(p);
        worst = std::max(worst, std::abs(residual - fval) / (1.0 + std::abs(fval)));
    }
    return worst;
}

double h1_distance(const Mesh& mesh, const Field& a, const Field& b, const QuadRule& rule) {
    double sum = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        sum += integrate(mesh, t, [&](Vec2 p) {
            const Vec2 d = a.gradient(p) - b.gradient(p);
            return dot(d, d);
        }, rule);
    }
    return std::sqrt(sum);
}

double h1_error(const Mesh& mesh, const Field& field, const ProblemSpec& spec,
                const QuadRule& rule) {
    if (!spec.has_exact()) {
        throw std::invalid_argument("h1_error: problem has no exact gradient");
    }
    return h1_distance(mesh, *spec.exact, field, rule);
}

}  // namespace vpinn
