#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vpinn/estimator.hpp"
#include "vpinn/network.hpp"
#include "vpinn/training.hpp"

using namespace vpinn;

TEST_SUITE_BEGIN("estimator");

namespace {

const AnalyticField kZeroField([](Vec2) { return 0.0; }, [](Vec2) { return Vec2{0.0, 0.0}; });

ProblemSpec zero_forcing_poisson() {
    ProblemSpec spec = polynomial_diffusion();
    spec.f = [](Vec2) { return 0.0; };
    return spec;
}

double eval_at(const ElementPoly& p, const Mesh& mesh, int element, Vec2 x) {
    return p.eval(ElementFrame::from(mesh, element).bary(x));
}

}  // namespace

TEST_CASE("projection reproduces polynomials of matching degree") {
    const Mesh mesh = build_structured_unit_square(3);
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 30; ++trial) {
        const int element = static_cast<int>(rng() % mesh.num_triangles());
        const int degree = 2 + static_cast<int>(rng() % 2);
        const double c0 = oracles::uniform01(rng), c1 = oracles::uniform01(rng);
        const double c2 = oracles::uniform01(rng), c3 = oracles::uniform01(rng);
        const double c4 = oracles::uniform01(rng), c5 = oracles::uniform01(rng);
        auto poly = [&](Vec2 p) {
            double v = c0 + c1 * p.x + c2 * p.y + c3 * p.x * p.y + c4 * p.x * p.x +
                       c5 * p.y * p.y;
            if (degree == 3) v += 0.3 * p.x * p.x * p.x - 0.2 * p.y * p.y * p.y;
            return v;
        };
        const PolyProjection proj = project(mesh, element, degree, poly);
        const ElementFrame frame = ElementFrame::from(mesh, element);
        for (int probe = 0; probe < 6; ++probe) {
            const double l1 = oracles::uniform01(rng);
            const double l2 = oracles::uniform01(rng) * (1.0 - l1);
            const std::array<double, 3> lam{l1, l2, 1.0 - l1 - l2};
            CHECK(std::abs(proj.poly.eval(lam) - poly(frame.point(lam))) <= 1e-12);
        }
    }
}

TEST_CASE("projection of a constant is that constant") {
    const Mesh mesh = build_structured_unit_square(2);
    for (int degree : {2, 3}) {
        const PolyProjection proj = project(mesh, 1, degree, [](Vec2) { return 7.25; });
        CHECK(eval_at(proj.poly, mesh, 1, mesh.vertex(1, 0)) ==
              doctest::Approx(7.25).epsilon(1e-14));
        CHECK(eval_at(proj.poly, mesh, 1,
                      (1.0 / 3.0) * (mesh.vertex(1, 0) + mesh.vertex(1, 1) + mesh.vertex(1, 2))) ==
              doctest::Approx(7.25).epsilon(1e-14));
    }
}

TEST_CASE("projection preserves the mean where plain interpolation does not") {
    Mesh mesh;
    mesh.vertices = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    mesh.triangles = {{0, 1, 2}};
    mesh.finalize();
    auto f = [](Vec2 p) { return std::tanh(p.x); };
    const QuadRule& o7 = reference_rule(7);
    const ElementFrame frame = ElementFrame::from(mesh, 0);

    const PolyProjection proj = project(mesh, 0, 2, f);
    const double int_f = integrate(mesh, 0, f, o7);
    const double int_proj =
        integrate(mesh, 0, [&](Vec2 p) { return proj.poly.eval(frame.bary(p)); }, o7);
    CHECK(std::abs(int_proj - int_f) <= 1e-12);

    // interpolation alone misses the mean on this element
    const auto& lattice = principal_lattice(2);
    std::vector<double> nodal;
    for (const auto& lam : lattice) nodal.push_back(f(frame.point(lam)));
    const ElementPoly interp = interpolate_lattice(2, nodal);
    const double int_interp =
        integrate(mesh, 0, [&](Vec2 p) { return interp.eval(frame.bary(p)); }, o7);
    CHECK(std::abs(int_interp - int_f) > 1e-12);
}

TEST_CASE("projection is linear and idempotent") {
    const Mesh mesh = build_structured_unit_square(2);
    std::mt19937_64 rng(9);
    auto f = [](Vec2 p) { return std::sin(2.0 * p.x) * std::cos(p.y); };
    auto g = [](Vec2 p) { return std::exp(p.x - p.y); };
    for (int trial = 0; trial < 10; ++trial) {
        const int element = static_cast<int>(rng() % mesh.num_triangles());
        const double a = oracles::uniform01(rng) * 2.0 - 1.0;
        const double b = oracles::uniform01(rng) * 2.0 - 1.0;
        const PolyProjection pf = project(mesh, element, 2, f);
        const PolyProjection pg = project(mesh, element, 2, g);
        const PolyProjection pc =
            project(mesh, element, 2, [&](Vec2 p) { return a * f(p) + b * g(p); });
        for (size_t m = 0; m < pc.poly.coef.size(); ++m) {
            CHECK(pc.poly.coef[m] ==
                  doctest::Approx(a * pf.poly.coef[m] + b * pg.poly.coef[m]).epsilon(1e-11));
        }
        // projecting the projection changes nothing
        const ElementFrame frame = ElementFrame::from(mesh, element);
        const PolyProjection pp = project(mesh, element, 2, [&](Vec2 p) {
            return pf.poly.eval(frame.bary(p));
        });
        for (size_t m = 0; m < pp.poly.coef.size(); ++m) {
            CHECK(pp.poly.coef[m] == doctest::Approx(pf.poly.coef[m]).epsilon(1e-11));
        }
    }
}

TEST_CASE("bulk residual vanishes for the exact polynomial configuration") {
    const Mesh mesh = build_structured_unit_square(4);
    const ProblemSpec spec = polynomial_diffusion();
    for (int t : {0, 7, 18, 31}) {
        const ElementPoly bulk = bulk_residual(mesh, t, spec, *spec.exact);
        const ElementFrame frame = ElementFrame::from(mesh, t);
        for (const auto& lam : principal_lattice(2)) {
            CHECK(std::abs(bulk.eval(lam)) <= 1e-11);
        }
        (void)frame;
    }
}

TEST_CASE("bulk residual vanishes for zero data and zero field") {
    const Mesh mesh = build_structured_unit_square(2);
    const ProblemSpec spec = zero_forcing_poisson();
    const ElementPoly bulk = bulk_residual(mesh, 0, spec, kZeroField);
    for (const auto& lam : principal_lattice(2)) CHECK(bulk.eval(lam) == 0.0);
}

TEST_CASE("bulk residual vanishes when the flux is a reproduced polynomial") {
    // u = x^4: grad u in P3, f = -Lap u = -12 x^2 in P2, mu = 1
    const Mesh mesh = build_structured_unit_square(2);
    ProblemSpec spec = polynomial_diffusion();
    spec.f = [](Vec2 p) { return -12.0 * p.x * p.x; };
    const AnalyticField quartic([](Vec2 p) { return p.x * p.x * p.x * p.x; },
                                [](Vec2 p) {
                                    return Vec2{4.0 * p.x * p.x * p.x, 0.0};
                                });
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const ElementPoly bulk = bulk_residual(mesh, t, spec, quartic);
        for (const auto& lam : principal_lattice(2)) {
            CHECK(std::abs(bulk.eval(lam)) <= 1e-11);
        }
    }
}

TEST_CASE("edge jump vanishes for a globally smooth polynomial flux") {
    // u of degree q+1 = 4 has flux in P3^2, reproduced on both sides
    const Mesh mesh = build_structured_unit_square(2);
    const ProblemSpec spec = polynomial_diffusion();
    const AnalyticField quartic(
        [](Vec2 p) { return p.x * p.x * p.x * p.x + p.y * p.y * p.y * p.y; },
        [](Vec2 p) {
            return Vec2{4.0 * p.x * p.x * p.x, 4.0 * p.y * p.y * p.y};
        });
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const EdgeJump jump = edge_jump(mesh, e, spec, quartic);
        for (double t : {0.0, 0.3, 0.71, 1.0}) {
            CHECK(std::abs(jump.eval(t)) <= 1e-11);
        }
    }
}

TEST_CASE("edge jump is zero on boundary edges and zero fields") {
    const Mesh mesh = build_structured_unit_square(2);
    const ProblemSpec spec = zero_forcing_poisson();
    int boundary_seen = 0;
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const EdgeJump jump = edge_jump(mesh, e, spec, kZeroField);
        CHECK(jump.l2_norm() == 0.0);
        if (mesh.edges[e].boundary()) {
            ++boundary_seen;
            CHECK(jump.eval(0.5) == 0.0);
        }
    }
    CHECK(boundary_seen == 8);
}

TEST_CASE("edge jump norm is independent of the element labeling") {
    const Mesh mesh = build_structured_unit_square(2);
    const ProblemSpec spec = poisson_tanh();
    const TrialField field = TrialField::for_problem(init_params({2, 10, 1}, 15), spec);
    for (int e = 0; e < mesh.num_edges(); ++e) {
        if (mesh.edges[e].boundary()) continue;
        EdgeJump jump = edge_jump(mesh, e, spec, field);
        EdgeJump swapped = jump;
        std::swap(swapped.frame1, swapped.frame2);
        std::swap(swapped.flux1_x, swapped.flux2_x);
        std::swap(swapped.flux1_y, swapped.flux2_y);
        std::swap(swapped.n1, swapped.n2);
        CHECK(jump.l2_norm() == doctest::Approx(swapped.l2_norm()).epsilon(1e-13));
    }
}

TEST_CASE("eta_res vanishes on the exact polynomial configuration") {
    const Mesh mesh = build_structured_unit_square(4);
    const ProblemSpec spec = polynomial_diffusion();
    for (int t : {0, 13, 31}) {
        CHECK(eta_res(mesh, t, spec, *spec.exact) <= 1e-10);
    }
}

TEST_CASE("eta_res is exactly homogeneous in the field") {
    const Mesh mesh = build_structured_unit_square(2);
    const ProblemSpec spec = zero_forcing_poisson();
    const AnalyticField base([](Vec2 p) { return std::sin(p.x + 2.0 * p.y); },
                             [](Vec2 p) {
                                 return Vec2{std::cos(p.x + 2.0 * p.y),
                                             2.0 * std::cos(p.x + 2.0 * p.y)};
                             });
    const LinearCombinationField doubled(2.0, base, 0.0, base);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double one = eta_res(mesh, t, spec, base);
        const double two = eta_res(mesh, t, spec, doubled);
        CHECK(two == doctest::Approx(2.0 * one).epsilon(1e-13));
    }
}

TEST_CASE("eta_rhs vanishes on reproduced forcings") {
    const Mesh mesh = build_structured_unit_square(2);
    ProblemSpec spec = polynomial_diffusion();  // f = -4 constant
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto [r1, r2] = eta_rhs(mesh, t, spec);
        CHECK(r1 <= 1e-12);
        CHECK(r2 <= 1e-12);
    }
    // degree q-1 forcing is also reproduced exactly
    spec.f = [](Vec2 p) { return 1.0 + p.x - 2.0 * p.y + 0.5 * p.x * p.y; };
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto [r1, r2] = eta_rhs(mesh, t, spec);
        CHECK(r1 <= 1e-12);
        CHECK(r2 <= 1e-12);
    }
}

TEST_CASE("eta_rhs matches a refined-quadrature oracle on a smooth forcing") {
    const Mesh mesh = build_structured_unit_square(8);
    ProblemSpec spec = polynomial_diffusion();
    spec.f = [](Vec2 p) { return std::sin(M_PI * p.x); };
    const int element = 2 * (8 * 3 + 4);  // an interior-ish element
    const auto [r1, r2] = eta_rhs(mesh, element, spec);

    // oracle: same projection, continuous norm by composite refinement
    const PolyProjection p2 = project(mesh, element, 2, spec.f);
    const ElementFrame frame = ElementFrame::from(mesh, element);
    const double osc2 = oracles::refined_integral(mesh, element, [&](Vec2 p) {
        const double d = spec.f(p) - p2.poly.eval(frame.bary(p));
        return d * d;
    }, 3);
    const double oracle_r1 = mesh.diameter[element] * std::sqrt(osc2);
    CHECK(r1 == doctest::Approx(oracle_r1).epsilon(1e-6));

    // discrete-norm part recomputed directly at the assembly nodes
    const QuadRule& q3 = reference_rule(3);
    const PolyProjection p3 = project(mesh, element, 3, spec.f);
    const MappedRule mapped = map_rule(mesh, element, q3);
    double s2 = 0.0, s3 = 0.0;
    for (size_t q = 0; q < mapped.points.size(); ++q) {
        const double d2 = spec.f(mapped.points[q]) - p2.poly.eval(frame.bary(mapped.points[q]));
        const double d3 = spec.f(mapped.points[q]) - p3.poly.eval(frame.bary(mapped.points[q]));
        s2 += mapped.weights[q] * d2 * d2;
        s3 += mapped.weights[q] * d3 * d3;
    }
    const double oracle_r2 = mesh.diameter[element] * std::sqrt(s2) + std::sqrt(s3);
    CHECK(r2 == doctest::Approx(oracle_r2).epsilon(1e-12));
}

TEST_CASE("eta_coef vanishes for constant coefficients and a low-degree field") {
    const Mesh mesh = build_structured_unit_square(2);
    ProblemSpec spec;
    spec.name = "constant_coefficients";
    spec.mu = [](Vec2) { return 2.0; };
    spec.beta = [](Vec2) { return Vec2{1.0, -2.0}; };
    spec.sigma = [](Vec2) { return 3.0; };
    spec.f = [](Vec2) { return 1.0; };
    spec.g = [](Vec2) { return 0.0; };
    const AnalyticField quadratic([](Vec2 p) { return p.x * p.x + p.y * p.y; },
                                  [](Vec2 p) {
                                      return Vec2{2.0 * p.x, 2.0 * p.y};
                                  });
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        for (double term : eta_coef(mesh, t, spec, quadratic)) {
            CHECK(term <= 1e-11);
        }
    }
}

TEST_CASE("eta_coef vanishes identically for the zero field") {
    const Mesh mesh = build_structured_unit_square(2);
    const ProblemSpec spec = poisson_tanh();
    for (double term : eta_coef(mesh, 3, spec, kZeroField)) {
        CHECK(term == 0.0);
    }
}

TEST_CASE("doubling mu doubles the flux oscillation terms exactly") {
    const Mesh mesh = build_structured_unit_square(2);
    ProblemSpec spec = poisson_tanh();
    spec.mu = [](Vec2 p) { return 1.0 + 0.5 * p.x; };
    ProblemSpec doubled = spec;
    doubled.mu = [](Vec2 p) { return 2.0 * (1.0 + 0.5 * p.x); };
    const TrialField field = TrialField::for_problem(init_params({2, 10, 1}, 30), spec);
    for (int t : {0, 3, 6}) {
        const auto one = eta_coef(mesh, t, spec, field);
        const auto two = eta_coef(mesh, t, doubled, field);
        CHECK(two[0] == doctest::Approx(2.0 * one[0]).epsilon(1e-14));
        CHECK(two[3] == doctest::Approx(2.0 * one[3]).epsilon(1e-14));
    }
}

TEST_CASE("eta_loss on the single-interior-vertex mesh") {
    const Mesh mesh = build_structured_unit_square(2);
    const InteriorIndexMap map(mesh);
    ResidualVector r;
    r.values = {5.0};
    CHECK(eta_loss_global(r, 2.0) == doctest::Approx(10.0).epsilon(1e-15));
    int adjacent = 0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double local = eta_loss_local(mesh, map, t, r, 2.0);
        if (!elemental_index_set(mesh, map, t).empty()) {
            CHECK(local == doctest::Approx(10.0).epsilon(1e-15));
            ++adjacent;
        } else {
            CHECK(local == 0.0);
        }
    }
    CHECK(adjacent == 6);  // the center hat spans six of the eight triangles
}

TEST_CASE("zero residuals give zero loss terms") {
    const Mesh mesh = build_structured_unit_square(2);
    const InteriorIndexMap map(mesh);
    ResidualVector r;
    r.values = {0.0};
    CHECK(eta_loss_global(r, 3.0) == 0.0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        CHECK(eta_loss_local(mesh, map, t, r, 3.0) == 0.0);
    }
}

TEST_CASE("localized loss strictly dominates the global loss on n >= 2 meshes") {
    const Mesh mesh = build_structured_unit_square(4);
    const InteriorIndexMap map(mesh);
    std::mt19937_64 rng(44);
    ResidualVector r;
    r.values.resize(map.size());
    for (double& v : r.values) v = oracles::uniform01(rng) * 2.0 - 1.0;
    const double C_h = 1.7;
    double local_sq = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double local = eta_loss_local(mesh, map, t, r, C_h);
        local_sq += local * local;
    }
    const double global = eta_loss_global(r, C_h);
    CHECK(global * global < local_sq);  // every hat spans several elements
}

TEST_CASE("breakdown vanishes for the exact polynomial configuration") {
    const Mesh mesh = build_structured_unit_square(8);
    const ProblemSpec spec = polynomial_diffusion();
    const ResidualVector r = assemble_residuals(mesh, *spec.exact, spec, reference_rule(3));
    const double C_h = resolve_ch(mesh, ChMode::measured);
    const EstimatorBreakdown b = assemble_breakdown(mesh, *spec.exact, spec, r, C_h);
    CHECK(b.eta <= 1e-8);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        CHECK(b.res[t] <= 1e-9);
        CHECK(b.loss[t] <= 1e-9);
        for (double c : b.coef[t]) CHECK(c <= 1e-9);
        for (double c : b.rhs[t]) CHECK(c <= 1e-9);
    }
}

TEST_CASE("breakdown invariants hold for arbitrary fields") {
    const Mesh mesh = build_structured_unit_square(4);
    const ProblemSpec spec = poisson_tanh();
    const TrialField field = TrialField::for_problem(init_params({2, 14, 14, 1}, 51), spec);
    const ResidualVector r = assemble_residuals(mesh, field, spec, reference_rule(3));
    const double C_h = resolve_ch(mesh, ChMode::measured);
    const EstimatorBreakdown b = assemble_breakdown(mesh, field, spec, r, C_h);

    double res_sq = 0.0, coef_sq = 0.0, rhs_sq = 0.0, loss_sq = 0.0, local_sq = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        CHECK(b.res[t] >= 0.0);
        CHECK(b.loss[t] >= 0.0);
        CHECK(std::isfinite(b.total[t]));
        res_sq += b.res[t] * b.res[t];
        loss_sq += b.loss[t] * b.loss[t];
        for (double c : b.coef[t]) {
            CHECK(c >= 0.0);
            coef_sq += c * c;
        }
        for (double c : b.rhs[t]) {
            CHECK(c >= 0.0);
            rhs_sq += c * c;
        }
        double total_sq = b.res[t] * b.res[t] + b.loss[t] * b.loss[t];
        for (double c : b.coef[t]) total_sq += c * c;
        for (double c : b.rhs[t]) total_sq += c * c;
        CHECK(b.total[t] == doctest::Approx(std::sqrt(total_sq)).epsilon(1e-13));
        local_sq += total_sq;
    }
    CHECK(b.eta_res == doctest::Approx(std::sqrt(res_sq)).epsilon(1e-13));
    CHECK(b.eta_coef == doctest::Approx(std::sqrt(coef_sq)).epsilon(1e-13));
    CHECK(b.eta_rhs == doctest::Approx(std::sqrt(rhs_sq)).epsilon(1e-13));
    CHECK(b.eta == doctest::Approx(b.eta_res + b.eta_loss + b.eta_coef + b.eta_rhs)
                       .epsilon(1e-14));
    CHECK(b.eta_localized == doctest::Approx(std::sqrt(local_sq)).epsilon(1e-13));
    CHECK(b.eta_loss * b.eta_loss <= loss_sq * (1.0 + 1e-12));
    CHECK(local_sq >= res_sq + coef_sq + rhs_sq + b.eta_loss * b.eta_loss - 1e-12);
}

TEST_CASE("standalone element terms agree with the batched breakdown") {
    const Mesh mesh = build_structured_unit_square(3);
    const ProblemSpec spec = poisson_tanh();
    const TrialField field = TrialField::for_problem(init_params({2, 12, 1}, 64), spec);
    const ResidualVector r = assemble_residuals(mesh, field, spec, reference_rule(3));
    const EstimatorBreakdown b = assemble_breakdown(mesh, field, spec, r, 1.0);
    for (int t : {0, 5, 11, 17}) {
        CHECK(eta_res(mesh, t, spec, field) == doctest::Approx(b.res[t]).epsilon(1e-12));
        const auto coef = eta_coef(mesh, t, spec, field);
        const auto rhs = eta_rhs(mesh, t, spec);
        for (int k = 0; k < 6; ++k) {
            CHECK(coef[k] == doctest::Approx(b.coef[t][k]).epsilon(1e-12));
        }
        for (int k = 0; k < 2; ++k) {
            CHECK(rhs[k] == doctest::Approx(b.rhs[t][k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("efficiency index") {
    EstimatorBreakdown b;
    b.eta = 2.0;
    CHECK(efficiency_index(b, 2.0) == doctest::Approx(1.0));
    CHECK(efficiency_index(b, 0.5) == doctest::Approx(4.0));
    EstimatorBreakdown scaled = b;
    scaled.eta = 4.0;
    CHECK(efficiency_index(scaled, 1.0) == doctest::Approx(efficiency_index(b, 0.5)));
    CHECK_THROWS_AS(efficiency_index(b, 0.0), std::invalid_argument);
}

TEST_SUITE_END();
