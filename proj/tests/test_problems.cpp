#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vpinn/problems.hpp"

using namespace vpinn;

TEST_SUITE_BEGIN("problems");

TEST_CASE("poisson_tanh point values") {
    const ProblemSpec spec = poisson_tanh();
    CHECK(spec.exact->value({0.0, 0.0}) == doctest::Approx(0.0));
    CHECK(spec.exact->value({1.0, 0.0}) == doctest::Approx(std::tanh(2.0)).epsilon(1e-15));
    const Vec2 g0 = spec.exact->gradient({0.0, 0.0});
    CHECK(g0.x == 0.0);
    CHECK(g0.y == 0.0);
    CHECK(spec.mu({0.3, 0.7}) == 1.0);
    CHECK(spec.sigma({0.3, 0.7}) == 0.0);
}

TEST_CASE("poisson_tanh forcing is consistent with the exact solution") {
    // central differences of the analytic flux against the closed-form f
    const ProblemSpec spec = poisson_tanh();
    CHECK(manufactured_consistency(spec, 100, 42) <= 1e-6);
}

TEST_CASE("poisson_tanh gradient matches finite differences of the value") {
    const ProblemSpec spec = poisson_tanh();
    std::mt19937_64 rng(7);
    const double step = 1e-6;
    for (int i = 0; i < 100; ++i) {
        const Vec2 p{0.01 + 0.98 * oracles::uniform01(rng),
                     0.01 + 0.98 * oracles::uniform01(rng)};
        const Vec2 g = spec.exact->gradient(p);
        const double fdx =
            (spec.exact->value({p.x + step, p.y}) - spec.exact->value({p.x - step, p.y})) /
            (2.0 * step);
        const double fdy =
            (spec.exact->value({p.x, p.y + step}) - spec.exact->value({p.x, p.y - step})) /
            (2.0 * step);
        CHECK(std::abs(fdx - g.x) <= 1e-6 * (1.0 + std::abs(g.x)));
        CHECK(std::abs(fdy - g.y) <= 1e-6 * (1.0 + std::abs(g.y)));
    }
}

TEST_CASE("polynomial_diffusion data") {
    const ProblemSpec spec = polynomial_diffusion();
    CHECK(spec.f({0.2, 0.9}) == -4.0);
    CHECK(manufactured_consistency(spec, 100, 1) <= 1e-8);
}

TEST_CASE("coefficients satisfy the coercivity conditions at sampled points") {
    std::mt19937_64 rng(23);
    const double step = 1e-6;
    for (const ProblemSpec& spec : {poisson_tanh(), polynomial_diffusion()}) {
        for (int i = 0; i < 100; ++i) {
            const Vec2 p{step + (1.0 - 2.0 * step) * oracles::uniform01(rng),
                         step + (1.0 - 2.0 * step) * oracles::uniform01(rng)};
            CHECK(spec.mu(p) >= 1e-8);
            const double div_beta =
                (spec.beta({p.x + step, p.y}).x - spec.beta({p.x - step, p.y}).x +
                 spec.beta({p.x, p.y + step}).y - spec.beta({p.x, p.y - step}).y) /
                (2.0 * step);
            CHECK(spec.sigma(p) - 0.5 * div_beta >= -1e-9);
        }
    }
}

TEST_CASE("h1_error of the injected exact field is zero") {
    const Mesh mesh = build_structured_unit_square(4);
    for (const ProblemSpec& spec : {poisson_tanh(), polynomial_diffusion()}) {
        CHECK(h1_error(mesh, *spec.exact, spec) <= 1e-12);
    }
}

TEST_CASE("h1_error of the zero field on polynomial_diffusion is sqrt(8/3)") {
    const ProblemSpec spec = polynomial_diffusion();
    const AnalyticField zero([](Vec2) { return 0.0; }, [](Vec2) { return Vec2{0.0, 0.0}; });
    for (int n : {2, 4}) {
        const Mesh mesh = build_structured_unit_square(n);
        CHECK(h1_error(mesh, zero, spec) ==
              doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-13));
    }
}

TEST_CASE("h1_error is stable under mesh refinement for fixed analytic fields") {
    // both fields analytic: the integral is mesh-independent, only quadrature
    // error moves, and it is far below 1e-8 for this mild integrand
    const ProblemSpec spec = polynomial_diffusion();
    const AnalyticField field([](Vec2 p) { return std::exp(0.5 * (p.x + p.y)); },
                              [](Vec2 p) {
                                  const double e = 0.5 * std::exp(0.5 * (p.x + p.y));
                                  return Vec2{e, e};
                              });
    const double coarse = h1_error(build_structured_unit_square(8), field, spec);
    const double fine = h1_error(build_structured_unit_square(16), field, spec);
    CHECK(std::abs(coarse - fine) <= 1e-8);
}

TEST_CASE("h1 distance satisfies the triangle inequality") {
    const Mesh mesh = build_structured_unit_square(4);
    const QuadRule& rule = reference_rule(7);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const double a1 = oracles::uniform01(rng), a2 = oracles::uniform01(rng);
        const double b1 = oracles::uniform01(rng), b2 = oracles::uniform01(rng);
        const AnalyticField f([=](Vec2 p) { return std::sin(a1 * p.x) * std::cos(a2 * p.y); },
                              [=](Vec2 p) {
                                  return Vec2{a1 * std::cos(a1 * p.x) * std::cos(a2 * p.y),
                                              -a2 * std::sin(a1 * p.x) * std::sin(a2 * p.y)};
                              });
        const AnalyticField g([=](Vec2 p) { return b1 * p.x * p.x + b2 * p.y; },
                              [=](Vec2 p) {
                                  return Vec2{2.0 * b1 * p.x, b2};
                              });
        const AnalyticField zero([](Vec2) { return 0.0; }, [](Vec2) { return Vec2{0.0, 0.0}; });
        const double fg = h1_distance(mesh, f, g, rule);
        const double f0 = h1_distance(mesh, f, zero, rule);
        const double g0 = h1_distance(mesh, g, zero, rule);
        CHECK(fg <= f0 + g0 + 1e-9);
    }
}

TEST_CASE("unknown problem name is rejected") {
    CHECK_THROWS_AS(problem_by_name("does_not_exist"), std::invalid_argument);
}

TEST_SUITE_END();
