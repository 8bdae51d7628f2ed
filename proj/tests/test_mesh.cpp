#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "vpinn/mesh.hpp"

using namespace vpinn;

TEST_SUITE_BEGIN("mesh");

TEST_CASE("smallest structured mesh") {
    const Mesh mesh = build_structured_unit_square(1);
    CHECK(mesh.num_vertices() == 4);
    CHECK(mesh.num_triangles() == 2);
    CHECK(mesh.h == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(interior_vertices(mesh).empty());
}

TEST_CASE("n=4 counts satisfy the Euler formula") {
    const Mesh mesh = build_structured_unit_square(4);
    CHECK(mesh.num_vertices() == 25);
    CHECK(mesh.num_triangles() == 32);
    // V - E + F = 2 with the outer face: 25 - E + 33 = 2
    CHECK(mesh.num_edges() == 56);
}

TEST_CASE("conformity: interior edges have two triangles, boundary edges one") {
    const Mesh mesh = build_structured_unit_square(2);
    int interior = 0, boundary = 0;
    for (const Edge& e : mesh.edges) {
        if (e.boundary()) {
            ++boundary;
            CHECK(e.tri[0] >= 0);
        } else {
            ++interior;
            CHECK(e.tri[0] >= 0);
            CHECK(e.tri[1] >= 0);
        }
    }
    CHECK(interior + boundary == mesh.num_edges());
    CHECK(boundary == 8);
}

TEST_CASE("triangles positively oriented, h_E equals the longest edge") {
    const Mesh mesh = build_structured_unit_square(3);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        CHECK(mesh.area(t) > 0.0);
        double longest = 0.0;
        for (int k = 0; k < 3; ++k) {
            const Vec2 a = mesh.vertex(t, k);
            const Vec2 b = mesh.vertex(t, (k + 1) % 3);
            longest = std::max(longest, norm(b - a));
        }
        CHECK(mesh.diameter[t] == doctest::Approx(longest).epsilon(1e-15));
    }
}

TEST_CASE("interior vertex sets") {
    CHECK(interior_vertices(build_structured_unit_square(2)).size() == 1);
    CHECK(interior_vertices(build_structured_unit_square(4)).size() == 9);
    const Mesh mesh = build_structured_unit_square(2);
    const int center = interior_vertices(mesh)[0];
    CHECK(mesh.vertices[center].x == doctest::Approx(0.5));
    CHECK(mesh.vertices[center].y == doctest::Approx(0.5));
}

TEST_CASE("red refinement quadruples triangles and halves h") {
    const Mesh coarse = build_structured_unit_square(2);
    const Mesh fine = refine_red(coarse);
    CHECK(fine.num_triangles() == 4 * coarse.num_triangles());
    CHECK(fine.h == doctest::Approx(coarse.h / 2.0).epsilon(1e-15));

    const Mesh finer = refine_red(fine);
    CHECK(finer.num_triangles() == 16 * coarse.num_triangles());
    CHECK(finer.h == doctest::Approx(coarse.h / 4.0).epsilon(1e-15));
}

TEST_CASE("red refinement preserves conformity and orientation") {
    Mesh mesh = build_structured_unit_square(1);
    mesh = refine_red(mesh);
    CHECK(mesh.num_triangles() == 8);
    for (int t = 0; t < mesh.num_triangles(); ++t) CHECK(mesh.area(t) > 0.0);
    for (const Edge& e : mesh.edges) {
        int count = 0;
        for (int tt : e.tri) {
            if (tt >= 0) ++count;
        }
        CHECK(count == (e.boundary() ? 1 : 2));
    }
}

TEST_CASE("shape regularity is identical across red refinements") {
    const Mesh coarse = build_structured_unit_square(2);
    const Mesh fine = refine_red(coarse);
    CHECK(fine.shape_regularity() == doctest::Approx(coarse.shape_regularity()).epsilon(1e-12));
    // right triangle with legs 1/n: h_E / inradius = sqrt(2) (2 + sqrt(2))
    CHECK(coarse.shape_regularity() == doctest::Approx(2.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("rejects n = 0") {
    CHECK_THROWS_AS(build_structured_unit_square(0), std::invalid_argument);
}

TEST_CASE("text dump round-trips at full double precision") {
    const Mesh mesh = refine_red(build_structured_unit_square(3));
    const std::string path =
        (std::filesystem::temp_directory_path() / "vpinn_mesh_rt.txt").string();
    save_mesh(mesh, path);
    const Mesh loaded = load_mesh(path);
    REQUIRE(loaded.num_vertices() == mesh.num_vertices());
    REQUIRE(loaded.num_triangles() == mesh.num_triangles());
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        CHECK(loaded.vertices[v].x == mesh.vertices[v].x);
        CHECK(loaded.vertices[v].y == mesh.vertices[v].y);
    }
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        CHECK(loaded.triangles[t] == mesh.triangles[t]);
    }
    std::filesystem::remove(path);
}

TEST_SUITE_END();
