#pragma once

#include <array>
#include <vector>

#include "vpinn/geometry.hpp"
#include "vpinn/mesh.hpp"

namespace vpinn {

// geometry of one element needed for barycentric algebra
struct ElementFrame {
    std::array<Vec2, 3> v;
    std::array<Vec2, 3> grad_lambda;  // constant gradients of the barycentric coordinates
    double area = 0.0;

    static ElementFrame from(const Mesh& mesh, int element);
    std::array<double, 3> bary(Vec2 p) const;
    Vec2 point(std::array<double, 3> lambda) const {
        return lambda[0] * v[0] + lambda[1] * v[1] + lambda[2] * v[2];
    }
};

// basis of homogeneous degree-k monomials in the barycentric coordinates;
// since lambda_1+lambda_2+lambda_3 = 1 these span P_k on the element
struct BaryBasis {
    int degree = 0;
    std::vector<std::array<int, 3>> exponents;

    static const BaryBasis& get(int degree);  // cached per degree
    int size() const { return static_cast<int>(exponents.size()); }
};

// polynomial on one element, coefficients over BaryBasis::get(degree)
struct ElementPoly {
    int degree = 0;
    std::vector<double> coef;

    ElementPoly() = default;
    explicit ElementPoly(int k) : degree(k), coef(BaryBasis::get(k).size(), 0.0) {}

    double eval(std::array<double, 3> lambda) const;

    ElementPoly& operator+=(const ElementPoly& other);
    ElementPoly& operator-=(const ElementPoly& other);
    ElementPoly& operator*=(double s);
    // adds the constant c (spread over the multinomial expansion of 1)
    void add_constant(double c);
};

// x- and y-derivatives, degree reduced by one
std::array<ElementPoly, 2> poly_gradient(const ElementPoly& p, const ElementFrame& frame);

// barycentric nodes of the degree-k principal lattice (multiples of 1/k)
const std::vector<std::array<double, 3>>& principal_lattice(int degree);

// Lagrange interpolation at the principal lattice: coefficients solving the
// (cached) reference Vandermonde system against the given nodal values
ElementPoly interpolate_lattice(int degree, const std::vector<double>& nodal_values);

}  // namespace vpinn
