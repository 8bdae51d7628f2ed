#include "vpinn/polynomial.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "vpinn/linalg.hpp"

namespace vpinn {

ElementFrame ElementFrame::from(const Mesh& mesh, int element) {
    ElementFrame f;
    for (int k = 0; k < 3; ++k) f.v[k] = mesh.vertex(element, k);
    f.area = signed_area(f.v[0], f.v[1], f.v[2]);
    const double inv = 1.0 / (2.0 * f.area);
    for (int k = 0; k < 3; ++k) {
        f.grad_lambda[k] = inv * perp(f.v[(k + 2) % 3] - f.v[(k + 1) % 3]);
    }
    return f;
}

std::array<double, 3> ElementFrame::bary(Vec2 p) const {
    const double inv = 1.0 / area;
    const double l0 = signed_area(p, v[1], v[2]) * inv;
    const double l1 = signed_area(v[0], p, v[2]) * inv;
    return {l0, l1, 1.0 - l0 - l1};
}

const BaryBasis& BaryBasis::get(int degree) {
    static std::mutex mutex;
    static std::map<int, BaryBasis> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(degree);
    if (it == cache.end()) {
        BaryBasis basis;
        basis.degree = degree;
        for (int a = degree; a >= 0; --a) {
            for (int b = degree - a; b >= 0; --b) {
                basis.exponents.push_back({a, b, degree - a - b});
            }
        }
        it = cache.emplace(degree, std::move(basis)).first;
    }
    return it->second;
}

namespace {

double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

double multinomial(int k, std::array<int, 3> e) {
    // k! / (a! b! c!)
    double r = 1.0;
    int used = 0;
    for (int part = 0; part < 2; ++part) {
        const int n = e[part];
        for (int i = 1; i <= n; ++i) {
            ++used;
            r *= static_cast<double>(used) / i;
        }
    }
    for (int i = used + 1; i <= k; ++i) r *= i;
    for (int i = 1; i <= e[2]; ++i) r /= i;
    return r;
}

}  // namespace

double ElementPoly::eval(std::array<double, 3> lambda) const {
    const BaryBasis& basis = BaryBasis::get(degree);
    double sum = 0.0;
    for (int m = 0; m < basis.size(); ++m) {
        const auto& e = basis.exponents[m];
        sum += coef[m] * ipow(lambda[0], e[0]) * ipow(lambda[1], e[1]) * ipow(lambda[2], e[2]);
    }
    return sum;
}

ElementPoly& ElementPoly::operator+=(const ElementPoly& other) {
    if (other.degree != degree) throw std::invalid_argument("poly degree mismatch");
    for (size_t i = 0; i < coef.size(); ++i) coef[i] += other.coef[i];
    return *this;
}

ElementPoly& ElementPoly::operator-=(const ElementPoly& other) {
    if (other.degree != degree) throw std::invalid_argument("poly degree mismatch");
    for (size_t i = 0; i < coef.size(); ++i) coef[i] -= other.coef[i];
    return *this;
}

ElementPoly& ElementPoly::operator*=(double s) {
    for (double& c : coef) c *= s;
    return *this;
}

void ElementPoly::add_constant(double c) {
    // 1 = (l1+l2+l3)^k expanded with multinomial coefficients
    const BaryBasis& basis = BaryBasis::get(degree);
    for (int m = 0; m < basis.size(); ++m) {
        coef[m] += c * multinomial(degree, basis.exponents[m]);
    }
}

std::array<ElementPoly, 2> poly_gradient(const ElementPoly& p, const ElementFrame& frame) {
    if (p.degree < 1) {
        return {ElementPoly(0), ElementPoly(0)};
    }
    const BaryBasis& basis = BaryBasis::get(p.degree);
    const BaryBasis& lower = BaryBasis::get(p.degree - 1);
    // index lookup in the lower basis
    auto lower_index = [&lower](int a, int b, int c) {
        for (int m = 0; m < lower.size(); ++m) {
            if (lower.exponents[m] == std::array<int, 3>{a, b, c}) return m;
        }
        throw std::logic_error("missing lower-basis exponent");
    };
    ElementPoly dx(p.degree - 1), dy(p.degree - 1);
    for (int m = 0; m < basis.size(); ++m) {
        const auto& e = basis.exponents[m];
        const double c = p.coef[m];
        if (c == 0.0) continue;
        for (int k = 0; k < 3; ++k) {
            if (e[k] == 0) continue;
            std::array<int, 3> r = e;
            r[k] -= 1;
            const int idx = lower_index(r[0], r[1], r[2]);
            const double factor = c * e[k];
            dx.coef[idx] += factor * frame.grad_lambda[k].x;
            dy.coef[idx] += factor * frame.grad_lambda[k].y;
        }
    }
    return {std::move(dx), std::move(dy)};
}

const std::vector<std::array<double, 3>>& principal_lattice(int degree) {
    static std::mutex mutex;
    static std::map<int, std::vector<std::array<double, 3>>> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(degree);
    if (it == cache.end()) {
        std::vector<std::array<double, 3>> nodes;
        const double k = degree;
        for (int a = degree; a >= 0; --a) {
            for (int b = degree - a; b >= 0; --b) {
                const int c = degree - a - b;
                nodes.push_back({a / k, b / k, c / k});
            }
        }
        it = cache.emplace(degree, std::move(nodes)).first;
    }
    return it->second;
}

ElementPoly interpolate_lattice(int degree, const std::vector<double>& nodal_values) {
    static std::mutex mutex;
    static std::map<int, LuFactor> lus;
    const BaryBasis& basis = BaryBasis::get(degree);
    const auto& lattice = principal_lattice(degree);
    if (nodal_values.size() != lattice.size()) {
        throw std::invalid_argument("interpolate_lattice: wrong number of nodal values");
    }
    const LuFactor* lu = nullptr;
    {
        std::lock_guard lock(mutex);
        auto it = lus.find(degree);
        if (it == lus.end()) {
            const int n = basis.size();
            DenseMatrix vand(n, n);
            for (int row = 0; row < n; ++row) {
                for (int col = 0; col < n; ++col) {
                    const auto& e = basis.exponents[col];
                    vand(row, col) = ipow(lattice[row][0], e[0]) * ipow(lattice[row][1], e[1]) *
                                     ipow(lattice[row][2], e[2]);
                }
            }
            it = lus.emplace(degree, LuFactor(std::move(vand))).first;
        }
        lu = &it->second;
    }
    ElementPoly p(degree);
    p.coef = lu->solve(nodal_values);
    return p;
}

}  // namespace vpinn
