#include "vpinn/linalg.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace vpinn {

CholeskyFactor::CholeskyFactor(DenseMatrix a) : l_(std::move(a)) {
    const int n = l_.rows;
    if (n != l_.cols) throw std::invalid_argument("cholesky: matrix not square");
    for (int j = 0; j < n; ++j) {
        double d = l_(j, j);
        for (int k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
        if (d <= 0.0) throw std::runtime_error("cholesky: matrix not positive definite");
        const double ljj = std::sqrt(d);
        l_(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = l_(i, j);
            for (int k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
            l_(i, j) = s / ljj;
        }
    }
}

std::vector<double> CholeskyFactor::solve(const std::vector<double>& rhs) const {
    const int n = l_.rows;
    std::vector<double> y(rhs);
    for (int i = 0; i < n; ++i) {
        double s = y[i];
        for (int k = 0; k < i; ++k) s -= l_(i, k) * y[k];
        y[i] = s / l_(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= l_(k, i) * y[k];
        y[i] = s / l_(i, i);
    }
    return y;
}

LuFactor::LuFactor(DenseMatrix a) : lu_(std::move(a)) {
    const int n = lu_.rows;
    if (n != lu_.cols) throw std::invalid_argument("lu: matrix not square");
    perm_.resize(n);
    for (int i = 0; i < n; ++i) perm_[i] = i;
    for (int j = 0; j < n; ++j) {
        int pivot = j;
        for (int i = j + 1; i < n; ++i) {
            if (std::abs(lu_(i, j)) > std::abs(lu_(pivot, j))) pivot = i;
        }
        if (lu_(pivot, j) == 0.0) throw std::runtime_error("lu: singular matrix");
        if (pivot != j) {
            for (int k = 0; k < n; ++k) std::swap(lu_(pivot, k), lu_(j, k));
            std::swap(perm_[pivot], perm_[j]);
        }
        const double inv = 1.0 / lu_(j, j);
        for (int i = j + 1; i < n; ++i) {
            const double m = lu_(i, j) * inv;
            lu_(i, j) = m;
            for (int k = j + 1; k < n; ++k) lu_(i, k) -= m * lu_(j, k);
        }
    }
}

std::vector<double> LuFactor::solve(const std::vector<double>& rhs) const {
    const int n = lu_.rows;
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
        double s = rhs[perm_[i]];
        for (int k = 0; k < i; ++k) s -= lu_(i, k) * y[k];
        y[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= lu_(i, k) * y[k];
        y[i] = s / lu_(i, i);
    }
    return y;
}

std::vector<double> matvec(const DenseMatrix& a, const std::vector<double>& x) {
    std::vector<double> y(a.rows, 0.0);
    for (int i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

namespace {

double rayleigh_step(const std::vector<double>& x, const std::vector<double>& ax) {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        num += x[i] * ax[i];
        den += x[i] * x[i];
    }
    return num / den;
}

void normalize(std::vector<double>& x) {
    double n = 0.0;
    for (double v : x) n += v * v;
    n = std::sqrt(n);
    for (double& v : x) v /= n;
}

std::vector<double> seed_vector(int n) {
    // fixed deterministic start vector
    std::mt19937_64 rng(0x5eedu);
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) {
        x[i] = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    }
    return x;
}

}  // namespace

double power_iteration_max(const DenseMatrix& a, double rel_tol, int max_iter) {
    std::vector<double> x = seed_vector(a.rows);
    normalize(x);
    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        std::vector<double> ax = matvec(a, x);
        const double next = rayleigh_step(x, ax);
        normalize(ax);
        x = std::move(ax);
        if (it > 0 && std::abs(next - lambda) <= rel_tol * std::abs(next)) {
            return next;
        }
        lambda = next;
    }
    return lambda;
}

double inverse_iteration_min(const DenseMatrix& a, double rel_tol, int max_iter) {
    CholeskyFactor chol(a);
    std::vector<double> x = seed_vector(a.rows);
    normalize(x);
    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        std::vector<double> y = chol.solve(x);
        // Rayleigh quotient of A at the current iterate
        std::vector<double> ax = matvec(a, x);
        const double next = rayleigh_step(x, ax);
        normalize(y);
        x = std::move(y);
        if (it > 0 && std::abs(next - lambda) <= rel_tol * std::abs(next)) {
            return next;
        }
        lambda = next;
    }
    return lambda;
}

}  // namespace vpinn
