#pragma once

#include <vector>

namespace vpinn {

// dense row-major matrix, just large enough for the uses here
struct DenseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}
    double& operator()(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }
};

// in-place Cholesky factorization of a symmetric positive definite matrix;
// throws std::runtime_error if a pivot is not positive
class CholeskyFactor {
public:
    explicit CholeskyFactor(DenseMatrix a);
    std::vector<double> solve(const std::vector<double>& rhs) const;

private:
    DenseMatrix l_;
};

// LU with partial pivoting, for the small interpolation systems
class LuFactor {
public:
    explicit LuFactor(DenseMatrix a);
    std::vector<double> solve(const std::vector<double>& rhs) const;

private:
    DenseMatrix lu_;
    std::vector<int> perm_;
};

std::vector<double> matvec(const DenseMatrix& a, const std::vector<double>& x);

// largest eigenvalue of a SPD matrix by power iteration (relative tolerance on
// the Rayleigh quotient)
double power_iteration_max(const DenseMatrix& a, double rel_tol, int max_iter);

// smallest eigenvalue of a SPD matrix by inverse power iteration
double inverse_iteration_min(const DenseMatrix& a, double rel_tol, int max_iter);

}  // namespace vpinn
