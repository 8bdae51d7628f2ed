#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vpinn/field.hpp"
#include "vpinn/mesh.hpp"
#include "vpinn/problems.hpp"
#include "vpinn/quadrature.hpp"
#include "vpinn/testspace.hpp"

namespace vpinn {

// Fully-connected tanh MLP, input 2 -> hidden widths -> output 1 (affine).
// Parameters live in one flat vector laid out [W1 | b1 | W2 | b2 | ...],
// weight matrices row-major (out x in).
class MLPParams {
public:
    MLPParams() = default;
    explicit MLPParams(std::vector<int> widths);

    const std::vector<int>& widths() const { return widths_; }
    int layer_count() const { return static_cast<int>(widths_.size()) - 1; }
    int parameter_count() const { return static_cast<int>(data_.size()); }

    std::span<double> weight(int layer);
    std::span<const double> weight(int layer) const;
    std::span<double> bias(int layer);
    std::span<const double> bias(int layer) const;

    std::vector<double>& flat() { return data_; }
    const std::vector<double>& flat() const { return data_; }

    bool operator==(const MLPParams& other) const = default;

private:
    std::vector<int> widths_;
    std::vector<int> weight_offset_, bias_offset_;
    std::vector<double> data_;
};

// symmetric uniform init scaled by 1/sqrt(fan_in), zero biases, seeded
MLPParams init_params(const std::vector<int>& widths, std::uint64_t seed);

// versioned text checkpoint; round-trips every double exactly
void save_params(const MLPParams& params, const std::string& path);
MLPParams load_params(const std::string& path);

// u(x) = Phi(x) * w(x; params) + lift(x)
class TrialField final : public Field {
public:
    TrialField(MLPParams params, std::function<double(Vec2)> multiplier,
               std::function<Vec2(Vec2)> multiplier_gradient, std::function<double(Vec2)> lift,
               std::function<Vec2(Vec2)> lift_gradient);

    // unit-square cutoff x(1-x)y(1-y) with the problem's Dirichlet lift
    static TrialField for_problem(MLPParams params, const ProblemSpec& spec);

    std::pair<double, Vec2> value_and_gradient(Vec2 p) const override;
    void eval_batch(std::span<const Vec2> points, std::span<double> values,
                    std::span<Vec2> gradients) const override;

    MLPParams& params() { return params_; }
    const MLPParams& params() const { return params_; }

    double multiplier(Vec2 p) const { return phi_(p); }
    Vec2 multiplier_gradient(Vec2 p) const { return phi_grad_(p); }
    double lift(Vec2 p) const { return lift_(p); }
    Vec2 lift_gradient(Vec2 p) const { return lift_grad_(p); }

private:
    MLPParams params_;
    std::function<double(Vec2)> phi_;
    std::function<Vec2(Vec2)> phi_grad_;
    std::function<double(Vec2)> lift_;
    std::function<Vec2(Vec2)> lift_grad_;

    friend struct LossGradientEvaluator;
};

struct LossGradientResult {
    double loss = 0.0;              // R_h^2
    std::vector<double> gradient;   // d(R_h^2)/d(theta), flat layout
    ResidualVector residuals;
};

// R_h^2 and its exact parameter gradient by reverse accumulation through the
// quadrature sums and the joint value/spatial-gradient forward pass
LossGradientResult loss_gradient(const TrialField& field, const Mesh& mesh,
                                 const ProblemSpec& data, const QuadRule& rule);

// workspace-reusing variant for the training loop
LossGradientResult loss_gradient(const TrialField& field, const AssemblyWorkspace& ws);

}  // namespace vpinn
