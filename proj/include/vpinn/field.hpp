#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "vpinn/geometry.hpp"

namespace vpinn {

// A scalar field on the domain, evaluable with its spatial gradient.
class Field {
public:
    virtual ~Field() = default;
    virtual std::pair<double, Vec2> value_and_gradient(Vec2 p) const = 0;

    // batched evaluation; overridden where a faster path exists
    virtual void eval_batch(std::span<const Vec2> points, std::span<double> values,
                            std::span<Vec2> gradients) const {
        for (size_t i = 0; i < points.size(); ++i) {
            auto [v, g] = value_and_gradient(points[i]);
            values[i] = v;
            gradients[i] = g;
        }
    }

    double value(Vec2 p) const { return value_and_gradient(p).first; }
    Vec2 gradient(Vec2 p) const { return value_and_gradient(p).second; }
};

// Field backed by closed-form value and gradient callables.
class AnalyticField final : public Field {
public:
    AnalyticField(std::function<double(Vec2)> value, std::function<Vec2(Vec2)> gradient)
        : value_(std::move(value)), gradient_(std::move(gradient)) {}

    std::pair<double, Vec2> value_and_gradient(Vec2 p) const override {
        return {value_(p), gradient_(p)};
    }

private:
    std::function<double(Vec2)> value_;
    std::function<Vec2(Vec2)> gradient_;
};

// a x + b y over existing fields; handy in tests and linearity checks
class LinearCombinationField final : public Field {
public:
    LinearCombinationField(double a, const Field& x, double b, const Field& y)
        : a_(a), x_(x), b_(b), y_(y) {}

    std::pair<double, Vec2> value_and_gradient(Vec2 p) const override {
        auto [vx, gx] = x_.value_and_gradient(p);
        auto [vy, gy] = y_.value_and_gradient(p);
        return {a_ * vx + b_ * vy, a_ * gx + b_ * gy};
    }

private:
    double a_;
    const Field& x_;
    double b_;
    const Field& y_;
};

}  // namespace vpinn
