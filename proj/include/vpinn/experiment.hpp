#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vpinn/config.hpp"
#include "vpinn/estimator.hpp"
#include "vpinn/training.hpp"

namespace vpinn {

// least-squares slope of log(value) against log(h);
// throws std::invalid_argument on nonpositive inputs or fewer than 2 pairs
double fit_slope(const std::vector<std::pair<double, double>>& pairs);

struct ConvergenceRow {
    int n = 0;
    double h = 0.0;
    int interior = 0;
    double r_h = 0.0;
    double eta_rhs = 0.0;
    double eta_coef = 0.0;
    double eta_res = 0.0;
    double eta_loss = 0.0;
    double eta = 0.0;
    double eta_localized = 0.0;
    double h1_error = 0.0;
    double efficiency = 0.0;
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    std::optional<double> slope_eta;
    std::optional<double> slope_error;
    std::string fit_message;  // set when the slope fit was rejected
    bool diverged = false;
};

// trains per mesh, assembles the estimator and true error, fits tail slopes,
// writes convergence.csv / convergence.svg and per-mesh checkpoints
ConvergenceResult run_convergence(const ExperimentConfig& cfg);

struct TraceResult {
    TrainingTrace trace;
    bool diverged = false;
};

// single-mesh training trace; writes trace.csv / trace.svg
TraceResult run_trace(const ExperimentConfig& cfg);

// loads a checkpoint, rebuilds the estimator on mesh n, writes breakdown.csv
EstimatorBreakdown run_estimate(const ExperimentConfig& cfg, const std::string& checkpoint,
                                int n);

std::string convergence_csv_string(const ConvergenceResult& result);

// property spot-checks used by the `selftest` subcommand; returns the number
// of failed checks and prints one line per check
int run_selftest();

}  // namespace vpinn
