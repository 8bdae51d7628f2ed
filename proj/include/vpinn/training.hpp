#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "vpinn/estimator.hpp"
#include "vpinn/mesh.hpp"
#include "vpinn/network.hpp"
#include "vpinn/problems.hpp"

namespace vpinn {

enum class ChMode { measured, asymptotic };

ChMode ch_mode_from_string(const std::string& s);
std::string to_string(ChMode mode);

// C_h for the loss term: measured from the mesh, or the h^{-1} surrogate
double resolve_ch(const Mesh& mesh, ChMode mode);

struct TrainConfig {
    int epochs = 22000;
    double learning_rate = 1e-2;
    double lr_decay = 0.5;
    int lr_decay_every = 3000;
    int lr_decay_start = 6000;  // epochs at the full rate before the staircase begins
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 1;
    int checkpoint_period = 100;
    double stop_tol = 0.0;         // stop once R_h <= stop_tol
    ChMode ch_mode = ChMode::measured;
    std::string checkpoint_dir;    // when set, dump parameters at every checkpoint
};

struct TraceRecord {
    int epoch = 0;
    double r_h = 0.0;
    double eta_rhs = 0.0;
    double eta_coef = 0.0;
    double eta_res = 0.0;
    double eta_loss = 0.0;
    double eta = 0.0;
    double h1_error = std::numeric_limits<double>::quiet_NaN();  // NaN when unknown
};

struct TrainingTrace {
    std::vector<TraceRecord> records;
};

// CSV schema: epoch,R_h,eta_rhs,eta_coef,eta_res,eta_loss,eta,h1_error
void save_trace_csv(const TrainingTrace& trace, const std::string& path);
std::string trace_csv_string(const TrainingTrace& trace);

struct TrainResult {
    MLPParams params;        // best iterate observed (smallest R_h)
    TrainingTrace trace;
    double initial_r = 0.0;
    double best_r = 0.0;
    bool diverged = false;   // R_h exceeded 1e6 x initial value
};

TrainResult train(const Mesh& mesh, const ProblemSpec& data, const MLPParams& init,
                  const TrainConfig& cfg);

}  // namespace vpinn
