#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vpinn/training.hpp"

namespace vpinn {

// experiment settings, read from flat "key = value" text with '#' comments
struct ExperimentConfig {
    std::string problem = "poisson_tanh";
    std::vector<int> mesh_ns = {4, 8, 16, 32};
    std::vector<int> widths = {2, 50, 50, 50, 1};
    TrainConfig train;
    int assembly_precision = 3;
    int verify_precision = 7;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    int slope_tail_drop = 1;    // coarsest meshes excluded from the slope fit
    bool inject_exact = false;  // skip training, use the exact solution as the field
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace vpinn
