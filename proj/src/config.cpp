#include "vpinn/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "vpinn/io.hpp"

namespace vpinn {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<int> parse_int_list(const std::string& value) {
    std::vector<int> out;
    std::string cleaned = value;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream in(cleaned);
    int v = 0;
    while (in >> v) out.push_back(v);
    if (out.empty()) throw std::invalid_argument("expected a list of integers: " + value);
    return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "problem") {
                cfg.problem = value;
            } else if (key == "meshes") {
                cfg.mesh_ns = parse_int_list(value);
            } else if (key == "widths") {
                cfg.widths = parse_int_list(value);
            } else if (key == "epochs") {
                cfg.train.epochs = std::stoi(value);
            } else if (key == "learning_rate") {
                cfg.train.learning_rate = parse_double(value);
            } else if (key == "lr_decay") {
                cfg.train.lr_decay = parse_double(value);
            } else if (key == "lr_decay_every") {
                cfg.train.lr_decay_every = std::stoi(value);
            } else if (key == "lr_decay_start") {
                cfg.train.lr_decay_start = std::stoi(value);
            } else if (key == "beta1") {
                cfg.train.beta1 = parse_double(value);
            } else if (key == "beta2") {
                cfg.train.beta2 = parse_double(value);
            } else if (key == "adam_eps") {
                cfg.train.adam_eps = parse_double(value);
            } else if (key == "checkpoint_period") {
                cfg.train.checkpoint_period = std::stoi(value);
            } else if (key == "stop_tol") {
                cfg.train.stop_tol = parse_double(value);
            } else if (key == "ch_mode") {
                cfg.train.ch_mode = ch_mode_from_string(value);
            } else if (key == "assembly_precision") {
                cfg.assembly_precision = std::stoi(value);
            } else if (key == "verify_precision") {
                cfg.verify_precision = std::stoi(value);
            } else if (key == "seed") {
                cfg.seed = std::stoull(value);
            } else if (key == "out_dir") {
                cfg.out_dir = value;
            } else if (key == "slope_tail_drop") {
                cfg.slope_tail_drop = std::stoi(value);
            } else if (key == "inject_exact") {
                cfg.inject_exact = (value == "true" || value == "1");
            } else {
                throw std::invalid_argument("unknown key");
            }
        } catch (const std::exception& e) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + " (" + key +
                                        "): " + e.what());
        }
    }
    if (cfg.assembly_precision != 3 || cfg.verify_precision != 7) {
        throw std::invalid_argument("config: assembly precision must be 3 and verify precision 7");
    }
    for (size_t i = 1; i < cfg.mesh_ns.size(); ++i) {
        if (cfg.mesh_ns[i] <= cfg.mesh_ns[i - 1]) {
            throw std::invalid_argument("config: meshes must be strictly increasing");
        }
    }
    cfg.train.seed = cfg.seed;
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace vpinn
