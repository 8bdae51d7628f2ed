#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vpinn/config.hpp"
#include "vpinn/experiment.hpp"
#include "vpinn/io.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    std::string ch_mode;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "experiment config file (key = value lines)");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--seed", flags.seed, "override the config seed");
    cmd->add_option("--ch-mode", flags.ch_mode, "C_h mode: measured | asymptotic")
        ->check(CLI::IsMember({"measured", "asymptotic"}));
}

vpinn::ExperimentConfig resolve_config(const CommonFlags& flags) {
    vpinn::ExperimentConfig cfg;
    if (!flags.config_path.empty()) {
        cfg = vpinn::load_config(flags.config_path);
    }
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    if (flags.seed >= 0) {
        cfg.seed = static_cast<std::uint64_t>(flags.seed);
        cfg.train.seed = cfg.seed;
    }
    if (!flags.ch_mode.empty()) cfg.train.ch_mode = vpinn::ch_mode_from_string(flags.ch_mode);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"VPINN solver with element-local a posteriori error estimation"};
    app.require_subcommand(1);

    CommonFlags conv_flags, trace_flags, est_flags;
    CLI::App* conv = app.add_subcommand("convergence", "train over a mesh family and fit slopes");
    add_common(conv, conv_flags);
    CLI::App* trace = app.add_subcommand("trace", "log estimator components during one training");
    add_common(trace, trace_flags);
    CLI::App* estimate =
        app.add_subcommand("estimate", "recompute the estimator from a saved checkpoint");
    add_common(estimate, est_flags);
    std::string checkpoint_path;
    int estimate_n = 8;
    estimate->add_option("--checkpoint", checkpoint_path, "parameter checkpoint file")
        ->required();
    estimate->add_option("--n", estimate_n, "structured mesh subdivision count");
    CLI::App* selftest = app.add_subcommand("selftest", "run the built-in property checks");
    (void)selftest;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (conv->parsed()) {
            const auto cfg = resolve_config(conv_flags);
            const auto result = vpinn::run_convergence(cfg);
            for (const auto& row : result.rows) {
                std::cout << "n=" << row.n << " h=" << row.h << " R_h=" << row.r_h
                          << " eta=" << row.eta << " H1=" << row.h1_error
                          << " efficiency=" << row.efficiency << '\n';
            }
            if (result.slope_eta && result.slope_error) {
                std::cout << "slope(eta)=" << *result.slope_eta
                          << " slope(H1)=" << *result.slope_error << '\n';
            } else if (!result.fit_message.empty()) {
                std::cout << result.fit_message << '\n';
            }
            if (result.diverged) {
                std::cerr << "training diverged; partial results written to " << cfg.out_dir
                          << '\n';
                return 1;
            }
            std::cout << "wrote " << cfg.out_dir << "/convergence.csv\n";
        } else if (trace->parsed()) {
            const auto cfg = resolve_config(trace_flags);
            const auto result = vpinn::run_trace(cfg);
            if (result.diverged) {
                std::cerr << "training diverged; partial trace written to " << cfg.out_dir << '\n';
                return 1;
            }
            std::cout << "wrote " << cfg.out_dir << "/trace.csv (" << result.trace.records.size()
                      << " checkpoints)\n";
        } else if (estimate->parsed()) {
            const auto cfg = resolve_config(est_flags);
            const auto breakdown = vpinn::run_estimate(cfg, checkpoint_path, estimate_n);
            std::cout << "eta_res=" << breakdown.eta_res << " eta_loss=" << breakdown.eta_loss
                      << " eta_coef=" << breakdown.eta_coef << " eta_rhs=" << breakdown.eta_rhs
                      << " eta=" << breakdown.eta << '\n';
            std::cout << "wrote " << cfg.out_dir << "/breakdown.csv\n";
        } else if (selftest->parsed()) {
            return vpinn::run_selftest() == 0 ? 0 : 1;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
