#include "vpinn/training.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "vpinn/io.hpp"

namespace vpinn {

ChMode ch_mode_from_string(const std::string& s) {
    if (s == "measured") return ChMode::measured;
    if (s == "asymptotic") return ChMode::asymptotic;
    throw std::invalid_argument("unknown C_h mode: " + s);
}

std::string to_string(ChMode mode) {
    return mode == ChMode::measured ? "measured" : "asymptotic";
}

double resolve_ch(const Mesh& mesh, ChMode mode) {
    if (mode == ChMode::asymptotic) return 1.0 / mesh.h;
    return measure_norm_constants(mesh).C_h;
}

std::string trace_csv_string(const TrainingTrace& trace) {
    std::ostringstream out;
    out << "epoch,R_h,eta_rhs,eta_coef,eta_res,eta_loss,eta,h1_error\n";
    for (const TraceRecord& rec : trace.records) {
        out << rec.epoch << ',' << format_g17(rec.r_h) << ',' << format_g17(rec.eta_rhs) << ','
            << format_g17(rec.eta_coef) << ',' << format_g17(rec.eta_res) << ','
            << format_g17(rec.eta_loss) << ',' << format_g17(rec.eta) << ','
            << format_g17(rec.h1_error) << '\n';
    }
    return out.str();
}

void save_trace_csv(const TrainingTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << trace_csv_string(trace);
}

TrainResult train(const Mesh& mesh, const ProblemSpec& data, const MLPParams& init,
                  const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (cfg.learning_rate <= 0.0) throw std::invalid_argument("train: learning rate must be > 0");
    if (cfg.checkpoint_period < 1) {
        throw std::invalid_argument("train: checkpoint period must be >= 1");
    }

    const QuadRule& rule = reference_rule(3);
    AssemblyWorkspace ws(mesh, data, rule);
    const double C_h = resolve_ch(mesh, cfg.ch_mode);

    TrialField field = TrialField::for_problem(init, data);
    const int nparams = field.params().parameter_count();

    std::vector<double> m(nparams, 0.0), v(nparams, 0.0);

    TrainResult result;
    result.params = init;

    if (!cfg.checkpoint_dir.empty()) {
        std::filesystem::create_directories(cfg.checkpoint_dir);
    }

    double r_initial = 0.0;
    for (int epoch = 0;; ++epoch) {
        LossGradientResult eval = loss_gradient(field, ws);
        const double r_h = std::sqrt(eval.loss);
        if (!std::isfinite(r_h)) {
            result.diverged = true;
            break;
        }
        if (epoch == 0) {
            r_initial = r_h;
            result.best_r = r_h;
            result.params = field.params();
        } else if (r_h < result.best_r) {
            result.best_r = r_h;
            result.params = field.params();
        }

        const bool checkpoint = (epoch % cfg.checkpoint_period) == 0;
        if (checkpoint) {
            TraceRecord rec;
            rec.epoch = epoch;
            rec.r_h = r_h;
            const EstimatorBreakdown breakdown =
                assemble_breakdown(mesh, field, data, eval.residuals, C_h);
            rec.eta_rhs = breakdown.eta_rhs;
            rec.eta_coef = breakdown.eta_coef;
            rec.eta_res = breakdown.eta_res;
            rec.eta_loss = breakdown.eta_loss;
            rec.eta = breakdown.eta;
            if (data.has_exact()) {
                rec.h1_error = h1_error(mesh, field, data);
            }
            result.trace.records.push_back(rec);
            if (!cfg.checkpoint_dir.empty()) {
                save_params(field.params(),
                            cfg.checkpoint_dir + "/epoch_" + std::to_string(epoch) + ".txt");
            }
        }

        if (r_h <= cfg.stop_tol) break;
        if (r_h > 1e6 * r_initial && epoch > 0) {
            result.diverged = true;
            break;
        }
        if (epoch == cfg.epochs) break;

        // Adam step; full rate during the hold phase, staircase decay after
        const int decayed = std::max(0, epoch - cfg.lr_decay_start);
        const double lr =
            cfg.learning_rate * std::pow(cfg.lr_decay, decayed / cfg.lr_decay_every);
        const double t = static_cast<double>(epoch + 1);
        const double bc1 = 1.0 - std::pow(cfg.beta1, t);
        const double bc2 = 1.0 - std::pow(cfg.beta2, t);
        std::vector<double>& theta = field.params().flat();
        for (int i = 0; i < nparams; ++i) {
            const double g = eval.gradient[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            theta[i] -= lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
        }
    }

    result.initial_r = r_initial;
    return result;
}

}  // namespace vpinn
