#include "vpinn/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include "vpinn/io.hpp"
#include "vpinn/svg.hpp"

namespace vpinn {

double fit_slope(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 2) {
        throw std::invalid_argument("fit_slope: need at least two (h, value) pairs");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [h, value] : pairs) {
        if (!(h > 0.0) || !(value > 0.0)) {
            throw std::invalid_argument("fit_slope: inputs must be positive");
        }
        const double x = std::log(h);
        const double y = std::log(value);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(pairs.size());
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) {
        throw std::invalid_argument("fit_slope: all h values coincide");
    }
    return (n * sxy - sx * sy) / denom;
}

std::string convergence_csv_string(const ConvergenceResult& result) {
    std::ostringstream out;
    out << "n,h,interior,R_h,eta_rhs,eta_coef,eta_res,eta_loss,eta,eta_localized,h1_error,"
           "efficiency\n";
    for (const auto& row : result.rows) {
        out << row.n << ',' << format_g17(row.h) << ',' << row.interior << ','
            << format_g17(row.r_h) << ',' << format_g17(row.eta_rhs) << ','
            << format_g17(row.eta_coef) << ',' << format_g17(row.eta_res) << ','
            << format_g17(row.eta_loss) << ',' << format_g17(row.eta) << ','
            << format_g17(row.eta_localized) << ',' << format_g17(row.h1_error) << ','
            << format_g17(row.efficiency) << '\n';
    }
    return out.str();
}

namespace {

void write_convergence_outputs(const ConvergenceResult& result, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream csv(out_dir + "/convergence.csv", std::ios::binary);
        csv << convergence_csv_string(result);
    }
    PlotSeries err{"H1 error", "#1f77b4", {}, {}};
    PlotSeries eta{"estimator", "#d62728", {}, {}};
    for (const auto& row : result.rows) {
        err.x.push_back(row.h);
        err.y.push_back(row.h1_error);
        eta.x.push_back(row.h);
        eta.y.push_back(row.eta);
    }
    write_svg_plot(out_dir + "/convergence.svg", "Error and estimator vs meshsize", "h", "value",
                   AxisScale::log, AxisScale::log, {err, eta});
}

}  // namespace

ConvergenceResult run_convergence(const ExperimentConfig& cfg) {
    if (cfg.mesh_ns.size() < 2) {
        throw std::invalid_argument("run_convergence: need at least two meshes");
    }
    const ProblemSpec& data = problem_by_name(cfg.problem);
    ConvergenceResult result;

    for (size_t mi = 0; mi < cfg.mesh_ns.size(); ++mi) {
        const int n = cfg.mesh_ns[mi];
        const Mesh mesh = build_structured_unit_square(n);
        const InteriorIndexMap map(mesh);
        const double C_h = resolve_ch(mesh, cfg.train.ch_mode);

        ConvergenceRow row;
        row.n = n;
        row.h = mesh.h;
        row.interior = map.size();

        if (cfg.inject_exact) {
            if (!data.has_exact()) {
                throw std::invalid_argument("inject_exact requires a manufactured solution");
            }
            const Field& field = *data.exact;
            const ResidualVector r = assemble_residuals(mesh, field, data, reference_rule(3));
            const EstimatorBreakdown breakdown = assemble_breakdown(mesh, field, data, r, C_h);
            row.r_h = std::sqrt(r.loss());
            row.eta_rhs = breakdown.eta_rhs;
            row.eta_coef = breakdown.eta_coef;
            row.eta_res = breakdown.eta_res;
            row.eta_loss = breakdown.eta_loss;
            row.eta = breakdown.eta;
            row.eta_localized = breakdown.eta_localized;
            row.h1_error = h1_error(mesh, field, data);
            row.efficiency = row.h1_error > 0.0 ? breakdown.eta / row.h1_error
                                                : std::numeric_limits<double>::quiet_NaN();
            result.rows.push_back(row);
            continue;
        }

        // independent seed per mesh, derived from the base seed by mesh index
        TrainConfig train_cfg = cfg.train;
        train_cfg.seed = cfg.seed + mi;
        const MLPParams init = init_params(cfg.widths, train_cfg.seed);
        const TrainResult trained = train(mesh, data, init, train_cfg);

        TrialField field = TrialField::for_problem(trained.params, data);
        const ResidualVector r = assemble_residuals(mesh, field, data, reference_rule(3));
        const EstimatorBreakdown breakdown = assemble_breakdown(mesh, field, data, r, C_h);
        row.r_h = std::sqrt(r.loss());
        row.eta_rhs = breakdown.eta_rhs;
        row.eta_coef = breakdown.eta_coef;
        row.eta_res = breakdown.eta_res;
        row.eta_loss = breakdown.eta_loss;
        row.eta = breakdown.eta;
        row.eta_localized = breakdown.eta_localized;
        if (data.has_exact()) {
            row.h1_error = h1_error(mesh, field, data);
            row.efficiency = efficiency_index(breakdown, row.h1_error);
        } else {
            row.h1_error = std::numeric_limits<double>::quiet_NaN();
            row.efficiency = std::numeric_limits<double>::quiet_NaN();
        }
        result.rows.push_back(row);

        std::filesystem::create_directories(cfg.out_dir);
        save_params(trained.params, cfg.out_dir + "/checkpoint_n" + std::to_string(n) + ".txt");

        if (trained.diverged) {
            result.diverged = true;
            break;  // partial CSV below
        }
    }

    // slope fit on the tail of the mesh family
    const int drop = std::max(0, cfg.slope_tail_drop);
    if (!result.diverged && static_cast<int>(result.rows.size()) - drop >= 2) {
        std::vector<std::pair<double, double>> eta_pairs, err_pairs;
        for (size_t i = drop; i < result.rows.size(); ++i) {
            eta_pairs.emplace_back(result.rows[i].h, result.rows[i].eta);
            err_pairs.emplace_back(result.rows[i].h, result.rows[i].h1_error);
        }
        try {
            result.slope_eta = fit_slope(eta_pairs);
            result.slope_error = fit_slope(err_pairs);
        } catch (const std::exception& e) {
            result.fit_message = std::string("slope fit rejected: ") + e.what();
            result.slope_eta.reset();
            result.slope_error.reset();
        }
    } else if (!result.diverged) {
        result.fit_message = "slope fit rejected: not enough meshes after dropping the tail";
    }

    write_convergence_outputs(result, cfg.out_dir);
    return result;
}

TraceResult run_trace(const ExperimentConfig& cfg) {
    const ProblemSpec& data = problem_by_name(cfg.problem);
    const int n = cfg.mesh_ns.front();
    const Mesh mesh = build_structured_unit_square(n);

    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = cfg.seed;
    const MLPParams init = init_params(cfg.widths, train_cfg.seed);
    const TrainResult trained = train(mesh, data, init, train_cfg);

    std::filesystem::create_directories(cfg.out_dir);
    save_trace_csv(trained.trace, cfg.out_dir + "/trace.csv");
    save_params(trained.params, cfg.out_dir + "/checkpoint_n" + std::to_string(n) + ".txt");

    PlotSeries r_h{"R_h", "#000000", {}, {}, false};
    PlotSeries rhs{"eta_rhs", "#2ca02c", {}, {}, false};
    PlotSeries coef{"eta_coef", "#9467bd", {}, {}, false};
    PlotSeries res{"eta_res", "#ff7f0e", {}, {}, false};
    PlotSeries lossline{"eta_loss", "#8c564b", {}, {}, false};
    PlotSeries eta{"eta", "#d62728", {}, {}, false};
    PlotSeries err{"H1 error", "#1f77b4", {}, {}, false};
    for (const auto& rec : trained.trace.records) {
        const double e = rec.epoch;
        r_h.x.push_back(e);
        r_h.y.push_back(rec.r_h);
        rhs.x.push_back(e);
        rhs.y.push_back(rec.eta_rhs);
        coef.x.push_back(e);
        coef.y.push_back(rec.eta_coef);
        res.x.push_back(e);
        res.y.push_back(rec.eta_res);
        lossline.x.push_back(e);
        lossline.y.push_back(rec.eta_loss);
        eta.x.push_back(e);
        eta.y.push_back(rec.eta);
        err.x.push_back(e);
        err.y.push_back(rec.h1_error);
    }
    write_svg_plot(cfg.out_dir + "/trace.svg", "Estimator components during training", "epoch",
                   "value", AxisScale::linear, AxisScale::log,
                   {r_h, rhs, coef, res, lossline, eta, err});
    return {trained.trace, trained.diverged};
}

EstimatorBreakdown run_estimate(const ExperimentConfig& cfg, const std::string& checkpoint,
                                int n) {
    const ProblemSpec& data = problem_by_name(cfg.problem);
    const Mesh mesh = build_structured_unit_square(n);
    const MLPParams params = load_params(checkpoint);
    TrialField field = TrialField::for_problem(params, data);
    const ResidualVector r = assemble_residuals(mesh, field, data, reference_rule(3));
    const double C_h = resolve_ch(mesh, cfg.train.ch_mode);
    const EstimatorBreakdown breakdown = assemble_breakdown(mesh, field, data, r, C_h);
    std::filesystem::create_directories(cfg.out_dir);
    save_breakdown_csv(breakdown, cfg.out_dir + "/breakdown.csv");
    return breakdown;
}

// ---------------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------------

namespace {

struct SelfTest {
    int failures = 0;
    void check(const std::string& name, bool ok) {
        std::cout << (ok ? "pass" : "FAIL") << "  " << name << '\n';
        if (!ok) ++failures;
    }
};

double exact_monomial_integral(int a, int b) {
    // int_T x^a y^b over the reference triangle = a! b! / (a+b+2)!
    double r = 1.0;
    for (int i = 1; i <= a; ++i) r *= i;
    for (int i = 1; i <= b; ++i) r *= i;
    for (int i = 1; i <= a + b + 2; ++i) r /= i;
    return r;
}

}  // namespace

int run_selftest() {
    SelfTest t;

    // quadrature exactness on both tabulated rules
    for (int precision : {3, 7}) {
        const QuadRule& rule = reference_rule(precision);
        double worst = 0.0;
        for (int a = 0; a + 0 <= precision; ++a) {
            for (int b = 0; a + b <= precision; ++b) {
                double sum = 0.0;
                for (const auto& node : rule.nodes) {
                    sum += std::pow(node.bary[1], a) * std::pow(node.bary[2], b) * node.weight;
                }
                const double exact = exact_monomial_integral(a, b);
                worst = std::max(worst, std::abs(sum - exact) / exact);
            }
        }
        t.check("quadrature exactness, precision " + std::to_string(precision), worst <= 1e-13);
    }

    // projection reproduces polynomials and preserves means
    {
        const Mesh mesh = build_structured_unit_square(3);
        std::mt19937_64 rng(7);
        auto unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        bool reproduce_ok = true, mean_ok = true;
        for (int trial = 0; trial < 20; ++trial) {
            const int element = static_cast<int>(rng() % mesh.num_triangles());
            const int degree = 2 + static_cast<int>(rng() % 2);
            const double c0 = unit(), c1 = unit(), c2 = unit(), c3 = unit();
            auto poly = [&](Vec2 p) {
                return c0 + c1 * p.x + c2 * p.y + c3 * p.x * p.y;  // degree 2
            };
            PolyProjection proj = project(mesh, element, degree, poly);
            const ElementFrame frame = ElementFrame::from(mesh, element);
            for (int probe = 0; probe < 5; ++probe) {
                const double l1 = unit();
                const double l2 = unit() * (1.0 - l1);
                const std::array<double, 3> lam{l1, l2, 1.0 - l1 - l2};
                const Vec2 p = frame.point(lam);
                if (std::abs(proj.poly.eval(lam) - poly(p)) > 1e-12) reproduce_ok = false;
            }
            auto smooth = [](Vec2 p) { return std::tanh(p.x + 0.5 * p.y); };
            PolyProjection sproj = project(mesh, element, degree, smooth);
            const QuadRule& o7 = reference_rule(7);
            const double lhs = integrate(mesh, element, [&](Vec2 p) {
                return sproj.poly.eval(frame.bary(p));
            }, o7);
            const double rhs = integrate(mesh, element, smooth, o7);
            if (std::abs(lhs - rhs) > 1e-12) mean_ok = false;
        }
        t.check("projection reproduces degree-k polynomials", reproduce_ok);
        t.check("projection preserves element means", mean_ok);
    }

    // zero estimator for the exact polynomial configuration
    {
        const Mesh mesh = build_structured_unit_square(4);
        const ProblemSpec data = polynomial_diffusion();
        const ResidualVector r = assemble_residuals(mesh, *data.exact, data, reference_rule(3));
        double rmax = 0.0;
        for (double v : r.values) rmax = std::max(rmax, std::abs(v));
        const EstimatorBreakdown breakdown =
            assemble_breakdown(mesh, *data.exact, data, r, resolve_ch(mesh, ChMode::measured));
        t.check("polynomial problem: residuals vanish", rmax <= 1e-12);
        t.check("polynomial problem: estimator vanishes", breakdown.eta <= 1e-9);
    }

    // network spatial gradient against finite differences
    {
        const MLPParams params = init_params({2, 8, 8, 1}, 11);
        const ProblemSpec data = poisson_tanh();
        TrialField field = TrialField::for_problem(params, data);
        std::mt19937_64 rng(13);
        auto unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        double worst = 0.0;
        const double step = 1e-6;
        for (int i = 0; i < 20; ++i) {
            const Vec2 p{0.05 + 0.9 * unit(), 0.05 + 0.9 * unit()};
            const auto [value, grad] = field.value_and_gradient(p);
            (void)value;
            const double fdx =
                (field.value({p.x + step, p.y}) - field.value({p.x - step, p.y})) / (2.0 * step);
            const double fdy =
                (field.value({p.x, p.y + step}) - field.value({p.x, p.y - step})) / (2.0 * step);
            worst = std::max(worst, std::abs(fdx - grad.x) / std::max(1.0, std::abs(grad.x)));
            worst = std::max(worst, std::abs(fdy - grad.y) / std::max(1.0, std::abs(grad.y)));
        }
        t.check("network gradient matches finite differences", worst <= 1e-6);
    }

    // breakdown algebra on a random field
    {
        const Mesh mesh = build_structured_unit_square(4);
        const ProblemSpec data = poisson_tanh();
        TrialField field = TrialField::for_problem(init_params({2, 10, 1}, 3), data);
        const ResidualVector r = assemble_residuals(mesh, field, data, reference_rule(3));
        const double C_h = resolve_ch(mesh, ChMode::measured);
        const EstimatorBreakdown b = assemble_breakdown(mesh, field, data, r, C_h);
        double res_sq = 0.0, local_sq = 0.0, loss_sq = 0.0;
        for (size_t i = 0; i < b.res.size(); ++i) {
            res_sq += b.res[i] * b.res[i];
            local_sq += b.total[i] * b.total[i];
            loss_sq += b.loss[i] * b.loss[i];
        }
        const bool sums_ok = std::abs(std::sqrt(res_sq) - b.eta_res) <= 1e-12 * (1.0 + b.eta_res) &&
                             std::abs(std::sqrt(local_sq) - b.eta_localized) <=
                                 1e-12 * (1.0 + b.eta_localized);
        t.check("breakdown sum-of-squares identities", sums_ok);
        t.check("localized loss dominates the global loss term",
                b.eta_loss * b.eta_loss <= loss_sq + 1e-12);
    }

    std::cout << (t.failures == 0 ? "selftest: all checks passed\n"
                                  : "selftest: " + std::to_string(t.failures) + " failures\n");
    return t.failures;
}

}  // namespace vpinn
