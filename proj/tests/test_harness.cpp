#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "vpinn/config.hpp"
#include "vpinn/experiment.hpp"
#include "vpinn/svg.hpp"

using namespace vpinn;

TEST_SUITE_BEGIN("harness");

TEST_CASE("fit_slope on exact power laws") {
    CHECK(fit_slope({{1.0, 1.0}, {0.5, 0.25}}) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit_slope({{1.0, 3.7}, {0.5, 3.7}}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fit_slope({{1.0, 1.0}, {0.5, 1.0 / 16}, {0.25, 1.0 / 256}}) ==
          doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("fit_slope is invariant under a positive value scaling") {
    const std::vector<std::pair<double, double>> base{{0.4, 0.9}, {0.2, 0.13}, {0.1, 0.021}};
    std::vector<std::pair<double, double>> scaled = base;
    for (auto& [h, v] : scaled) v *= 37.5;
    CHECK(fit_slope(base) == doctest::Approx(fit_slope(scaled)).epsilon(1e-12));
}

TEST_CASE("fit_slope rejects bad inputs") {
    CHECK_THROWS_AS(fit_slope({{1.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(fit_slope({{1.0, 0.0}, {0.5, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(fit_slope({{-1.0, 1.0}, {0.5, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(fit_slope({{1.0, 1.0}, {1.0, 2.0}}), std::invalid_argument);
}

TEST_CASE("config parsing with comments and overrides") {
    const std::string text = R"(
# experiment setup
problem = polynomial_diffusion
meshes = 2, 4, 8
widths = 2 8 8 1
epochs = 50          # short run
learning_rate = 5e-3
checkpoint_period = 10
ch_mode = asymptotic
seed = 7
slope_tail_drop = 0
inject_exact = true
)";
    const ExperimentConfig cfg = parse_config_text(text);
    CHECK(cfg.problem == "polynomial_diffusion");
    CHECK(cfg.mesh_ns == std::vector<int>{2, 4, 8});
    CHECK(cfg.widths == std::vector<int>{2, 8, 8, 1});
    CHECK(cfg.train.epochs == 50);
    CHECK(cfg.train.learning_rate == 5e-3);
    CHECK(cfg.train.checkpoint_period == 10);
    CHECK(cfg.train.ch_mode == ChMode::asymptotic);
    CHECK(cfg.seed == 7);
    CHECK(cfg.train.seed == 7);
    CHECK(cfg.slope_tail_drop == 0);
    CHECK(cfg.inject_exact);
}

TEST_CASE("config rejects unknown keys, bad lists, and bad precisions") {
    CHECK_THROWS_AS(parse_config_text("no_such_key = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("meshes = 8, 4\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("meshes\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("assembly_precision = 7\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("ch_mode = sometimes\n"), std::invalid_argument);
}

TEST_CASE("injected exact field rejects the slope fit with a clear message") {
    ExperimentConfig cfg;
    cfg.problem = "polynomial_diffusion";
    cfg.mesh_ns = {2, 4};
    cfg.inject_exact = true;
    cfg.slope_tail_drop = 0;
    cfg.out_dir = (std::filesystem::temp_directory_path() / "vpinn_inject_out").string();
    const ConvergenceResult result = run_convergence(cfg);
    REQUIRE(result.rows.size() == 2);
    for (const auto& row : result.rows) {
        CHECK(row.h1_error <= 1e-12);
        CHECK(row.r_h <= 1e-10);
    }
    CHECK(!result.slope_eta.has_value());
    CHECK(result.fit_message.find("slope fit rejected") != std::string::npos);
    CHECK(std::filesystem::exists(cfg.out_dir + "/convergence.csv"));
    std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("tiny seeded convergence run: schema, reproducibility, replay") {
    ExperimentConfig cfg;
    cfg.problem = "poisson_tanh";
    cfg.mesh_ns = {2, 3};
    cfg.widths = {2, 8, 1};
    cfg.train.epochs = 40;
    cfg.train.checkpoint_period = 20;
    cfg.train.ch_mode = ChMode::asymptotic;
    cfg.seed = 123;
    cfg.slope_tail_drop = 0;
    cfg.out_dir = (std::filesystem::temp_directory_path() / "vpinn_conv_out").string();
    const ConvergenceResult a = run_convergence(cfg);
    REQUIRE(a.rows.size() == 2);
    CHECK(!a.diverged);

    // byte-identical CSV on re-run
    std::ifstream csv1(cfg.out_dir + "/convergence.csv");
    std::string text1((std::istreambuf_iterator<char>(csv1)), {});
    const ConvergenceResult b = run_convergence(cfg);
    std::ifstream csv2(cfg.out_dir + "/convergence.csv");
    std::string text2((std::istreambuf_iterator<char>(csv2)), {});
    CHECK(text1 == text2);
    CHECK(std::filesystem::exists(cfg.out_dir + "/convergence.svg"));

    // replay: the saved checkpoint reproduces the reported estimator exactly
    const EstimatorBreakdown replay =
        run_estimate(cfg, cfg.out_dir + "/checkpoint_n3.txt", 3);
    CHECK(replay.eta == a.rows[1].eta);
    CHECK(std::filesystem::exists(cfg.out_dir + "/breakdown.csv"));

    // breakdown CSV: one row per element plus header and global summary
    std::ifstream bcsv(cfg.out_dir + "/breakdown.csv");
    int lines = 0;
    std::string line, last;
    while (std::getline(bcsv, line)) {
        if (!line.empty()) last = line;
        ++lines;
    }
    CHECK(lines == 2 * 3 * 3 + 2);
    CHECK(last.substr(0, 7) == "global,");
    std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("trace run writes a reproducible 8-column CSV") {
    ExperimentConfig cfg;
    cfg.problem = "poisson_tanh";
    cfg.mesh_ns = {3};
    cfg.widths = {2, 8, 1};
    cfg.train.epochs = 30;
    cfg.train.checkpoint_period = 10;
    cfg.train.ch_mode = ChMode::asymptotic;
    cfg.seed = 9;
    cfg.out_dir = (std::filesystem::temp_directory_path() / "vpinn_trace_out").string();
    const TraceResult a = run_trace(cfg);
    CHECK(a.trace.records.size() == 4);
    std::ifstream csv1(cfg.out_dir + "/trace.csv");
    std::string text1((std::istreambuf_iterator<char>(csv1)), {});
    CHECK(text1.substr(0, text1.find('\n')) ==
          "epoch,R_h,eta_rhs,eta_coef,eta_res,eta_loss,eta,h1_error");
    run_trace(cfg);
    std::ifstream csv2(cfg.out_dir + "/trace.csv");
    std::string text2((std::istreambuf_iterator<char>(csv2)), {});
    CHECK(text1 == text2);
    CHECK(std::filesystem::exists(cfg.out_dir + "/trace.svg"));
    std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("svg writer emits well-formed series") {
    const std::string path = (std::filesystem::temp_directory_path() / "vpinn_plot.svg").string();
    PlotSeries s{"series", "#d62728", {1.0, 0.5, 0.25}, {1.0, 0.06, 0.004}};
    write_svg_plot(path, "title", "h", "value", AxisScale::log, AxisScale::log, {s});
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    CHECK(text.find("<svg") != std::string::npos);
    CHECK(text.find("polyline") != std::string::npos);
    CHECK(text.find("series") != std::string::npos);
    CHECK(text.rfind("</svg>") != std::string::npos);
    std::filesystem::remove(path);
}

TEST_SUITE_END();
