// Command-line front end: fit-and-predict on CSV data, Monte Carlo
// calibration runs, and the two synthetic experiments.
//
// Exit codes: 0 success, 1 numeric/validity failure, 2 usage error.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "krrpm/krrpm.hpp"

namespace fs = std::filesystem;
using krrpm::Matrix;
using krrpm::Vector;

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("KRRPM_OUT");
  return env ? std::string(env) : std::string(".");
}

krrpm::KernelSpec make_kernel(const std::string& name, double scale) {
  if (name == "linear") return krrpm::KernelSpec::linear();
  if (name == "laplacian") return krrpm::KernelSpec::laplacian(scale);
  if (name == "trig2d") return krrpm::KernelSpec::trig2d();
  throw krrpm::InputError("unknown kernel: " + name +
                          " (expected linear, laplacian or trig2d)");
}

Vector parse_inline_object(const std::string& text) {
  std::vector<double> coords;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      std::size_t pos = 0;
      coords.push_back(std::stod(field, &pos));
      if (pos != field.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw krrpm::InputError("bad test object coordinate: '" + field + "'");
    }
  }
  if (coords.empty()) throw krrpm::InputError("empty test object");
  Vector v(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) v(static_cast<Eigen::Index>(i)) = coords[i];
  return v;
}

struct PredictOptions {
  std::string train_path;
  std::string test_path;
  std::vector<std::string> inline_tests;
  std::string kernel = "laplacian";
  double scale = 1.0;
  double a = 1.0;
  std::string variant = "studentized";
  double sigma = 0.0;  // 0 = no Bayesian output
  std::string out_dir = default_out_dir();
  int grid_points = 512;
  double span_iqr = 3.0;
};

int run_predict(const PredictOptions& opt) {
  krrpm::Dataset train = krrpm::read_dataset_csv(opt.train_path);
  std::vector<Vector> tests;
  if (!opt.test_path.empty()) {
    Matrix m = krrpm::read_objects_csv(opt.test_path);
    for (Eigen::Index i = 0; i < m.rows(); ++i) tests.push_back(m.row(i).transpose());
  }
  for (const auto& text : opt.inline_tests) tests.push_back(parse_inline_object(text));
  if (tests.empty())
    throw krrpm::InputError("no test objects: pass --test FILE or --test-object COORDS");

  krrpm::KernelSpec kernel = make_kernel(opt.kernel, opt.scale);
  krrpm::Variant variant = krrpm::variant_from_string(opt.variant);
  krrpm::FitState fit = krrpm::fit(train.objects, train.labels, kernel, opt.a);

  fs::create_directories(opt.out_dir);
  for (std::size_t t = 0; t < tests.size(); ++t) {
    krrpm::ConformalDistribution dist = krrpm::krrpm_predict(fit, tests[t], variant);
    std::string stem = (fs::path(opt.out_dir) / ("predict_" + std::to_string(t))).string();
    krrpm::write_json(stem + ".json", krrpm::to_json(dist));

    Vector grid = krrpm::curve_grid(dist, opt.grid_points, opt.span_iqr);
    Vector q0(grid.size()), q1(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
      q0(i) = krrpm::eval_distribution(dist, grid(i), 0.0);
      q1(i) = krrpm::eval_distribution(dist, grid(i), 1.0);
    }
    krrpm::write_curve_csv(stem + "_curve.csv", {"y", "Q0", "Q1"}, {grid, q0, q1});

    if (opt.sigma > 0.0) {
      krrpm::GaussianPrediction bayes = krrpm::bayes_predict(fit, tests[t], opt.sigma);
      Vector cdf(grid.size());
      for (Eigen::Index i = 0; i < grid.size(); ++i)
        cdf(i) = krrpm::gaussian_cdf(bayes, grid(i));
      krrpm::write_curve_csv(stem + "_bayes.csv", {"y", "cdf"}, {grid, cdf});
    }

    double lo = krrpm::quantile(dist, 0.05, 0.5);
    double hi = krrpm::quantile(dist, 0.95, 0.5);
    double mid = krrpm::quantile(dist, 0.5, 0.5);
    std::cout << "test " << t << ": median " << mid << ", 90% interval [" << lo << ", " << hi
              << "], wrote " << stem << ".json\n";
  }
  return 0;
}

struct CalibrateOptions {
  std::string generator = "trig";
  int n = 20;
  int trials = 2000;
  std::string kernel = "laplacian";
  double scale = 1.0;
  double a = 1.0;
  std::string variant = "studentized";
  std::uint64_t seed = 0;
  double threshold = -1.0;  // < 0 = default 1.358/sqrt(trials)
  int bins = 20;
  std::string out_path;
};

int run_calibrate(const CalibrateOptions& opt) {
  krrpm::KernelSpec kernel = make_kernel(opt.kernel, opt.scale);
  krrpm::Variant variant = krrpm::variant_from_string(opt.variant);
  krrpm::CalibrationReport report = krrpm::calibration_suite(
      opt.generator, opt.n, kernel, opt.a, variant, opt.trials, opt.seed, opt.bins);

  double threshold =
      opt.threshold >= 0.0 ? opt.threshold : 1.358 / std::sqrt(static_cast<double>(opt.trials));
  std::string out = opt.out_path;
  if (out.empty()) {
    fs::create_directories(default_out_dir());
    out = (fs::path(default_out_dir()) / "calibration.json").string();
  }
  krrpm::write_json(out, krrpm::to_json(report));

  bool pass = report.ks_statistic <= threshold;
  std::cout << "KS statistic " << report.ks_statistic << " over " << report.trials
            << " trials (threshold " << threshold << "): " << (pass ? "PASS" : "FAIL")
            << ", wrote " << out << "\n";
  return pass ? 0 : 1;
}

struct ExperimentOptions {
  std::string figure;
  int n = -1;  // -1 = figure default
  std::uint64_t seed = krrpm::kDefaultExperimentSeed;
  std::string out_dir = default_out_dir();
  int grid_points = 512;
};

void write_q_curves(const std::string& path, const krrpm::ConformalDistribution& dist,
                    int grid_points) {
  Vector grid = krrpm::curve_grid(dist, grid_points);
  Vector q0(grid.size()), q1(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    q0(i) = krrpm::eval_distribution(dist, grid(i), 0.0);
    q1(i) = krrpm::eval_distribution(dist, grid(i), 1.0);
  }
  krrpm::write_curve_csv(path, {"y", "Q0", "Q1"}, {grid, q0, q1});
}

int run_experiment(const ExperimentOptions& opt) {
  fs::create_directories(opt.out_dir);
  fs::path dir(opt.out_dir);
  if (opt.figure == "fig1") {
    int n = opt.n > 0 ? opt.n : 1000;
    krrpm::Figure1Result r = krrpm::run_figure1(n, opt.seed, opt.grid_points);
    krrpm::write_curve_csv((dir / "fig1_curves.csv").string(),
                           {"y", "bayes", "cpd_true", "cpd_laplacian", "cpd_linear"},
                           {r.y_grid, r.bayes_cdf, r.cpd_true, r.cpd_laplacian, r.cpd_linear});
    nlohmann::json metrics;
    metrics["sup_distance_true"] = r.sup_true;
    metrics["sup_distance_laplacian"] = r.sup_laplacian;
    metrics["sup_distance_linear"] = r.sup_linear;
    krrpm::write_json((dir / "fig1_metrics.json").string(), metrics);
    std::cout << "sup distances to the Bayesian curve: true " << r.sup_true << ", laplacian "
              << r.sup_laplacian << ", linear " << r.sup_linear << "\n";
    return 0;
  }
  if (opt.figure == "fig2" || opt.figure == "fig3") {
    int n = opt.n > 0 ? opt.n : (opt.figure == "fig2" ? 1000 : 10);
    krrpm::Figure23Curves r = krrpm::run_figure23(n, opt.seed);
    const std::string fig = opt.figure;
    write_q_curves((dir / (fig + "_x0_studentized.csv")).string(), r.studentized_x0,
                   opt.grid_points);
    write_q_curves((dir / (fig + "_x0_ordinary.csv")).string(), r.ordinary_x0, opt.grid_points);
    write_q_curves((dir / (fig + "_x1_studentized.csv")).string(), r.studentized_x1,
                   opt.grid_points);
    write_q_curves((dir / (fig + "_x1_ordinary.csv")).string(), r.ordinary_x1, opt.grid_points);
    nlohmann::json metrics;
    metrics["n"] = n;
    metrics["sup_studentized_vs_ordinary_x0"] = r.sup_variants_x0;
    metrics["sup_studentized_vs_ordinary_x1"] = r.sup_variants_x1;
    metrics["sup_x0_vs_x1_studentized"] = r.sup_x0_vs_x1;
    krrpm::write_json((dir / (fig + "_metrics.json")).string(), metrics);
    std::cout << "studentized vs ordinary sup distance: x*=0 " << r.sup_variants_x0
              << ", x*=1 " << r.sup_variants_x1 << "; x*=0 vs x*=1 (studentized) "
              << r.sup_x0_vs_x1 << "\n";
    return 0;
  }
  throw krrpm::InputError("unknown figure id: " + opt.figure +
                          " (expected fig1, fig2 or fig3)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal predictive distributions for kernel ridge regression"};
  app.require_subcommand(1);

  PredictOptions pred;
  CLI::App* predict = app.add_subcommand("predict", "Fit on a CSV and predict distributions");
  predict->add_option("--train", pred.train_path, "Training CSV (x1..xd then y)")->required();
  predict->add_option("--test", pred.test_path, "Test-object CSV (x1..xd)");
  predict->add_option("--test-object", pred.inline_tests,
                      "Inline test object, comma-separated coordinates (repeatable)");
  predict->add_option("--kernel", pred.kernel, "Kernel: linear, laplacian or trig2d");
  predict->add_option("--scale", pred.scale, "Laplacian kernel scale");
  predict->add_option("--a", pred.a, "Ridge parameter a > 0");
  predict->add_option("--variant", pred.variant, "studentized, ordinary or deleted");
  predict->add_option("--sigma", pred.sigma, "Noise sd; also emit the Gaussian baseline curve");
  predict->add_option("--out", pred.out_dir, "Output directory");
  predict->add_option("--grid-points", pred.grid_points, "Curve grid size");
  predict->add_option("--span-iqr", pred.span_iqr, "Grid padding in interquartile ranges");

  CalibrateOptions cal;
  CLI::App* calibrate = app.add_subcommand("calibrate", "Monte Carlo calibration check");
  calibrate->add_option("--generator", cal.generator, "Data generator: trig or triangle");
  calibrate->add_option("--n", cal.n, "Training size per trial");
  calibrate->add_option("--trials", cal.trials, "Number of Monte Carlo trials (>= 100)");
  calibrate->add_option("--kernel", cal.kernel, "Kernel: linear, laplacian or trig2d");
  calibrate->add_option("--scale", cal.scale, "Laplacian kernel scale");
  calibrate->add_option("--a", cal.a, "Ridge parameter a > 0");
  calibrate->add_option("--variant", cal.variant, "studentized, ordinary or deleted");
  calibrate->add_option("--seed", cal.seed, "RNG seed");
  calibrate->add_option("--threshold", cal.threshold,
                        "KS failure threshold (default 1.358/sqrt(trials))");
  calibrate->add_option("--bins", cal.bins, "Histogram bins");
  calibrate->add_option("--out", cal.out_path, "Report JSON path");

  ExperimentOptions exp;
  CLI::App* experiment = app.add_subcommand("experiment", "Reproduce a synthetic experiment");
  experiment->add_option("figure", exp.figure, "fig1, fig2 or fig3")->required();
  experiment->add_option("--n", exp.n, "Training size (default per figure)");
  experiment->add_option("--seed", exp.seed, "RNG seed");
  experiment->add_option("--out", exp.out_dir, "Output directory");
  experiment->add_option("--grid-points", exp.grid_points, "Curve grid size");

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(predict)) return run_predict(pred);
    if (app.got_subcommand(calibrate)) return run_calibrate(cal);
    return run_experiment(exp);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const krrpm::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
