#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "krrpm/calibration.hpp"

using namespace krrpm;

TEST_CASE("ks_uniform_statistic on known configurations") {
  // a point mass at 0.5 against U[0,1]
  CHECK(ks_uniform_statistic(std::vector<double>(100, 0.5)) == 0.5);
  // the centered lattice is the best possible M-point approximation
  std::vector<double> lattice(10);
  for (int i = 0; i < 10; ++i) lattice[static_cast<std::size_t>(i)] = (i + 0.5) / 10.0;
  CHECK(ks_uniform_statistic(lattice) == Catch::Approx(0.05).epsilon(1e-12));
  // sorting is internal
  std::vector<double> shuffled = {0.95, 0.05, 0.55, 0.25, 0.75};
  CHECK(ks_uniform_statistic(shuffled) == Catch::Approx(0.15).epsilon(1e-12));
  CHECK_THROWS_AS(ks_uniform_statistic({}), InputError);
}

TEST_CASE("a broken constant predictor is far from uniform") {
  // PIT identically 0.5, as produced by a predictor that ignores tau and data
  std::vector<double> pit(2000, 0.5);
  CHECK(ks_uniform_statistic(pit) >= 0.45);
}

TEST_CASE("calibration_suite input validation") {
  CHECK_THROWS_AS(calibration_suite("trig", 20, KernelSpec::laplacian(), 1.0,
                                    Variant::studentized, 99, 0),
                  InputError);
  CHECK_THROWS_AS(calibration_suite("nope", 20, KernelSpec::laplacian(), 1.0,
                                    Variant::studentized, 100, 0),
                  InputError);
}

TEST_CASE("calibrated predictor passes the KS check on trig data") {
  CalibrationReport report = calibration_suite("trig", 20, KernelSpec::laplacian(), 1.0,
                                               Variant::studentized, 2000, 1);
  REQUIRE(report.pit_values.size() == 2000);
  CHECK(report.ks_statistic < 0.0304);  // 5% critical value 1.358/sqrt(2000)
  for (double pit : report.pit_values) {
    CHECK(pit >= 0.0);
    CHECK(pit <= 1.0);
  }
  CHECK(std::accumulate(report.histogram.begin(), report.histogram.end(), 0) == 2000);
}

TEST_CASE("calibration does not depend on the kernel matching the data") {
  CalibrationReport linear = calibration_suite("triangle", 15, KernelSpec::linear(), 1.0,
                                               Variant::studentized, 1000, 2);
  CHECK(linear.ks_statistic < 1.358 / std::sqrt(1000.0));

  CalibrationReport trig = calibration_suite("trig", 10, KernelSpec::trig2d(), 0.5,
                                             Variant::studentized, 1000, 5);
  CHECK(trig.ks_statistic < 1.358 / std::sqrt(1000.0));
}

TEST_CASE("calibration reports are deterministic in the seed") {
  CalibrationReport a = calibration_suite("triangle", 5, KernelSpec::laplacian(), 1.0,
                                          Variant::studentized, 200, 9);
  CalibrationReport b = calibration_suite("triangle", 5, KernelSpec::laplacian(), 1.0,
                                          Variant::studentized, 200, 9);
  CHECK(a.pit_values == b.pit_values);
  CHECK(a.ks_statistic == b.ks_statistic);
  CHECK(a.histogram == b.histogram);
}

TEST_CASE("n = 1 edge case runs and reports") {
  CalibrationReport report = calibration_suite("triangle", 1, KernelSpec::laplacian(), 1.0,
                                               Variant::studentized, 100, 3);
  REQUIRE(report.pit_values.size() == 100);
  // PIT = (below + tau * tied)/2 with below in {0,1}, tied in {1,2}
  for (double pit : report.pit_values) {
    CHECK(pit >= 0.0);
    CHECK(pit <= 1.0);
  }
}

TEST_CASE("exact enumeration of the calibration property at n = 2") {
  std::vector<DiscreteObservation> support = {
      {0.1, -0.9, 0.2}, {0.45, 0.2, 0.3}, {0.8, 1.1, 0.5}};
  std::vector<double> u = {1.0 / 3.0, 2.0 / 3.0, 1.0};

  double dev_lap = exact_r2_max_deviation(support, KernelSpec::laplacian(), 1.0,
                                          Variant::studentized, u);
  CHECK(dev_lap < 1e-9);

  double dev_lin = exact_r2_max_deviation(support, KernelSpec::linear(), 1.0,
                                          Variant::studentized, u);
  CHECK(dev_lin < 1e-9);

  // also exact at intermediate u values
  std::vector<double> u_fine = {0.1, 0.25, 0.5, 0.77, 0.99};
  CHECK(exact_r2_max_deviation(support, KernelSpec::laplacian(), 0.7, Variant::studentized,
                               u_fine) < 1e-9);

  std::vector<DiscreteObservation> bad = {{0.0, 0.0, 0.5}, {1.0, 1.0, 0.6}};
  CHECK_THROWS_AS(exact_r2_max_deviation(bad, KernelSpec::linear(), 1.0, Variant::studentized, u),
                  InputError);
}
