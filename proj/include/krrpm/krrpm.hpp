#pragma once

// Conformal predictive distributions for kernel ridge regression: the fast
// prediction machine, its Gaussian-process baseline, a brute-force conformal
// oracle, seeded synthetic data generators and a calibration harness.

#include "krrpm/calibration.hpp"
#include "krrpm/cps.hpp"
#include "krrpm/datagen.hpp"
#include "krrpm/errors.hpp"
#include "krrpm/experiments.hpp"
#include "krrpm/gpr.hpp"
#include "krrpm/io.hpp"
#include "krrpm/kernels.hpp"
#include "krrpm/ridge.hpp"
#include "krrpm/rng.hpp"
