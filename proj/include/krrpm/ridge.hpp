#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>

#include "krrpm/errors.hpp"
#include "krrpm/kernels.hpp"

namespace krrpm {

// Cached training-time quantities for kernel ridge regression with ridge a:
//
//   inv_action         M = (K + aI)^-1, kept explicit so every per-test step
//                      costs one matrix-vector product
//   train_predictions  yhat = H Y, where H = M K is the training hat matrix
//   train_leverage     h_i = diag(H), always in [0, 1)
//
// Immutable after construction; safe to share across concurrent predictions.
struct FitState {
  Matrix objects;
  Vector labels;
  double ridge = 1.0;
  KernelSpec kernel;
  Matrix inv_action;
  Vector train_predictions;
  Vector train_leverage;

  int n() const { return static_cast<int>(labels.size()); }
};

// Per-test-object quantities, all derived from the single O(n^2) product
// m = M k:
//
//   d                = 1 / (kappa + a - k'Mk), positive for a valid kernel
//   ad               = a d = 1 - hbar_{n+1}, in (0, 1]
//   one_minus_h(i)   = 1 - hbar_i = 1 - h_i + ad m_i^2, each in (0, 1]
//   bayes_mean       = k'MY, the ridge prediction for the test label
struct LeverageTerms {
  Vector k;
  double kappa = 0.0;
  Vector m;
  double d = 0.0;
  double ad = 0.0;
  double one_minus_h_test = 0.0;
  Vector one_minus_h;
  double bayes_mean = 0.0;
};

inline FitState fit(const Matrix& objects, const Vector& labels, const KernelSpec& kernel,
                    double a) {
  if (objects.rows() == 0) throw InputError("fit: empty training set");
  if (objects.rows() != labels.size())
    throw InputError("fit: objects/labels length mismatch");
  if (!labels.allFinite()) throw InputError("fit: labels must be finite");
  if (!(a > 0.0)) throw InputError("fit: ridge parameter a must be positive");

  const Eigen::Index n = objects.rows();
  Matrix K = kernel_matrix(kernel, objects);
  Matrix reg = K;
  reg.diagonal().array() += a;
  Eigen::LLT<Matrix> llt(reg);
  if (llt.info() != Eigen::Success)
    throw NumericError("fit: factorization of K + aI failed; kernel is not PSD");
  Matrix M = llt.solve(Matrix::Identity(n, n));
  M = 0.5 * (M + M.transpose());  // M is symmetric in exact arithmetic

  Vector h = M.cwiseProduct(K).rowwise().sum();  // diag(MK), K symmetric
  Vector yhat = M * (K * labels);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(h(i) < 1.0 - 1e-12))
      throw NumericError("fit: training leverage h_" + std::to_string(i + 1) +
                         " = " + std::to_string(h(i)) +
                         " outside [0, 1); kernel matrix is corrupt");
  }
  return FitState{objects, labels, a, kernel, std::move(M), std::move(yhat), std::move(h)};
}

inline LeverageTerms leverage_terms(const FitState& fs, const Vector& test) {
  auto [k, kappa] = kernel_vector(fs.kernel, fs.objects, test);
  Vector m = fs.inv_action * k;
  double k_m = k.dot(m);
  double denom = kappa + fs.ridge - k_m;
  if (!(denom > 1e-12))
    throw NumericError("leverage_terms: denominator kappa + a - k'Mk = " +
                       std::to_string(denom) +
                       " is not positive; kernel is not PSD");
  LeverageTerms lt;
  lt.kappa = kappa;
  lt.d = 1.0 / denom;
  lt.ad = fs.ridge * lt.d;
  lt.one_minus_h_test = lt.ad;
  lt.one_minus_h = (1.0 - fs.train_leverage.array()) + lt.ad * m.array().square();
  lt.bayes_mean = m.dot(fs.labels);
  lt.k = std::move(k);
  lt.m = std::move(m);
  return lt;
}

// Hat matrix H = (K + aI)^-1 K of the given objects by direct factorization.
// O(n^3) every call; test oracle and slow-path building block only.
inline Matrix hat_matrix_full(const Matrix& objects, const KernelSpec& kernel, double a) {
  if (objects.rows() == 0) throw InputError("hat_matrix_full: need at least one object");
  if (!(a > 0.0)) throw InputError("hat_matrix_full: ridge parameter a must be positive");
  Matrix K = kernel_matrix(kernel, objects);
  Matrix reg = K;
  reg.diagonal().array() += a;
  Eigen::LLT<Matrix> llt(reg);
  if (llt.info() != Eigen::Success)
    throw NumericError("hat_matrix_full: factorization failed; kernel is not PSD");
  return llt.solve(K);
}

// The (n+1)-point hat matrix assembled from training-only quantities via the
// partitioned-inverse blocks:
//
//   [ H - ad m m'        ad m              ]        m = M k
//   [ ad m'              d kappa - d k'Mk  ]        H = I - a M
inline Matrix partitioned_hat(const FitState& fs, const Vector& test) {
  const Eigen::Index n = fs.labels.size();
  LeverageTerms lt = leverage_terms(fs, test);
  Matrix H = -fs.ridge * fs.inv_action;
  H.diagonal().array() += 1.0;
  Matrix full(n + 1, n + 1);
  full.topLeftCorner(n, n) = H - lt.ad * (lt.m * lt.m.transpose());
  full.topRightCorner(n, 1) = lt.ad * lt.m;
  full.bottomLeftCorner(1, n) = lt.ad * lt.m.transpose();
  full(n, n) = lt.d * lt.kappa - lt.d * lt.k.dot(lt.m);
  return full;
}

}  // namespace krrpm
