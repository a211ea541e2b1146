#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "krrpm/errors.hpp"

namespace krrpm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class KernelKind { linear, laplacian, trig2d, precomputed };

// A kernel choice plus its parameters.
//
//   linear       x . x'
//   laplacian    exp(-|x - x'| / scale), Euclidean norm, default scale 1
//   trig2d       cos(x1 - x'1) + cos(x2 - x'2), objects must be 2-d
//   precomputed  an explicit Gram matrix; objects are then single-coordinate
//                row indices into it (lets tests inject arbitrary matrices)
class KernelSpec {
 public:
  KernelSpec() : kind_(KernelKind::linear) {}

  static KernelSpec linear() { return KernelSpec(KernelKind::linear); }

  static KernelSpec laplacian(double scale = 1.0) {
    if (!(scale > 0.0)) throw InputError("laplacian kernel: scale must be positive");
    KernelSpec s(KernelKind::laplacian);
    s.scale_ = scale;
    return s;
  }

  static KernelSpec trig2d() { return KernelSpec(KernelKind::trig2d); }

  // The matrix must be square and symmetric within 1e-10; it is stored
  // exactly symmetrized.
  static KernelSpec precomputed(Matrix gram) {
    if (gram.rows() == 0 || gram.rows() != gram.cols())
      throw InputError("precomputed kernel: matrix must be square and nonempty");
    if (!gram.allFinite())
      throw InputError("precomputed kernel: matrix entries must be finite");
    if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-10)
      throw InputError("precomputed kernel: matrix must be symmetric within 1e-10");
    KernelSpec s(KernelKind::precomputed);
    Matrix sym = 0.5 * (gram + gram.transpose());
    s.gram_ = std::make_shared<const Matrix>(std::move(sym));
    return s;
  }

  KernelKind kind() const { return kind_; }
  double scale() const { return scale_; }

  const Matrix& gram() const {
    if (!gram_) throw InputError("kernel has no precomputed matrix");
    return *gram_;
  }

  std::string name() const {
    switch (kind_) {
      case KernelKind::linear: return "linear";
      case KernelKind::laplacian: return "laplacian";
      case KernelKind::trig2d: return "trig2d";
      case KernelKind::precomputed: return "precomputed";
    }
    return "unknown";
  }

 private:
  explicit KernelSpec(KernelKind k) : kind_(k) {}

  KernelKind kind_;
  double scale_ = 1.0;
  std::shared_ptr<const Matrix> gram_;
};

namespace detail {

inline void require_finite_object(const Vector& x) {
  if (x.size() == 0) throw InputError("object must have at least one coordinate");
  if (!x.allFinite()) throw InputError("object coordinates must be finite");
}

inline Eigen::Index gram_index(const Matrix& gram, const Vector& x) {
  if (x.size() != 1)
    throw InputError("precomputed kernel: objects must be single-coordinate row indices");
  double v = x(0);
  auto idx = static_cast<Eigen::Index>(std::llround(v));
  if (std::fabs(v - static_cast<double>(idx)) > 1e-9 || idx < 0 || idx >= gram.rows())
    throw InputError("precomputed kernel: object index out of range: " + std::to_string(v));
  return idx;
}

}  // namespace detail

inline double eval_kernel(const KernelSpec& spec, const Vector& x, const Vector& x2) {
  detail::require_finite_object(x);
  detail::require_finite_object(x2);
  if (x.size() != x2.size()) throw InputError("eval_kernel: objects have different dimensions");
  switch (spec.kind()) {
    case KernelKind::linear:
      return x.dot(x2);
    case KernelKind::laplacian:
      return std::exp(-(x - x2).norm() / spec.scale());
    case KernelKind::trig2d: {
      if (x.size() != 2) throw InputError("trig2d kernel: objects must be two-dimensional");
      // |.| makes the evaluation exactly symmetric in its arguments.
      return std::cos(std::fabs(x(0) - x2(0))) + std::cos(std::fabs(x(1) - x2(1)));
    }
    case KernelKind::precomputed: {
      const Matrix& g = spec.gram();
      return g(detail::gram_index(g, x), detail::gram_index(g, x2));
    }
  }
  throw InputError("eval_kernel: unknown kernel kind");
}

// Gram matrix of the given objects (rows).  The upper triangle is computed
// and mirrored, so the result is exactly symmetric.
inline Matrix kernel_matrix(const KernelSpec& spec, const Matrix& objects) {
  const Eigen::Index n = objects.rows();
  if (n == 0) throw InputError("kernel_matrix: need at least one object");
  std::vector<Vector> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) rows.emplace_back(objects.row(i).transpose());
  Matrix K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      double v = eval_kernel(spec, rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

// k_i = K(x_i, test) for every training object, and kappa = K(test, test).
inline std::pair<Vector, double> kernel_vector(const KernelSpec& spec, const Matrix& objects,
                                               const Vector& test) {
  const Eigen::Index n = objects.rows();
  if (n == 0) throw InputError("kernel_vector: need at least one object");
  Vector k(n);
  for (Eigen::Index i = 0; i < n; ++i)
    k(i) = eval_kernel(spec, objects.row(i).transpose(), test);
  double kappa = eval_kernel(spec, test, test);
  return {std::move(k), kappa};
}

// True iff matrix + jitter*I admits a symmetric positive-definite
// factorization; used to vet precomputed kernels.
inline bool validate_psd(const Matrix& m, double jitter) {
  if (m.rows() != m.cols()) throw InputError("validate_psd: matrix must be square");
  if (!(jitter > 0.0)) throw InputError("validate_psd: jitter must be positive");
  Matrix shifted = m;
  shifted.diagonal().array() += jitter;
  return Eigen::LLT<Matrix>(shifted).info() == Eigen::Success;
}

}  // namespace krrpm
