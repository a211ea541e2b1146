#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "krrpm/errors.hpp"
#include "krrpm/ridge.hpp"

namespace krrpm {

// Residual-scaling variants of the prediction machine.  The conformity score
// of an observation is its full-sequence ridge residual divided by
// (1 - hbar_i)^p with
//
//   ordinary     p = 0
//   studentized  p = 1/2   (the only variant with guaranteed monotonicity)
//   deleted      p = 1
enum class Variant { studentized, ordinary, deleted };

inline double residual_scaling_exponent(Variant v) {
  switch (v) {
    case Variant::ordinary: return 0.0;
    case Variant::studentized: return 0.5;
    case Variant::deleted: return 1.0;
  }
  throw InputError("unknown variant");
}

inline std::string variant_name(Variant v) {
  switch (v) {
    case Variant::ordinary: return "ordinary";
    case Variant::studentized: return "studentized";
    case Variant::deleted: return "deleted";
  }
  throw InputError("unknown variant");
}

inline Variant variant_from_string(const std::string& name) {
  if (name == "studentized") return Variant::studentized;
  if (name == "ordinary") return Variant::ordinary;
  if (name == "deleted") return Variant::deleted;
  throw InputError("unknown variant: " + name);
}

namespace detail {

inline double leverage_scale(double one_minus_h, Variant v) {
  switch (v) {
    case Variant::ordinary: return 1.0;
    case Variant::studentized: return std::sqrt(one_minus_h);
    case Variant::deleted: return one_minus_h;
  }
  throw InputError("unknown variant");
}

// Critical values are rounded to 12 significant digits before sorting and
// grouping, so float noise cannot split genuinely tied values (e.g. from
// duplicated training observations).
inline double round_12_significant(double v) {
  if (v == 0.0) return 0.0;
  double expo = std::floor(std::log10(std::fabs(v)));
  if (expo < -250.0) return v;
  double mag = std::pow(10.0, 11.0 - expo);
  return std::round(v * mag) / mag;
}

}  // namespace detail

// The predictive distribution: sorted critical values C_(1) <= ... <= C_(n)
// and the step-function evaluation
//
//   Q(y, tau) = (i + tau) / (n+1)                       y in (C_(i), C_(i+1))
//   Q(y, tau) = (i' - 1 + tau (i'' - i' + 2)) / (n+1)   y = C_(i)
//
// with C_(0) = -inf, C_(n+1) = +inf, and i', i'' the first and last sorted
// positions of the tie group containing C_(i).
class ConformalDistribution {
 public:
  ConformalDistribution(Vector critical_values, Variant variant)
      : c_sorted_(std::move(critical_values)), variant_(variant) {
    if (c_sorted_.size() == 0)
      throw InputError("ConformalDistribution: need at least one critical value");
    for (Eigen::Index i = 0; i < c_sorted_.size(); ++i) {
      if (!std::isfinite(c_sorted_(i)))
        throw NumericError("ConformalDistribution: non-finite critical value");
      c_sorted_(i) = detail::round_12_significant(c_sorted_(i));
    }
    std::sort(c_sorted_.data(), c_sorted_.data() + c_sorted_.size());
  }

  // Rebuild from already-sorted values (e.g. a JSON reload); no re-rounding,
  // so serialization round-trips bit-exactly.
  static ConformalDistribution from_sorted(Vector c_sorted, Variant variant) {
    ConformalDistribution d(sorted_tag{}, std::move(c_sorted), variant);
    if (d.c_sorted_.size() == 0)
      throw InputError("ConformalDistribution: need at least one critical value");
    for (Eigen::Index i = 0; i + 1 < d.c_sorted_.size(); ++i)
      if (!(d.c_sorted_(i) <= d.c_sorted_(i + 1)))
        throw InputError("ConformalDistribution: critical values are not sorted");
    return d;
  }

  const Vector& critical_values() const { return c_sorted_; }
  int n() const { return static_cast<int>(c_sorted_.size()); }
  Variant variant() const { return variant_; }

  // (number of critical values strictly below y, number equal to y).
  std::pair<int, int> counts(double y) const {
    const double* b = c_sorted_.data();
    const double* e = b + c_sorted_.size();
    const double* lo = std::lower_bound(b, e, y);
    const double* hi = std::upper_bound(lo, e, y);
    return {static_cast<int>(lo - b), static_cast<int>(hi - lo)};
  }

 private:
  struct sorted_tag {};
  ConformalDistribution(sorted_tag, Vector c, Variant v)
      : c_sorted_(std::move(c)), variant_(v) {}

  Vector c_sorted_;
  Variant variant_;
};

inline double eval_distribution(const ConformalDistribution& dist, double y, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw InputError("eval_distribution: tau must be in [0, 1]");
  auto [below, equal] = dist.counts(y);
  // Both cases of the step function collapse to (below + tau (equal+1))/(n+1);
  // the +1 is the candidate's own score, which always ties with itself.
  return (below + tau * (equal + 1)) / (dist.n() + 1.0);
}

// Smallest y with Q(y, tau) >= level; the left endpoint of the step that
// reaches `level`.  Returns -inf / +inf when the level is met before the
// first critical value / never met.
inline double quantile(const ConformalDistribution& dist, double level, double tau) {
  if (!(level > 0.0 && level < 1.0)) throw InputError("quantile: level must be in (0, 1)");
  if (!(tau >= 0.0 && tau <= 1.0)) throw InputError("quantile: tau must be in [0, 1]");
  const Vector& c = dist.critical_values();
  const int n = dist.n();
  const double denom = n + 1.0;
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (tau / denom >= level) return -inf;
  int i = 0;
  while (i < n) {
    auto [below, equal] = dist.counts(c(i));
    if ((below + tau * (equal + 1)) / denom >= level) return c(i);
    if ((below + equal + tau) / denom >= level) return c(i);  // reached on the open interval
    i = below + equal;  // skip the tie group
  }
  return inf;
}

// Coefficients (A_i, B_i) of the linear crossings alpha_{n+1}^y - alpha_i^y
// = B_i y - A_i, expressed through training-only quantities:
//
//   A_i = ad yhat_test / s  +  (y_i - yhat_i + ad yhat_test m_i) / s_i
//   B_i = ad / s            +  ad m_i / s_i
//
// where s = scale(ad), s_i = scale(1 - hbar_i) and scale(.) raises to the
// variant's exponent p.  Costs O(n) given the LeverageTerms.
inline std::pair<Vector, Vector> conformity_line_coefficients(const FitState& fs,
                                                              const LeverageTerms& lt,
                                                              Variant variant) {
  const int n = fs.n();
  const double s_test = detail::leverage_scale(lt.ad, variant);
  Vector A(n), B(n);
  for (int i = 0; i < n; ++i) {
    double s_i = detail::leverage_scale(lt.one_minus_h(i), variant);
    A(i) = lt.ad * lt.bayes_mean / s_test +
           (fs.labels(i) - fs.train_predictions(i) + lt.ad * lt.bayes_mean * lt.m(i)) / s_i;
    B(i) = lt.ad / s_test + lt.ad * lt.m(i) / s_i;
  }
  return {std::move(A), std::move(B)};
}

// Studentized (A_i, B_i), exposed for testing; every B_i is provably > 0.
inline std::pair<Vector, Vector> studentized_line_terms(const FitState& fs, const Vector& test) {
  return conformity_line_coefficients(fs, leverage_terms(fs, test), Variant::studentized);
}

// The fast prediction path: one M*k product, O(n) coefficient assembly and
// an O(n log n) sort.
inline ConformalDistribution krrpm_predict(const FitState& fs, const Vector& test,
                                           Variant variant) {
  LeverageTerms lt = leverage_terms(fs, test);
  auto [A, B] = conformity_line_coefficients(fs, lt, variant);
  const int n = fs.n();
  Vector c(n);
  for (int i = 0; i < n; ++i) {
    if (!(B(i) > 1e-12)) {
      if (variant == Variant::studentized)
        throw NumericError(
            "krrpm_predict: studentized B_" + std::to_string(i + 1) + " = " +
            std::to_string(B(i)) +
            " contradicts its positivity guarantee; kernel matrix is corrupt");
      throw MonotonicityError("krrpm_predict (" + variant_name(variant) +
                                  "): non-monotone conformity difference at training index " +
                                  std::to_string(i + 1) + " (B = " + std::to_string(B(i)) + ")",
                              i + 1);
    }
    c(i) = A(i) / B(i);
  }
  return ConformalDistribution(std::move(c), variant);
}

// ---- Brute-force conformal oracle ------------------------------------------
//
// Everything below recomputes conformity scores from scratch via the full
// (n+1)-point hat matrix.  O(n^3) per query; test oracle only.

// Conformity scores of all rows of (objects, labels) with the last row
// playing the test-observation role: alpha_i = (y_i - (H Y)_i) scaled by the
// variant's leverage factor.
inline Vector conformity_scores(const Matrix& objects, const Vector& labels, Variant variant,
                                const KernelSpec& kernel, double a) {
  if (objects.rows() != labels.size())
    throw InputError("conformity_scores: objects/labels length mismatch");
  Matrix H = hat_matrix_full(objects, kernel, a);
  Vector fitted = H * labels;
  Vector alpha(labels.size());
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    double omh = 1.0 - H(i, i);
    if (!(omh > 0.0))
      throw NumericError("conformity_scores: leverage >= 1 at index " + std::to_string(i + 1));
    alpha(i) = (labels(i) - fitted(i)) / detail::leverage_scale(omh, variant);
  }
  return alpha;
}

struct OracleCounts {
  int below = 0;  // scores strictly below the candidate's own score
  int tied = 0;   // scores equal to it (at least 1: the candidate itself)
};

inline OracleCounts slow_oracle_counts(const Matrix& objects, const Vector& labels,
                                       const Vector& test, double y, Variant variant,
                                       const KernelSpec& kernel, double a) {
  const Eigen::Index n = objects.rows();
  if (n == 0) throw InputError("slow_oracle: empty training set");
  Matrix all(n + 1, objects.cols());
  all.topRows(n) = objects;
  all.row(n) = test.transpose();
  Vector ally(n + 1);
  ally.head(n) = labels;
  ally(n) = y;
  Vector alpha = conformity_scores(all, ally, variant, kernel, a);
  OracleCounts counts;
  const double ref = alpha(n);
  for (Eigen::Index i = 0; i <= n; ++i) {
    if (alpha(i) < ref)
      ++counts.below;
    else if (alpha(i) == ref)
      ++counts.tied;
  }
  return counts;
}

inline double slow_oracle_Q(const Matrix& objects, const Vector& labels, const Vector& test,
                            double y, double tau, Variant variant, const KernelSpec& kernel,
                            double a) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw InputError("slow_oracle_Q: tau must be in [0, 1]");
  OracleCounts counts = slow_oracle_counts(objects, labels, test, y, variant, kernel, a);
  return (counts.below + tau * counts.tied) / (objects.rows() + 1.0);
}

}  // namespace krrpm
