#pragma once

#include <stdexcept>
#include <string>

namespace krrpm {

// Bad arguments, malformed files, dimension mismatches.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical breakdown that is impossible in exact arithmetic for a PSD
// kernel and a > 0; signals a corrupted or non-PSD kernel matrix.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The ordinary/deleted conformity difference stopped increasing in the
// candidate label (some B_i <= 0).  Carries the offending training index,
// 1-based as in the B_i numbering.
class MonotonicityError : public NumericError {
 public:
  MonotonicityError(const std::string& message, int index)
      : NumericError(message), index_(index) {}

  int index() const { return index_; }

 private:
  int index_;
};

}  // namespace krrpm
