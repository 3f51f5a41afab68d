#pragma once
#include <stdexcept>
#include <string>

namespace fqa {

/// Precondition or argument-contract violation.
struct argument_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// File could not be opened, read or written; message carries the path.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File opened but its contents are not in a supported format.
struct format_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input carries no usable signal (e.g. unit-sum normalization of an
/// all-zero profile, a textureless corpus).
struct degenerate_input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Optimizer update failed; batch_index points at the offending sample
/// when known, -1 otherwise.
struct training_error : std::runtime_error {
  explicit training_error(const std::string& what, int batch = -1)
      : std::runtime_error(what), batch_index(batch) {}
  int batch_index = -1;
};

/// Estimation could not produce a result.
struct estimation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fqa
