#pragma once

#include <stdexcept>
#include <string>

namespace ken {

// Failure taxonomy mirrored by the CLI exit codes: io/format/invalid -> 1,
// numerical -> 2.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem-level trouble: missing file, unreadable, short write.
struct io_error : error {
  using error::error;
};

// Content-level trouble: malformed CSV, bad magic, non-finite values.
struct format_error : error {
  using error::error;
};

// Precondition violations on in-memory inputs (dimension mismatch, bad
// parameter ranges).
struct invalid_input : error {
  using error::error;
};

// Numerical breakdown: joint kernel not PSD beyond tolerance, eigensolver
// non-convergence.
struct numerical_error : error {
  using error::error;
};

}  // namespace ken
