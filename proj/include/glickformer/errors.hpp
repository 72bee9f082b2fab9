#pragma once

#include <stdexcept>
#include <string>

namespace glick {

/// Malformed textual input: FEN fields, UCI moves, CSV rows, config files.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Structurally valid input that cannot be processed (bad move replay,
/// schema violations, empty datasets, unreadable files).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Tensor shape mismatch between operands.
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// NaN/Inf encountered where a finite value is required.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace glick
