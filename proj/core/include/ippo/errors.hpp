#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ippo {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed scenario or config text. `line` is 1-based.
struct ParseError : Error {
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

/// Well-formed input that violates a domain invariant.
struct ValidationError : Error {
  using Error::Error;
};

/// Tensor or network shape mismatch.
struct ShapeError : Error {
  using Error::Error;
};

/// Corrupt, truncated or incompatible checkpoint file.
struct CheckpointError : Error {
  using Error::Error;
};

/// Non-finite loss or similar unrecoverable numerical failure.
struct NumericalError : Error {
  using Error::Error;
};

}  // namespace ippo
