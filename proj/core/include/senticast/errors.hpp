#pragma once

#include <stdexcept>
#include <string>

namespace senticast {

// Error taxonomy mirrored by the CLI exit codes:
// validation/schema -> 2, runtime/divergence -> 3, I/O -> 4.

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file does not match its documented schema.
class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int epoch)
      : std::runtime_error(what), epoch(epoch) {}
  int epoch;
};

// Regression design matrix is rank deficient.
class SingularDesignError : public std::runtime_error {
 public:
  explicit SingularDesignError(const std::string& what, int column = -1)
      : std::runtime_error(what), column(column) {}
  int column;  // offending column of the design matrix, -1 if unknown
};

}  // namespace senticast
