#pragma once

#include <stdexcept>
#include <string>

namespace hamlearn {

/// Requested size exceeds a configured cap (qubit count, dataset size).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed model description: wrong parameter-vector length, unknown family.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical input violates a physical invariant (non-Hermitian, bad trace).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tensor or sequence dimensions disagree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File content is truncated, unparseable or inconsistent with its header.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File declares a format_version this build does not read.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Cosine similarity requested for a vector with (near) zero norm.
class UndefinedSimilarityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace hamlearn
