#pragma once

#include <stdexcept>
#include <string>

namespace lrd {

// Two error families, matching the CLI exit codes: malformed or inconsistent
// inputs exit with 2, numerical failures with 3.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonSquareError : public InputError {
 public:
  using InputError::InputError;
};

// Input asymmetry beyond tolerance; usually a corrupted or truncated file.
class AsymmetricInputError : public InputError {
 public:
  using InputError::InputError;
};

class DimensionMismatchError : public InputError {
 public:
  using InputError::InputError;
};

class RankOutOfRangeError : public InputError {
 public:
  using InputError::InputError;
};

class InvalidDimsError : public InputError {
 public:
  using InputError::InputError;
};

class TooFewSamplesError : public InputError {
 public:
  using InputError::InputError;
};

class NotPsdError : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  using InputError::InputError;
};

// Eigensolver failed to reduce the off-diagonal within the sweep limit.
class NoConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ZeroDenominatorError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace lrd
