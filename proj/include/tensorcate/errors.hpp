#pragma once

#include <stdexcept>
#include <string>

namespace tensorcate {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical or identifiability failure. The CLI maps these to exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Bad input shape, bad config, malformed file. Exit code 1 or 2 depending on
/// the stage that raised it.
class InputError : public Error {
 public:
  using Error::Error;
};

class DegenerateSpectrum : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotPSD : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankDeficiency : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class AlignmentAmbiguity : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateCluster : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EmptyInput : public InputError {
 public:
  using InputError::InputError;
};

class DimensionMismatch : public InputError {
 public:
  using InputError::InputError;
};

class UnfittedModel : public InputError {
 public:
  using InputError::InputError;
};

class InvalidConfig : public InputError {
 public:
  using InputError::InputError;
};

class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

class IOError : public Error {
 public:
  using Error::Error;
};

}  // namespace tensorcate
