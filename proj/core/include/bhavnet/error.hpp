#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bhavnet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes of operands do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Hyperparameter or run configuration is unusable.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Malformed embedding or pair file. Carries the 1-based line number when known.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EncodingError : public FormatError {
 public:
  using FormatError::FormatError;
};

class GraphError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class VocabularyError : public Error {
 public:
  explicit VocabularyError(const std::string& token)
      : Error("token not in vocabulary: '" + token + "'"), token_(token) {}
  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

// A function under evaluation produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace bhavnet
