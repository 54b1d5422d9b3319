#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace citegraph {

// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad field, wrong shape, NaN, out-of-range parameter.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A record in an input file violated its schema.
class ParseError : public ValidationError {
 public:
  ParseError(std::string file, std::size_t line, std::string field, const std::string& what)
      : ValidationError(file + ":" + std::to_string(line) + ": field '" + field + "': " + what),
        file_(std::move(file)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string file_;
  std::size_t line_;
  std::string field_;
};

class DuplicateIdError : public ValidationError {
 public:
  DuplicateIdError(const std::string& id, std::size_t first_line, std::size_t second_line)
      : ValidationError("duplicate paper id '" + id + "' on lines " + std::to_string(first_line) +
                        " and " + std::to_string(second_line)),
        id_(id),
        first_line_(first_line),
        second_line_(second_line) {}

  const std::string& id() const noexcept { return id_; }
  std::size_t first_line() const noexcept { return first_line_; }
  std::size_t second_line() const noexcept { return second_line_; }

 private:
  std::string id_;
  std::size_t first_line_;
  std::size_t second_line_;
};

class UnresolvedFocalError : public ValidationError {
 public:
  explicit UnresolvedFocalError(const std::string& focal)
      : ValidationError("reference list focal '" + focal + "' has no paper record"), focal_(focal) {}
  const std::string& focal() const noexcept { return focal_; }

 private:
  std::string focal_;
};

class DimensionMismatchError : public ValidationError {
 public:
  DimensionMismatchError(const std::string& id, std::size_t expected, std::size_t got)
      : ValidationError("embedding '" + id + "' has length " + std::to_string(got) + ", expected " +
                        std::to_string(expected)),
        id_(id) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class DegenerateGraphError : public Error {
 public:
  using Error::Error;
};

class DegenerateLabelsError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (last residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class StratumInfeasibleError : public Error {
 public:
  explicit StratumInfeasibleError(const std::string& stratum)
      : Error("no valid reference assignment exists for stratum '" + stratum + "'"), stratum_(stratum) {}
  const std::string& stratum() const noexcept { return stratum_; }

 private:
  std::string stratum_;
};

class MissingEmbeddingError : public Error {
 public:
  explicit MissingEmbeddingError(const std::string& id)
      : Error("no embedding for '" + id + "'"), id_(id) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

class TrainingFailure : public Error {
 public:
  TrainingFailure(const std::string& what, int epoch)
      : Error(what + " at epoch " + std::to_string(epoch)), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

class NoSuccessfulTrialError : public Error {
 public:
  using Error::Error;
};

}  // namespace citegraph
