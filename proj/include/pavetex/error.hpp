#pragma once

#include <stdexcept>
#include <string>

namespace pavetex {

/// Broad failure category. Maps one-to-one onto CLI exit codes.
enum class ErrorKind {
  kUsage = 1,        // bad parameters or flags
  kData = 2,         // unreadable/invalid input data
  kComputation = 3,  // numerically degenerate input for an algorithm
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error usage_error(const std::string& message) {
  return Error(ErrorKind::kUsage, message);
}
inline Error data_error(const std::string& message) {
  return Error(ErrorKind::kData, message);
}
inline Error computation_error(const std::string& message) {
  return Error(ErrorKind::kComputation, message);
}

/// An error raised inside one pipeline stage, tagged with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, ErrorKind kind, const std::string& message)
      : Error(kind, stage + ": " + message), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace pavetex
