#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace agler {

enum class ErrorCode {
  invalid_input,
  invalid_kernel,
  precondition_violated,
  degenerate_compression,
  unbounded_multiplier,
  numerical_failure,
  extension_failure,
  degenerate_point,
  fit_failure,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Failed rank-one fit; carries the per-theta residual profile for diagnosis.
class FitFailure : public Error {
 public:
  FitFailure(const std::string& message,
             std::vector<std::pair<double, double>> profile)
      : Error(ErrorCode::fit_failure, message), profile_(std::move(profile)) {}

  const std::vector<std::pair<double, double>>& profile() const {
    return profile_;
  }

 private:
  std::vector<std::pair<double, double>> profile_;
};

}  // namespace agler
