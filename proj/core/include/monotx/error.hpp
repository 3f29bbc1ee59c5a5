#pragma once

#include <stdexcept>
#include <string>

namespace monotx {

// Thrown for malformed inputs: bad labels, shape mismatches, NaN logits,
// invalid graphs, unreadable files. `code()` is a stable machine-readable tag.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string code, const std::string &what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string &code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Thrown by brute-force oracles when an instance exceeds their hard guards.
// Oracles never truncate silently.
class OracleLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown by training when the loss becomes NaN.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int epoch, const std::string &what)
      : std::runtime_error(what), epoch_(epoch) {}

  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace monotx
