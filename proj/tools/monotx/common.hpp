#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "monotx/topology.hpp"

namespace monotx::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kNumericCheck = 2 };

// Seed used when --seed is absent: $MONOTX_SEED, else 0.
std::uint64_t default_seed();

// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

// Labels from the command line: "a,b" / "ab" letters (a = 1, b = 2, ...) or
// comma-separated integers "1,2". The empty string is the empty sequence.
LabelSequence parse_labels(std::string_view text);
std::string format_labels(const LabelSequence &labels);

// What every command prints: the command's own fields plus provenance.
struct Report {
  std::string command;
  std::uint64_t seed = 0;
  // Effective configuration; its canonical dump is hashed.
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json result = nlohmann::json::object();
  int exit_code = kOk;

  nlohmann::json to_json() const;
};

// Raised when a numeric self-check (gradcheck, oracle check, acceptance)
// fails after the report is complete.
class NumericCheckFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void log(const std::string &line);

}  // namespace monotx::cli
