#include "monotx/numerics.hpp"

#include <algorithm>
#include <string>

#include "monotx/error.hpp"

namespace monotx {

double log_sum_exp(std::span<const double> values) noexcept {
  double max = kLogZero;
  for (double v : values) max = std::max(max, v);
  if (max == kLogZero) return kLogZero;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

LogProb::LogProb(double value) : value_(value) {
  if (std::isnan(value)) {
    throw ValidationError("nan-logprob", "log probability is NaN");
  }
  // Sums of log-probabilities can land a few ulps above zero.
  if (value > 1e-9) {
    throw ValidationError("positive-logprob",
                          "log probability " + std::to_string(value) + " > 0");
  }
  if (value > 0.0) value_ = 0.0;
}

LogProb LogProb::from_prob(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError("bad-probability",
                          "probability out of [0,1]: " + std::to_string(p));
  }
  return LogProb(p == 0.0 ? kLogZero : std::log(p));
}

std::vector<double> log_softmax_rows(std::span<const double> logits,
                                     std::size_t row_size) {
  if (row_size == 0 || logits.size() % row_size != 0) {
    throw ValidationError("bad-shape", "logit count is not a multiple of K");
  }
  std::vector<double> out(logits.size());
  for (std::size_t base = 0; base < logits.size(); base += row_size) {
    auto row = logits.subspan(base, row_size);
    double max = -std::numeric_limits<double>::infinity();
    for (double v : row) {
      if (std::isnan(v)) {
        throw ValidationError("nan-logit",
                              "NaN logit at offset " + std::to_string(base));
      }
      if (!std::isfinite(v)) {
        throw ValidationError("non-finite-logit", "infinite logit at offset " +
                                                      std::to_string(base));
      }
      max = std::max(max, v);
    }
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - max);
    const double lse = max + std::log(sum);
    for (std::size_t k = 0; k < row_size; ++k) out[base + k] = row[k] - lse;
  }
  return out;
}

JoinerLattice::JoinerLattice(int frames, int labels, int vocab_size,
                             int blank_id, std::vector<double> logits)
    : frames_(frames),
      labels_(labels),
      vocab_size_(vocab_size),
      blank_id_(blank_id),
      logits_(std::move(logits)) {
  if (frames_ < 1) throw ValidationError("bad-shape", "lattice needs T >= 1");
  if (labels_ < 0) throw ValidationError("bad-shape", "lattice needs U >= 0");
  if (vocab_size_ < 2) {
    throw ValidationError("bad-shape", "lattice needs K >= 2");
  }
  if (blank_id_ < 0 || blank_id_ >= vocab_size_) {
    throw ValidationError("bad-blank", "blank id outside [0, K)");
  }
  const std::size_t expected = static_cast<std::size_t>(frames_) * rows() *
                               static_cast<std::size_t>(vocab_size_);
  if (logits_.size() != expected) {
    throw ValidationError("bad-shape",
                          "expected " + std::to_string(expected) +
                              " logits, got " + std::to_string(logits_.size()));
  }
  logprobs_ = log_softmax_rows(logits_, static_cast<std::size_t>(vocab_size_));
}

JoinerLattice JoinerLattice::uniform(int frames, int labels, int vocab_size,
                                     int blank_id) {
  const std::size_t n = static_cast<std::size_t>(std::max(frames, 0)) *
                        static_cast<std::size_t>(std::max(labels + 1, 0)) *
                        static_cast<std::size_t>(std::max(vocab_size, 0));
  return JoinerLattice(frames, labels, vocab_size, blank_id,
                       std::vector<double>(n, 0.0));
}

JoinerLattice JoinerLattice::with_logits(std::vector<double> logits) const {
  return JoinerLattice(frames_, labels_, vocab_size_, blank_id_,
                       std::move(logits));
}

}  // namespace monotx
