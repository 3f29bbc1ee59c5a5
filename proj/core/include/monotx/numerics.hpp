#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace monotx {

// ln 0. Exact zero probabilities are always -inf, never a large negative
// sentinel.
inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// ln(e^a + e^b) with the max-shift trick. -inf is the identity.
inline double log_add(double a, double b) noexcept {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

// Log-sum-exp over a range. Returns -inf for an empty or all -inf range.
double log_sum_exp(std::span<const double> values) noexcept;

// A log probability ln p, p in [0, 1]. Construction rejects NaN and
// positive values beyond rounding slack.
class LogProb {
 public:
  constexpr LogProb() = default;
  explicit LogProb(double value);

  static LogProb zero() { return LogProb(kLogZero); }
  static LogProb one() { return LogProb(0.0); }
  static LogProb from_prob(double p);

  double value() const noexcept { return value_; }
  double prob() const noexcept { return std::exp(value_); }
  bool is_zero() const noexcept { return value_ == kLogZero; }

  friend LogProb operator*(LogProb a, LogProb b) {
    return LogProb(a.value_ + b.value_);
  }
  friend bool operator==(LogProb a, LogProb b) = default;
  friend auto operator<=>(LogProb a, LogProb b) = default;

 private:
  double value_ = kLogZero;
};

inline LogProb log_add(LogProb a, LogProb b) {
  return LogProb(log_add(a.value(), b.value()));
}

// Normalizes each contiguous row of `row_size` logits by its log-sum-exp.
// Throws ValidationError on NaN or infinite input.
std::vector<double> log_softmax_rows(std::span<const double> logits,
                                     std::size_t row_size);

// Dense [T x (U+1) x K] table of joiner outputs. Frames are 0-based here:
// frame t in [0, T) is the (t+1)-th encoder step. Row (t, u) is the output
// distribution for encoder frame t combined with decoder state u.
//
// The log-probabilities are recomputed from the logits on construction, so
// two lattices with identical logits are identical.
class JoinerLattice {
 public:
  JoinerLattice(int frames, int labels, int vocab_size, int blank_id,
                std::vector<double> logits);

  // All-equal logits: every row is uniform over the K symbols.
  static JoinerLattice uniform(int frames, int labels, int vocab_size,
                               int blank_id = 0);

  int frames() const noexcept { return frames_; }
  // U, the reference length; there are U + 1 decoder rows.
  int labels() const noexcept { return labels_; }
  int rows() const noexcept { return labels_ + 1; }
  int vocab_size() const noexcept { return vocab_size_; }
  int blank_id() const noexcept { return blank_id_; }
  std::size_t size() const noexcept { return logits_.size(); }

  std::size_t index(int t, int u, int k) const noexcept {
    return (static_cast<std::size_t>(t) * rows() + u) * vocab_size_ + k;
  }

  double logprob(int t, int u, int k) const noexcept {
    return logprobs_[index(t, u, k)];
  }
  double logit(int t, int u, int k) const noexcept {
    return logits_[index(t, u, k)];
  }

  std::span<const double> logprob_row(int t, int u) const noexcept {
    return {logprobs_.data() + index(t, u, 0),
            static_cast<std::size_t>(vocab_size_)};
  }

  const std::vector<double> &logits() const noexcept { return logits_; }
  const std::vector<double> &logprobs() const noexcept { return logprobs_; }

  // Same shape and blank, new logits.
  JoinerLattice with_logits(std::vector<double> logits) const;

 private:
  int frames_;
  int labels_;
  int vocab_size_;
  int blank_id_;
  std::vector<double> logits_;
  std::vector<double> logprobs_;
};

}  // namespace monotx
