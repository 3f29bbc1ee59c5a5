#include <algorithm>
#include <cmath>
#include <limits>

#include "monotx/error.hpp"
#include "monotx/loss.hpp"

namespace monotx {

int ctc_min_frames(std::span<const int> labels) {
  int frames = static_cast<int>(labels.size());
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] == labels[i - 1]) ++frames;
  }
  return std::max(frames, 1);
}

CtcOutput ctc_loss(std::span<const double> logits, int frames, int vocab_size,
                   int blank_id, std::span<const int> labels) {
  if (frames < 1 || vocab_size < 2 ||
      logits.size() != static_cast<std::size_t>(frames) * vocab_size) {
    throw ValidationError("bad-shape", "CTC logits must be [T x K], T >= 1");
  }
  if (blank_id < 0 || blank_id >= vocab_size) {
    throw ValidationError("bad-blank", "blank id outside [0, K)");
  }
  check_labels(labels, vocab_size, blank_id);
  const std::vector<double> lp =
      log_softmax_rows(logits, static_cast<std::size_t>(vocab_size));

  // Extended sequence: b y1 b y2 ... yU b.
  const int U = static_cast<int>(labels.size());
  const int S = 2 * U + 1;
  std::vector<int> ext(S, blank_id);
  for (int i = 0; i < U; ++i) ext[2 * i + 1] = labels[i];
  auto obs = [&](int t, int s) {
    return lp[static_cast<std::size_t>(t) * vocab_size + ext[s]];
  };
  // A skip s-2 -> s exists for label states whose label differs from the
  // previous label.
  auto can_skip = [&](int s) {
    return s % 2 == 1 && s >= 3 && ext[s] != ext[s - 2];
  };

  const int T = frames;
  LogTable alpha(T, S);
  LogTable beta(T, S);
  alpha(0, 0) = obs(0, 0);
  if (S > 1) alpha(0, 1) = obs(0, 1);
  for (int t = 1; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = log_add(a, alpha(t - 1, s - 1));
      if (can_skip(s)) a = log_add(a, alpha(t - 1, s - 2));
      alpha(t, s) = a == kLogZero ? kLogZero : a + obs(t, s);
    }
  }
  beta(T - 1, S - 1) = obs(T - 1, S - 1);
  if (S > 1) beta(T - 1, S - 2) = obs(T - 1, S - 2);
  for (int t = T - 2; t >= 0; --t) {
    for (int s = 0; s < S; ++s) {
      double b = beta(t + 1, s);
      if (s + 1 < S) b = log_add(b, beta(t + 1, s + 1));
      if (s + 2 < S && can_skip(s + 2)) b = log_add(b, beta(t + 1, s + 2));
      beta(t, s) = b == kLogZero ? kLogZero : b + obs(t, s);
    }
  }

  double log_p = alpha(T - 1, S - 1);
  if (S > 1) log_p = log_add(log_p, alpha(T - 1, S - 2));

  CtcOutput out;
  out.grad_logits.assign(logits.size(), 0.0);
  out.posterior.assign(logits.size(), 0.0);
  if (log_p == kLogZero) {
    out.loss = std::numeric_limits<double>::infinity();
    out.feasible = false;
    return out;
  }
  out.loss = -log_p;
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      const double g = alpha(t, s) + beta(t, s) - obs(t, s) - log_p;
      if (g == kLogZero) continue;
      out.posterior[static_cast<std::size_t>(t) * vocab_size + ext[s]] +=
          std::exp(g);
    }
    for (int k = 0; k < vocab_size; ++k) {
      const std::size_t i = static_cast<std::size_t>(t) * vocab_size + k;
      out.grad_logits[i] = std::exp(lp[i]) - out.posterior[i];
    }
  }
  return out;
}

}  // namespace monotx
