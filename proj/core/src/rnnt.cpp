#include <cmath>
#include <limits>

#include "monotx/error.hpp"
#include "monotx/loss.hpp"

namespace monotx {

namespace {

// Whether label y_{u+1} may be emitted from lattice point (t, u).
template <typename Allowed>
RnntTables forward_backward(const JoinerLattice &lat,
                            std::span<const int> labels, Allowed allowed) {
  const int T = lat.frames();
  const int U = static_cast<int>(labels.size());
  const int blank = lat.blank_id();
  auto blank_lp = [&](int t, int u) { return lat.logprob(t, u, blank); };
  auto label_lp = [&](int t, int u) {
    return allowed(t, u) ? lat.logprob(t, u, labels[u]) : kLogZero;
  };

  RnntTables tables{LogTable(T, U + 1), LogTable(T, U + 1), kLogZero};
  LogTable &alpha = tables.alpha;
  LogTable &beta = tables.beta;

  alpha(0, 0) = 0.0;
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      double a = (t == 0 && u == 0) ? 0.0 : kLogZero;
      if (t > 0) a = log_add(a, alpha(t - 1, u) + blank_lp(t - 1, u));
      if (u > 0) a = log_add(a, alpha(t, u - 1) + label_lp(t, u - 1));
      alpha(t, u) = a;
    }
  }

  for (int t = T - 1; t >= 0; --t) {
    for (int u = U; u >= 0; --u) {
      if (t == T - 1 && u == U) {
        beta(t, u) = blank_lp(t, u);
        continue;
      }
      double b = kLogZero;
      if (t < T - 1) b = log_add(b, beta(t + 1, u) + blank_lp(t, u));
      if (u < U) b = log_add(b, beta(t, u + 1) + label_lp(t, u));
      beta(t, u) = b;
    }
  }

  tables.log_likelihood = alpha(T - 1, U) + blank_lp(T - 1, U);
  return tables;
}

template <typename Allowed>
LossOutput loss_from_tables(const JoinerLattice &lat,
                            std::span<const int> labels, Allowed allowed) {
  const RnntTables tables = forward_backward(lat, labels, allowed);
  const int T = lat.frames();
  const int U = static_cast<int>(labels.size());
  const int K = lat.vocab_size();
  const int blank = lat.blank_id();
  const double log_p = tables.log_likelihood;

  LossOutput out;
  out.grad_logits.assign(lat.size(), 0.0);
  out.posterior.assign(lat.size(), 0.0);
  if (log_p == kLogZero) {
    out.loss = std::numeric_limits<double>::infinity();
    out.feasible = false;
    return out;
  }
  out.loss = -log_p;

  const LogTable &alpha = tables.alpha;
  const LogTable &beta = tables.beta;
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      const double a = alpha(t, u);
      if (a == kLogZero) continue;
      double after_blank = kLogZero;
      if (t < T - 1) {
        after_blank = beta(t + 1, u);
      } else if (u == U) {
        after_blank = 0.0;
      }
      if (after_blank != kLogZero) {
        out.posterior[lat.index(t, u, blank)] +=
            std::exp(a + lat.logprob(t, u, blank) + after_blank - log_p);
      }
      if (u < U && allowed(t, u) && beta(t, u + 1) != kLogZero) {
        out.posterior[lat.index(t, u, labels[u])] += std::exp(
            a + lat.logprob(t, u, labels[u]) + beta(t, u + 1) - log_p);
      }
    }
  }

  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      const std::size_t base = lat.index(t, u, 0);
      double occupancy = 0.0;
      for (int k = 0; k < K; ++k) occupancy += out.posterior[base + k];
      if (occupancy == 0.0) continue;
      for (int k = 0; k < K; ++k) {
        out.grad_logits[base + k] =
            std::exp(lat.logprobs()[base + k]) * occupancy -
            out.posterior[base + k];
      }
    }
  }
  return out;
}

void check_rnnt_inputs(const JoinerLattice &lat, std::span<const int> labels) {
  check_labels(labels, lat.vocab_size(), lat.blank_id());
  if (static_cast<int>(labels.size()) != lat.labels()) {
    throw ValidationError("shape-mismatch",
                          "lattice has U=" + std::to_string(lat.labels()) +
                              " but reference has " +
                              std::to_string(labels.size()) + " labels");
  }
}

constexpr auto kAlways = [](int, int) { return true; };

}  // namespace

RnntTables rnnt_forward_backward(const JoinerLattice &lat,
                                 std::span<const int> labels) {
  check_rnnt_inputs(lat, labels);
  return forward_backward(lat, labels, kAlways);
}

LossOutput rnnt_loss(const JoinerLattice &lat, std::span<const int> labels) {
  check_rnnt_inputs(lat, labels);
  return loss_from_tables(lat, labels, kAlways);
}

std::vector<double> rnnt_diagonal_totals(const JoinerLattice &lat,
                                         std::span<const int> labels) {
  const RnntTables tables = rnnt_forward_backward(lat, labels);
  const int T = lat.frames();
  const int U = static_cast<int>(labels.size());
  std::vector<double> totals(T + U, kLogZero);
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      totals[t + u] =
          log_add(totals[t + u], tables.alpha(t, u) + tables.beta(t, u));
    }
  }
  return totals;
}

void check_band(const AlignmentBand &band, int num_frames, int num_labels) {
  if (static_cast<int>(band.frames.size()) != num_labels) {
    throw ValidationError("bad-alignment",
                          "alignment needs one frame per label");
  }
  if (band.left < 0 || band.right < 0) {
    throw ValidationError("bad-alignment", "buffers must be non-negative");
  }
  for (std::size_t l = 0; l < band.frames.size(); ++l) {
    const int a = band.frames[l];
    if (a < 1 || a > num_frames) {
      throw ValidationError("bad-alignment",
                            "alignment frame " + std::to_string(a) +
                                " outside [1, T]");
    }
    if (l > 0 && a < band.frames[l - 1]) {
      throw ValidationError("bad-alignment", "alignment is not monotonic");
    }
  }
}

LossOutput ar_rnnt_loss(const JoinerLattice &lat, std::span<const int> labels,
                        const AlignmentBand &band) {
  check_rnnt_inputs(lat, labels);
  check_band(band, lat.frames(), lat.labels());
  auto in_band = [&band](int t, int u) {
    const int frame = t + 1;
    const int anchor = band.frames[u];
    return frame >= anchor - band.left && frame <= anchor + band.right;
  };
  return loss_from_tables(lat, labels, in_band);
}

}  // namespace monotx
