#pragma once

#include <span>
#include <vector>

#include "monotx/numerics.hpp"
#include "monotx/topology.hpp"

namespace monotx {

// Row-major table of log-domain values.
struct LogTable {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  LogTable() = default;
  LogTable(int r, int c)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, kLogZero) {}

  double &operator()(int r, int c) noexcept {
    return data[static_cast<std::size_t>(r) * cols + c];
  }
  double operator()(int r, int c) const noexcept {
    return data[static_cast<std::size_t>(r) * cols + c];
  }
};

// Result of a transducer loss. Tensors use the JoinerLattice layout.
struct LossOutput {
  // -ln p; +inf when the alignment set is empty.
  double loss = 0.0;
  // False iff the alignment set is empty (loss is +inf, gradient zero).
  bool feasible = true;
  // dLoss / dlogit(t, u, k).
  std::vector<double> grad_logits;
  // Expected number of emissions of symbol k from row (t, u).
  std::vector<double> posterior;
};

// ---- Graph losses (CTC-T, MonoRNN-T, or any validated monotonic graph) ----

// alpha(t, n) for t in [0, T] over all graph nodes. alpha(0, start) = 0 and
// alpha(T, end) = ln p(G | X).
LogTable gtct_forward(const AlignmentGraph &graph, const JoinerLattice &lat);

// beta(t, n): log mass of completing the path from node n after t frames.
// beta(T, end) = 0 and beta(0, start) = ln p(G | X).
LogTable gtct_backward(const AlignmentGraph &graph, const JoinerLattice &lat);

LossOutput gtct_loss(const AlignmentGraph &graph, const JoinerLattice &lat);

// For each frame t (1-based, returned at index t-1), the log of
//   sum over emitting edges (g, g') of alpha(t-1, g) * v * beta(t, g').
// Every entry equals ln p(G | X).
std::vector<double> gtct_step_totals(const AlignmentGraph &graph,
                                     const JoinerLattice &lat);

// ---- RNN-T over the square lattice ----

struct RnntTables {
  // alpha(t, u): mass of reaching lattice point (t, u), t in [0, T).
  LogTable alpha;
  // beta(t, u): mass of finishing from (t, u), including its emission;
  // beta(T-1, U) = ln blank(T-1, U).
  LogTable beta;
  double log_likelihood = kLogZero;
};

RnntTables rnnt_forward_backward(const JoinerLattice &lat,
                                 std::span<const int> labels);

LossOutput rnnt_loss(const JoinerLattice &lat, std::span<const int> labels);

// For each anti-diagonal n = t + u in [0, T - 1 + U], the log of
// sum_{t+u=n} alpha(t, u) * beta(t, u). Every entry equals ln p(Y | X).
std::vector<double> rnnt_diagonal_totals(const JoinerLattice &lat,
                                         std::span<const int> labels);

// Alignment-restricted RNN-T: label y_l may only be emitted at 1-based frame
// t with frames[l-1] - left <= t <= frames[l-1] + right.
struct AlignmentBand {
  std::vector<int> frames;
  int left = 0;
  int right = 0;
};

// Throws ValidationError if the band frames are not non-decreasing within
// [1, T] or buffers are negative.
void check_band(const AlignmentBand &band, int num_frames, int num_labels);

LossOutput ar_rnnt_loss(const JoinerLattice &lat, std::span<const int> labels,
                        const AlignmentBand &band);

// ---- Auxiliary CTC over encoder-only logits [T x K] ----

struct CtcOutput {
  double loss = 0.0;
  bool feasible = true;
  std::vector<double> grad_logits;  // [T x K]
  std::vector<double> posterior;    // [T x K]
};

CtcOutput ctc_loss(std::span<const double> logits, int frames, int vocab_size,
                   int blank_id, std::span<const int> labels);

// Frames needed by CTC: U plus the number of adjacent repeated labels.
int ctc_min_frames(std::span<const int> labels);

}  // namespace monotx
