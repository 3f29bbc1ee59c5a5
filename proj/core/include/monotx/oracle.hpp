#pragma once

#include <functional>
#include <span>
#include <vector>

#include "monotx/loss.hpp"
#include "monotx/numerics.hpp"
#include "monotx/scorer.hpp"
#include "monotx/topology.hpp"

// Brute-force references. Everything here is exponential and only meant for
// tiny instances in tests; hard limits throw OracleLimitError instead of
// approximating.
namespace monotx::oracle {

inline constexpr int kMaxFrames = 8;
inline constexpr std::size_t kMaxPaths = 1'000'000;

// A start -> end node sequence pi_0 .. pi_{T+1} with exactly T emitting
// steps.
struct AlignmentPath {
  std::vector<int> nodes;
  double logprob = 0.0;
};

// Depth-first expansion of every path of exactly `frames` emitting steps.
// Paths carry logprob 0.
std::vector<AlignmentPath> enumerate_alignments(const AlignmentGraph &graph,
                                                int frames);

// Same, scoring each path by the product of its edge observations.
std::vector<AlignmentPath> enumerate_alignments(const AlignmentGraph &graph,
                                                const JoinerLattice &lat);

// Labels of the non-blank nodes visited, with self-loop revisits emitting
// nothing.
LabelSequence collapse_alignment(const AlignmentPath &path,
                                 const AlignmentGraph &graph);

// -ln of the summed path probabilities; +inf for an empty path set.
double brute_force_loss(const AlignmentGraph &graph, const JoinerLattice &lat);

// References that never touch an AlignmentGraph: they enumerate all K^T
// frame-level symbol sequences and keep those the topology's transition
// rules map to `labels`. Frame t reads decoder row u = number of labels
// emitted before t (for CTC-T, a repeated label reads the row after its
// first emission).
double brute_force_frame_loss(Topology topology, const JoinerLattice &lat,
                              std::span<const int> labels);

// RNN-T by explicit enumeration of blank/label move sequences.
double brute_force_rnnt_loss(const JoinerLattice &lat,
                             std::span<const int> labels);

double brute_force_ar_rnnt_loss(const JoinerLattice &lat,
                                std::span<const int> labels,
                                const AlignmentBand &band);

// Plain CTC by enumerating all K^T frame sequences.
double brute_force_ctc_loss(std::span<const double> logits, int frames,
                            int vocab_size, int blank_id,
                            std::span<const int> labels);

// Central differences (f(x + eps) - f(x - eps)) / (2 eps) per coordinate.
std::vector<double> finite_diff_grad(
    const std::function<double(std::span<const double>)> &fn,
    std::span<const double> x, double eps);

// Convenience wrapper perturbing the lattice logits (log-probs recomputed).
std::vector<double> finite_diff_grad(
    const std::function<double(const JoinerLattice &)> &loss_fn,
    const JoinerLattice &lat, double eps);

// Denominator floor for relative errors of near-zero gradient entries.
inline constexpr double kRelativeErrorFloor = 1e-3;

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor).
double max_relative_error(std::span<const double> a, std::span<const double> b,
                          double floor = kRelativeErrorFloor);

enum class DecodeTopology { kCtcT, kMonoRnnT, kRnnT };

struct ExhaustiveResult {
  LabelSequence labels;
  double log_score = kLogZero;  // full-sum ln p(labels | X)
};

// Scores every label sequence of length <= max_labels by its full-sum
// probability and returns the best. Ties: higher score, then shorter, then
// lexicographically smaller. Limited to K <= 3, T <= 4, max_labels <= T.
ExhaustiveResult exhaustive_decode(const ModelScorer &scorer,
                                   DecodeTopology topology, int max_labels);

// Full-sum log probability of `labels` under the scorer and topology.
double full_sum_log_prob(const ModelScorer &scorer, DecodeTopology topology,
                         std::span<const int> labels);

}  // namespace monotx::oracle
