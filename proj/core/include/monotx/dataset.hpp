#pragma once

#include <cstdint>
#include <vector>

#include "monotx/topology.hpp"

namespace monotx {

// One synthetic utterance: N x F features (row-major), the reference and
// the 1-based first frame of each label's span.
struct Utterance {
  int num_frames = 0;
  int feature_dim = 0;
  std::vector<double> features;
  LabelSequence labels;
  std::vector<int> alignment;

  const double *frame(int n) const {
    return features.data() + static_cast<std::size_t>(n) * feature_dim;
  }
};

struct SyntheticSpec {
  int num_items = 100;
  int vocab_size = 5;  // including blank
  int blank_id = 0;
  int feature_dim = 5;  // >= vocab_size; first K dims carry the one-hot
  int min_labels = 2;
  int max_labels = 5;
  int min_span = 2;  // frames per label
  int max_span = 4;
  // Probability of a silent (blank) frame between two different labels;
  // equal neighbours are always separated by one.
  double gap_prob = 0.3;
  double noise = 0.5;  // Gaussian feature noise sigma
  // Probability that the next label follows the fixed successor chain
  // k -> k+1 instead of being drawn uniformly.
  double chain_prob = 0.0;
  std::uint64_t seed = 0;
};

// Throws ValidationError for K < 3, F < K, or inconsistent ranges.
void check_spec(const SyntheticSpec &spec);

// Deterministic in `spec.seed`. Every item satisfies U <= floor(N / 2) and
// strictly increasing alignments.
std::vector<Utterance> gen_synthetic(const SyntheticSpec &spec);

// Label sequences of a dataset, e.g. as an LM training corpus.
std::vector<LabelSequence> label_corpus(const std::vector<Utterance> &data);

}  // namespace monotx
