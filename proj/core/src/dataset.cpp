#include "monotx/dataset.hpp"

#include <random>
#include <string>

#include "monotx/error.hpp"

namespace monotx {

void check_spec(const SyntheticSpec &s) {
  auto bad = [](const std::string &what) {
    throw ValidationError("bad-dataset-spec", what);
  };
  if (s.vocab_size < 3) bad("need K >= 3 (blank + 2 labels)");
  if (s.blank_id < 0 || s.blank_id >= s.vocab_size) bad("blank outside [0,K)");
  if (s.feature_dim < s.vocab_size) bad("feature_dim must be >= K");
  if (s.num_items < 0) bad("num_items must be >= 0");
  if (s.min_labels < 0 || s.max_labels < s.min_labels) bad("bad label range");
  if (s.min_span < 2 || s.max_span < s.min_span) {
    bad("label spans must satisfy 2 <= min_span <= max_span");
  }
  if (s.gap_prob < 0.0 || s.gap_prob > 1.0) bad("gap_prob outside [0,1]");
  if (s.chain_prob < 0.0 || s.chain_prob > 1.0) bad("chain_prob outside [0,1]");
  if (s.noise < 0.0) bad("noise must be >= 0");
}

std::vector<Utterance> gen_synthetic(const SyntheticSpec &spec) {
  check_spec(spec);
  std::mt19937_64 rng(spec.seed);
  std::vector<int> symbols;
  for (int k = 0; k < spec.vocab_size; ++k) {
    if (k != spec.blank_id) symbols.push_back(k);
  }
  const int n_sym = static_cast<int>(symbols.size());
  std::uniform_int_distribution<int> pick_len(spec.min_labels, spec.max_labels);
  std::uniform_int_distribution<int> pick_sym(0, n_sym - 1);
  std::uniform_int_distribution<int> pick_span(spec.min_span, spec.max_span);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Utterance> out;
  out.reserve(spec.num_items);
  for (int item = 0; item < spec.num_items; ++item) {
    Utterance utt;
    utt.feature_dim = spec.feature_dim;
    const int U = pick_len(rng);
    int prev_index = -1;
    for (int l = 0; l < U; ++l) {
      int index = pick_sym(rng);
      if (prev_index >= 0 && coin(rng) < spec.chain_prob) {
        index = (prev_index + 1) % n_sym;
      }
      utt.labels.push_back(symbols[index]);
      prev_index = index;
    }

    // Frame-level symbol track: label spans, optional blank gaps.
    std::vector<int> track;
    for (int l = 0; l < U; ++l) {
      if (l > 0) {
        const bool repeat = utt.labels[l] == utt.labels[l - 1];
        if (repeat || coin(rng) < spec.gap_prob) track.push_back(spec.blank_id);
      }
      utt.alignment.push_back(static_cast<int>(track.size()) + 1);
      const int span = pick_span(rng);
      for (int i = 0; i < span; ++i) track.push_back(utt.labels[l]);
    }
    if (track.empty()) {
      for (int i = 0; i < spec.min_span; ++i) track.push_back(spec.blank_id);
    }

    utt.num_frames = static_cast<int>(track.size());
    utt.features.assign(track.size() * spec.feature_dim, 0.0);
    for (std::size_t n = 0; n < track.size(); ++n) {
      double *x = utt.features.data() + n * spec.feature_dim;
      x[track[n]] = 1.0;
      if (spec.noise > 0.0) {
        for (int f = 0; f < spec.feature_dim; ++f) x[f] += spec.noise * gauss(rng);
      }
    }
    out.push_back(std::move(utt));
  }
  return out;
}

std::vector<LabelSequence> label_corpus(const std::vector<Utterance> &data) {
  std::vector<LabelSequence> corpus;
  corpus.reserve(data.size());
  for (const auto &utt : data) corpus.push_back(utt.labels);
  return corpus;
}

}  // namespace monotx
