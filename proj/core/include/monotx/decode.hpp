#pragma once

#include <optional>
#include <vector>

#include "monotx/ngram.hpp"
#include "monotx/scorer.hpp"
#include "monotx/topology.hpp"

namespace monotx {

struct DecodeConfig {
  int beam_size = 10;
  // Shallow-fusion weight; ignored when no language model is supplied.
  double lm_weight = 0.3;
  // RNN-T only: label expansions allowed within one frame. Unset means
  // unlimited, guarded by the runaway cap.
  std::optional<int> max_emits_per_step;
  double length_reward = 0.0;
};

// Throws ValidationError for beam_size < 1, negative lm_weight or a
// negative emission cap.
void check_config(const DecodeConfig &cfg);

struct Hypothesis {
  LabelSequence prefix;
  // Transducer log score of the prefix, merged over all its alignments.
  double am_score = 0.0;
  double lm_score = 0.0;
  // Frame of the most recent label emission, -1 if none.
  int last_emit_t = -1;
  // Score vectors consumed along each merged alignment (monotonic search).
  int frames_consumed = 0;

  int decoder_state() const noexcept { return static_cast<int>(prefix.size()); }
};

// Pruning score: am + lm_weight * lm + length_reward * |prefix|.
double combined_score(const Hypothesis &hyp, const DecodeConfig &cfg);

struct DecodeResult {
  // Sorted best-first: higher combined score, then shorter prefix, then
  // lexicographically smaller prefix.
  std::vector<Hypothesis> nbest;
  // Synchronous frame steps completed.
  int frames = 0;
  // Scorer evaluations issued.
  long score_calls = 0;
  // Largest number of labels any kept hypothesis emitted within one frame.
  int max_emits_in_frame = 0;
  // RNN-T only: the 10*T emission cap aborted the utterance.
  bool runaway = false;

  const Hypothesis &best() const { return nbest.front(); }
};

// Runaway cap for RNN-T decoding: total emissions per utterance.
inline int runaway_cap(int frames) { return 10 * frames; }

// Time-synchronous search for the monotonic topologies. Each step every
// hypothesis consumes one score vector and either stays (blank, or a CTC-T
// repeat of its last label) or grows by one label.
DecodeResult beam_search_monotonic(const ModelScorer &scorer, Topology topology,
                                   const DecodeConfig &cfg,
                                   const LanguageModel *lm = nullptr);

// Time-synchronous RNN-T search: within a frame hypotheses may emit several
// labels before taking the blank that advances time. Expansion stops when
// no expanding hypothesis can enter the beam of blank-terminated ones, at
// cfg.max_emits_per_step, or at the runaway cap.
DecodeResult beam_search_rnnt(const ModelScorer &scorer, const DecodeConfig &cfg,
                              const LanguageModel *lm = nullptr);

// Argmax decoding: per frame keep emitting the best label while it beats the
// blank. Honors max_emits_per_step and the runaway cap.
DecodeResult greedy_rnnt(const ModelScorer &scorer, const DecodeConfig &cfg);

// Greedy monotonic decoding is beam_search_monotonic with beam 1.
DecodeResult greedy_monotonic(const ModelScorer &scorer, Topology topology);

}  // namespace monotx
