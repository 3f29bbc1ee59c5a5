#include "monotx/decode.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "monotx/error.hpp"

namespace monotx {

std::vector<double> LatticeScorer::score(int t,
                                         std::span<const int> prefix) const {
  const int u = std::min<int>(static_cast<int>(prefix.size()), lattice_.labels());
  const auto row = lattice_.logprob_row(t, u);
  return {row.begin(), row.end()};
}

FunctionScorer adversarial_scorer(int frames, int vocab_size, int blank_id,
                                  double margin) {
  std::vector<double> logits(vocab_size, 0.0);
  const int favored = blank_id == 0 ? 1 : 0;
  logits[favored] = margin;
  std::vector<double> row = log_softmax_rows(logits, logits.size());
  return FunctionScorer(frames, vocab_size, blank_id,
                        [row](int, std::span<const int>) { return row; });
}

JoinerLattice lattice_for_reference(const ModelScorer &scorer,
                                    std::span<const int> labels) {
  const int T = scorer.frames();
  const int U = static_cast<int>(labels.size());
  const int K = scorer.vocab_size();
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(T) * (U + 1) * K);
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      const auto row = scorer.score(t, labels.first(u));
      values.insert(values.end(), row.begin(), row.end());
    }
  }
  return JoinerLattice(T, U, K, scorer.blank_id(), std::move(values));
}

void check_config(const DecodeConfig &cfg) {
  if (cfg.beam_size < 1) {
    throw ValidationError("bad-config", "beam_size must be >= 1");
  }
  if (cfg.lm_weight < 0.0) {
    throw ValidationError("bad-config", "lm_weight must be >= 0");
  }
  if (cfg.max_emits_per_step && *cfg.max_emits_per_step < 0) {
    throw ValidationError("bad-config", "max_emits_per_step must be >= 0");
  }
}

double combined_score(const Hypothesis &hyp, const DecodeConfig &cfg) {
  return hyp.am_score + cfg.lm_weight * hyp.lm_score +
         cfg.length_reward * static_cast<double>(hyp.prefix.size());
}

namespace {

bool ranks_before(const Hypothesis &a, const Hypothesis &b,
                  const DecodeConfig &cfg) {
  const double sa = combined_score(a, cfg);
  const double sb = combined_score(b, cfg);
  if (sa != sb) return sa > sb;
  if (a.prefix.size() != b.prefix.size()) {
    return a.prefix.size() < b.prefix.size();
  }
  return a.prefix < b.prefix;
}

void sort_and_prune(std::vector<Hypothesis> &hyps, const DecodeConfig &cfg,
                    std::size_t keep) {
  std::sort(hyps.begin(), hyps.end(),
            [&cfg](const Hypothesis &a, const Hypothesis &b) {
              return ranks_before(a, b, cfg);
            });
  if (hyps.size() > keep) hyps.resize(keep);
}

std::vector<int> non_blank_symbols(const ModelScorer &scorer) {
  std::vector<int> out;
  for (int k = 0; k < scorer.vocab_size(); ++k) {
    if (k != scorer.blank_id()) out.push_back(k);
  }
  return out;
}

double lm_term(const LanguageModel *lm, std::span<const int> prefix, int next) {
  return lm == nullptr ? 0.0 : lm->score(prefix, next);
}

// Prefix state of the monotonic search. CTC-T needs to know whether the
// last frame emitted the prefix's final label (a repeat then continues the
// same token) or a blank (a repeat starts a new token).
struct MonoState {
  double ends_blank = kLogZero;
  double ends_label = kLogZero;
  double lm = 0.0;
  int last_emit_t = -1;
  int frames = 0;

  double am() const { return log_add(ends_blank, ends_label); }
};

}  // namespace

DecodeResult beam_search_monotonic(const ModelScorer &scorer, Topology topology,
                                   const DecodeConfig &cfg,
                                   const LanguageModel *lm) {
  check_config(cfg);
  const int T = scorer.frames();
  const int blank = scorer.blank_id();
  const std::vector<int> symbols = non_blank_symbols(scorer);
  const bool ctct = topology == Topology::kCtcT;

  DecodeResult result;
  std::map<LabelSequence, MonoState> beam;
  beam[{}] = MonoState{0.0, kLogZero, 0.0, -1, 0};

  for (int t = 0; t < T; ++t) {
    std::map<LabelSequence, MonoState> next;
    for (const auto &[prefix, st] : beam) {
      const std::vector<double> row = scorer.score(t, prefix);
      ++result.score_calls;
      const double total = st.am();

      MonoState &stay = next[prefix];
      stay.lm = st.lm;
      stay.frames = st.frames + 1;
      stay.last_emit_t = std::max(stay.last_emit_t, st.last_emit_t);
      stay.ends_blank = log_add(stay.ends_blank, total + row[blank]);
      if (ctct && !prefix.empty() && st.ends_label != kLogZero) {
        stay.ends_label =
            log_add(stay.ends_label, st.ends_label + row[prefix.back()]);
      }

      LabelSequence extended = prefix;
      extended.push_back(0);
      for (int c : symbols) {
        double from = total;
        if (ctct && !prefix.empty() && c == prefix.back()) from = st.ends_blank;
        if (from == kLogZero) continue;
        extended.back() = c;
        MonoState &grow = next[extended];
        grow.lm = st.lm + lm_term(lm, prefix, c);
        grow.frames = st.frames + 1;
        grow.last_emit_t = t;
        grow.ends_label = log_add(grow.ends_label, from + row[c]);
        result.max_emits_in_frame = 1;
      }
    }

    std::vector<Hypothesis> ranked;
    ranked.reserve(next.size());
    for (const auto &[prefix, st] : next) {
      ranked.push_back({prefix, st.am(), st.lm, st.last_emit_t, st.frames});
    }
    sort_and_prune(ranked, cfg, static_cast<std::size_t>(cfg.beam_size));
    beam.clear();
    for (const auto &h : ranked) beam.emplace(h.prefix, next.at(h.prefix));
    result.frames = t + 1;
  }

  for (const auto &[prefix, st] : beam) {
    result.nbest.push_back({prefix, st.am(), st.lm, st.last_emit_t, st.frames});
  }
  sort_and_prune(result.nbest, cfg, result.nbest.size());
  return result;
}

DecodeResult greedy_monotonic(const ModelScorer &scorer, Topology topology) {
  DecodeConfig cfg;
  cfg.beam_size = 1;
  return beam_search_monotonic(scorer, topology, cfg);
}

namespace {

// Merges `hyp` into `into` keyed by prefix (log-add of am scores).
void merge_into(std::map<LabelSequence, Hypothesis> &into, Hypothesis hyp) {
  auto [it, inserted] = into.try_emplace(hyp.prefix, hyp);
  if (!inserted) {
    it->second.am_score = log_add(it->second.am_score, hyp.am_score);
    it->second.last_emit_t = std::max(it->second.last_emit_t, hyp.last_emit_t);
  }
}

std::vector<Hypothesis> values_of(std::map<LabelSequence, Hypothesis> &m) {
  std::vector<Hypothesis> out;
  out.reserve(m.size());
  for (auto &[prefix, hyp] : m) out.push_back(std::move(hyp));
  return out;
}

}  // namespace

DecodeResult beam_search_rnnt(const ModelScorer &scorer, const DecodeConfig &cfg,
                              const LanguageModel *lm) {
  check_config(cfg);
  const int T = scorer.frames();
  const int blank = scorer.blank_id();
  const std::vector<int> symbols = non_blank_symbols(scorer);
  const std::size_t beam_size = static_cast<std::size_t>(cfg.beam_size);
  const int cap = runaway_cap(T);

  DecodeResult result;
  std::vector<Hypothesis> beam{Hypothesis{}};

  for (int t = 0; t < T; ++t) {
    std::map<LabelSequence, Hypothesis> ended;  // took the blank at frame t
    std::vector<Hypothesis> expanding = beam;
    int emits = 0;
    while (!expanding.empty()) {
      const bool may_emit =
          !cfg.max_emits_per_step || emits < *cfg.max_emits_per_step;
      std::map<LabelSequence, Hypothesis> grown;
      for (const Hypothesis &h : expanding) {
        const std::vector<double> row = scorer.score(t, h.prefix);
        ++result.score_calls;
        Hypothesis stay = h;
        stay.am_score += row[blank];
        stay.frames_consumed += 1;
        merge_into(ended, std::move(stay));
        if (!may_emit) continue;
        for (int c : symbols) {
          Hypothesis g = h;
          g.prefix.push_back(c);
          g.am_score += row[c];
          g.lm_score += lm_term(lm, h.prefix, c);
          g.last_emit_t = t;
          merge_into(grown, std::move(g));
        }
      }
      if (grown.empty()) break;
      ++emits;
      result.max_emits_in_frame = std::max(result.max_emits_in_frame, emits);

      expanding = values_of(grown);
      sort_and_prune(expanding, cfg, beam_size);
      // Scores only decrease with further expansion, so a hypothesis that
      // already ranks below the beam-th blank-terminated one is dead.
      if (ended.size() >= beam_size) {
        std::vector<Hypothesis> done = values_of(ended);
        sort_and_prune(done, cfg, beam_size);
        const Hypothesis &worst = done.back();
        std::erase_if(expanding, [&](const Hypothesis &h) {
          return !ranks_before(h, worst, cfg);
        });
        ended.clear();
        for (auto &h : done) ended.emplace(h.prefix, std::move(h));
      }

      const bool over_cap = std::any_of(
          expanding.begin(), expanding.end(), [cap](const Hypothesis &h) {
            return static_cast<int>(h.prefix.size()) > cap;
          });
      if (over_cap) {
        result.runaway = true;
        std::vector<Hypothesis> all = values_of(ended);
        all.insert(all.end(), expanding.begin(), expanding.end());
        sort_and_prune(all, cfg, beam_size);
        result.nbest = std::move(all);
        result.frames = t;
        return result;
      }
    }
    beam = values_of(ended);
    sort_and_prune(beam, cfg, beam_size);
    result.frames = t + 1;
  }

  result.nbest = std::move(beam);
  return result;
}

DecodeResult greedy_rnnt(const ModelScorer &scorer, const DecodeConfig &cfg) {
  check_config(cfg);
  const int T = scorer.frames();
  const int blank = scorer.blank_id();
  const std::vector<int> symbols = non_blank_symbols(scorer);
  const int cap = runaway_cap(T);

  DecodeResult result;
  Hypothesis hyp;
  for (int t = 0; t < T; ++t) {
    int emits = 0;
    while (true) {
      const std::vector<double> row = scorer.score(t, hyp.prefix);
      ++result.score_calls;
      int best = symbols.front();
      for (int c : symbols) {
        if (row[c] > row[best]) best = c;
      }
      const bool may_emit =
          !cfg.max_emits_per_step || emits < *cfg.max_emits_per_step;
      if (!may_emit || row[best] <= row[blank]) {
        hyp.am_score += row[blank];
        hyp.frames_consumed += 1;
        break;
      }
      hyp.prefix.push_back(best);
      hyp.am_score += row[best];
      hyp.last_emit_t = t;
      ++emits;
      result.max_emits_in_frame = std::max(result.max_emits_in_frame, emits);
      if (static_cast<int>(hyp.prefix.size()) > cap) {
        result.runaway = true;
        result.frames = t;
        result.nbest = {hyp};
        return result;
      }
    }
    result.frames = t + 1;
  }
  result.nbest = {hyp};
  return result;
}

}  // namespace monotx
