#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "monotx/decode.hpp"
#include "monotx/error.hpp"
#include "monotx/ngram.hpp"
#include "monotx/oracle.hpp"
#include "test_util.hpp"

namespace monotx {
namespace {

using oracle::DecodeTopology;

constexpr int a = 1;
constexpr int b = 2;

// Rows that put (almost) all mass on `spell[t]`, whatever the prefix.
LatticeScorer spelling_scorer(const std::vector<int> &spell, int K, int U) {
  const int T = static_cast<int>(spell.size());
  std::vector<double> logits(static_cast<std::size_t>(T) * (U + 1) * K, 0.0);
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) logits[(t * (U + 1) + u) * K + spell[t]] = 30.0;
  }
  return LatticeScorer(JoinerLattice(T, U, K, 0, logits));
}

// Frame-level spelling for RNN-T: label rows emit the next label at the
// frame it appears in, then blank.
FunctionScorer rnnt_spelling_scorer(const std::vector<int> &spell, int K) {
  return FunctionScorer(
      static_cast<int>(spell.size()), K, 0,
      [spell, K](int t, std::span<const int> prefix) {
        int due = 0;
        for (int s = 0; s <= t; ++s) due += spell[s] != 0;
        std::vector<double> logits(K, 0.0);
        if (static_cast<int>(prefix.size()) < due) {
          int seen = 0;
          for (int s = 0; s <= t; ++s) {
            if (spell[s] != 0 && seen++ == static_cast<int>(prefix.size())) {
              logits[spell[s]] = 30.0;
            }
          }
        } else {
          logits[0] = 30.0;
        }
        return log_softmax_rows(logits, K);
      });
}

TEST(DecodeConfigCheck, Rejects) {
  DecodeConfig cfg;
  cfg.beam_size = 0;
  EXPECT_THROW(check_config(cfg), ValidationError);
  cfg = {};
  cfg.lm_weight = -0.1;
  EXPECT_THROW(check_config(cfg), ValidationError);
  cfg = {};
  cfg.max_emits_per_step = -1;
  EXPECT_THROW(check_config(cfg), ValidationError);
}

TEST(MonotonicBeam, OneHotSpelling) {
  const std::vector<int> spell = {0, a, 0, b};
  const LatticeScorer scorer = spelling_scorer(spell, 3, 2);
  for (Topology topo : {Topology::kCtcT, Topology::kMonoRnnT}) {
    const DecodeResult r = beam_search_monotonic(scorer, topo, DecodeConfig{});
    EXPECT_EQ(r.best().prefix, (LabelSequence{a, b}));
    EXPECT_EQ(r.frames, 4);
  }
}

TEST(MonotonicBeam, CtctCollapsesRepeats) {
  const std::vector<int> spell = {a, a, 0, a};
  const LatticeScorer scorer = spelling_scorer(spell, 2, 2);
  EXPECT_EQ(beam_search_monotonic(scorer, Topology::kCtcT, DecodeConfig{}).best().prefix,
            (LabelSequence{a, a}));
  EXPECT_EQ(
      beam_search_monotonic(scorer, Topology::kMonoRnnT, DecodeConfig{}).best().prefix,
      (LabelSequence{a, a, a}));
}

TEST(MonotonicBeam, UniformLatticeMatchesEnumeration) {
  // (a) carries 3/4 of the CTC-T mass for K=2, T=2; the merged hypothesis
  // score equals its full-sum probability.
  const LatticeScorer scorer(JoinerLattice::uniform(2, 2, 2));
  const DecodeResult r = beam_search_monotonic(scorer, Topology::kCtcT, DecodeConfig{});
  EXPECT_EQ(r.best().prefix, (LabelSequence{a}));
  EXPECT_NEAR(r.best().am_score, std::log(0.75), 1e-12);
  const DecodeResult m =
      beam_search_monotonic(scorer, Topology::kMonoRnnT, DecodeConfig{});
  EXPECT_EQ(m.best().prefix, (LabelSequence{a}));
  EXPECT_NEAR(m.best().am_score, std::log(0.5), 1e-12);
}

TEST(MonotonicBeam, ConsumesExactlyTFrames) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int T = 1 + static_cast<int>(rng() % 8);
    const int K = 2 + static_cast<int>(rng() % 4);
    const LatticeScorer scorer(testing::random_lattice(rng, T, T, K, 0, 3.0));
    for (Topology topo : {Topology::kCtcT, Topology::kMonoRnnT}) {
      DecodeConfig cfg;
      cfg.beam_size = 1 + static_cast<int>(rng() % 6);
      const DecodeResult r = beam_search_monotonic(scorer, topo, cfg);
      EXPECT_EQ(r.frames, T);
      for (const auto &h : r.nbest) {
        EXPECT_LE(static_cast<int>(h.prefix.size()), T);
        EXPECT_EQ(h.frames_consumed, T);
      }
    }
  }
}

TEST(MonotonicBeam, MergedScoreIsFullSum) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    const LatticeScorer scorer(testing::random_lattice(rng, 4, 4, 3));
    for (Topology topo : {Topology::kCtcT, Topology::kMonoRnnT}) {
      DecodeConfig cfg;
      cfg.beam_size = 64;
      const Hypothesis best = beam_search_monotonic(scorer, topo, cfg).best();
      const double full = oracle::full_sum_log_prob(
          scorer,
          topo == Topology::kCtcT ? DecodeTopology::kCtcT : DecodeTopology::kMonoRnnT,
          best.prefix);
      EXPECT_NEAR(best.am_score, full, 1e-6);
    }
  }
}

TEST(MonotonicBeam, LargerBeamRarelyWorse) {
  // Prefix merging only sums alignments that survive pruning, so a wider
  // beam can settle on a better sequence whose merged score is still
  // partial. Strict monotonicity fails on rare instances; it must hold once
  // the beam keeps every prefix.
  std::mt19937_64 rng(33);
  int comparisons = 0;
  int violations = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int T = 2 + static_cast<int>(rng() % 5);
    const int K = 2 + static_cast<int>(rng() % 3);
    const LatticeScorer scorer(testing::random_lattice(rng, T, T, K, 0, 2.0));
    for (Topology topo : {Topology::kCtcT, Topology::kMonoRnnT}) {
      double prev = -1e300;
      for (int beam : {1, 2, 4, 8, 16}) {
        DecodeConfig cfg;
        cfg.beam_size = beam;
        const double s = combined_score(beam_search_monotonic(scorer, topo, cfg).best(), cfg);
        ++comparisons;
        violations += s < prev - 1e-12;
        prev = s;
      }
      DecodeConfig wide;
      wide.beam_size = 100000;
      DecodeConfig wider = wide;
      wider.beam_size = 200000;
      EXPECT_EQ(beam_search_monotonic(scorer, topo, wide).best().am_score,
                beam_search_monotonic(scorer, topo, wider).best().am_score);
    }
  }
  EXPECT_LE(violations * 100, comparisons);
}

TEST(MonotonicBeam, AdversarialScorerTerminates) {
  const FunctionScorer scorer = adversarial_scorer(6, 3);
  for (Topology topo : {Topology::kCtcT, Topology::kMonoRnnT}) {
    const DecodeResult r = beam_search_monotonic(scorer, topo, DecodeConfig{});
    EXPECT_FALSE(r.runaway);
    EXPECT_EQ(r.frames, 6);
    EXPECT_LE(static_cast<int>(r.best().prefix.size()), 6);
  }
  EXPECT_EQ(greedy_monotonic(scorer, Topology::kMonoRnnT).best().prefix.size(), 6u);
}

TEST(MonotonicBeam, Deterministic) {
  std::mt19937_64 rng(34);
  const LatticeScorer scorer(testing::random_lattice(rng, 5, 5, 4));
  const DecodeResult x = beam_search_monotonic(scorer, Topology::kCtcT, DecodeConfig{});
  const DecodeResult y = beam_search_monotonic(scorer, Topology::kCtcT, DecodeConfig{});
  ASSERT_EQ(x.nbest.size(), y.nbest.size());
  for (std::size_t i = 0; i < x.nbest.size(); ++i) {
    EXPECT_EQ(x.nbest[i].prefix, y.nbest[i].prefix);
    EXPECT_EQ(x.nbest[i].am_score, y.nbest[i].am_score);
  }
}

TEST(RnntBeam, OneHotSpelling) {
  const FunctionScorer scorer = rnnt_spelling_scorer({0, a, 0, b}, 3);
  EXPECT_EQ(beam_search_rnnt(scorer, DecodeConfig{}).best().prefix,
            (LabelSequence{a, b}));
  EXPECT_EQ(greedy_rnnt(scorer, DecodeConfig{}).best().prefix, (LabelSequence{a, b}));
}

TEST(RnntBeam, AdversarialRunaway) {
  const FunctionScorer scorer = adversarial_scorer(5, 3);
  const DecodeResult beam = beam_search_rnnt(scorer, DecodeConfig{});
  EXPECT_TRUE(beam.runaway);
  const DecodeResult greedy = greedy_rnnt(scorer, DecodeConfig{});
  EXPECT_TRUE(greedy.runaway);
  EXPECT_GE(static_cast<int>(greedy.best().prefix.size()), runaway_cap(5));
}

TEST(RnntBeam, EmissionCapPreventsRunaway) {
  const FunctionScorer scorer = adversarial_scorer(5, 3);
  DecodeConfig cfg;
  cfg.max_emits_per_step = 2;
  const DecodeResult r = beam_search_rnnt(scorer, cfg);
  EXPECT_FALSE(r.runaway);
  EXPECT_LE(r.max_emits_in_frame, 2);
  EXPECT_LE(static_cast<int>(r.best().prefix.size()), 10);
  const DecodeResult g = greedy_rnnt(scorer, cfg);
  EXPECT_FALSE(g.runaway);
  EXPECT_EQ(g.best().prefix.size(), 10u);
}

TEST(RnntBeam, UniformLattice) {
  // () and (a) both carry 1/4; which one ranks first depends on the last bit
  // of two differently rounded log sums.
  const LatticeScorer scorer(JoinerLattice::uniform(2, 4, 2));
  DecodeConfig cfg;
  cfg.max_emits_per_step = 2;
  const DecodeResult r = beam_search_rnnt(scorer, cfg);
  EXPECT_NEAR(r.best().am_score, std::log(0.25), 1e-12);
  int tied = 0;
  for (const auto &h : r.nbest) {
    if (h.prefix.size() <= 1 && std::abs(h.am_score - std::log(0.25)) < 1e-12) ++tied;
  }
  EXPECT_EQ(tied, 2);
}

TEST(Ngram, HandComputedBigram) {
  const NgramLm lm = NgramLm::train({{a, b, a, b}}, 2, 3, 0);
  // count(a b) = 2, count(a .) = 2, add-1 over 2 labels: (2+1)/(2+2).
  EXPECT_NEAR(lm.score(std::vector<int>{a}, b), std::log(0.75), 1e-12);
  EXPECT_NEAR(lm.score(std::vector<int>{a}, a), std::log(0.25), 1e-12);
}

TEST(Ngram, UnseenContextIsUniform) {
  const NgramLm lm = NgramLm::train({{a, a}}, 2, 4, 0);
  EXPECT_NEAR(lm.score(std::vector<int>{3}, 2), std::log(1.0 / 3.0), 1e-12);
}

TEST(Ngram, EmptyCorpusIsUniform) {
  const NgramLm lm = NgramLm::train({}, 3, 3, 0);
  EXPECT_NEAR(lm.score({}, a), std::log(0.5), 1e-12);
}

TEST(Ngram, NormalizedPerContext) {
  const NgramLm lm = NgramLm::train({{a, b, 3, a}, {b, b, a}}, 3, 4, 0);
  for (const std::vector<int> &h :
       std::vector<std::vector<int>>{{}, {a}, {a, b}, {b, b}, {3, 3}}) {
    double total = 0.0;
    for (int k = 1; k < 4; ++k) total += std::exp(lm.score(h, k));
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Ngram, RejectsBadOrder) {
  EXPECT_THROW(NgramLm::train({}, 0, 3, 0), ValidationError);
  EXPECT_THROW(NgramLm::train({}, 4, 3, 0), ValidationError);
}

TEST(ShallowFusion, ZeroWeightIsIdentity) {
  std::mt19937_64 rng(35);
  const NgramLm lm = NgramLm::train({{a, b}, {b, b, a}}, 2, 3, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const LatticeScorer scorer(testing::random_lattice(rng, 5, 5, 3));
    DecodeConfig cfg;
    cfg.lm_weight = 0.0;
    for (Topology topo : {Topology::kCtcT, Topology::kMonoRnnT}) {
      EXPECT_EQ(beam_search_monotonic(scorer, topo, cfg, &lm).best().prefix,
                beam_search_monotonic(scorer, topo, cfg).best().prefix);
    }
    cfg.max_emits_per_step = 3;
    EXPECT_EQ(beam_search_rnnt(scorer, cfg, &lm).best().prefix,
              beam_search_rnnt(scorer, cfg).best().prefix);
  }
}

TEST(BeamVsExhaustive, TinyInstancesAgree) {
  std::mt19937_64 rng(36);
  int agree = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int T = 1 + static_cast<int>(rng() % 4);
    const int K = 2 + static_cast<int>(rng() % 2);
    const LatticeScorer scorer(testing::random_lattice(rng, T, T, K, 0, 2.0));
    const DecodeResult r = beam_search_monotonic(scorer, Topology::kCtcT, DecodeConfig{});
    agree += r.best().prefix ==
             oracle::exhaustive_decode(scorer, DecodeTopology::kCtcT, T).labels;
  }
  EXPECT_GE(agree, 90);
}

}  // namespace
}  // namespace monotx
