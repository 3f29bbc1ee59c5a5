#include <gtest/gtest.h>

#include <cctype>
#include <cmath>
#include <ostream>
#include <string>
#include <random>

#include "monotx/dataset.hpp"
#include "monotx/error.hpp"
#include "monotx/metrics.hpp"
#include "monotx/oracle.hpp"
#include "monotx/toymodel.hpp"
#include "monotx/train.hpp"

namespace monotx {
namespace {

constexpr int a = 1;
constexpr int b = 2;
constexpr int c = 3;

Utterance tiny_utterance(int frames, LabelSequence labels, std::vector<int> align,
                         int feature_dim, std::uint64_t seed) {
  Utterance x;
  x.num_frames = frames;
  x.feature_dim = feature_dim;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  x.features.resize(static_cast<std::size_t>(frames) * feature_dim);
  for (double &v : x.features) v = normal(rng);
  x.labels = std::move(labels);
  x.alignment = std::move(align);
  return x;
}

ModelDims small_dims() {
  ModelDims d;
  d.input_dim = 4;
  d.vocab_size = 3;
  d.enc_hidden = 3;
  d.pred_hidden = 3;
  d.joint_hidden = 4;
  return d;
}

TEST(EditDistance, Examples) {
  EXPECT_EQ(edit_distance(std::vector<int>{a, b, c}, std::vector<int>{a, b, c}).total(), 0);
  const EditCounts del = edit_distance(std::vector<int>{a, b, c}, std::vector<int>{a, c});
  EXPECT_EQ(del.total(), 1);
  EXPECT_EQ(del.deletions, 1);
  const EditCounts swap = edit_distance(std::vector<int>{a, b}, std::vector<int>{b, a});
  EXPECT_EQ(swap.total(), 2);
  EXPECT_EQ(swap.substitutions, 2);
  const EditCounts ins = edit_distance({}, std::vector<int>{a, b});
  EXPECT_EQ(ins.insertions, 2);
}

TEST(Synthetic, DeterministicUnderSeed) {
  SyntheticSpec spec;
  spec.num_items = 20;
  spec.seed = 9;
  const auto x = gen_synthetic(spec);
  const auto y = gen_synthetic(spec);
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(x[i].features, y[i].features);
    EXPECT_EQ(x[i].labels, y[i].labels);
    EXPECT_EQ(x[i].alignment, y[i].alignment);
  }
  spec.seed = 10;
  EXPECT_NE(gen_synthetic(spec)[0].features, x[0].features);
}

TEST(Synthetic, StructuralBounds) {
  SyntheticSpec spec;
  spec.num_items = 200;
  spec.seed = 1;
  for (const auto &x : gen_synthetic(spec)) {
    const int U = static_cast<int>(x.labels.size());
    EXPECT_LE(U, x.num_frames / 2);
    EXPECT_GE(U, spec.min_labels);
    EXPECT_LE(U, spec.max_labels);
    ASSERT_EQ(x.alignment.size(), x.labels.size());
    for (int l = 1; l < U; ++l) {
      EXPECT_GT(x.alignment[l], x.alignment[l - 1] + 1);  // spans >= 2 frames
    }
    for (int l = 0; l < U; ++l) {
      EXPECT_GE(x.alignment[l], 1);
      EXPECT_LE(x.alignment[l], x.num_frames);
      EXPECT_NE(x.labels[l], spec.blank_id);
    }
  }
}

TEST(Synthetic, RejectsBadSpecs) {
  SyntheticSpec spec;
  spec.vocab_size = 2;
  EXPECT_THROW(gen_synthetic(spec), ValidationError);
  spec = {};
  spec.min_labels = 4;
  spec.max_labels = 3;
  EXPECT_THROW(gen_synthetic(spec), ValidationError);
  spec = {};
  spec.min_span = 1;
  EXPECT_THROW(gen_synthetic(spec), ValidationError);
  spec = {};
  spec.feature_dim = 3;
  EXPECT_THROW(gen_synthetic(spec), ValidationError);
}

TEST(ForwardJoint, ZeroWeightsGiveUniformRows) {
  const ToyModel m = ToyModel::zeros(small_dims());
  const Utterance x = tiny_utterance(4, {a, b}, {1, 3}, 4, 1);
  const JoinerLattice lat = m.forward_joint(x, x.labels);
  EXPECT_EQ(lat.frames(), 4);
  EXPECT_EQ(lat.rows(), 3);
  EXPECT_EQ(lat.vocab_size(), 3);
  for (double v : lat.logprobs()) EXPECT_NEAR(v, std::log(1.0 / 3.0), 1e-15);
}

TEST(ForwardJoint, DeterministicAndFinite) {
  const ToyModel m = ToyModel::random(small_dims(), 5);
  const Utterance x = tiny_utterance(5, {a, b, a}, {1, 2, 4}, 4, 2);
  const JoinerLattice p = m.forward_joint(x, x.labels);
  const JoinerLattice q = m.forward_joint(x, x.labels);
  EXPECT_EQ(p.logits(), q.logits());
  for (double v : p.logits()) EXPECT_TRUE(std::isfinite(v));
  EXPECT_EQ(m.parameter_count(), ToyModel::random(small_dims(), 6).parameter_count());
}

TEST(ForwardJoint, ContextWindowLocality) {
  ModelDims d = small_dims();
  d.encoder = EncoderKind::kContextWindow;
  d.context = 0;
  const ToyModel m = ToyModel::random(d, 7);
  Utterance x = tiny_utterance(5, {a}, {2}, 4, 3);
  const JoinerLattice before = m.forward_joint(x, x.labels);
  x.features[2 * 4 + 1] += 0.75;  // frame t = 2
  const JoinerLattice after = m.forward_joint(x, x.labels);
  for (int t = 0; t < 5; ++t) {
    for (int u = 0; u < 2; ++u) {
      for (int k = 0; k < 3; ++k) {
        const bool changed = before.logit(t, u, k) != after.logit(t, u, k);
        EXPECT_EQ(changed, t == 2) << "t=" << t;
      }
    }
  }
}

TEST(ForwardJoint, RecurrentEncoderIsCausal) {
  const ToyModel m = ToyModel::random(small_dims(), 8);
  Utterance x = tiny_utterance(4, {a}, {2}, 4, 4);
  const JoinerLattice before = m.forward_joint(x, x.labels);
  x.features[2 * 4] += 0.5;
  const JoinerLattice after = m.forward_joint(x, x.labels);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(before.logit(1, 0, k), after.logit(1, 0, k));
    EXPECT_NE(before.logit(3, 0, k), after.logit(3, 0, k));
  }
}

TEST(Scorer, MatchesForwardJointRows) {
  const ToyModel m = ToyModel::random(small_dims(), 9);
  const Utterance x = tiny_utterance(4, {a, b}, {1, 3}, 4, 5);
  const JoinerLattice lat = m.forward_joint(x, x.labels);
  const ToyModelScorer scorer(m, x);
  for (int t = 0; t < 4; ++t) {
    for (int u = 0; u <= 2; ++u) {
      const auto row = scorer.score(t, std::span<const int>(x.labels).first(u));
      for (int k = 0; k < 3; ++k) EXPECT_NEAR(row[k], lat.logprob(t, u, k), 1e-12);
    }
  }
}

struct GradCase {
  TransducerLoss loss;
  Strategy strategy;
};

void PrintTo(const GradCase &c, std::ostream *os) {
  *os << to_string(c.loss) << "/" << to_string(c.strategy);
}

// "ar-rnnt" + "init_from" -> "ar_rnnt_init_from"; test names must be
// identifiers.
std::string case_name(const ::testing::TestParamInfo<GradCase> &info) {
  std::string name = std::string(to_string(info.param.loss)) + "_" +
                     std::string(to_string(info.param.strategy));
  for (char &ch : name) {
    if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
  }
  return name;
}

class EndToEndGradient : public ::testing::TestWithParam<GradCase> {};

TEST_P(EndToEndGradient, MatchesFiniteDifferences) {
  TrainConfig cfg;
  cfg.loss = GetParam().loss;
  cfg.strategy = GetParam().strategy;
  cfg.ar_left = 1;
  cfg.ar_right = 1;
  for (EncoderKind enc : {EncoderKind::kRecurrent, EncoderKind::kContextWindow}) {
    ModelDims d = small_dims();
    d.encoder = enc;
    ToyModel m = ToyModel::random(d, 11);
    // Large enough weights to keep tanh away from its linear regime.
    for (auto &l : m.layers()) l.value *= 2.0;
    const Utterance x = tiny_utterance(2, {a}, {1}, 4, 6);
    m.zero_grad();
    accumulate_gradients(m, x, cfg);
    double worst = 0.0;
    for (auto &l : m.layers()) {
      for (Eigen::Index i = 0; i < l.value.size(); ++i) {
        const double keep = l.value.data()[i];
        l.value.data()[i] = keep + 1e-4;
        const double up = objective(m, x, cfg);
        l.value.data()[i] = keep - 1e-4;
        const double down = objective(m, x, cfg);
        l.value.data()[i] = keep;
        const double fd = (up - down) / 2e-4;
        const double an = l.grad.data()[i];
        worst = std::max(worst, std::abs(fd - an) /
                                    std::max({std::abs(fd), std::abs(an),
                                              oracle::kRelativeErrorFloor}));
      }
    }
    EXPECT_LE(worst, 1e-4);
  }
}

INSTANTIATE_TEST_SUITE_P(
    Losses, EndToEndGradient,
    ::testing::Values(GradCase{TransducerLoss::kRnnt, Strategy::kScratch},
                      GradCase{TransducerLoss::kArRnnt, Strategy::kScratch},
                      GradCase{TransducerLoss::kCtcT, Strategy::kScratch},
                      GradCase{TransducerLoss::kMonoRnnT, Strategy::kScratch},
                      GradCase{TransducerLoss::kCtcT, Strategy::kJointCtc}),
    case_name);

TEST(TrainConfigCheck, Rejects) {
  TrainConfig cfg;
  cfg.ctc_weight = 1.5;
  EXPECT_THROW(check_config(cfg), ValidationError);
  cfg = {};
  cfg.epochs = 0;
  EXPECT_THROW(check_config(cfg), ValidationError);
  cfg = {};
  cfg.strategy = Strategy::kInitFrom;
  EXPECT_THROW(initial_model(small_dims(), cfg), ValidationError);
}

TEST(Schedule, WarmupThenDecay) {
  TrainConfig cfg;
  cfg.base_lr = 1.0;
  cfg.warmup_iters = 4;
  EXPECT_NEAR(learning_rate(cfg, 0, 20), 0.25, 1e-15);
  EXPECT_NEAR(learning_rate(cfg, 3, 20), 1.0, 1e-15);
  EXPECT_NEAR(learning_rate(cfg, 4, 20), 1.0, 1e-15);
  EXPECT_NEAR(learning_rate(cfg, 20, 20), 0.0, 1e-15);
  cfg.schedule = Schedule::kTriStage;
  EXPECT_NEAR(learning_rate(cfg, 10, 20), 1.0, 1e-15);
  EXPECT_NEAR(learning_rate(cfg, 20, 20), 0.01, 1e-15);
}

std::vector<Utterance> noiseless_data(int n, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.num_items = n;
  spec.vocab_size = 4;
  spec.feature_dim = 4;
  spec.noise = 0.0;
  spec.min_labels = 1;
  spec.max_labels = 3;
  spec.seed = seed;
  return gen_synthetic(spec);
}

ModelDims data_dims() {
  ModelDims d;
  d.input_dim = 4;
  d.vocab_size = 4;
  d.enc_hidden = 8;
  d.pred_hidden = 8;
  d.joint_hidden = 8;
  return d;
}

TEST(Training, DeterministicFirstEpoch) {
  const auto data = noiseless_data(16, 3);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.warmup_iters = 2;
  cfg.seed = 4;
  const auto r1 = train(initial_model(data_dims(), cfg), data, {}, cfg);
  const auto r2 = train(initial_model(data_dims(), cfg), data, {}, cfg);
  EXPECT_EQ(r1.history[0].train_loss, r2.history[0].train_loss);
}

class LossDecrease : public ::testing::TestWithParam<GradCase> {};

TEST_P(LossDecrease, FirstThreeEpochs) {
  const auto data = noiseless_data(32, 5);
  TrainConfig cfg;
  cfg.loss = GetParam().loss;
  cfg.strategy = GetParam().strategy;
  cfg.epochs = 3;
  cfg.warmup_iters = 4;
  cfg.seed = 1;
  ToyModel start = ToyModel::random(data_dims(), 1);
  if (cfg.strategy == Strategy::kInitFrom) {
    TrainConfig pre = cfg;
    pre.strategy = Strategy::kScratch;
    pre.loss = TransducerLoss::kRnnt;
    pre.epochs = 1;
    start = train(start, data, {}, pre).model;
  }
  const auto r = train(std::move(start), data, {}, cfg);
  ASSERT_EQ(r.history.size(), 3u);
  EXPECT_LT(r.history[1].train_loss, r.history[0].train_loss);
  EXPECT_LT(r.history[2].train_loss, r.history[1].train_loss);
}

INSTANTIATE_TEST_SUITE_P(
    Strategies, LossDecrease,
    ::testing::Values(GradCase{TransducerLoss::kRnnt, Strategy::kScratch},
                      GradCase{TransducerLoss::kArRnnt, Strategy::kScratch},
                      GradCase{TransducerLoss::kCtcT, Strategy::kScratch},
                      GradCase{TransducerLoss::kMonoRnnT, Strategy::kScratch},
                      GradCase{TransducerLoss::kCtcT, Strategy::kJointCtc},
                      GradCase{TransducerLoss::kCtcT, Strategy::kInitFrom},
                      GradCase{TransducerLoss::kMonoRnnT, Strategy::kInitFrom}),
    case_name);

TEST(Training, NanAbortsWithEpoch) {
  const auto data = noiseless_data(4, 6);
  TrainConfig cfg;
  cfg.epochs = 2;
  ToyModel m = ToyModel::random(data_dims(), 2);
  m.layer("join.out").value(0, 0) = std::nan("");
  try {
    train(m, data, {}, cfg);
    FAIL();
  } catch (const DivergenceError &e) {
    EXPECT_EQ(e.epoch(), 1);
  }
}

TEST(Evaluate, CountsReferenceTokens) {
  const auto data = noiseless_data(5, 7);
  const ToyModel m = ToyModel::zeros(data_dims());
  long tokens = 0;
  for (const auto &x : data) tokens += static_cast<long>(x.labels.size());
  DecodeConfig cfg;
  cfg.beam_size = 2;
  cfg.max_emits_per_step = 1;
  const EvalResult r = evaluate(m, data, oracle::DecodeTopology::kRnnT, cfg);
  EXPECT_EQ(r.ref_tokens, tokens);
  EXPECT_GE(r.errors, 0);
  EXPECT_LE(r.sequence_error, 1.0);
}

}  // namespace
}  // namespace monotx
