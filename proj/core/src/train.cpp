#include "monotx/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "monotx/error.hpp"
#include "monotx/io.hpp"
#include "monotx/loss.hpp"
#include "monotx/metrics.hpp"

namespace monotx {

std::string_view to_string(TransducerLoss loss) noexcept {
  switch (loss) {
    case TransducerLoss::kRnnt: return "rnnt";
    case TransducerLoss::kArRnnt: return "ar-rnnt";
    case TransducerLoss::kCtcT: return "ctct";
    case TransducerLoss::kMonoRnnT: return "monornnt";
  }
  return "unknown";
}

std::string_view to_string(Strategy strategy) noexcept {
  switch (strategy) {
    case Strategy::kScratch: return "scratch";
    case Strategy::kInitFrom: return "init_from";
    case Strategy::kJointCtc: return "joint_ctc";
  }
  return "unknown";
}

std::string_view to_string(Schedule schedule) noexcept {
  return schedule == Schedule::kCosine ? "cosine" : "tri-stage";
}

std::string_view to_string(Optimizer optimizer) noexcept {
  return optimizer == Optimizer::kAdam ? "adam" : "momentum";
}

TransducerLoss parse_transducer_loss(std::string_view name) {
  if (name == "rnnt") return TransducerLoss::kRnnt;
  if (name == "ar-rnnt" || name == "ar_rnnt") return TransducerLoss::kArRnnt;
  if (name == "ctct") return TransducerLoss::kCtcT;
  if (name == "monornnt") return TransducerLoss::kMonoRnnT;
  throw ValidationError("unknown-loss", "unknown loss '" + std::string(name) + "'");
}

Strategy parse_strategy(std::string_view name) {
  if (name == "scratch") return Strategy::kScratch;
  if (name == "init_from") return Strategy::kInitFrom;
  if (name == "joint_ctc") return Strategy::kJointCtc;
  throw ValidationError("unknown-strategy",
                        "unknown strategy '" + std::string(name) + "'");
}

Schedule parse_schedule(std::string_view name) {
  if (name == "cosine") return Schedule::kCosine;
  if (name == "tri-stage" || name == "tristage") return Schedule::kTriStage;
  throw ValidationError("unknown-schedule",
                        "unknown schedule '" + std::string(name) + "'");
}

Optimizer parse_optimizer(std::string_view name) {
  if (name == "momentum" || name == "sgd") return Optimizer::kMomentum;
  if (name == "adam") return Optimizer::kAdam;
  throw ValidationError("unknown-optimizer",
                        "unknown optimizer '" + std::string(name) + "'");
}

oracle::DecodeTopology decode_topology_for(TransducerLoss loss) noexcept {
  switch (loss) {
    case TransducerLoss::kCtcT: return oracle::DecodeTopology::kCtcT;
    case TransducerLoss::kMonoRnnT: return oracle::DecodeTopology::kMonoRnnT;
    case TransducerLoss::kRnnt:
    case TransducerLoss::kArRnnt: return oracle::DecodeTopology::kRnnT;
  }
  return oracle::DecodeTopology::kRnnT;
}

void check_config(const TrainConfig &cfg) {
  auto bad = [](const std::string &what) {
    throw ValidationError("bad-train-config", what);
  };
  if (cfg.epochs < 1) bad("epochs must be >= 1");
  if (cfg.ctc_weight < 0.0 || cfg.ctc_weight > 1.0) bad("ctc_weight outside [0,1]");
  if (cfg.base_lr <= 0.0) bad("base_lr must be > 0");
  if (cfg.warmup_iters < 0) bad("warmup_iters must be >= 0");
  if (cfg.batch_size < 1) bad("batch_size must be >= 1");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0) bad("momentum outside [0,1)");
  if (cfg.ar_left < 0 || cfg.ar_right < 0) bad("AR buffers must be >= 0");
  if (cfg.eval_beam < 1) bad("eval_beam must be >= 1");
}

double learning_rate(const TrainConfig &cfg, int step, int total_steps) {
  const double base = cfg.base_lr;
  if (step < cfg.warmup_iters) {
    return base * static_cast<double>(step + 1) / cfg.warmup_iters;
  }
  const int rest = std::max(total_steps - cfg.warmup_iters, 1);
  const double progress =
      std::clamp(static_cast<double>(step - cfg.warmup_iters) / rest, 0.0, 1.0);
  if (cfg.schedule == Schedule::kCosine) {
    return 0.5 * base * (1.0 + std::cos(std::numbers::pi * progress));
  }
  if (progress < 0.5) return base;
  // exp decay from base to base/100 across the second half
  return base * std::pow(0.01, (progress - 0.5) / 0.5);
}

namespace {

struct ItemLoss {
  double transducer = 0.0;
  bool feasible = true;
  std::vector<double> joint_grad;
  double ctc = 0.0;
  std::vector<double> ctc_grad;
};

ItemLoss item_loss(const ToyModel &model, const Utterance &x,
                   const TrainConfig &cfg, bool with_grad) {
  ItemLoss out;
  const ModelDims &d = model.dims();
  const JoinerLattice lat = model.forward_joint(x, x.labels);
  LossOutput loss;
  switch (cfg.loss) {
    case TransducerLoss::kRnnt:
      loss = rnnt_loss(lat, x.labels);
      break;
    case TransducerLoss::kArRnnt:
      loss = ar_rnnt_loss(lat, x.labels,
                          AlignmentBand{x.alignment, cfg.ar_left, cfg.ar_right});
      break;
    case TransducerLoss::kCtcT:
      loss = gtct_loss(build_ctct_graph(x.labels, d.blank_id, d.vocab_size), lat);
      break;
    case TransducerLoss::kMonoRnnT:
      loss = gtct_loss(build_monornnt_graph(x.labels, d.blank_id, d.vocab_size),
                       lat);
      break;
  }
  out.transducer = loss.loss;
  out.feasible = loss.feasible;
  if (with_grad) out.joint_grad = std::move(loss.grad_logits);

  if (cfg.strategy == Strategy::kJointCtc) {
    const std::vector<double> logits = model.ctc_logits(x);
    CtcOutput ctc = ctc_loss(logits, x.num_frames, d.vocab_size, d.blank_id,
                             x.labels);
    out.ctc = ctc.loss;
    out.feasible = out.feasible && ctc.feasible;
    if (with_grad) out.ctc_grad = std::move(ctc.grad_logits);
  }
  return out;
}

double combine(const ItemLoss &l, const TrainConfig &cfg) {
  if (cfg.strategy != Strategy::kJointCtc) return l.transducer;
  return (1.0 - cfg.ctc_weight) * l.transducer + cfg.ctc_weight * l.ctc;
}

}  // namespace

double objective(const ToyModel &model, const Utterance &x,
                 const TrainConfig &cfg) {
  return combine(item_loss(model, x, cfg, false), cfg);
}

double accumulate_gradients(ToyModel &model, const Utterance &x,
                            const TrainConfig &cfg) {
  const ItemLoss l = item_loss(model, x, cfg, true);
  if (!l.feasible) return std::numeric_limits<double>::infinity();
  const bool joint = cfg.strategy == Strategy::kJointCtc;
  const double joint_scale = joint ? 1.0 - cfg.ctc_weight : 1.0;
  const double ctc_scale = joint ? cfg.ctc_weight : 0.0;
  model.backward(x, x.labels, l.joint_grad, joint_scale, l.ctc_grad, ctc_scale);
  return combine(l, cfg);
}

EvalResult evaluate(const ToyModel &model, const std::vector<Utterance> &data,
                    oracle::DecodeTopology topology, const DecodeConfig &cfg,
                    const LanguageModel *lm) {
  EvalResult r;
  long wrong_sequences = 0;
  for (const auto &x : data) {
    const ToyModelScorer scorer(model, x);
    DecodeResult decoded;
    switch (topology) {
      case oracle::DecodeTopology::kCtcT:
        decoded = beam_search_monotonic(scorer, Topology::kCtcT, cfg, lm);
        break;
      case oracle::DecodeTopology::kMonoRnnT:
        decoded = beam_search_monotonic(scorer, Topology::kMonoRnnT, cfg, lm);
        break;
      case oracle::DecodeTopology::kRnnT:
        decoded = beam_search_rnnt(scorer, cfg, lm);
        break;
    }
    const EditCounts e = edit_distance(x.labels, decoded.best().prefix);
    r.errors += e.total();
    r.ref_tokens += static_cast<long>(x.labels.size());
    if (e.total() > 0) ++wrong_sequences;
  }
  if (r.ref_tokens > 0) {
    r.token_error = static_cast<double>(r.errors) / static_cast<double>(r.ref_tokens);
  }
  if (!data.empty()) {
    r.sequence_error =
        static_cast<double>(wrong_sequences) / static_cast<double>(data.size());
  }
  return r;
}

ToyModel initial_model(const ModelDims &dims, const TrainConfig &cfg) {
  if (cfg.strategy == Strategy::kInitFrom) {
    if (cfg.init_checkpoint.empty()) {
      throw ValidationError("bad-train-config",
                            "init_from needs init_checkpoint");
    }
    ToyModel m = load_checkpoint(cfg.init_checkpoint);
    if (!(m.dims() == dims)) {
      throw ValidationError("shape-mismatch",
                            "checkpoint layer shapes do not match the model");
    }
    return m;
  }
  return ToyModel::random(dims, cfg.seed);
}

namespace {

class OptimizerState {
 public:
  OptimizerState(const ToyModel &m, const TrainConfig &cfg) : cfg_(cfg) {
    for (const auto &l : m.layers()) {
      first_.push_back(Matrix::Zero(l.value.rows(), l.value.cols()));
      if (cfg.optimizer == Optimizer::kAdam) {
        second_.push_back(Matrix::Zero(l.value.rows(), l.value.cols()));
      }
    }
  }

  void step(ToyModel &m, double lr) {
    ++steps_;
    auto &layers = m.layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
      Layer &l = layers[i];
      if (cfg_.optimizer == Optimizer::kMomentum) {
        first_[i] = cfg_.momentum * first_[i] - lr * l.grad;
        l.value += first_[i];
      } else {
        constexpr double b1 = 0.9, b2 = 0.98, eps = 1e-9;
        first_[i] = b1 * first_[i] + (1.0 - b1) * l.grad;
        second_[i] = b2 * second_[i] + (1.0 - b2) * l.grad.cwiseAbs2();
        const double c1 = 1.0 - std::pow(b1, steps_);
        const double c2 = 1.0 - std::pow(b2, steps_);
        l.value.array() -= lr * (first_[i].array() / c1) /
                           ((second_[i].array() / c2).sqrt() + eps);
      }
    }
  }

 private:
  const TrainConfig &cfg_;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
  int steps_ = 0;
};

void scale_and_clip(ToyModel &m, double scale, double clip_norm) {
  double sq = 0.0;
  for (auto &l : m.layers()) {
    l.grad *= scale;
    sq += l.grad.squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (clip_norm > 0.0 && norm > clip_norm) {
    for (auto &l : m.layers()) l.grad *= clip_norm / norm;
  }
}

}  // namespace

TrainResult train(ToyModel model, const std::vector<Utterance> &train_set,
                  const std::vector<Utterance> &dev_set, const TrainConfig &cfg) {
  check_config(cfg);
  model.lineage().push_back(std::string(to_string(cfg.strategy)) + ":" +
                            std::string(to_string(cfg.loss)));
  const int batches_per_epoch =
      (static_cast<int>(train_set.size()) + cfg.batch_size - 1) / cfg.batch_size;
  const int total_steps = batches_per_epoch * cfg.epochs;

  DecodeConfig eval_cfg;
  eval_cfg.beam_size = cfg.eval_beam;
  const oracle::DecodeTopology topology = decode_topology_for(cfg.loss);

  OptimizerState opt(model, cfg);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result{std::move(model), {}};
  ToyModel &m = result.model;
  int step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // Fisher-Yates with an explicit draw so the order only depends on seed.
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng() % i]);
    }
    EpochStats stats;
    stats.epoch = epoch;
    double loss_sum = 0.0;
    int counted = 0;
    for (int b = 0; b < batches_per_epoch; ++b) {
      m.zero_grad();
      int in_batch = 0;
      const std::size_t first = static_cast<std::size_t>(b) * cfg.batch_size;
      const std::size_t last = std::min(order.size(), first + cfg.batch_size);
      for (std::size_t i = first; i < last; ++i) {
        double l;
        try {
          l = accumulate_gradients(m, train_set[order[i]], cfg);
        } catch (const ValidationError &e) {
          if (e.code() != "nan-logit" && e.code() != "non-finite-logit") throw;
          l = std::numeric_limits<double>::quiet_NaN();
        }
        if (std::isnan(l)) {
          throw DivergenceError(epoch, "objective became NaN in epoch " +
                                           std::to_string(epoch));
        }
        if (std::isinf(l)) {
          ++stats.skipped;
          continue;
        }
        loss_sum += l;
        ++counted;
        ++in_batch;
      }
      if (in_batch == 0) continue;
      scale_and_clip(m, 1.0 / in_batch, cfg.clip_norm);
      stats.last_lr = learning_rate(cfg, step, total_steps);
      opt.step(m, stats.last_lr);
      ++step;
    }
    stats.train_loss = counted > 0 ? loss_sum / counted : 0.0;
    if (!dev_set.empty()) {
      const EvalResult ev = evaluate(m, dev_set, topology, eval_cfg);
      stats.dev_token_error = ev.token_error;
      stats.dev_sequence_error = ev.sequence_error;
    }
    result.history.push_back(stats);
  }
  return result;
}

}  // namespace monotx
