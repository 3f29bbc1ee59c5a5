#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "monotx/dataset.hpp"
#include "monotx/decode.hpp"
#include "monotx/oracle.hpp"
#include "monotx/toymodel.hpp"

namespace monotx {

enum class TransducerLoss { kRnnt, kArRnnt, kCtcT, kMonoRnnT };
enum class Strategy { kScratch, kInitFrom, kJointCtc };
enum class Schedule { kTriStage, kCosine };
enum class Optimizer { kMomentum, kAdam };

std::string_view to_string(TransducerLoss loss) noexcept;
std::string_view to_string(Strategy strategy) noexcept;
std::string_view to_string(Schedule schedule) noexcept;
std::string_view to_string(Optimizer optimizer) noexcept;
TransducerLoss parse_transducer_loss(std::string_view name);
Strategy parse_strategy(std::string_view name);
Schedule parse_schedule(std::string_view name);
Optimizer parse_optimizer(std::string_view name);

// Decoder matching the topology a loss trains.
oracle::DecodeTopology decode_topology_for(TransducerLoss loss) noexcept;

struct TrainConfig {
  Strategy strategy = Strategy::kScratch;
  // Checkpoint prefix for Strategy::kInitFrom when loading from disk.
  std::string init_checkpoint;
  // Weight w of the auxiliary CTC loss under Strategy::kJointCtc; the
  // transducer loss gets 1 - w.
  double ctc_weight = 0.3;
  TransducerLoss loss = TransducerLoss::kRnnt;
  int epochs = 3;
  double base_lr = 0.02;
  int warmup_iters = 400;
  Schedule schedule = Schedule::kCosine;
  Optimizer optimizer = Optimizer::kMomentum;
  double momentum = 0.9;
  int batch_size = 8;
  // Global gradient-norm clip; <= 0 disables.
  double clip_norm = 5.0;
  // AR-RNN-T band buffers around each label's reference frame.
  int ar_left = 1;
  int ar_right = 3;
  int eval_beam = 4;
  std::uint64_t seed = 0;
};

void check_config(const TrainConfig &cfg);

// Linear warmup to base_lr over warmup_iters, then either cosine decay to
// zero at total_steps or the tri-stage hold (first half of the remainder)
// followed by exponential decay to 1% of base_lr.
double learning_rate(const TrainConfig &cfg, int step, int total_steps);

// Training objective for one utterance: the transducer loss, or
// (1 - w) * transducer + w * CTC under joint CTC training.
double objective(const ToyModel &model, const Utterance &x,
                 const TrainConfig &cfg);

// Adds d objective / d parameters to the model's gradient buffers and
// returns the objective. Infeasible items (+inf loss) contribute nothing.
double accumulate_gradients(ToyModel &model, const Utterance &x,
                            const TrainConfig &cfg);

struct EvalResult {
  double token_error = 0.0;     // edit errors / reference tokens
  double sequence_error = 0.0;  // fraction of utterances not exactly right
  long errors = 0;
  long ref_tokens = 0;
};

EvalResult evaluate(const ToyModel &model, const std::vector<Utterance> &data,
                    oracle::DecodeTopology topology, const DecodeConfig &cfg,
                    const LanguageModel *lm = nullptr);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;  // mean objective per utterance
  double dev_token_error = 0.0;
  double dev_sequence_error = 0.0;
  double last_lr = 0.0;
  int skipped = 0;  // infeasible utterances
};

struct TrainResult {
  ToyModel model;
  std::vector<EpochStats> history;
};

// Starting point for cfg.strategy: a checkpoint for kInitFrom (from
// cfg.init_checkpoint), otherwise a random model seeded with cfg.seed.
ToyModel initial_model(const ModelDims &dims, const TrainConfig &cfg);

// Mini-batch gradient descent from `model`. Throws DivergenceError if the
// objective becomes NaN.
TrainResult train(ToyModel model, const std::vector<Utterance> &train_set,
                  const std::vector<Utterance> &dev_set, const TrainConfig &cfg);

}  // namespace monotx
