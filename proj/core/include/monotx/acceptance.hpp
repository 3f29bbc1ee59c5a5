#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "monotx/dataset.hpp"
#include "monotx/toymodel.hpp"
#include "monotx/train.hpp"

// The acceptance suite: criteria 1-9, shared by the acceptance test binary
// and `monotx report`.
namespace monotx::acceptance {

inline constexpr int kNumCriteria = 9;

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  // One-line human summary of the measured quantities.
  std::string summary;
  nlohmann::json details = nlohmann::json::object();
  double seconds = 0.0;
};

// The toy training setup behind criteria 8 and 9.
struct ToyTask {
  int train_items = 1500;
  int dev_items = 200;
  double noise = 0.35;
  // Labels follow the k -> k+1 chain half of the time, which gives the
  // bigram LM something to learn.
  double chain_prob = 0.5;
  int hidden = 24;
  int scratch_epochs = 12;
  int adapt_epochs = 3;
  double base_lr = 0.02;
  // Adaptation from a trained checkpoint restarts at base_lr * this, with no
  // warmup.
  double adapt_lr_scale = 0.3;
  int warmup_iters = 400;
  int batch_size = 8;
  int eval_beam = 4;
  double lm_weight = 0.1;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  // Wall-clock budget for the whole study.
  double budget_seconds = 600.0;
};

SyntheticSpec train_spec(const ToyTask &task, std::uint64_t seed);
SyntheticSpec dev_spec(const ToyTask &task, std::uint64_t seed);
ModelDims model_dims(const ToyTask &task);
TrainConfig scratch_config(const ToyTask &task, TransducerLoss loss,
                           std::uint64_t seed);
TrainConfig adapt_config(const ToyTask &task, TransducerLoss loss,
                         std::uint64_t seed);

// Every model of one seed of the strategy study, with its final dev error.
struct SeedRun {
  std::uint64_t seed = 0;
  struct Entry {
    std::string name;  // e.g. "ctct+init_rnnt"
    TransducerLoss loss = TransducerLoss::kRnnt;
    ToyModel model;
    EvalResult dev;
    std::vector<EpochStats> history;
  };
  std::vector<Entry> entries;
  std::vector<Utterance> train_set;
  std::vector<Utterance> dev_set;

  const Entry &at(std::string_view name) const;
};

struct StrategyStudy {
  std::vector<SeedRun> runs;
  double seconds = 0.0;
};

using Logger = std::function<void(const std::string &)>;

StrategyStudy run_strategy_study(const ToyTask &task, const Logger &log = {});

struct Options {
  // Criteria to run; empty means all.
  std::vector<int> only;
  ToyTask task;
  Logger log;
};

CriterionResult criterion_oracle_equivalence();
CriterionResult criterion_gradient_checks();
CriterionResult criterion_uniform_closed_form();
CriterionResult criterion_step_totals();
CriterionResult criterion_ctc_reduction();
CriterionResult criterion_decoder_invariants();
CriterionResult criterion_hallucination();
CriterionResult criterion_strategy_ordering(const StrategyStudy &study,
                                            const ToyTask &task);
CriterionResult criterion_shallow_fusion(const StrategyStudy &study,
                                         const ToyTask &task);

// Runs the selected criteria in order; the strategy study is trained once
// and shared by criteria 8 and 9.
std::vector<CriterionResult> run(const Options &options);

// "PASS  3  closed-form uniform lattice  (...)".
std::string format_line(const CriterionResult &r);

nlohmann::json to_json(const CriterionResult &r);

}  // namespace monotx::acceptance
