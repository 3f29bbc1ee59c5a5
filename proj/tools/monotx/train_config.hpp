#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>

#include "monotx/dataset.hpp"
#include "monotx/toymodel.hpp"
#include "monotx/train.hpp"

namespace monotx::cli {

// Everything `monotx train` needs, read from one JSON document:
//
//   { "data":  { "train_items", "dev_items", "noise", "chain_prob" },
//     "model": { "hidden", "encoder", "context" },
//     "train": { "loss", "strategy", "init_checkpoint", "ctc_weight",
//                "epochs", "base_lr", "warmup_iters", "schedule",
//                "optimizer", "momentum", "batch_size", "clip_norm",
//                "ar_left", "ar_right", "eval_beam" } }
//
// Every key is optional; unknown keys are rejected. The seed comes from the
// command line and drives data (train 1000 + seed, dev 2000 + seed), model
// initialization and shuffling.
struct RunConfig {
  SyntheticSpec train_data;
  SyntheticSpec dev_data;
  ModelDims dims;
  TrainConfig train;
};

RunConfig parse_run_config(const nlohmann::json &doc, std::uint64_t seed);

// The effective configuration, defaults filled in.
nlohmann::json to_json(const RunConfig &cfg);

}  // namespace monotx::cli
