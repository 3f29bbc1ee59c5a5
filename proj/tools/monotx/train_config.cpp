#include "train_config.hpp"

#include <set>
#include <string>

#include "monotx/error.hpp"

namespace monotx::cli {
namespace {

[[noreturn]] void bad(const std::string &what) {
  throw ValidationError("bad-train-config", what);
}

const nlohmann::json &section(const nlohmann::json &doc, const char *name,
                              const std::set<std::string> &keys) {
  static const nlohmann::json empty = nlohmann::json::object();
  if (!doc.contains(name)) return empty;
  const nlohmann::json &s = doc.at(name);
  if (!s.is_object()) bad(std::string(name) + " must be an object");
  for (const auto &[k, v] : s.items()) {
    if (!keys.contains(k)) bad("unknown key " + std::string(name) + "." + k);
  }
  return s;
}

template <typename T>
void read(const nlohmann::json &s, const char *key, T &out) {
  if (!s.contains(key)) return;
  try {
    out = s.at(key).get<T>();
  } catch (const nlohmann::json::exception &) {
    bad(std::string("wrong type for ") + key);
  }
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json &doc, std::uint64_t seed) {
  if (doc.is_discarded()) throw ValidationError("malformed-file", "config is not valid JSON");
  if (!doc.is_object()) bad("config must be a JSON object");
  for (const auto &[k, v] : doc.items()) {
    if (k != "data" && k != "model" && k != "train") bad("unknown section " + k);
  }
  RunConfig cfg;

  const auto &data = section(doc, "data", {"train_items", "dev_items", "noise", "chain_prob"});
  int dev_items = 100;
  read(data, "train_items", cfg.train_data.num_items);
  read(data, "dev_items", dev_items);
  read(data, "noise", cfg.train_data.noise);
  read(data, "chain_prob", cfg.train_data.chain_prob);
  cfg.train_data.seed = 1000 + seed;
  cfg.dev_data = cfg.train_data;
  cfg.dev_data.num_items = dev_items;
  cfg.dev_data.seed = 2000 + seed;
  check_spec(cfg.train_data);
  check_spec(cfg.dev_data);

  const auto &model = section(doc, "model", {"hidden", "encoder", "context"});
  int hidden = cfg.dims.enc_hidden;
  std::string encoder = "recurrent";
  read(model, "hidden", hidden);
  read(model, "encoder", encoder);
  read(model, "context", cfg.dims.context);
  if (hidden < 1) bad("model.hidden must be >= 1");
  if (encoder == "recurrent") {
    cfg.dims.encoder = EncoderKind::kRecurrent;
  } else if (encoder == "context-window") {
    cfg.dims.encoder = EncoderKind::kContextWindow;
  } else {
    bad("model.encoder must be recurrent or context-window");
  }
  cfg.dims.enc_hidden = cfg.dims.pred_hidden = cfg.dims.joint_hidden = hidden;
  cfg.dims.input_dim = cfg.train_data.feature_dim;
  cfg.dims.vocab_size = cfg.train_data.vocab_size;
  cfg.dims.blank_id = cfg.train_data.blank_id;

  const auto &tr = section(doc, "train",
                           {"loss", "strategy", "init_checkpoint", "ctc_weight", "epochs",
                            "base_lr", "warmup_iters", "schedule", "optimizer", "momentum",
                            "batch_size", "clip_norm", "ar_left", "ar_right", "eval_beam"});
  TrainConfig &t = cfg.train;
  std::string loss(to_string(t.loss));
  std::string strategy(to_string(t.strategy));
  std::string schedule(to_string(t.schedule));
  std::string optimizer(to_string(t.optimizer));
  read(tr, "loss", loss);
  read(tr, "strategy", strategy);
  read(tr, "schedule", schedule);
  read(tr, "optimizer", optimizer);
  t.loss = parse_transducer_loss(loss);
  t.strategy = parse_strategy(strategy);
  t.schedule = parse_schedule(schedule);
  t.optimizer = parse_optimizer(optimizer);
  read(tr, "init_checkpoint", t.init_checkpoint);
  read(tr, "ctc_weight", t.ctc_weight);
  read(tr, "epochs", t.epochs);
  read(tr, "base_lr", t.base_lr);
  read(tr, "warmup_iters", t.warmup_iters);
  read(tr, "momentum", t.momentum);
  read(tr, "batch_size", t.batch_size);
  read(tr, "clip_norm", t.clip_norm);
  read(tr, "ar_left", t.ar_left);
  read(tr, "ar_right", t.ar_right);
  read(tr, "eval_beam", t.eval_beam);
  t.seed = seed;
  return cfg;
}

nlohmann::json to_json(const RunConfig &cfg) {
  const TrainConfig &t = cfg.train;
  return {
      {"data",
       {{"train_items", cfg.train_data.num_items},
        {"dev_items", cfg.dev_data.num_items},
        {"noise", cfg.train_data.noise},
        {"chain_prob", cfg.train_data.chain_prob}}},
      {"model",
       {{"hidden", cfg.dims.enc_hidden},
        {"encoder",
         cfg.dims.encoder == EncoderKind::kRecurrent ? "recurrent" : "context-window"},
        {"context", cfg.dims.context}}},
      {"train",
       {{"loss", to_string(t.loss)},
        {"strategy", to_string(t.strategy)},
        {"init_checkpoint", t.init_checkpoint},
        {"ctc_weight", t.ctc_weight},
        {"epochs", t.epochs},
        {"base_lr", t.base_lr},
        {"warmup_iters", t.warmup_iters},
        {"schedule", to_string(t.schedule)},
        {"optimizer", to_string(t.optimizer)},
        {"momentum", t.momentum},
        {"batch_size", t.batch_size},
        {"clip_norm", t.clip_norm},
        {"ar_left", t.ar_left},
        {"ar_right", t.ar_right},
        {"eval_beam", t.eval_beam}}}};
}

}  // namespace monotx::cli
