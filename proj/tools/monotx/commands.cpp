#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "monotx/acceptance.hpp"
#include "monotx/dataset.hpp"
#include "monotx/decode.hpp"
#include "monotx/error.hpp"
#include "monotx/instances.hpp"
#include "monotx/io.hpp"
#include "monotx/loss.hpp"
#include "monotx/metrics.hpp"
#include "monotx/ngram.hpp"
#include "monotx/oracle.hpp"
#include "monotx/scorer.hpp"
#include "monotx/toymodel.hpp"
#include "monotx/train.hpp"
#include "train_config.hpp"

namespace monotx::cli {
namespace {

constexpr double kGradEps = 1e-5;
constexpr double kGradTol = 1e-6;
constexpr double kOracleTol = 1e-10;

// ---- loss ----

// Anchors spread evenly over the utterance: label l at frame 1 + l*T/U.
AlignmentBand even_band(int frames, int labels, int left, int right) {
  AlignmentBand band;
  band.left = left;
  band.right = right;
  for (int l = 0; l < labels; ++l) band.frames.push_back(1 + l * frames / labels);
  return band;
}

// Frame-major [T x K] encoder logits for CTC: the u = 0 rows.
std::vector<double> ctc_logits_of(const JoinerLattice &lat) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(lat.frames()) * lat.vocab_size());
  for (int t = 0; t < lat.frames(); ++t) {
    for (int k = 0; k < lat.vocab_size(); ++k) out.push_back(lat.logit(t, 0, k));
  }
  return out;
}

bool same_loss(double x, double y, double tol) {
  if (std::isinf(x) || std::isinf(y)) return x == y;
  return std::abs(x - y) <= tol;
}

}  // namespace

Report run_loss(const LossArgs &args, std::uint64_t seed) {
  Report rep;
  rep.command = "loss";
  rep.seed = seed;
  const std::string &name = args.loss;
  if (name != "rnnt" && name != "ctct" && name != "monornnt" && name != "ar-rnnt" &&
      name != "ctc") {
    throw ValidationError("unknown-loss", "unknown loss '" + name + "'");
  }
  if (!args.graph.empty() && name != "ctct" && name != "monornnt") {
    throw ValidationError("bad-arguments", "--graph needs --loss ctct or monornnt");
  }

  std::optional<AlignmentGraph> graph;
  if (!args.graph.empty()) graph = read_graph_file(args.graph);

  std::mt19937_64 rng(seed);
  LabelSequence labels;
  std::string source;
  std::optional<JoinerLattice> lattice;
  if (!args.lattice.empty()) {
    source = "file";
    const LatticeFile file = read_lattice_file(args.lattice);
    lattice = file.to_lattice(args.blank);
  }
  if (args.labels) {
    labels = parse_labels(*args.labels);
  } else if (graph) {
    labels.clear();
  } else if (lattice) {
    throw ValidationError("bad-arguments", "--lattice needs --labels");
  } else if (!args.uniform) {
    labels = instances::random_labels(rng, 2, args.vocab.value_or(4), args.blank);
  }
  const int U = graph ? graph->labels : static_cast<int>(labels.size());
  if (!lattice) {
    if (args.uniform) {
      source = "uniform";
      lattice = JoinerLattice::uniform(args.frames.value_or(2), U,
                                       args.vocab.value_or(2), args.blank);
    } else {
      source = "random";
      lattice = instances::random_lattice(rng, args.frames.value_or(6), U,
                                          args.vocab.value_or(4), args.blank);
    }
  }
  const JoinerLattice &lat = *lattice;
  if (!args.write_lattice.empty()) {
    write_lattice_file(args.write_lattice, LatticeFile::from_lattice(lat));
  }
  if (name != "ctc" && lat.labels() != U) {
    throw ValidationError("shape-mismatch",
                          "lattice has " + std::to_string(lat.rows()) +
                              " decoder rows, labels need " + std::to_string(U + 1));
  }
  if (!graph && (name == "ctct" || name == "monornnt")) {
    graph = build_graph(parse_topology(name), labels, lat.blank_id(), lat.vocab_size());
  }
  const AlignmentBand band =
      args.band.empty()
          ? even_band(lat.frames(), U, args.left, args.right)
          : AlignmentBand{args.band, args.left, args.right};

  std::function<double(const JoinerLattice &)> loss_of;
  std::function<std::vector<double>(const JoinerLattice &)> grad_of;
  std::function<double()> brute_force;
  if (name == "rnnt") {
    loss_of = [&](const JoinerLattice &l) { return rnnt_loss(l, labels).loss; };
    grad_of = [&](const JoinerLattice &l) { return rnnt_loss(l, labels).grad_logits; };
    brute_force = [&] { return oracle::brute_force_rnnt_loss(lat, labels); };
  } else if (name == "ar-rnnt") {
    check_band(band, lat.frames(), U);
    loss_of = [&](const JoinerLattice &l) { return ar_rnnt_loss(l, labels, band).loss; };
    grad_of = [&](const JoinerLattice &l) {
      return ar_rnnt_loss(l, labels, band).grad_logits;
    };
    brute_force = [&] { return oracle::brute_force_ar_rnnt_loss(lat, labels, band); };
  } else if (name == "ctc") {
    auto ctc = [&](const JoinerLattice &l) {
      return ctc_loss(ctc_logits_of(l), l.frames(), l.vocab_size(), l.blank_id(), labels);
    };
    loss_of = [=](const JoinerLattice &l) { return ctc(l).loss; };
    grad_of = [=](const JoinerLattice &l) { return ctc(l).grad_logits; };
    brute_force = [&] {
      return oracle::brute_force_ctc_loss(ctc_logits_of(lat), lat.frames(),
                                          lat.vocab_size(), lat.blank_id(), labels);
    };
  } else {
    loss_of = [&](const JoinerLattice &l) { return gtct_loss(*graph, l).loss; };
    grad_of = [&](const JoinerLattice &l) { return gtct_loss(*graph, l).grad_logits; };
    brute_force = [&] { return oracle::brute_force_loss(*graph, lat); };
  }

  const double loss = loss_of(lat);
  const bool feasible = std::isfinite(loss);
  rep.config = {{"loss", name},
                {"source", source},
                {"lattice", args.lattice},
                {"graph", args.graph},
                {"labels", labels},
                {"T", lat.frames()},
                {"U", U},
                {"K", lat.vocab_size()},
                {"blank", lat.blank_id()},
                {"write_lattice", args.write_lattice}};
  if (name == "ar-rnnt") {
    rep.config["band"] = {{"frames", band.frames}, {"left", band.left}, {"right", band.right}};
  }
  rep.result["loss"] = feasible ? nlohmann::json(loss) : nlohmann::json("inf");
  rep.result["feasible"] = feasible;

  if (args.grad) {
    const std::vector<double> g = grad_of(lat);
    rep.result["grad"] = g;
    rep.result["grad_shape"] =
        name == "ctc" ? std::vector<int>{lat.frames(), lat.vocab_size()}
                      : std::vector<int>{lat.frames(), lat.rows(), lat.vocab_size()};
  }
  bool checks_ok = true;
  if (args.gradcheck) {
    if (!feasible) {
      rep.result["gradcheck"] = {{"skipped", "infeasible instance"}};
    } else {
      std::vector<double> analytic = grad_of(lat);
      std::vector<double> numeric = oracle::finite_diff_grad(loss_of, lat, kGradEps);
      if (name == "ctc") {
        // Only the u = 0 rows feed CTC.
        std::vector<double> row0;
        for (int t = 0; t < lat.frames(); ++t) {
          for (int k = 0; k < lat.vocab_size(); ++k) {
            row0.push_back(numeric[lat.index(t, 0, k)]);
          }
        }
        numeric = std::move(row0);
      }
      const double err = oracle::max_relative_error(analytic, numeric);
      const bool ok = err <= kGradTol;
      rep.result["gradcheck"] = {{"max_relative_error", err},
                                 {"epsilon", kGradEps},
                                 {"tolerance", kGradTol},
                                 {"passed", ok}};
      checks_ok = checks_ok && ok;
    }
  }
  if (args.oracle_check) {
    try {
      const double slow = brute_force();
      const bool ok = same_loss(loss, slow, kOracleTol);
      rep.result["oracle_check"] = {
          {"brute_force", std::isfinite(slow) ? nlohmann::json(slow) : nlohmann::json("inf")},
          {"abs_error", std::isfinite(slow) && feasible ? std::abs(loss - slow) : 0.0},
          {"tolerance", kOracleTol},
          {"passed", ok}};
      checks_ok = checks_ok && ok;
    } catch (const OracleLimitError &e) {
      throw ValidationError("oracle-limit", e.what());
    }
  }
  if (!checks_ok) rep.exit_code = kNumericCheck;
  return rep;
}

// ---- build-graph ----

Report run_build_graph(const BuildGraphArgs &args, std::uint64_t seed) {
  Report rep;
  rep.command = "build-graph";
  rep.seed = seed;
  const Topology topo = parse_topology(args.topology);
  const LabelSequence labels = parse_labels(args.labels);
  int K = args.vocab;
  if (K == 0) {
    K = std::max(args.blank, 0) + 1;
    for (int l : labels) K = std::max(K, l + 1);
    K = std::max(K, 2);
  }
  const AlignmentGraph g = build_graph(topo, labels, args.blank, K);
  const nlohmann::json doc = graph_to_json(g);
  if (!args.out.empty()) write_file(args.out, doc.dump(2) + "\n");
  rep.config = {{"topology", args.topology},
                {"labels", labels},
                {"K", K},
                {"blank", args.blank},
                {"out", args.out}};
  rep.result = {{"nodes", g.nodes.size()},
                {"edges", g.edges.size()},
                {"min_path_len", g.min_path_len},
                {"graph", doc}};
  return rep;
}

// ---- decode ----

namespace {

std::vector<LabelSequence> read_corpus(const std::string &path) {
  std::istringstream in(read_file(path));
  std::vector<LabelSequence> corpus;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    corpus.push_back(parse_labels(line));
  }
  return corpus;
}

DecodeResult decode_with(const ModelScorer &scorer, oracle::DecodeTopology topo,
                         const DecodeConfig &cfg, const LanguageModel *lm) {
  switch (topo) {
    case oracle::DecodeTopology::kCtcT:
      return beam_search_monotonic(scorer, Topology::kCtcT, cfg, lm);
    case oracle::DecodeTopology::kMonoRnnT:
      return beam_search_monotonic(scorer, Topology::kMonoRnnT, cfg, lm);
    case oracle::DecodeTopology::kRnnT:
      break;
  }
  return beam_search_rnnt(scorer, cfg, lm);
}

oracle::DecodeTopology parse_decode_topology(const std::string &name) {
  if (name == "ctct") return oracle::DecodeTopology::kCtcT;
  if (name == "monornnt") return oracle::DecodeTopology::kMonoRnnT;
  if (name == "rnnt") return oracle::DecodeTopology::kRnnT;
  throw ValidationError("unknown-topology", "unknown topology '" + name + "'");
}

nlohmann::json nbest_json(const DecodeResult &d, const DecodeConfig &cfg, int n) {
  nlohmann::json out = nlohmann::json::array();
  for (int i = 0; i < n && i < static_cast<int>(d.nbest.size()); ++i) {
    const Hypothesis &h = d.nbest[i];
    out.push_back({{"labels", h.prefix},
                   {"score", combined_score(h, cfg)},
                   {"am_score", h.am_score},
                   {"lm_score", h.lm_score}});
  }
  return out;
}

}  // namespace

Report run_decode(const DecodeArgs &args, std::uint64_t seed) {
  Report rep;
  rep.command = "decode";
  rep.seed = seed;
  if (args.lattice.empty() == args.checkpoint.empty()) {
    throw ValidationError("bad-arguments", "give exactly one of --lattice, --checkpoint");
  }
  const oracle::DecodeTopology topo = parse_decode_topology(args.topology);
  DecodeConfig cfg;
  cfg.beam_size = args.beam;
  cfg.lm_weight = args.lm_weight;
  cfg.max_emits_per_step = args.max_emits;
  check_config(cfg);
  if (args.nbest < 1) throw ValidationError("bad-arguments", "--nbest must be >= 1");

  std::optional<NgramLm> lm;
  auto load_lm = [&](int vocab_size) {
    if (!args.lm.empty()) lm = NgramLm::train(read_corpus(args.lm), args.lm_order, vocab_size, 0);
  };
  rep.config = {{"topology", args.topology},
                {"beam", args.beam},
                {"nbest", args.nbest},
                {"lm", args.lm},
                {"lm_order", args.lm_order},
                {"lm_weight", args.lm.empty() ? 0.0 : args.lm_weight}};
  if (args.max_emits) rep.config["max_emits_per_step"] = *args.max_emits;

  if (!args.lattice.empty()) {
    const JoinerLattice lat = read_lattice_file(args.lattice).to_lattice(0);
    load_lm(lat.vocab_size());
    const LatticeScorer scorer(lat);
    const DecodeResult d = decode_with(scorer, topo, cfg, lm ? &*lm : nullptr);
    rep.config["lattice"] = args.lattice;
    rep.result = {{"frames", d.frames},
                  {"runaway", d.runaway},
                  {"nbest", nbest_json(d, cfg, args.nbest)}};
    return rep;
  }

  const ToyModel model = load_checkpoint(args.checkpoint);
  load_lm(model.dims().vocab_size);
  SyntheticSpec spec;
  spec.num_items = args.synthetic;
  spec.vocab_size = model.dims().vocab_size;
  spec.blank_id = model.dims().blank_id;
  spec.feature_dim = model.dims().input_dim;
  spec.noise = args.noise;
  spec.chain_prob = args.chain_prob;
  spec.seed = seed;
  const std::vector<Utterance> data = gen_synthetic(spec);
  rep.config["checkpoint"] = args.checkpoint;
  rep.config["synthetic"] = {{"items", args.synthetic},
                             {"noise", args.noise},
                             {"chain_prob", args.chain_prob}};
  nlohmann::json items = nlohmann::json::array();
  long errors = 0;
  long tokens = 0;
  for (const auto &x : data) {
    const ToyModelScorer scorer(model, x);
    const DecodeResult d = decode_with(scorer, topo, cfg, lm ? &*lm : nullptr);
    const int e = edit_distance(x.labels, d.best().prefix).total();
    errors += e;
    tokens += static_cast<long>(x.labels.size());
    items.push_back({{"reference", x.labels},
                     {"errors", e},
                     {"runaway", d.runaway},
                     {"nbest", nbest_json(d, cfg, args.nbest)}});
  }
  rep.result = {{"token_error", tokens ? static_cast<double>(errors) / tokens : 0.0},
                {"errors", errors},
                {"ref_tokens", tokens},
                {"items", items}};
  return rep;
}

// ---- train ----

Report run_train(const TrainArgs &args, std::uint64_t seed) {
  Report rep;
  rep.command = "train";
  rep.seed = seed;
  const RunConfig run = parse_run_config(nlohmann::json::parse(read_file(args.config), nullptr,
                                                               /*allow_exceptions=*/false),
                                         seed);
  rep.config = to_json(run);
  check_config(run.train);
  const std::vector<Utterance> train_set = gen_synthetic(run.train_data);
  const std::vector<Utterance> dev_set = gen_synthetic(run.dev_data);
  ToyModel start = initial_model(run.dims, run.train);
  log("train: " + std::to_string(train_set.size()) + " items, " +
      std::to_string(run.train.epochs) + " epochs, loss " +
      std::string(to_string(run.train.loss)));
  const TrainResult res = train(std::move(start), train_set, dev_set, run.train);
  nlohmann::json history = nlohmann::json::array();
  for (const auto &h : res.history) {
    log("epoch " + std::to_string(h.epoch) + ": loss " + std::to_string(h.train_loss) +
        ", dev token error " + std::to_string(h.dev_token_error));
    history.push_back({{"epoch", h.epoch},
                       {"train_loss", h.train_loss},
                       {"dev_token_error", h.dev_token_error},
                       {"dev_sequence_error", h.dev_sequence_error},
                       {"last_lr", h.last_lr},
                       {"skipped", h.skipped}});
  }
  std::string out = args.out;
  if (!out.empty()) save_checkpoint(res.model, out);
  rep.result = {{"history", history},
                {"lineage", res.model.lineage()},
                {"checkpoint", out.empty() ? nlohmann::json(nullptr)
                                           : nlohmann::json({{"json", out + ".json"},
                                                             {"bin", out + ".bin"}})}};
  return rep;
}

// ---- demo-hallucination ----

Report run_demo(const DemoArgs &args, std::uint64_t seed) {
  Report rep;
  rep.command = "demo-hallucination";
  rep.seed = seed;
  if (args.frames < 1 || args.vocab < 2) {
    throw ValidationError("bad-arguments", "need --T >= 1 and --K >= 2");
  }
  const FunctionScorer scorer = adversarial_scorer(args.frames, args.vocab, 0, args.margin);
  DecodeConfig cfg;
  cfg.max_emits_per_step = args.max_emits;
  rep.config = {{"T", args.frames}, {"K", args.vocab}, {"margin", args.margin}};
  if (args.max_emits) rep.config["max_emits_per_step"] = *args.max_emits;

  auto entry = [](const DecodeResult &d) {
    return nlohmann::json{{"emissions", d.best().prefix.size()},
                          {"runaway", d.runaway},
                          {"max_emits_in_frame", d.max_emits_in_frame},
                          {"frames", d.frames}};
  };
  nlohmann::json results;
  results["rnnt"] = entry(greedy_rnnt(scorer, cfg));
  results["rnnt_beam"] = entry(beam_search_rnnt(scorer, cfg));
  results["ctct"] = entry(greedy_monotonic(scorer, Topology::kCtcT));
  results["monornnt"] = entry(greedy_monotonic(scorer, Topology::kMonoRnnT));
  rep.result = {{"runaway_cap", runaway_cap(args.frames)}, {"topologies", results}};
  return rep;
}

// ---- report ----

Report run_report(const ReportArgs &args, std::uint64_t seed) {
  Report rep;
  rep.command = "report";
  rep.seed = seed;
  acceptance::Options options;
  options.only = args.criteria;
  options.log = [](const std::string &line) { log(line); };
  const acceptance::ToyTask &task = options.task;
  rep.config = {{"criteria", args.criteria},
                {"toy_task",
                 {{"train_items", task.train_items},
                  {"dev_items", task.dev_items},
                  {"noise", task.noise},
                  {"chain_prob", task.chain_prob},
                  {"hidden", task.hidden},
                  {"scratch_epochs", task.scratch_epochs},
                  {"adapt_epochs", task.adapt_epochs},
                  {"base_lr", task.base_lr},
                  {"adapt_lr_scale", task.adapt_lr_scale},
                  {"seeds", task.seeds}}}};
  const auto results = acceptance::run(options);
  nlohmann::json criteria = nlohmann::json::array();
  int passed = 0;
  for (const auto &r : results) {
    criteria.push_back(acceptance::to_json(r));
    passed += r.passed;
  }
  rep.result = {{"criteria", criteria},
                {"passed", passed},
                {"total", results.size()}};
  if (passed != static_cast<int>(results.size())) rep.exit_code = kNumericCheck;
  return rep;
}

}  // namespace monotx::cli
