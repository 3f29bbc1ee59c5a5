// monotx: command-line front end. Reports go to stdout as JSON, logs to
// stderr. Exit 0 on success, 1 on validation errors, 2 when a numerical
// check fails.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "monotx/error.hpp"

namespace {

using namespace monotx::cli;

int emit_error(const std::string &command, const std::string &code,
               const std::string &message, int exit_code) {
  nlohmann::json doc = {{"command", command},
                        {"version", MONOTX_VERSION},
                        {"error", code},
                        {"message", message}};
  std::cout << doc.dump(2) << std::endl;
  log("error: " + message);
  return exit_code;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"monotx: monotonic transducer losses, decoders and toy training"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MONOTX_VERSION);
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--seed", seed_flag, "Seed (default: $MONOTX_SEED or 0)");

  LossArgs loss;
  auto *loss_cmd = app.add_subcommand("loss", "Compute a loss, its gradient and checks");
  loss_cmd->add_option("--loss", loss.loss, "rnnt, ctct, monornnt, ar-rnnt or ctc")
      ->check(CLI::IsMember({"rnnt", "ctct", "monornnt", "ar-rnnt", "ctc"}));
  loss_cmd->add_option("--lattice", loss.lattice, "LatticeFile with joiner logits");
  loss_cmd->add_option("--graph", loss.graph, "GraphFile (ctct / monornnt)");
  loss_cmd->add_option("--labels", loss.labels, "Reference: letters (a=1) or 1,2,...");
  loss_cmd->add_flag("--uniform", loss.uniform, "All-equal logits lattice");
  loss_cmd->add_option("--T", loss.frames, "Frames for --uniform / random");
  loss_cmd->add_option("--K", loss.vocab, "Vocabulary size incl. blank");
  loss_cmd->add_option("--blank", loss.blank, "Blank index");
  loss_cmd->add_option("--band", loss.band, "ar-rnnt anchor frames (1-based)")
      ->delimiter(',');
  loss_cmd->add_option("--left", loss.left, "ar-rnnt left buffer");
  loss_cmd->add_option("--right", loss.right, "ar-rnnt right buffer");
  loss_cmd->add_flag("--grad", loss.grad, "Include d loss / d logits");
  loss_cmd->add_flag("--gradcheck", loss.gradcheck, "Compare with finite differences");
  loss_cmd->add_flag("--oracle-check", loss.oracle_check, "Compare with brute force");
  loss_cmd->add_option("--write-lattice", loss.write_lattice,
                       "Save the lattice used as a LatticeFile");

  BuildGraphArgs graph;
  auto *graph_cmd = app.add_subcommand("build-graph", "Emit a GraphFile");
  graph_cmd->add_option("--topology", graph.topology, "ctct or monornnt")
      ->check(CLI::IsMember({"ctct", "monornnt"}));
  graph_cmd->add_option("--labels", graph.labels, "Reference labels")->required();
  graph_cmd->add_option("--K", graph.vocab, "Vocabulary size (default: max label + 1)");
  graph_cmd->add_option("--blank", graph.blank, "Blank index");
  graph_cmd->add_option("--out", graph.out, "Also write the graph here");

  DecodeArgs decode;
  auto *decode_cmd = app.add_subcommand("decode", "Beam search over a lattice or model");
  decode_cmd->add_option("--topology", decode.topology, "ctct, monornnt or rnnt")
      ->check(CLI::IsMember({"ctct", "monornnt", "rnnt"}));
  decode_cmd->add_option("--lattice", decode.lattice, "LatticeFile to decode");
  decode_cmd->add_option("--checkpoint", decode.checkpoint,
                         "Checkpoint prefix; decodes synthetic utterances");
  decode_cmd->add_option("--synthetic", decode.synthetic, "Utterances for --checkpoint");
  decode_cmd->add_option("--noise", decode.noise, "Feature noise for --checkpoint");
  decode_cmd->add_option("--chain-prob", decode.chain_prob, "Label chaining for --checkpoint");
  decode_cmd->add_option("--beam", decode.beam, "Beam size");
  decode_cmd->add_option("--nbest", decode.nbest, "Hypotheses to report");
  decode_cmd->add_option("--max-emits", decode.max_emits, "RNN-T labels per frame cap");
  decode_cmd->add_option("--lm", decode.lm, "LM corpus, one label sequence per line");
  decode_cmd->add_option("--lm-order", decode.lm_order, "n-gram order (1-3)");
  decode_cmd->add_option("--lm-weight", decode.lm_weight, "Shallow fusion weight");

  TrainArgs train;
  auto *train_cmd = app.add_subcommand("train", "Train the toy model from a JSON config");
  train_cmd->add_option("--config", train.config, "JSON config")->required();
  train_cmd->add_option("--out", train.out, "Checkpoint prefix (.json + .bin)");

  DemoArgs demo;
  auto *demo_cmd =
      app.add_subcommand("demo-hallucination", "Decoders under an adversarial scorer");
  demo_cmd->add_option("--T", demo.frames, "Frames");
  demo_cmd->add_option("--K", demo.vocab, "Vocabulary size incl. blank");
  demo_cmd->add_option("--margin", demo.margin, "Label-over-blank logit margin");
  demo_cmd->add_option("--max-emits", demo.max_emits, "RNN-T labels per frame cap");

  ReportArgs report;
  auto *report_cmd = app.add_subcommand("report", "Run the acceptance suite");
  report_cmd->add_option("--criteria", report.criteria, "Criteria to run, e.g. 1,3")
      ->delimiter(',');

  std::string command = "monotx";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    return emit_error(command, "usage", e.what(), kValidation);
  }

  try {
    const std::uint64_t seed = seed_flag ? *seed_flag : default_seed();
    Report rep;
    if (*loss_cmd) {
      command = "loss";
      rep = run_loss(loss, seed);
    } else if (*graph_cmd) {
      command = "build-graph";
      rep = run_build_graph(graph, seed);
    } else if (*decode_cmd) {
      command = "decode";
      rep = run_decode(decode, seed);
    } else if (*train_cmd) {
      command = "train";
      rep = run_train(train, seed);
    } else if (*demo_cmd) {
      command = "demo-hallucination";
      rep = run_demo(demo, seed);
    } else {
      command = "report";
      rep = run_report(report, seed);
    }
    std::cout << rep.to_json().dump(2) << std::endl;
    return rep.exit_code;
  } catch (const monotx::ValidationError &e) {
    return emit_error(command, e.code(), e.what(), kValidation);
  } catch (const monotx::DivergenceError &e) {
    return emit_error(command, "divergence", e.what(), kNumericCheck);
  } catch (const std::exception &e) {
    return emit_error(command, "internal-error", e.what(), kValidation);
  }
}
