#pragma once

#include <optional>
#include <string>
#include <vector>

#include "common.hpp"

namespace monotx::cli {

struct LossArgs {
  std::string loss = "rnnt";
  std::string lattice;  // LatticeFile path
  std::string graph;    // GraphFile path (ctct / monornnt only)
  std::optional<std::string> labels;
  bool uniform = false;
  // Defaults: 2 x 2 for --uniform, 6 x 4 for the bundled random instance.
  std::optional<int> frames;
  std::optional<int> vocab;
  int blank = 0;
  std::vector<int> band;  // ar-rnnt anchor frames (1-based)
  int left = 1;
  int right = 3;
  bool grad = false;
  bool gradcheck = false;
  bool oracle_check = false;
  std::string write_lattice;  // save the lattice used, as a LatticeFile
};

struct BuildGraphArgs {
  std::string topology = "ctct";
  std::string labels;
  int vocab = 0;  // 0: one more than the largest label
  int blank = 0;
  std::string out;
};

struct DecodeArgs {
  std::string topology = "ctct";
  std::string lattice;
  std::string checkpoint;
  int synthetic = 20;  // utterances to synthesize for --checkpoint
  // Same defaults as SyntheticSpec, i.e. as `train` without a data section.
  double noise = 0.5;
  double chain_prob = 0.0;
  int beam = 10;
  int nbest = 1;
  std::optional<int> max_emits;
  std::string lm;  // corpus file, one label sequence per line
  int lm_order = 2;
  double lm_weight = 0.3;
};

struct TrainArgs {
  std::string config;
  std::string out;
};

struct DemoArgs {
  int frames = 8;
  int vocab = 4;
  double margin = 12.0;
  std::optional<int> max_emits;
};

struct ReportArgs {
  std::vector<int> criteria;
};

Report run_loss(const LossArgs &args, std::uint64_t seed);
Report run_build_graph(const BuildGraphArgs &args, std::uint64_t seed);
Report run_decode(const DecodeArgs &args, std::uint64_t seed);
Report run_train(const TrainArgs &args, std::uint64_t seed);
Report run_demo(const DemoArgs &args, std::uint64_t seed);
Report run_report(const ReportArgs &args, std::uint64_t seed);

}  // namespace monotx::cli
