#include <benchmark/benchmark.h>

#include <random>

#include "monotx/instances.hpp"
#include "monotx/loss.hpp"
#include "monotx/topology.hpp"

namespace {

using namespace monotx;

constexpr int kVocab = 32;

// Utterance of T frames with U = T / 4 labels, as in a typical subword task.
struct Instance {
  JoinerLattice lattice;
  LabelSequence labels;
};

Instance make_instance(int frames) {
  std::mt19937_64 rng(7);
  const int U = frames / 4;
  return {instances::random_lattice(rng, frames, U, kVocab),
          instances::random_labels(rng, U, kVocab)};
}

void BM_RnntLoss(benchmark::State &state) {
  const Instance x = make_instance(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rnnt_loss(x.lattice, x.labels).loss);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RnntLoss)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_GraphLoss(benchmark::State &state) {
  const Instance x = make_instance(static_cast<int>(state.range(0)));
  const Topology topo = state.range(1) == 0 ? Topology::kCtcT : Topology::kMonoRnnT;
  const AlignmentGraph g = build_graph(topo, x.labels, 0, kVocab);
  state.SetLabel(std::string(to_string(topo)));
  for (auto _ : state) benchmark::DoNotOptimize(gtct_loss(g, x.lattice).loss);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GraphLoss)
    ->ArgsProduct({benchmark::CreateRange(16, 256, 2), {0, 1}});

void BM_ArRnntLoss(benchmark::State &state) {
  const Instance x = make_instance(static_cast<int>(state.range(0)));
  AlignmentBand band;
  band.left = 1;
  band.right = 3;
  const int U = static_cast<int>(x.labels.size());
  for (int l = 0; l < U; ++l) band.frames.push_back(1 + l * x.lattice.frames() / U);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ar_rnnt_loss(x.lattice, x.labels, band).loss);
  }
}
BENCHMARK(BM_ArRnntLoss)->RangeMultiplier(2)->Range(16, 256);

void BM_CtcLoss(benchmark::State &state) {
  const int T = static_cast<int>(state.range(0));
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  std::vector<double> logits(static_cast<std::size_t>(T) * kVocab);
  for (double &v : logits) v = normal(rng);
  const LabelSequence y = instances::random_labels(rng, T / 4, kVocab);
  for (auto _ : state) benchmark::DoNotOptimize(ctc_loss(logits, T, kVocab, 0, y).loss);
}
BENCHMARK(BM_CtcLoss)->RangeMultiplier(2)->Range(16, 256);

}  // namespace
