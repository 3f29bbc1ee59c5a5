#pragma once

#include <random>
#include <vector>

#include "monotx/numerics.hpp"
#include "monotx/topology.hpp"

// Random problem instances shared by the tests, benchmarks and the
// acceptance suite.
namespace monotx::instances {

// Standard-normal logits times `scale`.
inline JoinerLattice random_lattice(std::mt19937_64 &rng, int T, int U, int K,
                                    int blank = 0, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> logits(static_cast<std::size_t>(T) * (U + 1) * K);
  for (double &v : logits) v = normal(rng);
  return JoinerLattice(T, U, K, blank, std::move(logits));
}

// Rows identical across u, as produced by a decoder-independent model.
inline JoinerLattice decoder_free_lattice(std::mt19937_64 &rng, int T, int U,
                                          int K, int blank = 0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> logits(static_cast<std::size_t>(T) * (U + 1) * K);
  for (int t = 0; t < T; ++t) {
    std::vector<double> row(K);
    for (double &v : row) v = normal(rng);
    for (int u = 0; u <= U; ++u) {
      for (int k = 0; k < K; ++k) {
        logits[(static_cast<std::size_t>(t) * (U + 1) + u) * K + k] = row[k];
      }
    }
  }
  return JoinerLattice(T, U, K, blank, std::move(logits));
}

// U labels drawn uniformly from the K-1 non-blank symbols.
inline LabelSequence random_labels(std::mt19937_64 &rng, int U, int K,
                                   int blank = 0) {
  std::uniform_int_distribution<int> pick(0, K - 2);
  LabelSequence y(U);
  for (int &l : y) {
    l = pick(rng);
    if (l >= blank) ++l;
  }
  return y;
}

}  // namespace monotx::instances
