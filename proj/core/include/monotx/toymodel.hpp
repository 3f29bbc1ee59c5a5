#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "monotx/dataset.hpp"
#include "monotx/numerics.hpp"
#include "monotx/scorer.hpp"

namespace monotx {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class EncoderKind { kRecurrent, kContextWindow };

struct ModelDims {
  int input_dim = 5;
  int vocab_size = 5;
  int blank_id = 0;
  int enc_hidden = 16;
  int pred_hidden = 16;
  int joint_hidden = 16;
  EncoderKind encoder = EncoderKind::kRecurrent;
  // Frames on each side for the context-window encoder.
  int context = 1;

  friend bool operator==(const ModelDims &, const ModelDims &) = default;
};

// A named parameter matrix with its gradient buffer. Biases are n x 1.
struct Layer {
  std::string name;
  Matrix value;
  Matrix grad;
};

// Minimal transducer: a one-layer tanh encoder over the input frames, a
// one-layer tanh recurrent predictor over label embeddings (with a
// start-of-sentence symbol as y_0), an additive tanh joiner with a linear
// output layer of width K, and an auxiliary linear CTC head on the encoder.
class ToyModel {
 public:
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.
  static ToyModel random(const ModelDims &dims, std::uint64_t seed);
  static ToyModel zeros(const ModelDims &dims);

  const ModelDims &dims() const noexcept { return dims_; }
  std::vector<Layer> &layers() noexcept { return layers_; }
  const std::vector<Layer> &layers() const noexcept { return layers_; }
  Layer &layer(const std::string &name);
  const Layer &layer(const std::string &name) const;
  std::size_t parameter_count() const;
  void zero_grad();

  std::vector<std::string> &lineage() noexcept { return lineage_; }
  const std::vector<std::string> &lineage() const noexcept { return lineage_; }
  std::uint64_t seed() const noexcept { return seed_; }
  void set_seed(std::uint64_t seed) noexcept { seed_ = seed; }

  // Encoder states, one row per frame [T x enc_hidden].
  Matrix encode(const Utterance &x) const;
  // Predictor state after consuming `history` (y_0 = SOS first).
  Vector predictor_state(const Vector &prev, int label) const;
  Vector initial_predictor_state() const;

  // Joiner logits for every (t, u) of the reference.
  JoinerLattice forward_joint(const Utterance &x,
                              std::span<const int> labels) const;
  // Auxiliary CTC logits [T x K], row-major.
  std::vector<double> ctc_logits(const Utterance &x) const;

  // Accumulates parameter gradients given dL/dlogits for the joiner lattice
  // (scaled by `joint_scale`) and optionally dL/dlogits of the CTC head
  // (scaled by `ctc_scale`). Gradients add to the existing buffers.
  void backward(const Utterance &x, std::span<const int> labels,
                std::span<const double> joint_grad, double joint_scale,
                std::span<const double> ctc_grad, double ctc_scale);

 private:
  explicit ToyModel(const ModelDims &dims);

  Matrix encoder_inputs(const Utterance &x) const;

  ModelDims dims_;
  std::vector<Layer> layers_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> lineage_;
  std::uint64_t seed_ = 0;
};

// Decoding surface over a trained model: encoder states are computed once,
// predictor states are cached per prefix.
class ToyModelScorer final : public ModelScorer {
 public:
  ToyModelScorer(const ToyModel &model, const Utterance &x);

  int frames() const override { return static_cast<int>(enc_proj_.rows()); }
  int vocab_size() const override { return model_.dims().vocab_size; }
  int blank_id() const override { return model_.dims().blank_id; }
  std::vector<double> score(int t, std::span<const int> prefix) const override;

 private:
  const Vector &pred_proj(std::span<const int> prefix) const;

  const ToyModel &model_;
  Matrix enc_proj_;  // [T x J] joiner projection of encoder states
  mutable std::map<std::vector<int>, std::pair<Vector, Vector>> cache_;
};

}  // namespace monotx
