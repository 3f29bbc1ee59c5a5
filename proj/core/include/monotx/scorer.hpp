#pragma once

#include <functional>
#include <span>
#include <vector>

#include "monotx/numerics.hpp"

namespace monotx {

// Source of per-frame output distributions for decoding. Given frame t
// (0-based) and the label prefix emitted so far, returns the K
// log-probabilities v_{t,u} with u = |prefix|.
class ModelScorer {
 public:
  virtual ~ModelScorer() = default;

  virtual int frames() const = 0;
  virtual int vocab_size() const = 0;
  virtual int blank_id() const = 0;
  virtual std::vector<double> score(int t, std::span<const int> prefix) const = 0;
};

// Looks rows up in a JoinerLattice. The prefix content is ignored; prefixes
// longer than U reuse the last decoder row.
class LatticeScorer final : public ModelScorer {
 public:
  explicit LatticeScorer(JoinerLattice lattice) : lattice_(std::move(lattice)) {}

  int frames() const override { return lattice_.frames(); }
  int vocab_size() const override { return lattice_.vocab_size(); }
  int blank_id() const override { return lattice_.blank_id(); }
  std::vector<double> score(int t, std::span<const int> prefix) const override;

  const JoinerLattice &lattice() const noexcept { return lattice_; }

 private:
  JoinerLattice lattice_;
};

// Wraps an arbitrary function of (t, prefix) returning log-normalized rows.
class FunctionScorer final : public ModelScorer {
 public:
  using Fn = std::function<std::vector<double>(int, std::span<const int>)>;

  FunctionScorer(int frames, int vocab_size, int blank_id, Fn fn)
      : frames_(frames), vocab_size_(vocab_size), blank_id_(blank_id),
        fn_(std::move(fn)) {}

  int frames() const override { return frames_; }
  int vocab_size() const override { return vocab_size_; }
  int blank_id() const override { return blank_id_; }
  std::vector<double> score(int t, std::span<const int> prefix) const override {
    return fn_(t, prefix);
  }

 private:
  int frames_;
  int vocab_size_;
  int blank_id_;
  Fn fn_;
};

// Scorer whose every row puts more mass on a label than on the blank: the
// first non-blank symbol gets logit `margin`, everything else logit 0. Used
// to provoke runaway emission in RNN-T decoding.
FunctionScorer adversarial_scorer(int frames, int vocab_size, int blank_id = 0,
                                  double margin = 12.0);

// Materializes the rows a scorer produces for a fixed reference, giving the
// lattice the losses consume: row (t, u) = score(t, labels[0:u]).
JoinerLattice lattice_for_reference(const ModelScorer &scorer,
                                    std::span<const int> labels);

}  // namespace monotx
