#pragma once

#include <map>
#include <span>
#include <vector>

#include "monotx/topology.hpp"

namespace monotx {

// External label-level language model for shallow fusion.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  // ln p(next | history). `next` is a non-blank vocabulary index.
  virtual double score(std::span<const int> history, int next) const = 0;
};

// Maximum-likelihood n-gram (order 1..3) with add-one smoothing over the
// K-1 non-blank labels. Histories shorter than order-1 are padded with a
// sentence-start symbol; there is no end-of-sentence token. Unseen
// contexts score uniformly.
class NgramLm final : public LanguageModel {
 public:
  static NgramLm train(const std::vector<LabelSequence> &corpus, int order,
                       int vocab_size, int blank_id);

  double score(std::span<const int> history, int next) const override;

  int order() const noexcept { return order_; }
  int vocab_size() const noexcept { return vocab_size_; }

 private:
  NgramLm(int order, int vocab_size, int blank_id)
      : order_(order), vocab_size_(vocab_size), blank_id_(blank_id) {}

  std::vector<int> context_of(std::span<const int> history) const;

  struct Counts {
    std::map<int, long> next;
    long total = 0;
  };

  int order_;
  int vocab_size_;
  int blank_id_;
  std::map<std::vector<int>, Counts> contexts_;
};

}  // namespace monotx
