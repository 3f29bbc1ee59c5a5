#include "monotx/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "monotx/error.hpp"

namespace monotx {

namespace {
constexpr int kSentenceStart = -1;
}

NgramLm NgramLm::train(const std::vector<LabelSequence> &corpus, int order,
                       int vocab_size, int blank_id) {
  if (order < 1 || order > 3) {
    throw ValidationError("bad-lm-order", "n-gram order must be 1, 2 or 3");
  }
  if (vocab_size < 2 || blank_id < 0 || blank_id >= vocab_size) {
    throw ValidationError("bad-blank", "blank id outside [0, K) or K < 2");
  }
  NgramLm lm(order, vocab_size, blank_id);
  for (const auto &sentence : corpus) {
    check_labels(sentence, vocab_size, blank_id);
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      auto history = std::span<const int>(sentence).first(i);
      Counts &c = lm.contexts_[lm.context_of(history)];
      ++c.next[sentence[i]];
      ++c.total;
    }
  }
  return lm;
}

std::vector<int> NgramLm::context_of(std::span<const int> history) const {
  const int n = order_ - 1;
  std::vector<int> context(n, kSentenceStart);
  const int take = std::min<int>(n, static_cast<int>(history.size()));
  std::copy(history.end() - take, history.end(), context.end() - take);
  return context;
}

double NgramLm::score(std::span<const int> history, int next) const {
  if (next < 0 || next >= vocab_size_ || next == blank_id_) {
    throw ValidationError("invalid-label",
                          "LM cannot score symbol " + std::to_string(next));
  }
  const double vocab = vocab_size_ - 1;
  const auto it = contexts_.find(context_of(history));
  if (it == contexts_.end()) return -std::log(vocab);
  const auto count_it = it->second.next.find(next);
  const double count = count_it == it->second.next.end() ? 0.0 : count_it->second;
  return std::log((count + 1.0) / (static_cast<double>(it->second.total) + vocab));
}

}  // namespace monotx
