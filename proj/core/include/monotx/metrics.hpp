#pragma once

#include <span>

namespace monotx {

struct EditCounts {
  int substitutions = 0;
  int insertions = 0;
  int deletions = 0;

  int total() const noexcept { return substitutions + insertions + deletions; }
};

// Unit-cost Levenshtein alignment of `hyp` against `ref`. Among equal-cost
// tracebacks, substitution is preferred over deletion over insertion.
EditCounts edit_distance(std::span<const int> ref, std::span<const int> hyp);

}  // namespace monotx
