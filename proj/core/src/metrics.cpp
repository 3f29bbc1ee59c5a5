#include "monotx/metrics.hpp"

#include <algorithm>
#include <vector>

namespace monotx {

EditCounts edit_distance(std::span<const int> ref, std::span<const int> hyp) {
  const std::size_t R = ref.size();
  const std::size_t H = hyp.size();
  std::vector<int> d((R + 1) * (H + 1));
  auto at = [&](std::size_t i, std::size_t j) -> int & { return d[i * (H + 1) + j]; };
  for (std::size_t i = 0; i <= R; ++i) at(i, 0) = static_cast<int>(i);
  for (std::size_t j = 0; j <= H; ++j) at(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= R; ++i) {
    for (std::size_t j = 1; j <= H; ++j) {
      const int diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  EditCounts counts;
  std::size_t i = R, j = H;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool match = ref[i - 1] == hyp[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (match ? 0 : 1)) {
        if (!match) ++counts.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++counts.deletions;
      --i;
    } else {
      ++counts.insertions;
      --j;
    }
  }
  return counts;
}

}  // namespace monotx
