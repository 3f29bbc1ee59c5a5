#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace monotx {

// Reference label sequence y_1..y_U. Labels are vocabulary indices in
// [0, K), never the blank.
using LabelSequence = std::vector<int>;

// Throws ValidationError("invalid-label") if any label is out of range or
// equals the blank.
void check_labels(std::span<const int> labels, int vocab_size, int blank_id);

enum class Topology { kCtcT, kMonoRnnT };

std::string_view to_string(Topology topology) noexcept;
// Accepts "ctct" / "monornnt". Throws ValidationError otherwise.
Topology parse_topology(std::string_view name);

inline constexpr int kNonEmitting = -1;

struct GraphNode {
  int id = 0;
  // Vocabulary index observed on entering this node, or kNonEmitting for the
  // start and end nodes.
  int emit_label = kNonEmitting;

  friend bool operator==(const GraphNode &, const GraphNode &) = default;
};

// A transition. Entering an emitting node consumes one frame and observes
// v[t][decoder_state][emit_label(to)]; edges into the end node are epsilon
// transitions and consume nothing.
struct GraphEdge {
  int from = 0;
  int to = 0;
  int decoder_state = 0;

  friend bool operator==(const GraphEdge &, const GraphEdge &) = default;
};

// Monotonic alignment topology. Node 0 is the start, node G+1 the end, and
// ids are a topological order once self-loops are ignored.
struct AlignmentGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  int labels = 0;  // U; decoder states range over [0, U]
  int vocab_size = 2;
  int blank_id = 0;
  // Fewest emitting steps on any start -> end path.
  int min_path_len = 0;

  int start_id() const noexcept { return 0; }
  int end_id() const noexcept { return static_cast<int>(nodes.size()) - 1; }
  bool is_emitting(int id) const noexcept {
    return id != start_id() && id != end_id();
  }

  friend bool operator==(const AlignmentGraph &,
                         const AlignmentGraph &) = default;
};

// Expanded chain  b y1 b y2 b ... yU b  with blank and label self-loops and a
// skip edge y_l -> y_{l+1} whenever the two labels differ. Label self-loops
// carry decoder state l (the predictor has consumed y_l).
AlignmentGraph build_ctct_graph(std::span<const int> labels, int blank_id,
                                int vocab_size);

// One blank node per decoder level 0..U (with self-loop) and one label node
// per reference label. Every path emits exactly one symbol per frame and
// back-to-back labels are allowed.
AlignmentGraph build_monornnt_graph(std::span<const int> labels, int blank_id,
                                    int vocab_size);

AlignmentGraph build_graph(Topology topology, std::span<const int> labels,
                           int blank_id, int vocab_size);

enum class GraphError {
  kOk,
  kTooFewNodes,
  kBadNodeId,
  kBadEmitLabel,
  kDanglingEdge,
  kEdgeIntoStart,
  kEdgeOutOfEnd,
  kTopologicalOrder,
  kDecoderStateRange,
  kUnreachable,
  kNotCoreachable,
  kMinPathLen,
};

// Stable kebab-case tag, e.g. "edge-into-start".
std::string_view to_string(GraphError error) noexcept;

struct GraphReport {
  GraphError error = GraphError::kOk;
  std::string message;

  bool ok() const noexcept { return error == GraphError::kOk; }
};

// Checks every AlignmentGraph invariant and reports the first violation.
GraphReport validate_graph(const AlignmentGraph &graph);

// Shortest start -> end path measured in emitting steps, or -1 if the end is
// unreachable.
int shortest_emitting_path(const AlignmentGraph &graph);

// Number of start -> end paths with exactly `frames` emitting steps.
std::uint64_t count_paths(const AlignmentGraph &graph, int frames);

}  // namespace monotx
