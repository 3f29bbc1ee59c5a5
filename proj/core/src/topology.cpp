#include "monotx/topology.hpp"

#include <deque>
#include <limits>

#include "monotx/error.hpp"

namespace monotx {

void check_labels(std::span<const int> labels, int vocab_size, int blank_id) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= vocab_size || y == blank_id) {
      throw ValidationError("invalid-label",
                            "label " + std::to_string(y) + " at position " +
                                std::to_string(i) +
                                " is blank or outside [0, K)");
    }
  }
}

std::string_view to_string(Topology topology) noexcept {
  switch (topology) {
    case Topology::kCtcT:
      return "ctct";
    case Topology::kMonoRnnT:
      return "monornnt";
  }
  return "unknown";
}

Topology parse_topology(std::string_view name) {
  if (name == "ctct") return Topology::kCtcT;
  if (name == "monornnt") return Topology::kMonoRnnT;
  throw ValidationError("unknown-topology",
                        "unknown topology '" + std::string(name) + "'");
}

namespace {

// Shared node layout of both builders: start, then b_0 y_1 b_1 ... y_U b_U,
// then end. Blank node l sits at 2l+1, label node l (1-based) at 2l.
int blank_node(int l) { return 2 * l + 1; }
int label_node(int l) { return 2 * l; }

AlignmentGraph chain_nodes(std::span<const int> labels, int blank_id,
                           int vocab_size) {
  if (vocab_size < 2 || blank_id < 0 || blank_id >= vocab_size) {
    throw ValidationError("bad-blank", "blank id outside [0, K) or K < 2");
  }
  check_labels(labels, vocab_size, blank_id);
  AlignmentGraph g;
  g.labels = static_cast<int>(labels.size());
  g.vocab_size = vocab_size;
  g.blank_id = blank_id;
  const int n_nodes = 2 * g.labels + 3;
  g.nodes.resize(n_nodes);
  for (int id = 0; id < n_nodes; ++id) g.nodes[id].id = id;
  g.nodes.front().emit_label = kNonEmitting;
  g.nodes.back().emit_label = kNonEmitting;
  for (int l = 0; l <= g.labels; ++l) g.nodes[blank_node(l)].emit_label = blank_id;
  for (int l = 1; l <= g.labels; ++l) {
    g.nodes[label_node(l)].emit_label = labels[l - 1];
  }
  return g;
}

}  // namespace

AlignmentGraph build_ctct_graph(std::span<const int> labels, int blank_id,
                                int vocab_size) {
  AlignmentGraph g = chain_nodes(labels, blank_id, vocab_size);
  const int U = g.labels;
  const int end = g.end_id();
  auto &e = g.edges;

  e.push_back({0, blank_node(0), 0});
  if (U >= 1) e.push_back({0, label_node(1), 0});

  for (int l = 0; l <= U; ++l) {
    if (l >= 1) {
      const int node = label_node(l);
      e.push_back({node, node, l});
      e.push_back({node, blank_node(l), l});
      if (l < U && labels[l - 1] != labels[l]) {
        e.push_back({node, label_node(l + 1), l});
      }
      if (l == U) e.push_back({node, end, U});
    }
    const int blank = blank_node(l);
    e.push_back({blank, blank, l});
    if (l < U) e.push_back({blank, label_node(l + 1), l});
    if (l == U) e.push_back({blank, end, U});
  }

  g.min_path_len = shortest_emitting_path(g);
  return g;
}

AlignmentGraph build_monornnt_graph(std::span<const int> labels, int blank_id,
                                    int vocab_size) {
  AlignmentGraph g = chain_nodes(labels, blank_id, vocab_size);
  const int U = g.labels;
  const int end = g.end_id();
  auto &e = g.edges;

  e.push_back({0, blank_node(0), 0});
  if (U >= 1) e.push_back({0, label_node(1), 0});

  for (int l = 0; l <= U; ++l) {
    if (l >= 1) {
      const int node = label_node(l);
      e.push_back({node, blank_node(l), l});
      if (l < U) e.push_back({node, label_node(l + 1), l});
      if (l == U) e.push_back({node, end, U});
    }
    const int blank = blank_node(l);
    e.push_back({blank, blank, l});
    if (l < U) e.push_back({blank, label_node(l + 1), l});
    if (l == U) e.push_back({blank, end, U});
  }

  g.min_path_len = shortest_emitting_path(g);
  return g;
}

AlignmentGraph build_graph(Topology topology, std::span<const int> labels,
                           int blank_id, int vocab_size) {
  switch (topology) {
    case Topology::kCtcT:
      return build_ctct_graph(labels, blank_id, vocab_size);
    case Topology::kMonoRnnT:
      return build_monornnt_graph(labels, blank_id, vocab_size);
  }
  throw ValidationError("unknown-topology", "unknown topology");
}

std::string_view to_string(GraphError error) noexcept {
  switch (error) {
    case GraphError::kOk:
      return "ok";
    case GraphError::kTooFewNodes:
      return "too-few-nodes";
    case GraphError::kBadNodeId:
      return "bad-node-id";
    case GraphError::kBadEmitLabel:
      return "bad-emit-label";
    case GraphError::kDanglingEdge:
      return "dangling-edge";
    case GraphError::kEdgeIntoStart:
      return "edge-into-start";
    case GraphError::kEdgeOutOfEnd:
      return "edge-out-of-end";
    case GraphError::kTopologicalOrder:
      return "bad-topological-order";
    case GraphError::kDecoderStateRange:
      return "decoder-state-range";
    case GraphError::kUnreachable:
      return "unreachable-node";
    case GraphError::kNotCoreachable:
      return "not-coreachable-node";
    case GraphError::kMinPathLen:
      return "min-path-len";
  }
  return "unknown";
}

namespace {

GraphReport fail(GraphError error, std::string message) {
  return {error, std::move(message)};
}

std::vector<bool> reach(const AlignmentGraph &g, bool forward) {
  const int n = static_cast<int>(g.nodes.size());
  std::vector<std::vector<int>> adj(n);
  for (const auto &e : g.edges) {
    if (forward) {
      adj[e.from].push_back(e.to);
    } else {
      adj[e.to].push_back(e.from);
    }
  }
  std::vector<bool> seen(n, false);
  std::deque<int> queue{forward ? g.start_id() : g.end_id()};
  seen[queue.front()] = true;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        queue.push_back(w);
      }
    }
  }
  return seen;
}

}  // namespace

GraphReport validate_graph(const AlignmentGraph &g) {
  const int n = static_cast<int>(g.nodes.size());
  if (n < 2) return fail(GraphError::kTooFewNodes, "graph needs start and end");
  for (int i = 0; i < n; ++i) {
    if (g.nodes[i].id != i) {
      return fail(GraphError::kBadNodeId,
                  "node at position " + std::to_string(i) + " has id " +
                      std::to_string(g.nodes[i].id));
    }
    const int label = g.nodes[i].emit_label;
    if (!g.is_emitting(i)) {
      if (label != kNonEmitting) {
        return fail(GraphError::kBadEmitLabel,
                    "start/end node " + std::to_string(i) + " emits a label");
      }
    } else if (label < 0 || label >= g.vocab_size) {
      return fail(GraphError::kBadEmitLabel,
                  "node " + std::to_string(i) + " label " +
                      std::to_string(label) + " outside [0, K)");
    }
  }
  for (const auto &e : g.edges) {
    const std::string tag =
        "edge " + std::to_string(e.from) + "->" + std::to_string(e.to);
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
      return fail(GraphError::kDanglingEdge, tag + " references missing node");
    }
    if (e.to == g.start_id()) {
      return fail(GraphError::kEdgeIntoStart, tag + " enters the start node");
    }
    if (e.from == g.end_id()) {
      return fail(GraphError::kEdgeOutOfEnd, tag + " leaves the end node");
    }
    if (e.from > e.to) {
      return fail(GraphError::kTopologicalOrder,
                  tag + " violates topological order");
    }
    if (e.decoder_state < 0 || e.decoder_state > g.labels) {
      return fail(GraphError::kDecoderStateRange,
                  tag + " decoder state " + std::to_string(e.decoder_state) +
                      " outside [0, " + std::to_string(g.labels) + "]");
    }
  }
  const auto fwd = reach(g, true);
  const auto bwd = reach(g, false);
  for (int i = 0; i < n; ++i) {
    if (!fwd[i]) {
      return fail(GraphError::kUnreachable,
                  "node " + std::to_string(i) + " unreachable from start");
    }
    if (!bwd[i]) {
      return fail(GraphError::kNotCoreachable,
                  "node " + std::to_string(i) + " cannot reach end");
    }
  }
  const int shortest = shortest_emitting_path(g);
  if (shortest != g.min_path_len) {
    return fail(GraphError::kMinPathLen,
                "min_path_len " + std::to_string(g.min_path_len) +
                    " but shortest path has " + std::to_string(shortest) +
                    " emitting steps");
  }
  return {};
}

int shortest_emitting_path(const AlignmentGraph &g) {
  const int n = static_cast<int>(g.nodes.size());
  if (n < 2) return -1;
  constexpr int kInf = std::numeric_limits<int>::max();
  std::vector<int> dist(n, kInf);
  dist[g.start_id()] = 0;
  // Ids are topological once self-loops are dropped, so one sweep in
  // source order relaxes every edge after its source is final.
  std::vector<std::vector<const GraphEdge *>> out(n);
  for (const auto &e : g.edges) {
    if (e.from >= 0 && e.from < n && e.to >= 0 && e.to < n) {
      out[e.from].push_back(&e);
    }
  }
  for (int v = 0; v < n; ++v) {
    if (dist[v] == kInf) continue;
    for (const GraphEdge *e : out[v]) {
      if (e->to <= v) continue;
      const int step = g.is_emitting(e->to) ? 1 : 0;
      dist[e->to] = std::min(dist[e->to], dist[v] + step);
    }
  }
  return dist[g.end_id()] == kInf ? -1 : dist[g.end_id()];
}

std::uint64_t count_paths(const AlignmentGraph &g, int frames) {
  const int n = static_cast<int>(g.nodes.size());
  std::vector<std::uint64_t> prev(n, 0), cur(n, 0);
  prev[g.start_id()] = 1;
  for (int t = 1; t <= frames; ++t) {
    std::fill(cur.begin(), cur.end(), 0);
    for (const auto &e : g.edges) {
      if (g.is_emitting(e.to)) cur[e.to] += prev[e.from];
    }
    std::swap(prev, cur);
  }
  std::uint64_t total = 0;
  for (const auto &e : g.edges) {
    if (e.to == g.end_id() && g.is_emitting(e.from)) total += prev[e.from];
  }
  return total;
}

}  // namespace monotx
