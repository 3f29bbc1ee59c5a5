#include <cmath>
#include <limits>

#include "monotx/error.hpp"
#include "monotx/loss.hpp"

namespace monotx {

namespace {

void check_compatible(const AlignmentGraph &g, const JoinerLattice &lat) {
  const GraphReport report = validate_graph(g);
  if (!report.ok()) {
    throw ValidationError(std::string(to_string(report.error)),
                          report.message);
  }
  if (lat.labels() != g.labels || lat.vocab_size() != g.vocab_size ||
      lat.blank_id() != g.blank_id) {
    throw ValidationError(
        "shape-mismatch",
        "lattice (U=" + std::to_string(lat.labels()) +
            ", K=" + std::to_string(lat.vocab_size()) +
            ") does not match graph (U=" + std::to_string(g.labels) +
            ", K=" + std::to_string(g.vocab_size) + ")");
  }
}

// Observation on the edge at 1-based frame t.
double edge_obs(const AlignmentGraph &g, const JoinerLattice &lat,
                const GraphEdge &e, int t) {
  return lat.logprob(t - 1, e.decoder_state, g.nodes[e.to].emit_label);
}

LogTable forward_table(const AlignmentGraph &g, const JoinerLattice &lat) {
  const int T = lat.frames();
  const int end = g.end_id();
  LogTable alpha(T + 1, static_cast<int>(g.nodes.size()));
  alpha(0, g.start_id()) = 0.0;
  for (int t = 1; t <= T; ++t) {
    for (const auto &e : g.edges) {
      if (e.to == end) continue;
      const double prev = alpha(t - 1, e.from);
      if (prev == kLogZero) continue;
      alpha(t, e.to) = log_add(alpha(t, e.to), prev + edge_obs(g, lat, e, t));
    }
  }
  for (const auto &e : g.edges) {
    if (e.to == end && g.is_emitting(e.from)) {
      alpha(T, end) = log_add(alpha(T, end), alpha(T, e.from));
    }
  }
  return alpha;
}

LogTable backward_table(const AlignmentGraph &g, const JoinerLattice &lat) {
  const int T = lat.frames();
  const int end = g.end_id();
  LogTable beta(T + 1, static_cast<int>(g.nodes.size()));
  beta(T, end) = 0.0;
  for (const auto &e : g.edges) {
    if (e.to == end && g.is_emitting(e.from)) beta(T, e.from) = 0.0;
  }
  for (int t = T - 1; t >= 0; --t) {
    for (const auto &e : g.edges) {
      if (e.to == end) continue;
      const double next = beta(t + 1, e.to);
      if (next == kLogZero) continue;
      beta(t, e.from) =
          log_add(beta(t, e.from), next + edge_obs(g, lat, e, t + 1));
    }
  }
  return beta;
}

}  // namespace

LogTable gtct_forward(const AlignmentGraph &graph, const JoinerLattice &lat) {
  check_compatible(graph, lat);
  return forward_table(graph, lat);
}

LogTable gtct_backward(const AlignmentGraph &graph, const JoinerLattice &lat) {
  check_compatible(graph, lat);
  return backward_table(graph, lat);
}

LossOutput gtct_loss(const AlignmentGraph &graph, const JoinerLattice &lat) {
  check_compatible(graph, lat);
  const LogTable alpha = forward_table(graph, lat);
  const LogTable beta = backward_table(graph, lat);
  const int T = lat.frames();
  const int end = graph.end_id();
  const double log_p = alpha(T, end);

  LossOutput out;
  out.grad_logits.assign(lat.size(), 0.0);
  out.posterior.assign(lat.size(), 0.0);
  if (log_p == kLogZero) {
    out.loss = std::numeric_limits<double>::infinity();
    out.feasible = false;
    return out;
  }
  out.loss = -log_p;

  for (int t = 1; t <= T; ++t) {
    for (const auto &e : graph.edges) {
      if (e.to == end) continue;
      const double a = alpha(t - 1, e.from);
      const double b = beta(t, e.to);
      if (a == kLogZero || b == kLogZero) continue;
      const int k = graph.nodes[e.to].emit_label;
      out.posterior[lat.index(t - 1, e.decoder_state, k)] +=
          std::exp(a + edge_obs(graph, lat, e, t) + b - log_p);
    }
  }

  const int K = lat.vocab_size();
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u < lat.rows(); ++u) {
      const std::size_t base = lat.index(t, u, 0);
      double occupancy = 0.0;
      for (int k = 0; k < K; ++k) occupancy += out.posterior[base + k];
      if (occupancy == 0.0) continue;
      for (int k = 0; k < K; ++k) {
        out.grad_logits[base + k] =
            std::exp(lat.logprobs()[base + k]) * occupancy -
            out.posterior[base + k];
      }
    }
  }
  return out;
}

std::vector<double> gtct_step_totals(const AlignmentGraph &graph,
                                     const JoinerLattice &lat) {
  check_compatible(graph, lat);
  const LogTable alpha = forward_table(graph, lat);
  const LogTable beta = backward_table(graph, lat);
  const int T = lat.frames();
  std::vector<double> totals(T, kLogZero);
  for (int t = 1; t <= T; ++t) {
    for (const auto &e : graph.edges) {
      if (e.to == graph.end_id()) continue;
      totals[t - 1] =
          log_add(totals[t - 1], alpha(t - 1, e.from) +
                                     edge_obs(graph, lat, e, t) +
                                     beta(t, e.to));
    }
  }
  return totals;
}

}  // namespace monotx
