#include "monotx/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "monotx/error.hpp"

namespace monotx::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxFrameSequences = 10'000'000;

double neg_log_or_inf(double log_p) { return log_p == kLogZero ? kInf : -log_p; }

class PathEnumerator {
 public:
  PathEnumerator(const AlignmentGraph &g, int frames, const JoinerLattice *lat)
      : g_(g), frames_(frames), lat_(lat) {
    out_edges_.resize(g.nodes.size());
    for (const auto &e : g.edges) out_edges_[e.from].push_back(&e);
  }

  std::vector<AlignmentPath> run() {
    if (frames_ > kMaxFrames) {
      throw OracleLimitError("enumeration limited to T <= " +
                             std::to_string(kMaxFrames) + ", got " +
                             std::to_string(frames_));
    }
    stack_.push_back(g_.start_id());
    expand(0, 0.0);
    return std::move(paths_);
  }

 private:
  void expand(int t, double logprob) {
    const int node = stack_.back();
    if (t == frames_) {
      for (const GraphEdge *e : out_edges_[node]) {
        if (e->to != g_.end_id() || !g_.is_emitting(node)) continue;
        if (paths_.size() >= kMaxPaths) {
          throw OracleLimitError("more than " + std::to_string(kMaxPaths) +
                                 " alignment paths");
        }
        AlignmentPath path{stack_, logprob};
        path.nodes.push_back(g_.end_id());
        paths_.push_back(std::move(path));
      }
      return;
    }
    for (const GraphEdge *e : out_edges_[node]) {
      if (e->to == g_.end_id()) continue;
      double step = 0.0;
      if (lat_ != nullptr) {
        step = lat_->logprob(t, e->decoder_state, g_.nodes[e->to].emit_label);
      }
      stack_.push_back(e->to);
      expand(t + 1, logprob + step);
      stack_.pop_back();
    }
  }

  const AlignmentGraph &g_;
  int frames_;
  const JoinerLattice *lat_;
  std::vector<std::vector<const GraphEdge *>> out_edges_;
  std::vector<int> stack_;
  std::vector<AlignmentPath> paths_;
};

// Calls fn(sequence) for every sequence in [0, K)^T.
template <typename Fn>
void for_each_frame_sequence(int frames, int vocab_size, Fn fn) {
  if (frames > kMaxFrames) {
    throw OracleLimitError("frame enumeration limited to T <= " +
                           std::to_string(kMaxFrames));
  }
  double total = std::pow(static_cast<double>(vocab_size), frames);
  if (total > static_cast<double>(kMaxFrameSequences)) {
    throw OracleLimitError("K^T = " + std::to_string(total) +
                           " frame sequences exceeds the enumeration limit");
  }
  std::vector<int> seq(frames, 0);
  while (true) {
    fn(std::span<const int>(seq));
    int pos = frames - 1;
    while (pos >= 0 && ++seq[pos] == vocab_size) seq[pos--] = 0;
    if (pos < 0) break;
  }
}

}  // namespace

std::vector<AlignmentPath> enumerate_alignments(const AlignmentGraph &graph,
                                                int frames) {
  return PathEnumerator(graph, frames, nullptr).run();
}

std::vector<AlignmentPath> enumerate_alignments(const AlignmentGraph &graph,
                                                const JoinerLattice &lat) {
  if (lat.labels() != graph.labels || lat.vocab_size() != graph.vocab_size) {
    throw ValidationError("shape-mismatch", "lattice does not match graph");
  }
  return PathEnumerator(graph, lat.frames(), &lat).run();
}

LabelSequence collapse_alignment(const AlignmentPath &path,
                                 const AlignmentGraph &graph) {
  LabelSequence out;
  int prev = -1;
  for (int node : path.nodes) {
    if (graph.is_emitting(node)) {
      const int label = graph.nodes[node].emit_label;
      if (label != graph.blank_id && node != prev) out.push_back(label);
    }
    prev = node;
  }
  return out;
}

double brute_force_loss(const AlignmentGraph &graph, const JoinerLattice &lat) {
  double log_p = kLogZero;
  for (const auto &path : enumerate_alignments(graph, lat)) {
    log_p = log_add(log_p, path.logprob);
  }
  return neg_log_or_inf(log_p);
}

double brute_force_frame_loss(Topology topology, const JoinerLattice &lat,
                              std::span<const int> labels) {
  const int blank = lat.blank_id();
  const int U = static_cast<int>(labels.size());
  double log_p = kLogZero;
  for_each_frame_sequence(
      lat.frames(), lat.vocab_size(), [&](std::span<const int> seq) {
        int emitted = 0;
        double logprob = 0.0;
        int prev = blank;
        for (int t = 0; t < static_cast<int>(seq.size()); ++t) {
          const int s = seq[t];
          const int row = std::min(emitted, U);
          logprob += lat.logprob(t, row, s);
          bool is_new_label = s != blank;
          if (topology == Topology::kCtcT && s == prev) is_new_label = false;
          if (is_new_label) {
            if (emitted >= U || labels[emitted] != s) return;
            ++emitted;
          }
          prev = s;
        }
        if (emitted == U) log_p = log_add(log_p, logprob);
      });
  return neg_log_or_inf(log_p);
}

namespace {

template <typename Allowed>
double enumerate_rnnt(const JoinerLattice &lat, std::span<const int> labels,
                      Allowed allowed) {
  const int T = lat.frames();
  const int U = static_cast<int>(labels.size());
  const int blank = lat.blank_id();
  double log_p = kLogZero;
  std::size_t visited = 0;
  // Moves from (t, u): blank advances t (the blank at (T-1, U) terminates),
  // label y_{u+1} advances u.
  std::function<void(int, int, double)> walk = [&](int t, int u, double lp) {
    if (++visited > kMaxPaths) {
      throw OracleLimitError("RNN-T enumeration exceeded the path limit");
    }
    if (t == T - 1 && u == U) {
      log_p = log_add(log_p, lp + lat.logprob(t, u, blank));
      return;
    }
    if (t < T - 1) walk(t + 1, u, lp + lat.logprob(t, u, blank));
    if (u < U && allowed(t, u)) {
      walk(t, u + 1, lp + lat.logprob(t, u, labels[u]));
    }
  };
  walk(0, 0, 0.0);
  return neg_log_or_inf(log_p);
}

}  // namespace

double brute_force_rnnt_loss(const JoinerLattice &lat,
                             std::span<const int> labels) {
  return enumerate_rnnt(lat, labels, [](int, int) { return true; });
}

double brute_force_ar_rnnt_loss(const JoinerLattice &lat,
                                std::span<const int> labels,
                                const AlignmentBand &band) {
  return enumerate_rnnt(lat, labels, [&band](int t, int u) {
    const int frame = t + 1;
    return frame >= band.frames[u] - band.left &&
           frame <= band.frames[u] + band.right;
  });
}

double brute_force_ctc_loss(std::span<const double> logits, int frames,
                            int vocab_size, int blank_id,
                            std::span<const int> labels) {
  const std::vector<double> lp =
      log_softmax_rows(logits, static_cast<std::size_t>(vocab_size));
  double log_p = kLogZero;
  LabelSequence collapsed;
  for_each_frame_sequence(frames, vocab_size, [&](std::span<const int> seq) {
    collapsed.clear();
    int prev = blank_id;
    double logprob = 0.0;
    for (int t = 0; t < frames; ++t) {
      logprob += lp[static_cast<std::size_t>(t) * vocab_size + seq[t]];
      if (seq[t] != blank_id && seq[t] != prev) collapsed.push_back(seq[t]);
      prev = seq[t];
    }
    if (std::equal(collapsed.begin(), collapsed.end(), labels.begin(),
                   labels.end())) {
      log_p = log_add(log_p, logprob);
    }
  });
  return neg_log_or_inf(log_p);
}

std::vector<double> finite_diff_grad(
    const std::function<double(std::span<const double>)> &fn,
    std::span<const double> x, double eps) {
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> grad(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    point[i] = x[i] + eps;
    const double up = fn(point);
    point[i] = x[i] - eps;
    const double down = fn(point);
    point[i] = x[i];
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

std::vector<double> finite_diff_grad(
    const std::function<double(const JoinerLattice &)> &loss_fn,
    const JoinerLattice &lat, double eps) {
  return finite_diff_grad(
      [&](std::span<const double> logits) {
        return loss_fn(
            lat.with_logits(std::vector<double>(logits.begin(), logits.end())));
      },
      lat.logits(), eps);
}

double max_relative_error(std::span<const double> a, std::span<const double> b,
                          double floor) {
  if (a.size() != b.size()) {
    throw ValidationError("shape-mismatch", "gradient sizes differ");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

double full_sum_log_prob(const ModelScorer &scorer, DecodeTopology topology,
                         std::span<const int> labels) {
  const JoinerLattice lat = lattice_for_reference(scorer, labels);
  switch (topology) {
    case DecodeTopology::kCtcT:
      return -gtct_loss(build_ctct_graph(labels, lat.blank_id(),
                                         lat.vocab_size()),
                        lat)
                  .loss;
    case DecodeTopology::kMonoRnnT:
      return -gtct_loss(build_monornnt_graph(labels, lat.blank_id(),
                                             lat.vocab_size()),
                        lat)
                  .loss;
    case DecodeTopology::kRnnT:
      return -rnnt_loss(lat, labels).loss;
  }
  return kLogZero;
}

ExhaustiveResult exhaustive_decode(const ModelScorer &scorer,
                                   DecodeTopology topology, int max_labels) {
  const int T = scorer.frames();
  const int K = scorer.vocab_size();
  if (K > 3 || T > 4 || max_labels > T || max_labels < 0) {
    throw OracleLimitError("exhaustive decode limited to K <= 3, T <= 4, "
                           "max_labels <= T");
  }
  std::vector<int> symbols;
  for (int k = 0; k < K; ++k) {
    if (k != scorer.blank_id()) symbols.push_back(k);
  }

  ExhaustiveResult best;
  bool have_best = false;
  auto consider = [&](const LabelSequence &labels) {
    const double score = full_sum_log_prob(scorer, topology, labels);
    // Lengths are visited in increasing order and sequences of one length
    // lexicographically, so only a strictly higher score replaces the best.
    if (!have_best || score > best.log_score) {
      best = {labels, score};
      have_best = true;
    }
  };

  LabelSequence labels;
  for (int len = 0; len <= max_labels; ++len) {
    std::vector<int> digits(len, 0);
    while (true) {
      labels.resize(len);
      for (int i = 0; i < len; ++i) labels[i] = symbols[digits[i]];
      consider(labels);
      int pos = len - 1;
      while (pos >= 0 && ++digits[pos] == static_cast<int>(symbols.size())) {
        digits[pos--] = 0;
      }
      if (pos < 0) break;
    }
  }
  return best;
}

}  // namespace monotx::oracle
