#include "monotx/toymodel.hpp"

#include <cmath>
#include <random>

#include "monotx/error.hpp"

namespace monotx {

namespace {

int encoder_input_width(const ModelDims &d) {
  return d.encoder == EncoderKind::kRecurrent ? d.input_dim
                                              : d.input_dim * (2 * d.context + 1);
}

void check_dims(const ModelDims &d) {
  if (d.input_dim < 1 || d.enc_hidden < 1 || d.pred_hidden < 1 ||
      d.joint_hidden < 1) {
    throw ValidationError("bad-model-dims", "model sizes must be positive");
  }
  if (d.vocab_size < 2 || d.blank_id < 0 || d.blank_id >= d.vocab_size) {
    throw ValidationError("bad-model-dims", "blank id outside [0, K)");
  }
  if (d.encoder == EncoderKind::kContextWindow && d.context < 0) {
    throw ValidationError("bad-model-dims", "context must be >= 0");
  }
}

Vector tanh(const Vector &v) { return v.array().tanh().matrix(); }

}  // namespace

ToyModel::ToyModel(const ModelDims &dims) : dims_(dims) {
  check_dims(dims);
  const int K = dims.vocab_size;
  auto add = [this](const std::string &name, int rows, int cols) {
    index_[name] = layers_.size();
    layers_.push_back({name, Matrix::Zero(rows, cols), Matrix::Zero(rows, cols)});
  };
  add("enc.in", dims.enc_hidden, encoder_input_width(dims));
  if (dims.encoder == EncoderKind::kRecurrent) {
    add("enc.rec", dims.enc_hidden, dims.enc_hidden);
  }
  add("enc.bias", dims.enc_hidden, 1);
  // Column K is the start-of-sentence embedding.
  add("pred.embed", dims.pred_hidden, K + 1);
  add("pred.rec", dims.pred_hidden, dims.pred_hidden);
  add("pred.bias", dims.pred_hidden, 1);
  add("join.enc", dims.joint_hidden, dims.enc_hidden);
  add("join.pred", dims.joint_hidden, dims.pred_hidden);
  add("join.bias", dims.joint_hidden, 1);
  add("join.out", K, dims.joint_hidden);
  add("join.out_bias", K, 1);
  add("ctc.out", K, dims.enc_hidden);
  add("ctc.bias", K, 1);
}

ToyModel ToyModel::zeros(const ModelDims &dims) { return ToyModel(dims); }

ToyModel ToyModel::random(const ModelDims &dims, std::uint64_t seed) {
  ToyModel m(dims);
  m.seed_ = seed;
  std::mt19937_64 rng(seed);
  for (auto &layer : m.layers_) {
    if (layer.value.cols() == 1) continue;  // biases start at zero
    const double scale = layer.name == "pred.embed"
                             ? 1.0
                             : 1.0 / std::sqrt(static_cast<double>(layer.value.cols()));
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (Eigen::Index i = 0; i < layer.value.size(); ++i) {
      layer.value.data()[i] = dist(rng);
    }
  }
  return m;
}

Layer &ToyModel::layer(const std::string &name) {
  const auto it = index_.find(name);
  if (it == index_.end()) {
    throw ValidationError("unknown-layer", "no layer named " + name);
  }
  return layers_[it->second];
}

const Layer &ToyModel::layer(const std::string &name) const {
  return const_cast<ToyModel *>(this)->layer(name);
}

std::size_t ToyModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto &l : layers_) n += static_cast<std::size_t>(l.value.size());
  return n;
}

void ToyModel::zero_grad() {
  for (auto &l : layers_) l.grad.setZero();
}

Matrix ToyModel::encoder_inputs(const Utterance &x) const {
  if (x.feature_dim != dims_.input_dim) {
    throw ValidationError("shape-mismatch",
                          "utterance feature_dim " + std::to_string(x.feature_dim) +
                              " != model input_dim " +
                              std::to_string(dims_.input_dim));
  }
  const int T = x.num_frames;
  const int F = x.feature_dim;
  if (dims_.encoder == EncoderKind::kRecurrent) {
    Matrix in(T, F);
    for (int t = 0; t < T; ++t) {
      for (int f = 0; f < F; ++f) in(t, f) = x.frame(t)[f];
    }
    return in;
  }
  const int c = dims_.context;
  Matrix in = Matrix::Zero(T, F * (2 * c + 1));
  for (int t = 0; t < T; ++t) {
    for (int off = -c; off <= c; ++off) {
      const int s = t + off;
      if (s < 0 || s >= T) continue;
      for (int f = 0; f < F; ++f) in(t, (off + c) * F + f) = x.frame(s)[f];
    }
  }
  return in;
}

Matrix ToyModel::encode(const Utterance &x) const {
  const Matrix in = encoder_inputs(x);
  const Matrix &w_in = layer("enc.in").value;
  const Vector bias = layer("enc.bias").value.col(0);
  const Matrix *w_rec = dims_.encoder == EncoderKind::kRecurrent
                            ? &layer("enc.rec").value
                            : nullptr;
  Matrix h(in.rows(), dims_.enc_hidden);
  for (Eigen::Index t = 0; t < in.rows(); ++t) {
    Vector a = w_in * in.row(t).transpose() + bias;
    if (w_rec != nullptr && t > 0) a += *w_rec * h.row(t - 1).transpose();
    h.row(t) = tanh(a).transpose();
  }
  return h;
}

Vector ToyModel::initial_predictor_state() const {
  return predictor_state(Vector::Zero(dims_.pred_hidden), dims_.vocab_size);
}

Vector ToyModel::predictor_state(const Vector &prev, int label) const {
  const Vector a = layer("pred.embed").value.col(label) +
                   layer("pred.rec").value * prev +
                   layer("pred.bias").value.col(0);
  return tanh(a);
}

namespace {

// Predictor states g_0 .. g_U, one row each.
Matrix predictor_states(const ToyModel &m, std::span<const int> labels) {
  Matrix g(labels.size() + 1, m.dims().pred_hidden);
  Vector state = m.initial_predictor_state();
  g.row(0) = state.transpose();
  for (std::size_t u = 0; u < labels.size(); ++u) {
    state = m.predictor_state(state, labels[u]);
    g.row(u + 1) = state.transpose();
  }
  return g;
}

}  // namespace

JoinerLattice ToyModel::forward_joint(const Utterance &x,
                                      std::span<const int> labels) const {
  check_labels(labels, dims_.vocab_size, dims_.blank_id);
  const Matrix h = encode(x);
  const Matrix g = predictor_states(*this, labels);
  const Matrix p = h * layer("join.enc").value.transpose();
  const Matrix q = g * layer("join.pred").value.transpose();
  const Vector bj = layer("join.bias").value.col(0);
  const Matrix &out = layer("join.out").value;
  const Vector ob = layer("join.out_bias").value.col(0);

  const int T = x.num_frames;
  const int U1 = static_cast<int>(labels.size()) + 1;
  const int K = dims_.vocab_size;
  std::vector<double> logits(static_cast<std::size_t>(T) * U1 * K);
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u < U1; ++u) {
      const Vector j = tanh(p.row(t).transpose() + q.row(u).transpose() + bj);
      const Vector z = out * j + ob;
      std::copy(z.data(), z.data() + K,
                logits.begin() + (static_cast<std::size_t>(t) * U1 + u) * K);
    }
  }
  return JoinerLattice(T, U1 - 1, K, dims_.blank_id, std::move(logits));
}

std::vector<double> ToyModel::ctc_logits(const Utterance &x) const {
  const Matrix h = encode(x);
  Matrix z = h * layer("ctc.out").value.transpose();
  z.rowwise() += layer("ctc.bias").value.col(0).transpose();
  return {z.data(), z.data() + z.size()};
}

void ToyModel::backward(const Utterance &x, std::span<const int> labels,
                        std::span<const double> joint_grad, double joint_scale,
                        std::span<const double> ctc_grad, double ctc_scale) {
  const Matrix in = encoder_inputs(x);
  const Matrix h = encode(x);
  const Matrix g = predictor_states(*this, labels);
  const int T = x.num_frames;
  const int U1 = static_cast<int>(labels.size()) + 1;
  const int K = dims_.vocab_size;
  const int J = dims_.joint_hidden;

  Matrix dh = Matrix::Zero(T, dims_.enc_hidden);
  Matrix dg = Matrix::Zero(U1, dims_.pred_hidden);

  if (joint_scale != 0.0) {
    if (joint_grad.size() != static_cast<std::size_t>(T) * U1 * K) {
      throw ValidationError("shape-mismatch", "joint gradient has wrong size");
    }
    Layer &w_je = layer("join.enc");
    Layer &w_jp = layer("join.pred");
    Layer &bj = layer("join.bias");
    Layer &out = layer("join.out");
    Layer &ob = layer("join.out_bias");
    const Matrix p = h * w_je.value.transpose();
    const Matrix q = g * w_jp.value.transpose();
    Matrix dp = Matrix::Zero(T, J);
    Matrix dq = Matrix::Zero(U1, J);
    for (int t = 0; t < T; ++t) {
      for (int u = 0; u < U1; ++u) {
        const std::size_t base = (static_cast<std::size_t>(t) * U1 + u) * K;
        const Vector gz =
            joint_scale * Eigen::Map<const Vector>(joint_grad.data() + base, K);
        if (gz.isZero(0.0)) continue;
        const Vector j = tanh(p.row(t).transpose() + q.row(u).transpose() +
                              bj.value.col(0));
        out.grad.noalias() += gz * j.transpose();
        ob.grad.col(0) += gz;
        const Vector dpre =
            ((out.value.transpose() * gz).array() * (1.0 - j.array().square()))
                .matrix();
        bj.grad.col(0) += dpre;
        dp.row(t) += dpre.transpose();
        dq.row(u) += dpre.transpose();
      }
    }
    w_je.grad.noalias() += dp.transpose() * h;
    dh.noalias() += dp * w_je.value;
    w_jp.grad.noalias() += dq.transpose() * g;
    dg.noalias() += dq * w_jp.value;
  }

  if (ctc_scale != 0.0 && !ctc_grad.empty()) {
    if (ctc_grad.size() != static_cast<std::size_t>(T) * K) {
      throw ValidationError("shape-mismatch", "CTC gradient has wrong size");
    }
    Layer &c_out = layer("ctc.out");
    Layer &c_bias = layer("ctc.bias");
    const Matrix gc = ctc_scale * Eigen::Map<const Matrix>(ctc_grad.data(), T, K);
    c_out.grad.noalias() += gc.transpose() * h;
    c_bias.grad.col(0) += gc.colwise().sum().transpose();
    dh.noalias() += gc * c_out.value;
  }

  // Encoder, back through time.
  {
    Layer &w_in = layer("enc.in");
    Layer &bias = layer("enc.bias");
    const bool recurrent = dims_.encoder == EncoderKind::kRecurrent;
    Layer *w_rec = recurrent ? &layer("enc.rec") : nullptr;
    Vector carry = Vector::Zero(dims_.enc_hidden);
    for (int t = T - 1; t >= 0; --t) {
      const Vector dstate = dh.row(t).transpose() + carry;
      const Vector da =
          (dstate.array() * (1.0 - h.row(t).transpose().array().square())).matrix();
      w_in.grad.noalias() += da * in.row(t);
      bias.grad.col(0) += da;
      if (recurrent) {
        if (t > 0) w_rec->grad.noalias() += da * h.row(t - 1);
        carry = w_rec->value.transpose() * da;
      }
    }
  }

  // Predictor, back through the label history.
  {
    Layer &embed = layer("pred.embed");
    Layer &w_rec = layer("pred.rec");
    Layer &bias = layer("pred.bias");
    Vector carry = Vector::Zero(dims_.pred_hidden);
    for (int u = U1 - 1; u >= 0; --u) {
      const Vector dstate = dg.row(u).transpose() + carry;
      const Vector da =
          (dstate.array() * (1.0 - g.row(u).transpose().array().square())).matrix();
      const int input = u == 0 ? dims_.vocab_size : labels[u - 1];
      embed.grad.col(input) += da;
      bias.grad.col(0) += da;
      if (u > 0) w_rec.grad.noalias() += da * g.row(u - 1);
      carry = w_rec.value.transpose() * da;
    }
  }
}

ToyModelScorer::ToyModelScorer(const ToyModel &model, const Utterance &x)
    : model_(model) {
  const Matrix h = model.encode(x);
  enc_proj_ = h * model.layer("join.enc").value.transpose();
  enc_proj_.rowwise() += model.layer("join.bias").value.col(0).transpose();
}

const Vector &ToyModelScorer::pred_proj(std::span<const int> prefix) const {
  std::vector<int> key(prefix.begin(), prefix.end());
  if (auto it = cache_.find(key); it != cache_.end()) return it->second.second;
  Vector state;
  if (prefix.empty()) {
    state = model_.initial_predictor_state();
  } else {
    pred_proj(prefix.first(prefix.size() - 1));
    const Vector &parent = cache_.at(std::vector<int>(prefix.begin(), prefix.end() - 1)).first;
    state = model_.predictor_state(parent, prefix.back());
  }
  Vector proj = model_.layer("join.pred").value * state;
  auto [it, _] = cache_.emplace(std::move(key), std::make_pair(std::move(state), std::move(proj)));
  return it->second.second;
}

std::vector<double> ToyModelScorer::score(int t, std::span<const int> prefix) const {
  const Vector j = tanh(enc_proj_.row(t).transpose() + pred_proj(prefix));
  const Vector z = model_.layer("join.out").value * j +
                   model_.layer("join.out_bias").value.col(0);
  return log_softmax_rows(std::span<const double>(z.data(), z.size()),
                          static_cast<std::size_t>(z.size()));
}

}  // namespace monotx
