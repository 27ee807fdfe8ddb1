// Copyright 2026 The gmmdae Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gmmdae/autoenc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gmmdae/binary_io.hpp"
#include "gmmdae/error.hpp"

namespace gmmdae {

// ---------------------------------------------------------------------------
// Model structure

InputAffine InputAffine::from_range(double lo, double hi) {
  if (!(hi > lo)) return {};
  return {1.0 / (hi - lo), -lo / (hi - lo)};
}

InputAffine InputAffine::from_corpus(std::span<const Tensor> corpus) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& t : corpus) {
    for (float v : t.data()) {
      lo = std::min(lo, static_cast<double>(v));
      hi = std::max(hi, static_cast<double>(v));
    }
  }
  return from_range(lo, hi);
}

namespace {

void check_dims(const std::vector<std::size_t>& dims) {
  if (dims.size() < 3 || dims.size() % 2 == 0) {
    throw InvalidArgument("layer dims must have odd length >= 3");
  }
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] == 0) throw InvalidArgument("layer dims must be positive");
    if (dims[i] != dims[dims.size() - 1 - i]) {
      throw InvalidArgument("layer dims must be mirror-symmetric");
    }
  }
}

Activation standard_activation(std::size_t layer, std::size_t count) {
  if (layer == count / 2 - 1 || layer == count - 1) return Activation::kSigmoid;
  return Activation::kLeakyRelu;
}

}  // namespace

DaeModel::DaeModel(std::vector<DenseLayer> layers, InputAffine affine)
    : layers_(std::move(layers)), affine_(affine) {
  if (layers_.size() < 2 || layers_.size() % 2 != 0) {
    throw InvalidArgument("autoencoder needs an even, non-zero layer count");
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (static_cast<std::size_t>(l.bias.size()) != l.out_dim()) {
      throw InvalidArgument("layer " + std::to_string(i) + ": bias size mismatch");
    }
    if (i > 0 && layers_[i - 1].out_dim() != l.in_dim()) {
      throw InvalidArgument("layer " + std::to_string(i) +
                            ": input dim does not match previous output");
    }
  }
  if (layers_.front().in_dim() != layers_.back().out_dim()) {
    throw InvalidArgument("autoencoder input and output dims differ");
  }
}

DaeModel DaeModel::zeros(const std::vector<std::size_t>& dims) {
  check_dims(dims);
  std::vector<DenseLayer> layers;
  const std::size_t count = dims.size() - 1;
  for (std::size_t i = 0; i < count; ++i) {
    const auto in = static_cast<Eigen::Index>(dims[i]);
    const auto out = static_cast<Eigen::Index>(dims[i + 1]);
    layers.push_back({Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out),
                      standard_activation(i, count)});
  }
  return DaeModel(std::move(layers));
}

DaeModel DaeModel::initialize(const std::vector<std::size_t>& dims, Rng& rng) {
  DaeModel m = zeros(dims);
  for (auto& l : m.layers_) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(l.in_dim() + l.out_dim()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    // Row-major fill so the draw order matches the on-disk layout.
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = dist(rng);
    }
  }
  return m;
}

std::vector<std::size_t> DaeModel::layer_dims() const {
  std::vector<std::size_t> dims;
  if (layers_.empty()) return dims;
  dims.push_back(layers_.front().in_dim());
  for (const auto& l : layers_) dims.push_back(l.out_dim());
  return dims;
}

std::size_t DaeModel::input_dim() const {
  return layers_.empty() ? 0 : layers_.front().in_dim();
}

std::size_t DaeModel::latent_dim() const {
  return layers_.empty() ? 0 : layers_[bottleneck_layer()].out_dim();
}

double DaeModel::weight_norm_sq() const {
  double s = 0.0;
  for (const auto& l : layers_) s += l.weight.squaredNorm();
  return s;
}

bool DaeModel::has_standard_activations() const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].activation != standard_activation(i, layers_.size())) {
      return false;
    }
  }
  return true;
}

bool operator==(const DaeModel& a, const DaeModel& b) {
  if (a.layers_.size() != b.layers_.size() || !(a.affine_ == b.affine_)) {
    return false;
  }
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    const auto& la = a.layers_[i];
    const auto& lb = b.layers_[i];
    if (la.activation != lb.activation ||
        la.weight.rows() != lb.weight.rows() ||
        la.weight.cols() != lb.weight.cols() || la.weight != lb.weight ||
        la.bias != lb.bias) {
      return false;
    }
  }
  return true;
}

std::vector<std::size_t> default_layer_dims() {
  return mirror_dims({4096, 1024, 256, 64, 32});
}

std::vector<std::size_t> mirror_dims(const std::vector<std::size_t>& half) {
  if (half.size() < 2) throw InvalidArgument("need at least input and bottleneck");
  std::vector<std::size_t> dims = half;
  dims.insert(dims.end(), half.rbegin() + 1, half.rend());
  return dims;
}

void TrainConfig::validate() const {
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
  if (!(beta >= 0.0)) throw InvalidArgument("beta must be >= 0");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) {
    throw InvalidArgument("lr_decay must lie in (0,1]");
  }
  if (batch_size == 0) throw InvalidArgument("batch_size must be >= 1");
}

// ---------------------------------------------------------------------------
// Arithmetic

namespace {

void activate(Eigen::MatrixXd& z, Activation act) {
  switch (act) {
    case Activation::kLeakyRelu:
      z = z.cwiseMax(DaeModel::kLeakySlope * z);
      break;
    case Activation::kSigmoid:
      z = (1.0 + (-z.array()).exp()).inverse().matrix();
      break;
    case Activation::kIdentity:
      break;
  }
}

// Multiplies `delta` in place by the activation derivative, expressed in
// terms of the layer output `a`.
void scale_by_derivative(Eigen::MatrixXd& delta, const Eigen::MatrixXd& a,
                         Activation act) {
  switch (act) {
    case Activation::kLeakyRelu:
      delta.array() *=
          (a.array() > 0.0).select(1.0, Eigen::ArrayXXd::Constant(
                                            a.rows(), a.cols(),
                                            DaeModel::kLeakySlope));
      break;
    case Activation::kSigmoid:
      delta.array() *= a.array() * (1.0 - a.array());
      break;
    case Activation::kIdentity:
      break;
  }
}

// Activations of every layer; out[0] is the input.
std::vector<Eigen::MatrixXd> forward_all(const DaeModel& m,
                                         const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.rows()) != m.input_dim()) {
    throw InvalidArgument("input has " + std::to_string(x.rows()) +
                          " values, model expects " +
                          std::to_string(m.input_dim()));
  }
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(m.layers().size() + 1);
  acts.push_back(x);
  for (const auto& l : m.layers()) {
    Eigen::MatrixXd z(l.weight.rows(), x.cols());
    z.noalias() = l.weight * acts.back();
    z.colwise() += l.bias;
    activate(z, l.activation);
    acts.push_back(std::move(z));
  }
  return acts;
}

Eigen::VectorXd to_vector(const Tensor& t) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) v(static_cast<Eigen::Index>(i)) = t[i];
  return v;
}

}  // namespace

Tensor corrupt(const Tensor& x, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
  Tensor out = x;
  if (sigma == 0.0) return out;
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& v : out.data()) {
    v = static_cast<float>(static_cast<double>(v) + sigma * g(rng));
  }
  return out;
}

void corrupt_inplace(Eigen::Ref<Eigen::MatrixXd> x, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
  if (sigma == 0.0) return;
  std::normal_distribution<double> g(0.0, 1.0);
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, c) += sigma * g(rng);
  }
}

ForwardResult forward(const DaeModel& m, const Eigen::VectorXd& x_tilde) {
  auto acts = forward_all(m, x_tilde);
  ForwardResult r{acts[m.bottleneck_layer() + 1].col(0), acts.back().col(0)};
  if (!r.z.allFinite() || !r.x_hat.allFinite()) {
    throw NumericalError("forward pass produced non-finite values");
  }
  return r;
}

ForwardResult forward(const DaeModel& m, const Tensor& x_tilde) {
  return forward(m, to_vector(x_tilde));
}

double loss(const DaeModel& m, const Eigen::MatrixXd& x,
            const Eigen::MatrixXd& x_hat, double beta) {
  if (x.cols() == 0) throw InvalidArgument("loss needs a non-empty batch");
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols()) {
    throw InvalidArgument("loss: batch sizes or dims differ");
  }
  const double n = static_cast<double>(x.cols());
  return (x - x_hat).squaredNorm() / n + beta * m.weight_norm_sq();
}

Gradients backward(const DaeModel& m, const Eigen::MatrixXd& x,
                   const Eigen::MatrixXd& x_tilde, double beta) {
  if (x.rows() != x_tilde.rows() || x.cols() != x_tilde.cols()) {
    throw InvalidArgument("backward: clean and corrupted batches differ in shape");
  }
  if (x.cols() == 0) throw InvalidArgument("backward needs a non-empty batch");
  const auto acts = forward_all(m, x_tilde);
  const auto& layers = m.layers();
  const double n = static_cast<double>(x.cols());

  Gradients g;
  g.loss = loss(m, x, acts.back(), beta);
  g.layers.resize(layers.size());
  for (std::size_t li = 0; li < layers.size(); ++li) {
    g.input_means.push_back(acts[li].rowwise().mean());
  }

  Eigen::MatrixXd delta = (2.0 / n) * (acts.back() - x);
  for (std::size_t li = layers.size(); li-- > 0;) {
    const auto& l = layers[li];
    scale_by_derivative(delta, acts[li + 1], l.activation);
    auto& out = g.layers[li];
    out.weight.noalias() = delta * acts[li].transpose();
    if (beta != 0.0) out.weight += (2.0 * beta) * l.weight;
    out.bias = delta.rowwise().sum();
    if (li > 0) {
      Eigen::MatrixXd prev(l.weight.cols(), delta.cols());
      prev.noalias() = l.weight.transpose() * delta;
      delta = std::move(prev);
    }
  }
  return g;
}

AdamState AdamState::for_model(const DaeModel& model) {
  AdamState s;
  for (const auto& l : model.layers()) {
    LayerGradient z{Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                    Eigen::VectorXd::Zero(l.bias.size())};
    s.m.push_back(z);
    s.v.push_back(std::move(z));
  }
  return s;
}

void adam_step(DaeModel& model, const Gradients& grads, AdamState& state,
               double lr, const AdamParams& params) {
  auto& layers = model.layers();
  if (grads.layers.size() != layers.size() || state.m.size() != layers.size() ||
      state.v.size() != layers.size()) {
    throw InvalidArgument("adam_step: parameter, gradient and state sizes differ");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(params.beta1, t);
  const double c2 = 1.0 - std::pow(params.beta2, t);

  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = params.beta1 * m + (1.0 - params.beta1) * g;
    v.array() = params.beta2 * v.array() + (1.0 - params.beta2) * g.array().square();
    p.array() -= lr * (m.array() / c1) /
                 ((v.array() / c2).sqrt() + params.epsilon);
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    update(layers[i].weight, grads.layers[i].weight, state.m[i].weight,
           state.v[i].weight);
    update(layers[i].bias, grads.layers[i].bias, state.m[i].bias, state.v[i].bias);
  }
}

// ---------------------------------------------------------------------------
// Training

TrainResult train(std::span<const Tensor> corpus, const TrainConfig& cfg,
                  const std::vector<std::size_t>& dims, InputAffine affine,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (corpus.empty()) throw InvalidArgument("training corpus is empty");
  const std::size_t dim = corpus.front().size();
  if (dims.empty() || dims.front() != dim) {
    throw InvalidArgument("corpus tensors have " + std::to_string(dim) +
                          " values, model input is " +
                          (dims.empty() ? std::string("undefined")
                                        : std::to_string(dims.front())));
  }
  const auto n = static_cast<Eigen::Index>(corpus.size());
  Eigen::MatrixXd data(static_cast<Eigen::Index>(dim), n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto& t = corpus[static_cast<std::size_t>(c)];
    if (t.size() != dim) throw InvalidArgument("corpus tensors differ in size");
    for (std::size_t r = 0; r < dim; ++r) {
      data(static_cast<Eigen::Index>(r), c) =
          affine.scale * static_cast<double>(t[r]) + affine.offset;
    }
  }

  Rng init_rng = make_rng(cfg.seed, "dae/init");
  Rng shuffle_rng = make_rng(cfg.seed, "dae/shuffle");
  Rng noise_rng = make_rng(cfg.seed, "dae/corrupt");

  TrainResult result{DaeModel::initialize(dims, init_rng), {}};
  result.model.set_affine(affine);
  // Start the output layer at the corpus mean so early updates do not have
  // to push every latent unit in the same direction to learn it.
  auto& out = result.model.layers().back();
  if (out.activation == Activation::kSigmoid) {
    const Eigen::VectorXd mean = data.rowwise().mean();
    out.bias = mean.unaryExpr([](double p) {
      const double q = std::clamp(p, 1e-3, 1.0 - 1e-3);
      return std::log(q / (1.0 - q));
    });
  }
  AdamState state = AdamState::for_model(result.model);

  // Adam sees every layer as W (a - c) + b' with c the batch mean of its
  // input a and b' = b + W c. Inputs and activations are mostly positive, so
  // the plain gradient of a weight row has one sign throughout and
  // per-coordinate step sizes move the whole row together; centring removes
  // that common component. The stored model keeps the plain W a + b form.
  auto& layers = result.model.layers();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const std::size_t batch = std::min<std::size_t>(cfg.batch_size, corpus.size());

  double lr = cfg.learning_rate;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t count = std::min(batch, order.size() - start);
      Eigen::MatrixXd clean(data.rows(), static_cast<Eigen::Index>(count));
      for (std::size_t j = 0; j < count; ++j) {
        clean.col(static_cast<Eigen::Index>(j)) = data.col(order[start + j]);
      }
      Eigen::MatrixXd noisy = clean;
      corrupt_inplace(noisy, cfg.sigma, noise_rng);
      Gradients g = backward(result.model, clean, noisy, cfg.beta);
      if (!std::isfinite(g.loss)) {
        throw NumericalError("non-finite training loss at epoch " +
                             std::to_string(epoch + 1));
      }
      epoch_loss += g.loss * static_cast<double>(count) /
                    static_cast<double>(order.size());
      for (std::size_t li = 0; li < layers.size(); ++li) {
        const Eigen::VectorXd& c = g.input_means[li];
        g.layers[li].weight.noalias() -= g.layers[li].bias * c.transpose();
        layers[li].bias.noalias() += layers[li].weight * c;
      }
      adam_step(result.model, g, state, lr);
      for (std::size_t li = 0; li < layers.size(); ++li) {
        layers[li].bias.noalias() -= layers[li].weight * g.input_means[li];
      }
    }
    result.loss_history.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch + 1, epoch_loss);
    lr *= cfg.lr_decay;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Inference

Eigen::VectorXd prepare_input(const DaeModel& m, const Tensor& x) {
  if (x.size() != m.input_dim()) {
    throw InvalidArgument("input has " + std::to_string(x.size()) +
                          " values, model expects " +
                          std::to_string(m.input_dim()));
  }
  Eigen::VectorXd v = to_vector(x);
  v.array() = m.affine().scale * v.array() + m.affine().offset;
  return v;
}

LatentVector encode(const DaeModel& m, const Tensor& x) {
  const ForwardResult r = forward(m, prepare_input(m, x));
  std::vector<float> z(static_cast<std::size_t>(r.z.size()));
  for (Eigen::Index i = 0; i < r.z.size(); ++i) {
    z[static_cast<std::size_t>(i)] = static_cast<float>(r.z(i));
  }
  const std::size_t n = z.size();
  return {Tensor({n}, std::move(z)), 0, {}};
}

Reconstruction reconstruct(const DaeModel& m, const Tensor& x) {
  Reconstruction r;
  r.input = prepare_input(m, x);
  ForwardResult f = forward(m, r.input);
  r.z = std::move(f.z);
  r.x_hat = std::move(f.x_hat);
  return r;
}

// ---------------------------------------------------------------------------
// DAE1

namespace {
constexpr std::string_view kModelMagic = "DAE1";
}

std::vector<std::uint8_t> encode_model(const DaeModel& m) {
  if (!m.has_standard_activations()) {
    throw InvalidArgument("DAE1 stores only the standard activation scheme");
  }
  binary::Writer w;
  w.magic(kModelMagic);
  w.u32(static_cast<std::uint32_t>(m.layers().size()));
  for (const auto& l : m.layers()) {
    w.u32(static_cast<std::uint32_t>(l.in_dim()));
    w.u32(static_cast<std::uint32_t>(l.out_dim()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.f64(l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) w.f64(l.bias(r));
  }
  w.f64(m.affine().scale);
  w.f64(m.affine().offset);
  return w.release();
}

DaeModel decode_model(std::span<const std::uint8_t> bytes) {
  binary::Reader r(bytes, "DAE1 model");
  r.expect_magic(kModelMagic);
  const std::uint32_t count = r.u32();
  if (count < 2 || count % 2 != 0 || count > 4096) {
    throw FormatError(FormatFault::kMalformed,
                      "DAE1 model: invalid layer count " + std::to_string(count));
  }
  auto finite = [&](double v) {
    if (!std::isfinite(v)) {
      throw FormatError(FormatFault::kNonFinite, "DAE1 model: non-finite parameter");
    }
    return v;
  };
  std::vector<DenseLayer> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t in = r.u32();
    const std::uint32_t out = r.u32();
    if (in == 0 || out == 0) {
      throw FormatError(FormatFault::kMalformed, "DAE1 model: zero layer dim");
    }
    r.need((static_cast<std::size_t>(in) * out + out) * 8);
    DenseLayer l{Eigen::MatrixXd(out, in), Eigen::VectorXd(out),
                 standard_activation(i, count)};
    for (Eigen::Index row = 0; row < l.weight.rows(); ++row) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(row, c) = finite(r.f64());
    }
    for (Eigen::Index row = 0; row < l.bias.size(); ++row) l.bias(row) = finite(r.f64());
    layers.push_back(std::move(l));
  }
  InputAffine affine;
  affine.scale = finite(r.f64());
  affine.offset = finite(r.f64());
  if (r.remaining() != 0) {
    throw FormatError(FormatFault::kMalformed, "DAE1 model: trailing bytes");
  }
  try {
    return DaeModel(std::move(layers), affine);
  } catch (const InvalidArgument& e) {
    throw FormatError(FormatFault::kMalformed, std::string("DAE1 model: ") + e.what());
  }
}

void write_model(const DaeModel& m, const std::filesystem::path& path) {
  binary::write_file(path, encode_model(m));
}

DaeModel read_model(const std::filesystem::path& path) {
  const auto bytes = binary::read_file(path);
  try {
    return decode_model(bytes);
  } catch (const FormatError& e) {
    throw FormatError(e.fault(), path.string() + ": " + e.what());
  }
}

}  // namespace gmmdae
