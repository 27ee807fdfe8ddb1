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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gmmdae/rng.hpp"
#include "gmmdae/tensor.hpp"

namespace gmmdae {

enum class Activation { kLeakyRelu, kSigmoid, kIdentity };

/// Fully connected layer: y = act(W x + b), W stored out x in.
struct DenseLayer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
  Activation activation = Activation::kLeakyRelu;

  std::size_t in_dim() const { return static_cast<std::size_t>(weight.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(weight.rows()); }
};

/// Affine map applied to raw inputs before the first layer: x' = scale*x + offset.
/// Dynamic images are mapped into [0,1] with the corpus min/max.
struct InputAffine {
  double scale = 1.0;
  double offset = 0.0;

  static InputAffine from_range(double lo, double hi);
  /// Identity when the corpus is constant.
  static InputAffine from_corpus(std::span<const Tensor> corpus);

  friend bool operator==(const InputAffine&, const InputAffine&) = default;
};

/// Mirror-symmetric dense denoising autoencoder. Hidden layers use a leaky
/// rectifier; the bottleneck layer and the output layer use the logistic
/// sigmoid, so latent codes and reconstructions lie in [0,1].
class DaeModel {
 public:
  static constexpr double kLeakySlope = 0.01;

  DaeModel() = default;
  explicit DaeModel(std::vector<DenseLayer> layers, InputAffine affine = {});

  /// Standard activation scheme for `dims` with all parameters zero.
  /// dims must be an odd-length palindrome, e.g. 4096-...-32-...-4096.
  static DaeModel zeros(const std::vector<std::size_t>& dims);
  /// Uniform(+-sqrt(6/(fan_in+fan_out))) weights, zero biases.
  static DaeModel initialize(const std::vector<std::size_t>& dims, Rng& rng);

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  const InputAffine& affine() const { return affine_; }
  void set_affine(InputAffine affine) { affine_ = affine; }

  std::vector<std::size_t> layer_dims() const;
  std::size_t input_dim() const;
  std::size_t latent_dim() const;
  /// Index of the layer whose output is the latent code.
  std::size_t bottleneck_layer() const { return layers_.size() / 2 - 1; }

  /// Sum of squared weights (biases excluded).
  double weight_norm_sq() const;
  /// True when the activations follow the standard scheme above.
  bool has_standard_activations() const;

  friend bool operator==(const DaeModel& a, const DaeModel& b);

 private:
  std::vector<DenseLayer> layers_;
  InputAffine affine_;
};

/// Default bottleneck architecture 4096-1024-256-64-32-64-256-1024-4096.
std::vector<std::size_t> default_layer_dims();
/// Mirror a half-spec (input ... bottleneck) into full layer dims.
std::vector<std::size_t> mirror_dims(const std::vector<std::size_t>& half);

struct TrainConfig {
  double sigma = 0.01;
  double beta = 1e-4;
  double learning_rate = 0.01;
  double lr_decay = 0.95;
  std::size_t batch_size = 1000;
  std::size_t max_epochs = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LatentVector {
  Tensor z;
  long frame_index = 0;
  std::string sequence_id;
};

struct ForwardResult {
  Eigen::VectorXd z;
  Eigen::VectorXd x_hat;
};

/// x + sigma * g, g ~ N(0, I). Deterministic given the generator state.
Tensor corrupt(const Tensor& x, double sigma, Rng& rng);
void corrupt_inplace(Eigen::Ref<Eigen::MatrixXd> x, double sigma, Rng& rng);

/// Forward pass in model-input space (no input affine, no corruption).
ForwardResult forward(const DaeModel& m, const Eigen::VectorXd& x_tilde);
ForwardResult forward(const DaeModel& m, const Tensor& x_tilde);

/// (1/n) sum_i ||x_i - x_hat_i||^2 + beta ||W||^2 with samples as columns.
double loss(const DaeModel& m, const Eigen::MatrixXd& x,
            const Eigen::MatrixXd& x_hat, double beta);

struct LayerGradient {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

struct Gradients {
  std::vector<LayerGradient> layers;
  double loss = 0.0;  // objective at the evaluated parameters
  /// Batch mean of each layer's input activations.
  std::vector<Eigen::VectorXd> input_means;
};

/// Analytic gradient of the training objective for a batch: reconstructions
/// are computed from the corrupted columns `x_tilde` and compared with the
/// clean columns `x`.
Gradients backward(const DaeModel& m, const Eigen::MatrixXd& x,
                   const Eigen::MatrixXd& x_tilde, double beta);

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<LayerGradient> m;
  std::vector<LayerGradient> v;
  std::uint64_t step = 0;

  static AdamState for_model(const DaeModel& model);
};

void adam_step(DaeModel& model, const Gradients& grads, AdamState& state,
               double lr, const AdamParams& params = {});

struct TrainResult {
  DaeModel model;
  std::vector<double> loss_history;  // objective per epoch
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Trains a model on flattened `corpus` tensors mapped through `affine`.
/// Initialization, shuffling and corruption draw from streams derived from
/// cfg.seed. Throws NumericalError naming the epoch on a non-finite loss.
TrainResult train(std::span<const Tensor> corpus, const TrainConfig& cfg,
                  const std::vector<std::size_t>& dims, InputAffine affine = {},
                  const EpochCallback& on_epoch = {});

/// Raw tensor mapped into model-input space as a column vector.
Eigen::VectorXd prepare_input(const DaeModel& m, const Tensor& x);

/// Latent code of the uncorrupted input.
LatentVector encode(const DaeModel& m, const Tensor& x);

struct Reconstruction {
  Eigen::VectorXd input;  // affine-mapped input
  Eigen::VectorXd z;
  Eigen::VectorXd x_hat;
};

Reconstruction reconstruct(const DaeModel& m, const Tensor& x);

// DAE1 layout: "DAE1", u32 layer count, per layer u32 in, u32 out, weights
// row-major then biases as f64 LE; trailing f64 scale, f64 offset.
std::vector<std::uint8_t> encode_model(const DaeModel& m);
DaeModel decode_model(std::span<const std::uint8_t> bytes);
void write_model(const DaeModel& m, const std::filesystem::path& path);
DaeModel read_model(const std::filesystem::path& path);

}  // namespace gmmdae
