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
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace gmmdae {

/// Samples are stored one per row (n x d).
using SampleMatrix = Eigen::MatrixXd;

/// k-component full-covariance Gaussian mixture.
struct GmmModel {
  std::vector<double> phi;
  std::vector<Eigen::VectorXd> mu;
  std::vector<Eigen::MatrixXd> sigma;

  std::size_t k() const noexcept { return phi.size(); }
  std::size_t d() const {
    return mu.empty() ? 0 : static_cast<std::size_t>(mu.front().size());
  }

  /// Checks sizes, weight normalization and covariance symmetry. Positive
  /// definiteness is checked lazily by the density evaluators.
  void validate() const;

  friend bool operator==(const GmmModel& a, const GmmModel& b);
};

/// Posterior responsibilities, n x k, rows summing to one.
struct Responsibilities {
  Eigen::MatrixXd gamma;
};

struct EmConfig {
  std::size_t k = 15;
  double epsilon = 1e-6;
  std::size_t max_iters = 500;
  double cov_reg = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Cholesky factors of every component, reused across evaluations.
/// Construction throws NumericalError naming the first component whose
/// covariance is not positive definite.
class GmmEvaluator {
 public:
  explicit GmmEvaluator(const GmmModel& model);

  /// log(phi_j) + log N(z | mu_j, Sigma_j) for every sample and component.
  Eigen::MatrixXd log_joint(const SampleMatrix& z) const;
  /// log sum_j phi_j N(z | mu_j, Sigma_j).
  double log_likelihood(const Eigen::VectorXd& z) const;

  std::size_t d() const noexcept { return d_; }

 private:
  struct Component {
    double log_phi;
    double log_norm;  // -0.5 * (d log 2pi + log|Sigma|)
    Eigen::VectorXd mu;
    Eigen::LLT<Eigen::MatrixXd> llt;
  };

  std::size_t d_ = 0;
  std::vector<Component> components_;
};

struct KMeansResult {
  std::vector<std::size_t> assignment;
  std::vector<Eigen::VectorXd> centroids;
  std::size_t iterations = 0;
};

/// K-Means++ seeding (greedy variant, 2 + floor(ln k) candidates per draw)
/// followed by Lloyd iterations until assignments settle, at most 100
/// rounds. Empty clusters are reseeded from the point farthest from its
/// centroid; ties resolve to the lowest index.
KMeansResult kmeans(const SampleMatrix& z, std::size_t k, std::uint64_t seed);

/// Mixture from the hard K-Means partition: cluster fraction, cluster mean and
/// biased cluster scatter, plus cov_reg on every diagonal.
GmmModel kmeanspp_init(const SampleMatrix& z, std::size_t k, std::uint64_t seed,
                       double cov_reg = 1e-6);

/// Mixture statistics of an explicit hard partition.
GmmModel gmm_from_partition(const SampleMatrix& z,
                            std::span<const std::size_t> assignment,
                            std::size_t k, double cov_reg);

Responsibilities e_step(const GmmModel& m, const SampleMatrix& z);
GmmModel m_step(const SampleMatrix& z, const Responsibilities& r,
                double cov_reg = 1e-6);

double total_log_likelihood(const GmmModel& m, const SampleMatrix& z);
double sample_log_likelihood(const GmmModel& m, const Eigen::VectorXd& z);

struct EmIteration {
  std::size_t iteration = 0;  // 0 is the initialization
  double log_likelihood = 0.0;
  double delta = 0.0;
};

struct FitResult {
  GmmModel model;
  std::vector<EmIteration> log;
  bool converged = false;
};

/// EM from the K-Means++ initialization until the likelihood gain drops below
/// cfg.epsilon or cfg.max_iters iterations have run.
FitResult fit(const SampleMatrix& z, const EmConfig& cfg);

// GMM1 layout: "GMM1", u32 k, u32 d, phi (k), mu (k*d), sigma (k*d*d), all
// f64 LE row-major.
std::vector<std::uint8_t> encode_gmm(const GmmModel& m);
GmmModel decode_gmm(std::span<const std::uint8_t> bytes);
void write_gmm(const GmmModel& m, const std::filesystem::path& path);
GmmModel read_gmm(const std::filesystem::path& path);

}  // namespace gmmdae
