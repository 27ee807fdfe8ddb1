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

#include "gmmdae/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "gmmdae/binary_io.hpp"
#include "gmmdae/error.hpp"
#include "gmmdae/rng.hpp"

namespace gmmdae {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2 pi)
constexpr double kDegenerateMass = 1e-12;

bool same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

void check_samples(const SampleMatrix& z, std::size_t d) {
  if (static_cast<std::size_t>(z.cols()) != d) {
    throw InvalidArgument("samples have dimension " + std::to_string(z.cols()) +
                          ", mixture has " + std::to_string(d));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Model

void GmmModel::validate() const {
  const std::size_t kk = k();
  if (kk == 0) throw InvalidArgument("mixture has no components");
  if (mu.size() != kk || sigma.size() != kk) {
    throw InvalidArgument("mixture parameter lists differ in length");
  }
  const auto dd = static_cast<Eigen::Index>(d());
  if (dd == 0) throw InvalidArgument("mixture dimension is zero");
  double total = 0.0;
  for (std::size_t j = 0; j < kk; ++j) {
    if (!(phi[j] >= 0.0)) throw InvalidArgument("negative mixture weight");
    total += phi[j];
    if (mu[j].size() != dd || sigma[j].rows() != dd || sigma[j].cols() != dd) {
      throw InvalidArgument("component " + std::to_string(j) +
                            " has inconsistent dimensions");
    }
    if (!mu[j].allFinite() || !sigma[j].allFinite()) {
      throw InvalidArgument("component " + std::to_string(j) +
                            " has non-finite parameters");
    }
    if (!sigma[j].isApprox(sigma[j].transpose(), 1e-12)) {
      throw InvalidArgument("component " + std::to_string(j) +
                            " covariance is not symmetric");
    }
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument("mixture weights sum to " + std::to_string(total));
  }
}

bool operator==(const GmmModel& a, const GmmModel& b) {
  if (a.phi != b.phi || a.mu.size() != b.mu.size() ||
      a.sigma.size() != b.sigma.size()) {
    return false;
  }
  for (std::size_t j = 0; j < a.mu.size(); ++j) {
    if (a.mu[j].size() != b.mu[j].size() || a.mu[j] != b.mu[j]) return false;
    if (!same_shape(a.sigma[j], b.sigma[j]) || a.sigma[j] != b.sigma[j]) {
      return false;
    }
  }
  return true;
}

void EmConfig::validate() const {
  if (k == 0) throw InvalidArgument("k must be >= 1");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
  if (!(cov_reg >= 0.0)) throw InvalidArgument("cov_reg must be >= 0");
}

// ---------------------------------------------------------------------------
// Density evaluation

GmmEvaluator::GmmEvaluator(const GmmModel& model) : d_(model.d()) {
  model.validate();
  components_.reserve(model.k());
  for (std::size_t j = 0; j < model.k(); ++j) {
    Component c{std::log(model.phi[j]), 0.0, model.mu[j],
                Eigen::LLT<Eigen::MatrixXd>(model.sigma[j])};
    bool ok = c.llt.info() == Eigen::Success;
    double log_det = 0.0;
    for (Eigen::Index i = 0; ok && i < model.sigma[j].rows(); ++i) {
      const double diag = c.llt.matrixLLT()(i, i);
      if (!(diag > 0.0) || !std::isfinite(diag)) ok = false;
      else log_det += 2.0 * std::log(diag);
    }
    if (!ok) {
      throw NumericalError("covariance of component " + std::to_string(j) +
                           " is not positive definite");
    }
    c.log_norm = -0.5 * (static_cast<double>(d_) * kLog2Pi + log_det);
    components_.push_back(std::move(c));
  }
}

Eigen::MatrixXd GmmEvaluator::log_joint(const SampleMatrix& z) const {
  check_samples(z, d_);
  Eigen::MatrixXd out(z.rows(), static_cast<Eigen::Index>(components_.size()));
  for (std::size_t j = 0; j < components_.size(); ++j) {
    const auto& c = components_[j];
    // Whitened residuals: L^{-1} (z_i - mu)^T, one column per sample.
    Eigen::MatrixXd centered = (z.rowwise() - c.mu.transpose()).transpose();
    c.llt.matrixL().solveInPlace(centered);
    const Eigen::RowVectorXd maha = centered.colwise().squaredNorm();
    out.col(static_cast<Eigen::Index>(j)) =
        (c.log_phi + c.log_norm - 0.5 * maha.array()).transpose();
  }
  return out;
}

double GmmEvaluator::log_likelihood(const Eigen::VectorXd& z) const {
  const Eigen::MatrixXd row = z.transpose();
  return log_sum_exp(log_joint(row).row(0));
}

double total_log_likelihood(const GmmModel& m, const SampleMatrix& z) {
  const GmmEvaluator eval(m);
  const Eigen::MatrixXd lj = eval.log_joint(z);
  double total = 0.0;
  for (Eigen::Index i = 0; i < lj.rows(); ++i) total += log_sum_exp(lj.row(i));
  return total;
}

double sample_log_likelihood(const GmmModel& m, const Eigen::VectorXd& z) {
  return GmmEvaluator(m).log_likelihood(z);
}

// ---------------------------------------------------------------------------
// K-Means++

namespace {

constexpr std::size_t kMaxLloydIterations = 100;

std::size_t nearest(const SampleMatrix& z, Eigen::Index i,
                    const std::vector<Eigen::VectorXd>& centroids,
                    double* dist_out = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    const double dd = (z.row(i).transpose() - centroids[j]).squaredNorm();
    if (dd < best_d) {
      best_d = dd;
      best = j;
    }
  }
  if (dist_out) *dist_out = best_d;
  return best;
}

std::vector<Eigen::VectorXd> seed_centroids(const SampleMatrix& z, std::size_t k,
                                            Rng& rng) {
  const auto n = static_cast<std::size_t>(z.rows());
  const std::size_t trials =
      2 + static_cast<std::size_t>(std::floor(std::log(static_cast<double>(k))));
  std::vector<Eigen::VectorXd> centroids;
  centroids.reserve(k);

  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  centroids.push_back(z.row(static_cast<Eigen::Index>(pick(rng))).transpose());

  std::vector<double> closest(n);
  for (std::size_t i = 0; i < n; ++i) {
    closest[i] = (z.row(static_cast<Eigen::Index>(i)).transpose() -
                  centroids.front()).squaredNorm();
  }
  std::vector<double> cumulative(n);
  std::vector<double> candidate(n);
  std::vector<double> best_closest(n);

  while (centroids.size() < k) {
    double potential = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      potential += closest[i];
      cumulative[i] = potential;
    }
    std::size_t chosen = 0;
    if (!(potential > 0.0)) {
      // Every point coincides with a centroid already; any choice is equal.
      centroids.push_back(
          z.row(static_cast<Eigen::Index>(pick(rng))).transpose());
      continue;
    }
    std::uniform_real_distribution<double> u(0.0, potential);
    double best_potential = std::numeric_limits<double>::infinity();
    for (std::size_t trial = 0; trial < trials; ++trial) {
      const double r = u(rng);
      std::size_t idx = static_cast<std::size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end(), r) -
          cumulative.begin());
      idx = std::min(idx, n - 1);
      while (closest[idx] == 0.0 && idx > 0) --idx;  // skip zero-mass points
      const Eigen::VectorXd c = z.row(static_cast<Eigen::Index>(idx)).transpose();
      double trial_potential = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        candidate[i] = std::min(
            closest[i],
            (z.row(static_cast<Eigen::Index>(i)).transpose() - c).squaredNorm());
        trial_potential += candidate[i];
      }
      if (trial_potential < best_potential) {
        best_potential = trial_potential;
        chosen = idx;
        best_closest.swap(candidate);
      }
    }
    centroids.push_back(z.row(static_cast<Eigen::Index>(chosen)).transpose());
    closest.swap(best_closest);
  }
  return centroids;
}

void recompute_centroids(const SampleMatrix& z, std::vector<std::size_t>& assign,
                         std::vector<Eigen::VectorXd>& centroids) {
  const std::size_t k = centroids.size();
  const auto n = static_cast<std::size_t>(z.rows());
  std::vector<std::size_t> counts(k, 0);
  for (auto& c : centroids) c.setZero();
  for (std::size_t i = 0; i < n; ++i) {
    centroids[assign[i]] += z.row(static_cast<Eigen::Index>(i)).transpose();
    ++counts[assign[i]];
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] > 0) centroids[j] /= static_cast<double>(counts[j]);
  }
  // Repair empty clusters with the point farthest from its own centroid,
  // taken only from clusters that can spare a member.
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] > 0) continue;
    std::size_t far = n;
    double far_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (counts[assign[i]] < 2) continue;
      const double dd = (z.row(static_cast<Eigen::Index>(i)).transpose() -
                         centroids[assign[i]]).squaredNorm();
      if (dd > far_d) {
        far_d = dd;
        far = i;
      }
    }
    if (far == n) {
      throw InvalidArgument("cannot fill empty cluster: fewer points than clusters");
    }
    const std::size_t donor = assign[far];
    const Eigen::VectorXd point = z.row(static_cast<Eigen::Index>(far)).transpose();
    centroids[donor] = (centroids[donor] * static_cast<double>(counts[donor]) - point) /
                       static_cast<double>(counts[donor] - 1);
    --counts[donor];
    assign[far] = j;
    counts[j] = 1;
    centroids[j] = point;
  }
}

}  // namespace

KMeansResult kmeans(const SampleMatrix& z, std::size_t k, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(z.rows());
  if (k == 0) throw InvalidArgument("k must be >= 1");
  if (n < k) {
    throw InvalidArgument("need at least k=" + std::to_string(k) +
                          " samples, got " + std::to_string(n));
  }
  Rng rng(seed);
  KMeansResult r;
  r.centroids = seed_centroids(z, k, rng);
  r.assignment.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.assignment[i] = nearest(z, static_cast<Eigen::Index>(i), r.centroids);
  }
  for (r.iterations = 1; r.iterations <= kMaxLloydIterations; ++r.iterations) {
    recompute_centroids(z, r.assignment, r.centroids);
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = nearest(z, static_cast<Eigen::Index>(i), r.centroids);
      if (a != r.assignment[i]) {
        r.assignment[i] = a;
        changed = true;
      }
    }
    if (!changed) break;
  }
  r.iterations = std::min(r.iterations, kMaxLloydIterations);
  return r;
}

GmmModel gmm_from_partition(const SampleMatrix& z,
                            std::span<const std::size_t> assignment,
                            std::size_t k, double cov_reg) {
  const auto n = static_cast<std::size_t>(z.rows());
  if (assignment.size() != n) {
    throw InvalidArgument("assignment length differs from sample count");
  }
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(z.rows(), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < n; ++i) {
    if (assignment[i] >= k) throw InvalidArgument("assignment out of range");
    gamma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(assignment[i])) = 1.0;
  }
  return m_step(z, Responsibilities{std::move(gamma)}, cov_reg);
}

GmmModel kmeanspp_init(const SampleMatrix& z, std::size_t k, std::uint64_t seed,
                       double cov_reg) {
  const KMeansResult km = kmeans(z, k, seed);
  return gmm_from_partition(z, km.assignment, k, cov_reg);
}

// ---------------------------------------------------------------------------
// EM steps

Responsibilities e_step(const GmmModel& m, const SampleMatrix& z) {
  const GmmEvaluator eval(m);
  Eigen::MatrixXd lj = eval.log_joint(z);
  for (Eigen::Index i = 0; i < lj.rows(); ++i) {
    const double lse = log_sum_exp(lj.row(i));
    if (!std::isfinite(lse)) {
      throw NumericalError("sample " + std::to_string(i) +
                           " has zero density under every component");
    }
    lj.row(i) = (lj.row(i).array() - lse).exp();
  }
  return {std::move(lj)};
}

GmmModel m_step(const SampleMatrix& z, const Responsibilities& r,
                double cov_reg) {
  const Eigen::MatrixXd& gamma = r.gamma;
  if (gamma.rows() != z.rows()) {
    throw InvalidArgument("responsibilities have " + std::to_string(gamma.rows()) +
                          " rows for " + std::to_string(z.rows()) + " samples");
  }
  if (z.rows() == 0 || gamma.cols() == 0) {
    throw InvalidArgument("m_step needs samples and components");
  }
  for (Eigen::Index i = 0; i < gamma.rows(); ++i) {
    if (std::abs(gamma.row(i).sum() - 1.0) > 1e-9 || gamma.row(i).minCoeff() < 0.0) {
      throw InvalidArgument("responsibility row " + std::to_string(i) +
                            " is not a distribution");
    }
  }
  const double n = static_cast<double>(z.rows());
  GmmModel m;
  for (Eigen::Index j = 0; j < gamma.cols(); ++j) {
    const Eigen::VectorXd g = gamma.col(j);
    const double mass = g.sum();
    if (mass < kDegenerateMass) {
      throw NumericalError("component " + std::to_string(j) +
                           " has vanishing total responsibility");
    }
    Eigen::VectorXd mu = (z.transpose() * g) / mass;
    const Eigen::MatrixXd centered = z.rowwise() - mu.transpose();
    Eigen::MatrixXd sigma =
        (centered.array().colwise() * g.array()).matrix().transpose() * centered / mass;
    sigma = 0.5 * (sigma + sigma.transpose());
    sigma.diagonal().array() += cov_reg;
    m.phi.push_back(mass / n);
    m.mu.push_back(std::move(mu));
    m.sigma.push_back(std::move(sigma));
  }
  return m;
}

FitResult fit(const SampleMatrix& z, const EmConfig& cfg) {
  cfg.validate();
  FitResult result;
  result.model = kmeanspp_init(z, cfg.k, derive_seed(cfg.seed, "gmm/kmeans++"),
                               cfg.cov_reg);
  double current = total_log_likelihood(result.model, z);
  result.log.push_back({0, current, 0.0});
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    GmmModel next;
    double updated = 0.0;
    try {
      next = m_step(z, e_step(result.model, z), cfg.cov_reg);
      updated = total_log_likelihood(next, z);
    } catch (const Error& e) {
      throw Error(e.kind(), "EM iteration " + std::to_string(it) + ": " + e.what());
    }
    const double delta = updated - current;
    result.model = std::move(next);
    result.log.push_back({it, updated, delta});
    current = updated;
    if (delta < cfg.epsilon) {
      result.converged = true;
      break;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// GMM1

namespace {
constexpr std::string_view kGmmMagic = "GMM1";
}

std::vector<std::uint8_t> encode_gmm(const GmmModel& m) {
  m.validate();
  binary::Writer w;
  w.magic(kGmmMagic);
  w.u32(static_cast<std::uint32_t>(m.k()));
  w.u32(static_cast<std::uint32_t>(m.d()));
  for (double p : m.phi) w.f64(p);
  for (const auto& mu : m.mu) {
    for (Eigen::Index i = 0; i < mu.size(); ++i) w.f64(mu(i));
  }
  for (const auto& s : m.sigma) {
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
      for (Eigen::Index c = 0; c < s.cols(); ++c) w.f64(s(r, c));
    }
  }
  return w.release();
}

GmmModel decode_gmm(std::span<const std::uint8_t> bytes) {
  binary::Reader r(bytes, "GMM1 model");
  r.expect_magic(kGmmMagic);
  const std::uint32_t k = r.u32();
  const std::uint32_t d = r.u32();
  if (k == 0 || d == 0) {
    throw FormatError(FormatFault::kMalformed, "GMM1 model: zero k or d");
  }
  const std::size_t values = static_cast<std::size_t>(k) * (1 + d + static_cast<std::size_t>(d) * d);
  if (r.remaining() != values * 8) {
    throw FormatError(FormatFault::kShapeMismatch,
                      "GMM1 model: k=" + std::to_string(k) + ", d=" +
                          std::to_string(d) + " needs " + std::to_string(values * 8) +
                          " payload bytes, found " + std::to_string(r.remaining()));
  }
  auto finite = [](double v) {
    if (!std::isfinite(v)) {
      throw FormatError(FormatFault::kNonFinite, "GMM1 model: non-finite parameter");
    }
    return v;
  };
  GmmModel m;
  for (std::uint32_t j = 0; j < k; ++j) m.phi.push_back(finite(r.f64()));
  for (std::uint32_t j = 0; j < k; ++j) {
    Eigen::VectorXd mu(d);
    for (std::uint32_t i = 0; i < d; ++i) mu(i) = finite(r.f64());
    m.mu.push_back(std::move(mu));
  }
  for (std::uint32_t j = 0; j < k; ++j) {
    Eigen::MatrixXd s(d, d);
    for (std::uint32_t row = 0; row < d; ++row) {
      for (std::uint32_t c = 0; c < d; ++c) s(row, c) = finite(r.f64());
    }
    m.sigma.push_back(std::move(s));
  }
  try {
    m.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(FormatFault::kMalformed, std::string("GMM1 model: ") + e.what());
  }
  return m;
}

void write_gmm(const GmmModel& m, const std::filesystem::path& path) {
  binary::write_file(path, encode_gmm(m));
}

GmmModel read_gmm(const std::filesystem::path& path) {
  const auto bytes = binary::read_file(path);
  try {
    return decode_gmm(bytes);
  } catch (const FormatError& e) {
    throw FormatError(e.fault(), path.string() + ": " + e.what());
  }
}

}  // namespace gmmdae
