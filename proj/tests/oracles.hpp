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

// Independent reference computations used by the unit and acceptance tests.
// They deliberately avoid the library's own arithmetic paths: plain loops,
// no Eigen expressions, no log-sum-exp.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "gmmdae/autoenc.hpp"
#include "gmmdae/density.hpp"
#include "gmmdae/eval.hpp"

namespace gmmdae::oracle {

/// alpha_i(t) as the literal double sum over j = i..t.
inline double rank_pool_alpha(std::size_t i, std::size_t t) {
  double a = 0.0;
  for (std::size_t j = i; j <= t; ++j) {
    a += (2.0 * static_cast<double>(j) - static_cast<double>(t) - 1.0) /
         static_cast<double>(j);
  }
  return a;
}

/// Literal double sum for a whole image: sum_i sum_{j>=i} (2j-t-1)/j x^i.
inline std::vector<double> dynamic_image(const std::vector<std::vector<double>>& frames) {
  const std::size_t t = frames.size();
  std::vector<double> d(frames.front().size(), 0.0);
  for (std::size_t i = 1; i <= t; ++i) {
    for (std::size_t j = i; j <= t; ++j) {
      const double w = (2.0 * static_cast<double>(j) - static_cast<double>(t) - 1.0) /
                       static_cast<double>(j);
      for (std::size_t p = 0; p < d.size(); ++p) d[p] += w * frames[i - 1][p];
    }
  }
  return d;
}

/// Fraction of (positive, negative) pairs ranked correctly, ties counted half.
inline double pairwise_auroc(const LabeledScores& ls) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < ls.scores.size(); ++i) {
    if (ls.labels[i] != 1) continue;
    for (std::size_t j = 0; j < ls.scores.size(); ++j) {
      if (ls.labels[j] != 0) continue;
      pairs += 1.0;
      if (ls.scores[i] > ls.scores[j]) {
        wins += 1.0;
      } else if (ls.scores[i] == ls.scores[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / pairs;
}

inline double apply(Activation act, double v) {
  switch (act) {
    case Activation::kLeakyRelu:
      return v > 0.0 ? v : DaeModel::kLeakySlope * v;
    case Activation::kSigmoid:
      return 1.0 / (1.0 + std::exp(-v));
    case Activation::kIdentity:
      return v;
  }
  return v;
}

/// Straight-line forward pass; returns every layer output, last is x_hat.
inline std::vector<std::vector<double>> forward(const DaeModel& m,
                                                const std::vector<double>& x) {
  std::vector<std::vector<double>> outs;
  std::vector<double> a = x;
  for (const auto& l : m.layers()) {
    std::vector<double> next(l.out_dim());
    for (std::size_t r = 0; r < l.out_dim(); ++r) {
      double s = l.bias(static_cast<Eigen::Index>(r));
      for (std::size_t c = 0; c < l.in_dim(); ++c) {
        s += l.weight(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * a[c];
      }
      next[r] = apply(l.activation, s);
    }
    outs.push_back(next);
    a = std::move(next);
  }
  return outs;
}

/// Training objective with plain loops: reconstructions from the corrupted
/// columns, errors against the clean columns, plus beta * sum of squared
/// weights.
inline double objective(const DaeModel& m, const Eigen::MatrixXd& x,
                        const Eigen::MatrixXd& x_tilde, double beta) {
  double total = 0.0;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    std::vector<double> in(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) in[static_cast<std::size_t>(r)] = x_tilde(r, c);
    const auto out = forward(m, in).back();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const double e = x(r, c) - out[static_cast<std::size_t>(r)];
      total += e * e;
    }
  }
  double w2 = 0.0;
  for (const auto& l : m.layers()) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w2 += l.weight(r, c) * l.weight(r, c);
    }
  }
  return total / static_cast<double>(x.cols()) + beta * w2;
}

struct GradientCheck {
  double worst_relative_error = 0.0;
  std::size_t entries = 0;
};

/// Copy of a layer in long double, so finite differences of the objective
/// are not swamped by double rounding when a gradient entry is tiny.
struct WideLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<long double> weight;  // row-major out x in
  std::vector<long double> bias;
  Activation activation = Activation::kIdentity;
};

inline long double apply_wide(Activation act, long double v) {
  switch (act) {
    case Activation::kLeakyRelu:
      return v > 0.0L ? v : static_cast<long double>(DaeModel::kLeakySlope) * v;
    case Activation::kSigmoid:
      return 1.0L / (1.0L + std::exp(-v));
    case Activation::kIdentity:
      return v;
  }
  return v;
}

inline std::vector<WideLayer> widen(const DaeModel& m) {
  std::vector<WideLayer> out;
  for (const auto& l : m.layers()) {
    WideLayer w;
    w.in = l.in_dim();
    w.out = l.out_dim();
    w.activation = l.activation;
    for (std::size_t r = 0; r < w.out; ++r) {
      for (std::size_t c = 0; c < w.in; ++c) {
        w.weight.push_back(l.weight(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
      }
      w.bias.push_back(l.bias(static_cast<Eigen::Index>(r)));
    }
    out.push_back(std::move(w));
  }
  return out;
}

inline long double objective_wide(const std::vector<WideLayer>& layers,
                                  const Eigen::MatrixXd& x, const Eigen::MatrixXd& x_tilde,
                                  double beta) {
  long double total = 0.0L;
  for (Eigen::Index col = 0; col < x.cols(); ++col) {
    std::vector<long double> a(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) a[static_cast<std::size_t>(r)] = x_tilde(r, col);
    for (const auto& l : layers) {
      std::vector<long double> next(l.out);
      for (std::size_t r = 0; r < l.out; ++r) {
        long double s = l.bias[r];
        for (std::size_t c = 0; c < l.in; ++c) s += l.weight[r * l.in + c] * a[c];
        next[r] = apply_wide(l.activation, s);
      }
      a = std::move(next);
    }
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const long double e = x(r, col) - a[static_cast<std::size_t>(r)];
      total += e * e;
    }
  }
  long double w2 = 0.0L;
  for (const auto& l : layers) {
    for (long double w : l.weight) w2 += w * w;
  }
  return total / static_cast<long double>(x.cols()) + static_cast<long double>(beta) * w2;
}

/// Central differences of the objective over every weight and bias, taken in
/// long double and compared with `analytic` using |a-b| / max(|a|,|b|,1e-8).
inline GradientCheck finite_difference_check(const DaeModel& m, const Gradients& analytic,
                                             const Eigen::MatrixXd& x,
                                             const Eigen::MatrixXd& x_tilde, double beta,
                                             double h = 1e-5) {
  GradientCheck out;
  std::vector<WideLayer> probe = widen(m);
  const long double step = h;
  auto compare = [&](long double& param, double a) {
    const long double saved = param;
    param = saved + step;
    const long double up = objective_wide(probe, x, x_tilde, beta);
    param = saved - step;
    const long double down = objective_wide(probe, x, x_tilde, beta);
    param = saved;
    const auto fd = static_cast<double>((up - down) / (2.0L * step));
    const double denom = std::max({std::abs(a), std::abs(fd), 1e-8});
    out.worst_relative_error = std::max(out.worst_relative_error, std::abs(a - fd) / denom);
    ++out.entries;
  };
  for (std::size_t l = 0; l < probe.size(); ++l) {
    auto& layer = probe[l];
    for (std::size_t r = 0; r < layer.out; ++r) {
      for (std::size_t c = 0; c < layer.in; ++c) {
        compare(layer.weight[r * layer.in + c],
                analytic.layers[l].weight(static_cast<Eigen::Index>(r),
                                          static_cast<Eigen::Index>(c)));
      }
      compare(layer.bias[r], analytic.layers[l].bias(static_cast<Eigen::Index>(r)));
    }
  }
  return out;
}

/// Gaussian density evaluated from an explicit inverse and determinant.
inline double gaussian_density(const Eigen::VectorXd& z, const Eigen::VectorXd& mu,
                               const Eigen::MatrixXd& sigma) {
  const auto d = static_cast<double>(z.size());
  const Eigen::MatrixXd inv = sigma.inverse();
  double q = 0.0;
  for (Eigen::Index a = 0; a < z.size(); ++a) {
    for (Eigen::Index b = 0; b < z.size(); ++b) {
      q += (z(a) - mu(a)) * inv(a, b) * (z(b) - mu(b));
    }
  }
  return std::exp(-0.5 * q) /
         std::sqrt(std::pow(2.0 * std::numbers::pi, d) * sigma.determinant());
}

/// log sum_j phi_j N(z | mu_j, Sigma_j) summed directly, no log-sum-exp.
inline double mixture_log_likelihood(const GmmModel& m, const Eigen::VectorXd& z) {
  double p = 0.0;
  for (std::size_t j = 0; j < m.k(); ++j) p += m.phi[j] * gaussian_density(z, m.mu[j], m.sigma[j]);
  return std::log(p);
}

/// Weighted moments for one component from explicit responsibilities.
struct Moments {
  double phi = 0.0;
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
};

inline Moments weighted_moments(const SampleMatrix& z, const Eigen::MatrixXd& gamma,
                                Eigen::Index j, double cov_reg) {
  const Eigen::Index n = z.rows();
  const Eigen::Index d = z.cols();
  double mass = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) mass += gamma(i, j);
  Moments m;
  m.phi = mass / static_cast<double>(n);
  m.mu = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index a = 0; a < d; ++a) m.mu(a) += gamma(i, j) * z(i, a);
  }
  for (Eigen::Index a = 0; a < d; ++a) m.mu(a) /= mass;
  m.sigma = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index b = 0; b < d; ++b) {
        m.sigma(a, b) += gamma(i, j) * (z(i, a) - m.mu(a)) * (z(i, b) - m.mu(b));
      }
    }
  }
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) m.sigma(a, b) /= mass;
    m.sigma(a, a) += cov_reg;
  }
  return m;
}

}  // namespace gmmdae::oracle
