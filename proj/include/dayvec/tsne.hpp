#pragma once

#include "dayvec/random.hpp"
#include "dayvec/types.hpp"

#include <cstdint>
#include <vector>

namespace dayvec {

struct TsneConfig {
  double perplexity = 30;
  double early_exaggeration = 12;
  double learning_rate = 0;  // 0 = auto: n / 48
  int n_iter = 1000;
  int exaggeration_iters = 250;
  double momentum_initial = 0.5;  // until exaggeration_iters
  double momentum_final = 0.8;
  std::uint64_t seed = 0;

  void validate(Eigen::Index n) const;
};

// Symmetrized Gaussian affinities: per-row bandwidth found by bisection so
// the conditional distribution's entropy matches log2(perplexity) within
// 1e-5 bits (<= 50 iterations), then P = (P_{j|i} + P_{i|j}) / (2n).
// Zero diagonal; sums to 1. When `conditionals` is given it receives the
// row-stochastic P_{j|i} matrix (for entropy audits).
Matrix pairwise_affinities(CRef<Matrix> x, double perplexity,
                           Matrix* conditionals = nullptr);

// Student-t joint distribution over the embedding and the analytic gradient
// of KL(P || Q) w.r.t. Y (n x 2).
Matrix low_dim_affinities(CRef<Matrix> y);
Matrix kl_gradient(CRef<Matrix> p, CRef<Matrix> y);
double kl_divergence(CRef<Matrix> p, CRef<Matrix> y);

struct TsneResult {
  Matrix y;                        // n x 2
  std::vector<double> kl_history;  // KL against the unexaggerated P
  double learning_rate = 0;        // resolved value (n/48 under "auto")
};

// Standardizes X, then gradient descent with momentum from a seeded Gaussian
// init (sigma = 1e-4); P is multiplied by early_exaggeration for the first
// exaggeration_iters iterations.
TsneResult tsne_fit(CRef<Matrix> x, const TsneConfig& config);

}  // namespace dayvec
