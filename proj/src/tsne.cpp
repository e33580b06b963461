#include "dayvec/tsne.hpp"

#include "dayvec/cluster.hpp"

#include <cmath>
#include <limits>

namespace dayvec {

namespace {

constexpr double kEntropyTol = 1e-5;  // bits
constexpr int kBisectIters = 50;
constexpr double kQFloor = 1e-12;

Matrix pairwise_squared_distances(CRef<Matrix> x) {
  const Vector sq = x.rowwise().squaredNorm();
  Matrix d2 = -2.0 * (x * x.transpose());
  d2.colwise() += sq;
  d2.rowwise() += sq.transpose();
  d2.diagonal().setZero();
  return d2.cwiseMax(0.0);
}

// Conditional distribution for row i at precision beta = 1/(2 sigma^2);
// returns its Shannon entropy in bits.
double row_entropy(CRef<Vector> d2_row, Eigen::Index i, double beta,
                   Vector& probs) {
  const Eigen::Index n = d2_row.size();
  probs.resize(n);
  double sum = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    probs(j) = (j == i) ? 0.0 : std::exp(-beta * d2_row(j));
    sum += probs(j);
  }
  if (sum <= 0) throw Error("pairwise_affinities: degenerate row");
  double entropy = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    probs(j) /= sum;
    if (probs(j) > 0) entropy -= probs(j) * std::log2(probs(j));
  }
  return entropy;
}

}  // namespace

void TsneConfig::validate(Eigen::Index n) const {
  if (n < 4) throw Error("tsne: need at least 4 points");
  if (!(perplexity > 0) || perplexity >= double(n - 1) / 3.0) {
    throw Error("tsne: perplexity must satisfy 0 < perplexity < (n-1)/3");
  }
  if (n_iter < exaggeration_iters) {
    throw Error("tsne: n_iter must be >= exaggeration_iters");
  }
  if (early_exaggeration < 1) {
    throw Error("tsne: early_exaggeration must be >= 1");
  }
}

Matrix pairwise_affinities(CRef<Matrix> x, double perplexity,
                           Matrix* conditionals) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw Error("pairwise_affinities: need at least 2 points");
  if (!(perplexity > 0) || perplexity > double(n - 1)) {
    throw Error("pairwise_affinities: infeasible perplexity");
  }
  const double target = std::log2(perplexity);
  const Matrix d2 = pairwise_squared_distances(x);

  Matrix conditional(n, n);
  Vector probs;
  for (Eigen::Index i = 0; i < n; ++i) {
    double beta = 1.0;
    double beta_lo = 0.0;
    double beta_hi = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int iter = 0; iter < kBisectIters; ++iter) {
      const double entropy = row_entropy(d2.row(i).transpose(), i, beta, probs);
      const double diff = entropy - target;
      if (std::abs(diff) < kEntropyTol) {
        converged = true;
        break;
      }
      if (diff > 0) {
        // Entropy too high: sharpen by raising beta.
        beta_lo = beta;
        beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta + beta_hi);
      } else {
        beta_hi = beta;
        beta = 0.5 * (beta + beta_lo);
      }
    }
    if (!converged) {
      throw Error("pairwise_affinities: bandwidth search did not converge "
                  "for row " + std::to_string(i));
    }
    conditional.row(i) = probs.transpose();
  }
  if (conditionals != nullptr) *conditionals = conditional;
  Matrix p = (conditional + conditional.transpose()) / (2.0 * double(n));
  p.diagonal().setZero();
  return p;
}

Matrix low_dim_affinities(CRef<Matrix> y) {
  Matrix w = (1.0 + pairwise_squared_distances(y).array()).inverse().matrix();
  w.diagonal().setZero();
  const double z = w.sum();
  if (z <= 0) throw Error("low_dim_affinities: degenerate embedding");
  return w / z;
}

Matrix kl_gradient(CRef<Matrix> p, CRef<Matrix> y) {
  const Eigen::Index n = y.rows();
  Matrix w = (1.0 + pairwise_squared_distances(y).array()).inverse().matrix();
  w.diagonal().setZero();
  const double z = w.sum();
  const Matrix q = w / z;

  // grad_i = 4 sum_j (p_ij - q_ij) (y_i - y_j) / (1 + |y_i - y_j|^2)
  const Matrix coeff = (p - q).cwiseProduct(w);
  Matrix grad(n, y.cols());
  const Vector row_sums = coeff.rowwise().sum();
  grad = 4.0 * (row_sums.asDiagonal() * y - coeff * y);
  return grad;
}

double kl_divergence(CRef<Matrix> p, CRef<Matrix> y) {
  const Matrix q = low_dim_affinities(y);
  double kl = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      if (i == j || p(i, j) <= 0) continue;
      kl += p(i, j) * std::log(p(i, j) / std::max(q(i, j), kQFloor));
    }
  }
  return kl;
}

TsneResult tsne_fit(CRef<Matrix> x, const TsneConfig& config) {
  const Eigen::Index n = x.rows();
  config.validate(n);
  const auto [z, stats] = standardize(x);

  const Matrix p = pairwise_affinities(z, config.perplexity);
  const double lr =
      config.learning_rate > 0 ? config.learning_rate : double(n) / 48.0;

  Rng rng(derive_seed(config.seed, "tsne", "init"));
  Matrix y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) y(i, j) = rng.normal(0.0, 1e-4);
  }

  TsneResult result;
  result.learning_rate = lr;
  result.kl_history.reserve(std::size_t(config.n_iter));
  Matrix velocity = Matrix::Zero(n, 2);
  for (int iter = 0; iter < config.n_iter; ++iter) {
    const bool exaggerating = iter < config.exaggeration_iters;
    const double momentum =
        exaggerating ? config.momentum_initial : config.momentum_final;
    const Matrix grad = exaggerating
                            ? kl_gradient((config.early_exaggeration * p).eval(), y)
                            : kl_gradient(p, y);
    velocity = momentum * velocity - lr * grad;
    y += velocity;
    y.rowwise() -= y.colwise().mean();  // keep the embedding centered
    result.kl_history.push_back(kl_divergence(p, y));
  }
  result.y = std::move(y);
  return result;
}

}  // namespace dayvec
