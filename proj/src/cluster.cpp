#include "dayvec/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dayvec {

namespace {

// Squared distances from every row of x to every row of centers: n x k.
Matrix squared_distances(CRef<Matrix> x, CRef<Matrix> centers) {
  const Vector x_sq = x.rowwise().squaredNorm();
  const Vector c_sq = centers.rowwise().squaredNorm();
  Matrix d2 = -2.0 * (x * centers.transpose());
  d2.colwise() += x_sq;
  d2.rowwise() += c_sq.transpose();
  return d2.cwiseMax(0.0);
}

// Nearest centroid per row, ties to the lowest index.
void assign_labels(CRef<Matrix> d2, std::vector<int>& labels,
                   double& inertia) {
  inertia = 0;
  labels.resize(std::size_t(d2.rows()));
  for (Eigen::Index i = 0; i < d2.rows(); ++i) {
    Eigen::Index best = 0;
    d2.row(i).minCoeff(&best);
    labels[std::size_t(i)] = static_cast<int>(best);
    inertia += d2(i, best);
  }
}

struct LloydRun {
  Matrix centroids;
  std::vector<int> labels;
  double inertia = std::numeric_limits<double>::infinity();
  std::vector<double> inertia_history;
};

LloydRun lloyd(CRef<Matrix> x, int k, Rng& rng, int max_iter, double tol) {
  const Eigen::Index n = x.rows();
  LloydRun run;
  run.centroids = kmeans_pp_init(x, k, rng);

  for (int iter = 0; iter < max_iter; ++iter) {
    Matrix d2 = squared_distances(x, run.centroids);
    assign_labels(d2, run.labels, run.inertia);

    // Repair empty clusters from the point farthest from its centroid.
    for (int c = 0; c < k; ++c) {
      if (std::find(run.labels.begin(), run.labels.end(), c) !=
          run.labels.end()) {
        continue;
      }
      Eigen::Index farthest = 0;
      double worst = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double cost = d2(i, run.labels[std::size_t(i)]);
        if (cost > worst) {
          worst = cost;
          farthest = i;
        }
      }
      run.centroids.row(c) = x.row(farthest);
      d2 = squared_distances(x, run.centroids);
      assign_labels(d2, run.labels, run.inertia);
    }
    run.inertia_history.push_back(run.inertia);

    Matrix next = Matrix::Zero(k, x.cols());
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      next.row(run.labels[std::size_t(i)]) += x.row(i);
      ++counts(run.labels[std::size_t(i)]);
    }
    double shift = 0;
    for (int c = 0; c < k; ++c) {
      next.row(c) /= double(counts(c));
      shift = std::max(shift, (next.row(c) - run.centroids.row(c)).norm());
    }
    run.centroids = std::move(next);
    if (shift < tol) break;
  }
  // Final assignment against the converged centroids.
  const Matrix d2 = squared_distances(x, run.centroids);
  assign_labels(d2, run.labels, run.inertia);
  run.inertia_history.push_back(run.inertia);
  return run;
}

}  // namespace

std::pair<Matrix, StandardizationStats> standardize(CRef<Matrix> x) {
  if (x.rows() < 2) throw Error("standardize: need at least 2 rows");
  StandardizationStats stats;
  stats.mean = x.colwise().mean();
  Vector var(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    var(j) = (x.col(j).array() - stats.mean(j)).square().mean();
  }
  stats.std_dev = var.cwiseSqrt();
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (stats.std_dev(j) > 0) {
      stats.retained.push_back(static_cast<int>(j));
    } else {
      stats.dropped.push_back(static_cast<int>(j));
    }
  }
  Matrix z(x.rows(), Eigen::Index(stats.retained.size()));
  for (std::size_t out = 0; out < stats.retained.size(); ++out) {
    const Eigen::Index j = stats.retained[out];
    z.col(Eigen::Index(out)) =
        ((x.col(j).array() - stats.mean(j)) / stats.std_dev(j)).matrix();
  }
  return {std::move(z), std::move(stats)};
}

Matrix unstandardize(CRef<Matrix> z, const StandardizationStats& stats) {
  if (z.cols() != Eigen::Index(stats.retained.size())) {
    throw Error("unstandardize: column count does not match retained features");
  }
  Matrix x(z.rows(), z.cols());
  for (std::size_t out = 0; out < stats.retained.size(); ++out) {
    const Eigen::Index j = stats.retained[out];
    x.col(Eigen::Index(out)) =
        (z.col(Eigen::Index(out)).array() * stats.std_dev(j) + stats.mean(j))
            .matrix();
  }
  return x;
}

Matrix kmeans_pp_init(CRef<Matrix> x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  if (k <= 0) throw Error("kmeans_pp_init: k must be positive");
  if (Eigen::Index(k) > n) {
    throw Error("kmeans_pp_init: k exceeds number of points");
  }
  Matrix centers(k, x.cols());
  const auto first = Eigen::Index(rng.bounded(std::uint64_t(n)));
  centers.row(0) = x.row(first);

  Vector min_d2 =
      (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = min_d2.sum();
    Eigen::Index chosen;
    if (total > 0) {
      // Sample proportional to D^2 by inverse CDF over the prefix sums.
      const double r = rng.uniform() * total;
      double acc = 0;
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += min_d2(i);
        if (r < acc) {
          chosen = i;
          break;
        }
      }
    } else {
      // All remaining mass is zero (duplicate points): fall back to uniform.
      chosen = Eigen::Index(rng.bounded(std::uint64_t(n)));
    }
    centers.row(c) = x.row(chosen);
    min_d2 = min_d2.cwiseMin(
        (x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

ClusterModel kmeans_fit(CRef<Matrix> x, int k, Rng& rng, int restarts,
                        int max_iter, double tol) {
  if (Eigen::Index(k) > x.rows()) {
    throw Error("kmeans_fit: k exceeds number of points");
  }
  if (restarts < 1) throw Error("kmeans_fit: restarts must be >= 1");

  ClusterModel best;
  best.k = k;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    LloydRun run = lloyd(x, k, rng, max_iter, tol);
    if (run.inertia < best.inertia) {
      best.centroids = std::move(run.centroids);
      best.assignments = std::move(run.labels);
      best.inertia = run.inertia;
      best.inertia_history = std::move(run.inertia_history);
    }
  }
  if (k >= 2) {
    best.silhouette_score = silhouette(x, best.assignments);
  }
  return best;
}

double silhouette(CRef<Matrix> x, const std::vector<int>& labels) {
  const Eigen::Index n = x.rows();
  if (std::size_t(n) != labels.size()) {
    throw Error("silhouette: labels size mismatch");
  }
  int k = 0;
  for (int l : labels) {
    if (l < 0) throw Error("silhouette: negative label");
    k = std::max(k, l + 1);
  }
  std::vector<Eigen::Index> sizes(std::size_t(k), 0);
  for (int l : labels) ++sizes[std::size_t(l)];
  int nonempty = 0;
  for (auto s : sizes) nonempty += s > 0;
  if (nonempty < 2) throw Error("silhouette: need at least 2 clusters");

  double total = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int own = labels[std::size_t(i)];
    if (sizes[std::size_t(own)] == 1) continue;  // singleton scores 0

    Vector mean_dist = Vector::Zero(k);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      mean_dist(labels[std::size_t(j)]) += (x.row(i) - x.row(j)).norm();
    }
    double a = 0;
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (sizes[std::size_t(c)] == 0) continue;
      if (c == own) {
        a = mean_dist(c) / double(sizes[std::size_t(c)] - 1);
      } else {
        b = std::min(b, mean_dist(c) / double(sizes[std::size_t(c)]));
      }
    }
    const double denom = std::max(a, b);
    total += denom > 0 ? (b - a) / denom : 0.0;
  }
  return total / double(n);
}

SweepResult sweep_k(CRef<Matrix> x, int k_min, int k_max, Rng& rng,
                    int restarts) {
  if (k_min < 2 || k_max < k_min) {
    throw Error("sweep_k: need 2 <= k_min <= k_max");
  }
  if (Eigen::Index(k_max) > x.rows()) {
    throw Error("sweep_k: k_max exceeds number of points");
  }
  SweepResult result;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = k_min; k <= k_max; ++k) {
    ClusterModel model = kmeans_fit(x, k, rng, restarts);
    result.rows.push_back(SweepRow{k, model.silhouette_score, model.inertia});
    if (model.silhouette_score > best_score) {
      best_score = model.silhouette_score;
      result.best_k = k;
    }
    result.models.push_back(std::move(model));
  }
  return result;
}

}  // namespace dayvec
