#pragma once

#include "dayvec/random.hpp"
#include "dayvec/types.hpp"

#include <cstdint>
#include <vector>

namespace dayvec {

struct StandardizationStats {
  Vector mean;                // over all input features
  Vector std_dev;             // over all input features (population)
  std::vector<int> retained;  // input column indices kept (std > 0)
  std::vector<int> dropped;   // zero-variance columns, for warnings
};

// Z-scores each column; zero-variance columns are dropped from the output.
// Requires n >= 2 rows.
std::pair<Matrix, StandardizationStats> standardize(CRef<Matrix> x);

// Maps standardized data back to the original scale of retained features.
Matrix unstandardize(CRef<Matrix> z, const StandardizationStats& stats);

// First centroid uniform over rows; each subsequent centroid drawn with
// probability proportional to squared Euclidean distance to the nearest
// centroid chosen so far.
Matrix kmeans_pp_init(CRef<Matrix> x, int k, Rng& rng);

struct ClusterModel {
  int k = 0;
  Matrix centroids;              // k x d
  std::vector<int> assignments;  // per row of the fitted matrix
  double inertia = 0;
  double silhouette_score = 0;
  StandardizationStats stats;    // identity (empty) when fit on raw data
  std::uint64_t seed = 0;
  std::vector<double> inertia_history;  // per Lloyd iteration, best restart
};

// Lloyd iterations to convergence (max centroid shift < tol) or max_iter,
// best of `restarts` k-means++ starts by inertia. Empty clusters are repaired
// by reseeding from the point farthest from its centroid.
ClusterModel kmeans_fit(CRef<Matrix> x, int k, Rng& rng, int restarts = 10,
                        int max_iter = 300, double tol = 1e-4);

// Mean over points of (b - a) / max(a, b), Euclidean distances; points in
// singleton clusters score 0. Requires >= 2 nonempty clusters.
double silhouette(CRef<Matrix> x, const std::vector<int>& labels);

struct SweepRow {
  int k = 0;
  double silhouette_score = 0;
  double inertia = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int best_k = 0;  // argmax silhouette, ties to the smaller k
  std::vector<ClusterModel> models;
};

SweepResult sweep_k(CRef<Matrix> x, int k_min, int k_max, Rng& rng,
                    int restarts = 10);

}  // namespace dayvec
