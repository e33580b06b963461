#pragma once

#include "dayvec/daystring.hpp"
#include "dayvec/ingest.hpp"
#include "dayvec/random.hpp"
#include "dayvec/types.hpp"

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace dayvec {

template <class DerivedU, class DerivedV>
double cosine(const Eigen::MatrixBase<DerivedU>& u,
              const Eigen::MatrixBase<DerivedV>& v) {
  const double nu = u.template cast<double>().norm();
  const double nv = v.template cast<double>().norm();
  if (nu == 0 || nv == 0) throw Error("cosine: zero vector");
  return u.template cast<double>().dot(v.template cast<double>()) / (nu * nv);
}

struct EmbeddingRecord {
  std::string participant_id;
  Date date = 0;
  Vector vector;
};

// Immutable after load; unique (participant_id, date); uniform dimension.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  void add(EmbeddingRecord record);

  std::size_t size() const { return records_.size(); }
  Eigen::Index dim() const;
  const std::vector<EmbeddingRecord>& records() const { return records_; }
  const EmbeddingRecord& record(int i) const { return records_[size_t(i)]; }

  std::optional<int> find(const std::string& participant_id, Date date) const;
  // Indices of a participant's records sorted ascending by date.
  std::vector<int> participant_days(const std::string& participant_id) const;
  std::vector<std::string> participants() const;

  static EmbeddingStore read_jsonl(std::istream& in);
  void write_jsonl(std::ostream& out) const;

 private:
  std::vector<EmbeddingRecord> records_;
  std::map<std::pair<std::string, Date>, int> index_;
};

struct SearchHit {
  std::string participant_id;
  Date date = 0;
  double similarity = 0;
};

// Exact exhaustive cosine scan, descending similarity, ties broken by
// (participant_id, date) ascending. When the query names a stored day and
// exclude_self is set, that day is omitted.
std::vector<SearchHit> search(const EmbeddingStore& store,
                              const std::string& participant_id, Date date,
                              int top_k = 9, bool exclude_self = true);
std::vector<SearchHit> search(const EmbeddingStore& store, CRef<Vector> query,
                              int top_k = 9,
                              const std::optional<std::pair<std::string, Date>>&
                                  exclude = std::nullopt);

struct SimilarityMatrix {
  std::string participant_id;
  std::vector<Date> dates;  // every stride-th recorded day, from the first
  Matrix values;            // pairwise cosine
};

SimilarityMatrix participant_similarity_matrix(const EmbeddingStore& store,
                                               const std::string& participant_id,
                                               int stride = 20);

struct LabelSimilarityRow {
  std::string participant_id;
  int n_positive = 0;
  int n_negative = 0;
  double positive_positive_mean = 0;  // unordered distinct positive pairs
  double positive_negative_mean = 0;  // full positive x negative product
};

struct LabelSimilarityReport {
  std::vector<LabelSimilarityRow> rows;  // participants passing the filter
  int n_participants = 0;
  int n_positive_days = 0;
  int n_negative_days = 0;
  // Across retained participants (population standard deviation).
  double positive_positive_mean = 0, positive_positive_std = 0;
  double positive_negative_mean = 0, positive_negative_std = 0;
};

// Restricted to participants with >= 2 positive and >= 1 negative labeled
// days present in the store. Empty report when none qualify.
LabelSimilarityReport label_similarity(const EmbeddingStore& store,
                                       const LabelSet& labels);

struct ClusterAssignment {
  std::string participant_id;
  Date date = 0;
  int cluster = 0;
};

struct DateProportions {
  Date date = 0;
  std::vector<double> proportions;  // per cluster 0..k-1, sums to 1
};

std::vector<DateProportions> cluster_proportions(
    const std::vector<ClusterAssignment>& assignments);

// Uniform sample without replacement of n member days of a cluster (all of
// them when fewer), returned with their day-string text.
std::vector<DayString> cluster_sample(
    const std::vector<ClusterAssignment>& assignments,
    const std::vector<DayString>& daystrings, int cluster_label, int n,
    Rng& rng);

void write_assignments_csv(std::ostream& out,
                           const std::vector<ClusterAssignment>& assignments);
std::vector<ClusterAssignment> read_assignments_csv(std::istream& in);

}  // namespace dayvec
