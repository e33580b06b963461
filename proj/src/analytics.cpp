#include "dayvec/analytics.hpp"

#include "dayvec/csv.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace dayvec {

using nlohmann::json;

void EmbeddingStore::add(EmbeddingRecord record) {
  if (!records_.empty() && record.vector.size() != dim()) {
    throw Error("EmbeddingStore: dimension mismatch for (" +
                record.participant_id + ", " + format_date(record.date) + ")");
  }
  if (!record.vector.allFinite()) {
    throw Error("EmbeddingStore: non-finite vector for (" +
                record.participant_id + ", " + format_date(record.date) + ")");
  }
  const auto key = std::make_pair(record.participant_id, record.date);
  if (!index_.emplace(key, static_cast<int>(records_.size())).second) {
    throw Error("EmbeddingStore: duplicate (" + record.participant_id + ", " +
                format_date(record.date) + ")");
  }
  records_.push_back(std::move(record));
}

Eigen::Index EmbeddingStore::dim() const {
  return records_.empty() ? 0 : records_.front().vector.size();
}

std::optional<int> EmbeddingStore::find(const std::string& participant_id,
                                        Date date) const {
  const auto it = index_.find({participant_id, date});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> EmbeddingStore::participant_days(
    const std::string& participant_id) const {
  std::vector<int> idx;
  for (auto it = index_.lower_bound(
           {participant_id, std::numeric_limits<Date>::min()});
       it != index_.end() && it->first.first == participant_id; ++it) {
    idx.push_back(it->second);
  }
  return idx;
}

std::vector<std::string> EmbeddingStore::participants() const {
  std::vector<std::string> out;
  for (const auto& [key, _] : index_) {
    if (out.empty() || out.back() != key.first) out.push_back(key.first);
  }
  return out;
}

EmbeddingStore EmbeddingStore::read_jsonl(std::istream& in) {
  EmbeddingStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw Error("embedding store line " + std::to_string(line_no) + ": " +
                  e.what());
    }
    EmbeddingRecord rec;
    rec.participant_id = row.at("participant_id").get<std::string>();
    rec.date = parse_date(row.at("date").get<std::string>());
    const auto& values = row.at("vector");
    rec.vector.resize(Eigen::Index(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
      rec.vector(Eigen::Index(i)) = values[i].get<double>();
    }
    store.add(std::move(rec));
  }
  return store;
}

void EmbeddingStore::write_jsonl(std::ostream& out) const {
  for (const auto& rec : records_) {
    json values = json::array();
    for (Eigen::Index i = 0; i < rec.vector.size(); ++i) {
      values.push_back(rec.vector(i));
    }
    const json row = {{"participant_id", rec.participant_id},
                      {"date", format_date(rec.date)},
                      {"vector", values}};
    out << row.dump() << '\n';
  }
}

namespace {

std::vector<SearchHit> rank_hits(const EmbeddingStore& store,
                                 CRef<Vector> query, int top_k,
                                 std::optional<int> exclude_index) {
  if (store.size() == 0) throw Error("search: empty store");
  if (top_k <= 0) throw Error("search: top_k must be positive");

  std::vector<SearchHit> hits;
  hits.reserve(store.size());
  for (int i = 0; i < static_cast<int>(store.size()); ++i) {
    if (exclude_index && *exclude_index == i) continue;
    const auto& rec = store.record(i);
    hits.push_back(
        SearchHit{rec.participant_id, rec.date, cosine(query, rec.vector)});
  }
  std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return std::tie(a.participant_id, a.date) <
           std::tie(b.participant_id, b.date);
  });
  if (static_cast<int>(hits.size()) > top_k) {
    hits.resize(std::size_t(top_k));
  }
  return hits;
}

}  // namespace

std::vector<SearchHit> search(const EmbeddingStore& store,
                              const std::string& participant_id, Date date,
                              int top_k, bool exclude_self) {
  const auto idx = store.find(participant_id, date);
  if (!idx) {
    throw Error("search: unknown day (" + participant_id + ", " +
                format_date(date) + ")");
  }
  return rank_hits(store, store.record(*idx).vector, top_k,
                   exclude_self ? idx : std::nullopt);
}

std::vector<SearchHit> search(
    const EmbeddingStore& store, CRef<Vector> query, int top_k,
    const std::optional<std::pair<std::string, Date>>& exclude) {
  std::optional<int> exclude_index;
  if (exclude) exclude_index = store.find(exclude->first, exclude->second);
  return rank_hits(store, query, top_k, exclude_index);
}

SimilarityMatrix participant_similarity_matrix(
    const EmbeddingStore& store, const std::string& participant_id,
    int stride) {
  if (stride <= 0) throw Error("similarity matrix: stride must be positive");
  const auto days = store.participant_days(participant_id);
  if (days.empty()) {
    throw Error("similarity matrix: unknown participant '" + participant_id +
                "'");
  }
  SimilarityMatrix sm;
  sm.participant_id = participant_id;
  std::vector<int> picked;
  for (std::size_t i = 0; i < days.size(); i += std::size_t(stride)) {
    picked.push_back(days[i]);
    sm.dates.push_back(store.record(days[i]).date);
  }
  if (picked.size() < 2) {
    throw Error("similarity matrix: fewer than 2 days after stride " +
                std::to_string(stride));
  }
  const Eigen::Index m = Eigen::Index(picked.size());
  sm.values.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    sm.values(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double c = cosine(store.record(picked[std::size_t(i)]).vector,
                              store.record(picked[std::size_t(j)]).vector);
      sm.values(i, j) = c;
      sm.values(j, i) = c;
    }
  }
  return sm;
}

LabelSimilarityReport label_similarity(const EmbeddingStore& store,
                                       const LabelSet& labels) {
  // Labeled days present in the store, grouped per participant.
  std::map<std::string, std::pair<std::vector<int>, std::vector<int>>> groups;
  for (const auto& entry : labels.entries) {
    const auto idx = store.find(entry.participant_id, entry.date);
    if (!idx) continue;
    auto& [pos, neg] = groups[entry.participant_id];
    (entry.polarity == LabelPolarity::kPositive ? pos : neg).push_back(*idx);
  }

  LabelSimilarityReport report;
  std::vector<double> pp_means, pn_means;
  for (const auto& [participant, group] : groups) {
    const auto& [pos, neg] = group;
    if (pos.size() < 2 || neg.empty()) continue;

    double pp_sum = 0;
    std::size_t pp_count = 0;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      for (std::size_t j = i + 1; j < pos.size(); ++j) {
        pp_sum += cosine(store.record(pos[i]).vector,
                         store.record(pos[j]).vector);
        ++pp_count;
      }
    }
    double pn_sum = 0;
    for (int p : pos) {
      for (int n : neg) {
        pn_sum += cosine(store.record(p).vector, store.record(n).vector);
      }
    }
    LabelSimilarityRow row;
    row.participant_id = participant;
    row.n_positive = static_cast<int>(pos.size());
    row.n_negative = static_cast<int>(neg.size());
    row.positive_positive_mean = pp_sum / double(pp_count);
    row.positive_negative_mean = pn_sum / double(pos.size() * neg.size());
    pp_means.push_back(row.positive_positive_mean);
    pn_means.push_back(row.positive_negative_mean);
    report.rows.push_back(std::move(row));
    report.n_positive_days += static_cast<int>(pos.size());
    report.n_negative_days += static_cast<int>(neg.size());
  }
  report.n_participants = static_cast<int>(report.rows.size());
  auto mean_std = [](const std::vector<double>& xs) {
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= double(xs.size());
    double var = 0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return std::make_pair(mean, std::sqrt(var / double(xs.size())));
  };
  if (!report.rows.empty()) {
    std::tie(report.positive_positive_mean, report.positive_positive_std) =
        mean_std(pp_means);
    std::tie(report.positive_negative_mean, report.positive_negative_std) =
        mean_std(pn_means);
  }
  return report;
}

std::vector<DateProportions> cluster_proportions(
    const std::vector<ClusterAssignment>& assignments) {
  if (assignments.empty()) {
    throw Error("cluster_proportions: empty assignments");
  }
  int k = 0;
  for (const auto& a : assignments) {
    if (a.cluster < 0) throw Error("cluster_proportions: negative label");
    k = std::max(k, a.cluster + 1);
  }
  std::map<Date, std::vector<int>> counts;
  for (const auto& a : assignments) {
    auto& row = counts[a.date];
    row.resize(std::size_t(k), 0);
    ++row[std::size_t(a.cluster)];
  }
  std::vector<DateProportions> table;
  table.reserve(counts.size());
  for (const auto& [date, row] : counts) {
    DateProportions dp;
    dp.date = date;
    int total = 0;
    for (int c : row) total += c;
    dp.proportions.resize(std::size_t(k));
    for (std::size_t c = 0; c < row.size(); ++c) {
      dp.proportions[c] = double(row[c]) / double(total);
    }
    table.push_back(std::move(dp));
  }
  return table;
}

std::vector<DayString> cluster_sample(
    const std::vector<ClusterAssignment>& assignments,
    const std::vector<DayString>& daystrings, int cluster_label, int n,
    Rng& rng) {
  if (n <= 0) throw Error("cluster_sample: n must be positive");
  std::map<std::pair<std::string, Date>, const DayString*> by_key;
  for (const auto& ds : daystrings) {
    by_key[{ds.participant_id, ds.date}] = &ds;
  }
  std::vector<const ClusterAssignment*> members;
  for (const auto& a : assignments) {
    if (a.cluster == cluster_label) members.push_back(&a);
  }
  if (members.empty()) {
    throw Error("cluster_sample: no members in cluster " +
                std::to_string(cluster_label));
  }
  // Partial Fisher-Yates: the first min(n, size) slots become the sample.
  const std::size_t take = std::min(members.size(), std::size_t(n));
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j =
        i + std::size_t(rng.bounded(std::uint64_t(members.size() - i)));
    std::swap(members[i], members[j]);
  }
  std::vector<DayString> sample;
  for (std::size_t i = 0; i < take; ++i) {
    const auto it = by_key.find({members[i]->participant_id, members[i]->date});
    if (it == by_key.end()) {
      throw Error("cluster_sample: no day string for (" +
                  members[i]->participant_id + ", " +
                  format_date(members[i]->date) + ")");
    }
    sample.push_back(*it->second);
  }
  return sample;
}

void write_assignments_csv(std::ostream& out,
                           const std::vector<ClusterAssignment>& assignments) {
  out << "participant_id,date,cluster\n";
  for (const auto& a : assignments) {
    write_csv_row(out, {a.participant_id, format_date(a.date),
                        std::to_string(a.cluster)});
  }
}

std::vector<ClusterAssignment> read_assignments_csv(std::istream& in) {
  require_csv_header(in, "participant_id,date,cluster", "assignments");
  std::vector<ClusterAssignment> out;
  std::string line;
  std::size_t line_no = 1;
  while (read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw Error("assignments line " + std::to_string(line_no) +
                  ": expected 3 fields");
    }
    ClusterAssignment a;
    a.participant_id = fields[0];
    a.date = parse_date(fields[1]);
    a.cluster = std::stoi(fields[2]);
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace dayvec
