#pragma once

#include "dayvec/daystring.hpp"
#include "dayvec/ingest.hpp"
#include "dayvec/random.hpp"
#include "dayvec/types.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace dayvec {

constexpr int kBlocksPerDay = 12;  // 2-hour blocks
constexpr int kWindowsPerBlock = kWindowsPerDay / kBlocksPerDay;

// Planted daily-routine template: a categorical location distribution per
// 2-hour block plus a mean event count per 20-minute window.
struct RegimeTemplate {
  int id = 0;
  std::string name;
  // kBlocksPerDay x n_locations, rows sum to 1.
  Matrix block_location_probs;
  double event_rate = 2.0;

  void validate(int n_locations) const;
};

// Built-in templates over the default vocabulary's six physical locations,
// n in [1, 4]. Pairwise distinct routines so planted structure is easy to
// recover.
std::vector<RegimeTemplate> default_regimes(int n);

struct CohortConfig {
  int n_participants = 30;
  int days_per_participant = 120;  // ignored under paper_scale
  bool paper_scale = false;  // 134 participants, lognormal day counts
  std::vector<RegimeTemplate> regimes = default_regimes(2);
  double switch_probability = 0.0;  // one mid-series regime switch
  double label_rate = 0.0;          // fraction of days given a label
  // Positive-labeled days multiply the night-time (00:00-06:00) bathroom
  // event intensity by this factor.
  double positive_night_bathroom_factor = 4.0;
  Date start_date = 18993;  // 2022-01-01
  std::uint64_t seed = 0;

  void validate() const;
};

struct GroundTruthDay {
  std::string participant_id;
  Date date = 0;
  int regime = 0;
  // -1 unlabeled, otherwise a LabelPolarity value.
  int label = -1;
};

struct Cohort {
  std::vector<SensorEvent> events;  // canonical (participant, date, time) order
  LabelSet labels;
  std::vector<GroundTruthDay> manifest;
};

// Per participant: an assigned regime (optionally one mid-series switch) and
// per-day events drawn from the template. Deterministic in config.seed via
// per-participant derived streams.
Cohort generate_cohort(const CohortConfig& config);

// Day counts per participant; under paper_scale, lognormal clamped to
// [5, 943] and calibrated so the expected cohort total is about 65962 days.
std::vector<int> sample_day_counts(const CohortConfig& config);

void write_events_csv(std::ostream& out, const std::vector<SensorEvent>& events);
void write_labels_csv(std::ostream& out, const LabelSet& labels);
void write_manifest_jsonl(std::ostream& out,
                          const std::vector<GroundTruthDay>& manifest);
std::vector<GroundTruthDay> read_manifest_jsonl(std::istream& in);

}  // namespace dayvec
