#include "dayvec/synth.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace dayvec {

using nlohmann::json;

namespace {

// Locations indexed as in the default vocabulary:
// Lounge, Kitchen, Hallway, Bedroom, Bathroom, Bed.
constexpr int kLounge = 0, kKitchen = 1, kHallway = 2, kBedroom = 3,
              kBathroom = 4, kBed = 5, kNumLocations = 6;

constexpr int kNightBlocks = 3;  // 00:00-06:00

// Paper-scale day-count distribution: lognormal clamped to [5, 943].
// exp(mu) = 460.3, sigma = 0.4 puts the clamped mean at ~492 days so a
// 134-participant cohort totals ~65962 days.
constexpr int kPaperScaleParticipants = 134;
constexpr double kPaperDaysLogMedian = 460.3;
constexpr double kPaperDaysLogSigma = 0.4;
constexpr int kPaperDaysMin = 5;
constexpr int kPaperDaysMax = 943;

Matrix rows_normalized(Matrix m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    m.row(r) /= m.row(r).sum();
  }
  return m;
}

std::string participant_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "p%03d", i);
  return buf;
}

}  // namespace

void RegimeTemplate::validate(int n_locations) const {
  if (block_location_probs.rows() != kBlocksPerDay ||
      block_location_probs.cols() != n_locations) {
    throw Error("RegimeTemplate: wrong distribution shape");
  }
  if (event_rate <= 0) throw Error("RegimeTemplate: event_rate must be > 0");
  for (Eigen::Index r = 0; r < block_location_probs.rows(); ++r) {
    if ((block_location_probs.row(r).array() < 0).any() ||
        std::abs(block_location_probs.row(r).sum() - 1.0) > 1e-9) {
      throw Error("RegimeTemplate: block " + std::to_string(r) +
                  " is not a distribution");
    }
  }
}

std::vector<RegimeTemplate> default_regimes(int n) {
  if (n < 1 || n > 4) throw Error("default_regimes: n must be in [1, 4]");

  // Row order: 00-02, 02-04, ..., 22-24.
  Matrix lounge_day(kBlocksPerDay, kNumLocations);
  lounge_day << /* 00-02 */ 0, 0, 0, 0, 0.08, 0.92,
      /* 02-04 */ 0, 0, 0, 0, 0.08, 0.92,
      /* 04-06 */ 0, 0, 0, 0, 0.10, 0.90,
      /* 06-08 */ 0, 0.20, 0.10, 0.25, 0.15, 0.30,
      /* 08-10 */ 0.20, 0.55, 0.15, 0, 0.10, 0,
      /* 10-12 */ 0.60, 0.25, 0.10, 0, 0.05, 0,
      /* 12-14 */ 0.35, 0.50, 0.10, 0, 0.05, 0,
      /* 14-16 */ 0.70, 0.10, 0.10, 0.05, 0.05, 0,
      /* 16-18 */ 0.45, 0.40, 0.10, 0, 0.05, 0,
      /* 18-20 */ 0.70, 0.15, 0.05, 0.05, 0.05, 0,
      /* 20-22 */ 0.40, 0.05, 0.10, 0.25, 0.10, 0.10,
      /* 22-24 */ 0.05, 0, 0.05, 0.15, 0.05, 0.70;

  Matrix bedroom_day(kBlocksPerDay, kNumLocations);
  bedroom_day << 0, 0, 0, 0, 0.05, 0.95,
      0, 0, 0, 0, 0.05, 0.95,
      0, 0, 0, 0.05, 0.05, 0.90,
      0, 0.05, 0.10, 0.35, 0.10, 0.40,
      0, 0.15, 0.20, 0.55, 0.10, 0,
      0.05, 0.10, 0.20, 0.55, 0.10, 0,
      0, 0.20, 0.15, 0.55, 0.10, 0,
      0, 0.05, 0.10, 0.55, 0.05, 0.25,
      0.05, 0.15, 0.15, 0.55, 0.10, 0,
      0, 0.10, 0.10, 0.60, 0.15, 0.05,
      0, 0, 0.05, 0.40, 0.10, 0.45,
      0, 0, 0, 0.10, 0.05, 0.85;

  Matrix kitchen_hall(kBlocksPerDay, kNumLocations);
  kitchen_hall << 0, 0, 0.05, 0, 0.05, 0.90,
      0, 0, 0, 0, 0.05, 0.95,
      0, 0.05, 0.05, 0, 0.05, 0.85,
      0, 0.30, 0.25, 0.10, 0.15, 0.20,
      0.05, 0.50, 0.35, 0, 0.10, 0,
      0.10, 0.45, 0.35, 0, 0.10, 0,
      0.05, 0.55, 0.30, 0, 0.10, 0,
      0.10, 0.40, 0.40, 0, 0.10, 0,
      0.05, 0.55, 0.30, 0, 0.10, 0,
      0.15, 0.45, 0.30, 0, 0.10, 0,
      0.10, 0.25, 0.30, 0.15, 0.10, 0.10,
      0, 0.05, 0.10, 0.05, 0.05, 0.75;

  Matrix restless_night(kBlocksPerDay, kNumLocations);
  restless_night << 0.05, 0.05, 0.25, 0.10, 0.25, 0.30,
      0.05, 0.05, 0.25, 0.10, 0.25, 0.30,
      0.05, 0.10, 0.25, 0.10, 0.20, 0.30,
      0.05, 0.15, 0.20, 0.15, 0.15, 0.30,
      0.15, 0.25, 0.20, 0.20, 0.20, 0,
      0.20, 0.20, 0.20, 0.20, 0.20, 0,
      0.15, 0.25, 0.20, 0.20, 0.20, 0,
      0.20, 0.15, 0.20, 0.25, 0.20, 0,
      0.15, 0.25, 0.20, 0.20, 0.20, 0,
      0.20, 0.20, 0.20, 0.20, 0.20, 0,
      0.10, 0.10, 0.20, 0.20, 0.15, 0.25,
      0.05, 0.05, 0.15, 0.10, 0.15, 0.50;

  std::vector<RegimeTemplate> all = {
      {0, "lounge_day", rows_normalized(lounge_day), 2.0},
      {1, "bedroom_day", rows_normalized(bedroom_day), 2.0},
      {2, "kitchen_hall", rows_normalized(kitchen_hall), 2.0},
      {3, "restless_night", rows_normalized(restless_night), 2.5},
  };
  all.resize(std::size_t(n));
  return all;
}

void CohortConfig::validate() const {
  const int participants =
      paper_scale ? kPaperScaleParticipants : n_participants;
  if (participants < 2) throw Error("CohortConfig: need >= 2 participants");
  if (!paper_scale && days_per_participant < 2) {
    throw Error("CohortConfig: need >= 2 days per participant");
  }
  if (regimes.empty()) throw Error("CohortConfig: need >= 1 regime");
  for (const auto& r : regimes) r.validate(kNumLocations);
  if (switch_probability < 0 || switch_probability > 1 || label_rate < 0 ||
      label_rate > 1) {
    throw Error("CohortConfig: probabilities must be in [0, 1]");
  }
  if (positive_night_bathroom_factor < 1) {
    throw Error("CohortConfig: positive_night_bathroom_factor must be >= 1");
  }
}

std::vector<int> sample_day_counts(const CohortConfig& config) {
  config.validate();
  const int participants =
      config.paper_scale ? kPaperScaleParticipants : config.n_participants;
  std::vector<int> counts(static_cast<std::size_t>(participants));
  for (int p = 0; p < participants; ++p) {
    if (!config.paper_scale) {
      counts[std::size_t(p)] = config.days_per_participant;
      continue;
    }
    Rng rng(derive_seed(config.seed, "synth.days", participant_name(p)));
    const double draw = std::exp(std::log(kPaperDaysLogMedian) +
                                 kPaperDaysLogSigma * rng.normal());
    counts[std::size_t(p)] = std::clamp(static_cast<int>(std::lround(draw)),
                                        kPaperDaysMin, kPaperDaysMax);
  }
  return counts;
}

Cohort generate_cohort(const CohortConfig& config) {
  config.validate();
  const Vocabulary vocab = Vocabulary::default_vocabulary();
  const auto location_names = vocab.data_tokens();  // Nowhere is last
  const int n_regimes = static_cast<int>(config.regimes.size());
  const auto day_counts = sample_day_counts(config);
  const int participants = static_cast<int>(day_counts.size());

  Cohort cohort;
  for (int p = 0; p < participants; ++p) {
    const std::string pid = participant_name(p);
    Rng rng(derive_seed(config.seed, "synth.events", pid));

    // Round-robin base regime keeps the cohort balanced across templates.
    const int base_regime = p % n_regimes;
    const int n_days = day_counts[std::size_t(p)];
    int switch_day = n_days;  // no switch
    int switch_regime = base_regime;
    if (n_regimes > 1 && rng.uniform() < config.switch_probability) {
      // One switch somewhere in the middle third of the series.
      switch_day =
          n_days / 3 + static_cast<int>(rng.bounded(
                           std::uint64_t(std::max(1, n_days / 3))));
      switch_regime =
          (base_regime + 1 +
           static_cast<int>(rng.bounded(std::uint64_t(n_regimes - 1)))) %
          n_regimes;
    }

    for (int d = 0; d < n_days; ++d) {
      const Date date = config.start_date + d;
      const int regime_id = d < switch_day ? base_regime : switch_regime;
      const RegimeTemplate& regime = config.regimes[std::size_t(regime_id)];

      int label = -1;
      if (rng.uniform() < config.label_rate) {
        label = rng.uniform() < 0.5
                    ? static_cast<int>(LabelPolarity::kPositive)
                    : static_cast<int>(LabelPolarity::kNegative);
      }
      const bool positive =
          label == static_cast<int>(LabelPolarity::kPositive);

      std::vector<SensorEvent> day_events;
      // Second-resolution timestamps can collide within a window; identical
      // (timestamp, location) pairs would be duplicate rows, so redraw the
      // offset until the pair is unique within the day.
      std::set<std::pair<Timestamp, int>> seen;
      auto draw_unique_time = [&](Timestamp window_start, int loc) {
        for (int tries = 0; tries < 10000; ++tries) {
          const Timestamp t =
              window_start +
              static_cast<Timestamp>(rng.bounded(kWindowMinutes * 60));
          if (seen.insert({t, loc}).second) return t;
        }
        throw Error("generate_cohort: window saturated with events");
      };
      for (int w = 0; w < kWindowsPerDay; ++w) {
        const int block = w / kWindowsPerBlock;
        const Timestamp window_start =
            static_cast<Timestamp>(date) * kSecondsPerDay +
            static_cast<Timestamp>(w) * kWindowMinutes * 60;
        std::vector<double> probs(static_cast<std::size_t>(kNumLocations));
        for (int l = 0; l < kNumLocations; ++l) {
          probs[std::size_t(l)] = regime.block_location_probs(block, l);
        }
        const int n_events = rng.poisson(regime.event_rate);
        for (int e = 0; e < n_events; ++e) {
          const int loc = static_cast<int>(rng.weighted(probs));
          const Timestamp t = draw_unique_time(window_start, loc);
          day_events.push_back(
              SensorEvent{pid, t, location_names[std::size_t(loc)]});
        }
        // Perturbation for positive-labeled days: extra night-time bathroom
        // visits on top of the template's baseline intensity.
        if (positive && block < kNightBlocks) {
          const double extra_rate =
              regime.event_rate *
              regime.block_location_probs(block, kBathroom) *
              (config.positive_night_bathroom_factor - 1.0);
          const int extra = rng.poisson(extra_rate);
          for (int e = 0; e < extra; ++e) {
            const Timestamp t = draw_unique_time(window_start, kBathroom);
            day_events.push_back(
                SensorEvent{pid, t, location_names[std::size_t(kBathroom)]});
          }
        }
      }
      std::sort(day_events.begin(), day_events.end(),
                [](const auto& a, const auto& b) {
                  return std::tie(a.timestamp, a.location) <
                         std::tie(b.timestamp, b.location);
                });
      cohort.events.insert(cohort.events.end(), day_events.begin(),
                           day_events.end());

      if (label >= 0) {
        cohort.labels.entries.push_back(
            LabelEntry{pid, date, static_cast<LabelPolarity>(label)});
      }
      cohort.manifest.push_back(GroundTruthDay{pid, date, regime_id, label});
    }
  }
  return cohort;
}

void write_events_csv(std::ostream& out,
                      const std::vector<SensorEvent>& events) {
  out << "participant_id,timestamp,location\n";
  for (const auto& ev : events) {
    out << ev.participant_id << ',' << format_timestamp(ev.timestamp) << ','
        << ev.location << '\n';
  }
}

void write_labels_csv(std::ostream& out, const LabelSet& labels) {
  out << "participant_id,date,label\n";
  for (const auto& e : labels.entries) {
    out << e.participant_id << ',' << format_date(e.date) << ','
        << to_string(e.polarity) << '\n';
  }
}

void write_manifest_jsonl(std::ostream& out,
                          const std::vector<GroundTruthDay>& manifest) {
  for (const auto& day : manifest) {
    json row = {{"participant_id", day.participant_id},
                {"date", format_date(day.date)},
                {"regime", day.regime}};
    if (day.label >= 0) {
      row["label"] = to_string(static_cast<LabelPolarity>(day.label));
    } else {
      row["label"] = nullptr;
    }
    out << row.dump() << '\n';
  }
}

std::vector<GroundTruthDay> read_manifest_jsonl(std::istream& in) {
  std::vector<GroundTruthDay> manifest;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw Error("manifest line " + std::to_string(line_no) + ": " +
                  e.what());
    }
    GroundTruthDay day;
    day.participant_id = row.at("participant_id").get<std::string>();
    day.date = parse_date(row.at("date").get<std::string>());
    day.regime = row.at("regime").get<int>();
    if (!row.at("label").is_null()) {
      const auto label = row.at("label").get<std::string>();
      day.label = static_cast<int>(label == "positive"
                                       ? LabelPolarity::kPositive
                                       : LabelPolarity::kNegative);
    }
    manifest.push_back(std::move(day));
  }
  return manifest;
}

}  // namespace dayvec
