#pragma once

#include "dayvec/cluster.hpp"
#include "dayvec/encoder.hpp"
#include "dayvec/synth.hpp"
#include "dayvec/trainer.hpp"
#include "dayvec/tsne.hpp"
#include "dayvec/types.hpp"

#include <cstdint>
#include <optional>
#include <string>

// Subcommand implementations shared by the CLI and the end-to-end tests.
// Every runner writes its artifacts plus a RunManifest into out_dir; all
// randomness derives from the single seed in its options.

namespace dayvec {

struct SynthOptions {
  CohortConfig cohort;
  std::string out_dir = ".";
};
void run_synth(const SynthOptions& opts);

struct IngestOptions {
  std::string events_path;
  std::optional<std::string> labels_path;
  std::string out_dir = ".";
};
void run_ingest(const IngestOptions& opts);

struct DaystringsOptions {
  std::string events_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  // Materialize empty (all-"Nowhere") days for calendar gaps between each
  // participant's first and last recorded date.
  bool dense_calendar = false;
};
void run_daystrings(const DaystringsOptions& opts);

struct TrainOptions {
  std::string corpus_path;
  EncoderConfig encoder;  // vocab_size filled from the vocabulary
  TrainConfig train;
  std::optional<std::string> pretrained_embeddings_path;
  std::string out_dir = ".";
};
void run_train(const TrainOptions& opts);

struct EmbedOptions {
  std::string corpus_path;
  std::string checkpoint_path;
  std::string out_dir = ".";
};
void run_embed(const EmbedOptions& opts);

struct ClusterOptions {
  std::string embeddings_path;
  int k = 5;
  int restarts = 10;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};
void run_cluster(const ClusterOptions& opts);

struct SweepOptions {
  std::string embeddings_path;
  int k_min = 2;
  int k_max = 10;
  int restarts = 10;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};
void run_sweep_k(const SweepOptions& opts);

struct SearchOptions {
  std::string embeddings_path;
  std::string participant_id;
  std::string date;
  int top_k = 9;
  bool include_self = false;
  std::string out_dir = ".";
};
void run_search(const SearchOptions& opts);

struct SimilarityOptions {
  std::string embeddings_path;
  std::string participant_id;
  int stride = 20;
  std::string out_dir = ".";
};
void run_similarity(const SimilarityOptions& opts);

struct LabelSimOptions {
  std::string embeddings_path;
  std::string labels_path;
  std::string out_dir = ".";
};
void run_label_sim(const LabelSimOptions& opts);

struct ProportionsOptions {
  std::string assignments_path;
  std::string out_dir = ".";
};
void run_proportions(const ProportionsOptions& opts);

struct TsneOptions {
  std::string embeddings_path;
  TsneConfig tsne;
  std::string out_dir = ".";
};
void run_tsne(const TsneOptions& opts);

struct InspectClusterOptions {
  std::string assignments_path;
  std::string corpus_path;
  int cluster_label = 0;
  int n_samples = 8;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};
void run_inspect_cluster(const InspectClusterOptions& opts);

}  // namespace dayvec
