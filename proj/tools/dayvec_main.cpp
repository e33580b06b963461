#include "dayvec/manifest.hpp"
#include "dayvec/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

namespace {

void add_out_dir(CLI::App* cmd, std::string& out_dir) {
  cmd->add_option("--out-dir", out_dir, "Output directory")
      ->envname("DAYVEC_OUT_DIR")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dayvec: day-level activity embeddings, clustering and "
               "vector search over in-home sensor logs"};
  app.set_version_flag("--version", dayvec::kToolVersion);
  app.set_config("--config", "",
                 "Config file of key=value overrides ([subcommand] sections)");
  app.require_subcommand(1);

  // --- synth ---------------------------------------------------------------
  dayvec::SynthOptions synth_opts;
  int synth_regimes = 2;
  std::string synth_start_date = "2022-01-01";
  auto* synth = app.add_subcommand(
      "synth", "Generate a synthetic cohort with planted routine regimes");
  synth->add_option("--participants", synth_opts.cohort.n_participants,
                    "Number of participants")
      ->capture_default_str();
  synth->add_option("--days", synth_opts.cohort.days_per_participant,
                    "Days per participant")
      ->capture_default_str();
  synth->add_option("--regimes", synth_regimes, "Number of routine templates")
      ->check(CLI::Range(1, 4))
      ->capture_default_str();
  synth->add_option("--switch-prob", synth_opts.cohort.switch_probability,
                    "Per-participant probability of a mid-series regime switch")
      ->capture_default_str();
  synth->add_option("--label-rate", synth_opts.cohort.label_rate,
                    "Fraction of days given a positive/negative label")
      ->capture_default_str();
  synth->add_option("--night-bathroom-factor",
                    synth_opts.cohort.positive_night_bathroom_factor,
                    "Night bathroom intensity multiplier on positive days")
      ->capture_default_str();
  synth->add_option("--start-date", synth_start_date, "First calendar date")
      ->capture_default_str();
  synth->add_flag("--paper-scale", synth_opts.cohort.paper_scale,
                  "134 participants with lognormal day counts (~66k days)");
  synth->add_option("--seed", synth_opts.cohort.seed, "Random seed")
      ->capture_default_str();
  add_out_dir(synth, synth_opts.out_dir);

  // --- ingest --------------------------------------------------------------
  dayvec::IngestOptions ingest_opts;
  std::string ingest_labels;
  auto* ingest = app.add_subcommand(
      "ingest", "Parse and validate event (and label) CSV files");
  ingest->add_option("--events", ingest_opts.events_path, "Event CSV file")
      ->required();
  ingest->add_option("--labels", ingest_labels, "Label CSV file");
  add_out_dir(ingest, ingest_opts.out_dir);

  // --- daystrings ----------------------------------------------------------
  dayvec::DaystringsOptions day_opts;
  auto* daystrings = app.add_subcommand(
      "daystrings", "Reduce events to 72-token day strings (JSON lines)");
  daystrings->add_option("--events", day_opts.events_path, "Event CSV file")
      ->required();
  daystrings->add_flag("--dense-calendar", day_opts.dense_calendar,
                       "Materialize empty days for calendar gaps");
  daystrings->add_option("--seed", day_opts.seed, "Random seed (tie breaks)")
      ->capture_default_str();
  add_out_dir(daystrings, day_opts.out_dir);

  // --- train ---------------------------------------------------------------
  dayvec::TrainOptions train_opts;
  std::string pretrained;
  bool no_normalize = false;
  auto* train = app.add_subcommand(
      "train", "Fit the sentence encoder with a cosine triplet loss");
  train->add_option("--corpus", train_opts.corpus_path,
                    "Day-string corpus (JSON lines)")
      ->required();
  train->add_option("--epochs", train_opts.train.epochs, "Training epochs")
      ->required();
  train->add_option("--triplets-per-epoch",
                    train_opts.train.triplets_per_epoch,
                    "Triplets sampled per epoch (0 = auto)");
  train->add_option("--batch-size", train_opts.train.batch_size,
                    "Batch size (0 = auto: 256)");
  train->add_option("--margin", train_opts.train.margin,
                    "Triplet loss margin")
      ->capture_default_str();
  train->add_option("--lr", train_opts.train.peak_lr,
                    "Peak learning rate (negative = auto)");
  train->add_option("--weight-decay", train_opts.train.weight_decay,
                    "Decoupled weight decay")
      ->capture_default_str();
  train->add_option("--warmup-steps", train_opts.train.warmup_steps,
                    "Warmup steps (-1 = auto)");
  train->add_option("--total-steps", train_opts.train.total_steps,
                    "Schedule length in steps (-1 = epochs * steps/epoch)");
  train->add_flag("--paper-mode", train_opts.train.paper_mode,
                  "Published hyperparameters: 100000 triplets/epoch, batch "
                  "256, lr 2e-5, warmup 10000");
  train->add_flag("--negative-by-participant",
                  train_opts.train.negative_by_participant,
                  "Sample negatives uniformly over participants, then days");
  train->add_option("--pretrained-embeddings", pretrained,
                    "Word-vector text file of token embeddings");
  train->add_option("--d-model", train_opts.encoder.d_model,
                    "Embedding width")
      ->capture_default_str();
  train->add_option("--layers", train_opts.encoder.n_layers,
                    "Transformer layers")
      ->capture_default_str();
  train->add_option("--heads", train_opts.encoder.n_heads, "Attention heads")
      ->capture_default_str();
  train->add_option("--d-ff", train_opts.encoder.d_ff,
                    "Feed-forward hidden width")
      ->capture_default_str();
  train->add_flag("--no-normalize", no_normalize,
                  "Skip L2 normalization of sentence embeddings");
  train->add_option("--seed", train_opts.train.seed, "Random seed")
      ->capture_default_str();
  add_out_dir(train, train_opts.out_dir);

  // --- embed ---------------------------------------------------------------
  dayvec::EmbedOptions embed_opts;
  auto* embed = app.add_subcommand(
      "embed", "Encode a day-string corpus into an embedding store");
  embed->add_option("--corpus", embed_opts.corpus_path,
                    "Day-string corpus (JSON lines)")
      ->required();
  embed->add_option("--checkpoint", embed_opts.checkpoint_path,
                    "Encoder checkpoint")
      ->required();
  add_out_dir(embed, embed_opts.out_dir);

  // --- cluster -------------------------------------------------------------
  dayvec::ClusterOptions cluster_opts;
  auto* cluster = app.add_subcommand(
      "cluster", "k-means (k-means++ init) over standardized embeddings");
  cluster->add_option("--embeddings", cluster_opts.embeddings_path,
                      "Embedding store (JSON lines)")
      ->required();
  cluster->add_option("--k", cluster_opts.k, "Number of clusters")
      ->capture_default_str();
  cluster->add_option("--restarts", cluster_opts.restarts,
                      "k-means restarts")
      ->capture_default_str();
  cluster->add_option("--seed", cluster_opts.seed, "Random seed")
      ->capture_default_str();
  add_out_dir(cluster, cluster_opts.out_dir);

  // --- sweep-k ---------------------------------------------------------
  dayvec::SweepOptions sweep_opts;
  auto* sweep = app.add_subcommand(
      "sweep-k", "Fit k-means for a k range and tabulate silhouette scores");
  sweep->add_option("--embeddings", sweep_opts.embeddings_path,
                    "Embedding store (JSON lines)")
      ->required();
  sweep->add_option("--k-min", sweep_opts.k_min, "Smallest k")
      ->capture_default_str();
  sweep->add_option("--k-max", sweep_opts.k_max, "Largest k")
      ->capture_default_str();
  sweep->add_option("--restarts", sweep_opts.restarts, "k-means restarts")
      ->capture_default_str();
  sweep->add_option("--seed", sweep_opts.seed, "Random seed")
      ->capture_default_str();
  add_out_dir(sweep, sweep_opts.out_dir);

  // --- search ----------------------------------------------------------
  dayvec::SearchOptions search_opts;
  auto* search = app.add_subcommand(
      "search", "Exact cosine vector search for the most similar days");
  search->add_option("--embeddings", search_opts.embeddings_path,
                     "Embedding store (JSON lines)")
      ->required();
  search->add_option("--participant", search_opts.participant_id,
                     "Query participant id")
      ->required();
  search->add_option("--date", search_opts.date, "Query date (YYYY-MM-DD)")
      ->required();
  search->add_option("--top-k", search_opts.top_k, "Results to return")
      ->capture_default_str();
  search->add_flag("--include-self", search_opts.include_self,
                   "Keep the query day in the results");
  add_out_dir(search, search_opts.out_dir);

  // --- similarity --------------------------------------------------------
  dayvec::SimilarityOptions sim_opts;
  auto* similarity = app.add_subcommand(
      "similarity", "Pairwise cosine matrix over a participant's days");
  similarity->add_option("--embeddings", sim_opts.embeddings_path,
                         "Embedding store (JSON lines)")
      ->required();
  similarity->add_option("--participant", sim_opts.participant_id,
                         "Participant id")
      ->required();
  similarity->add_option("--stride", sim_opts.stride,
                         "Keep every stride-th recorded day")
      ->capture_default_str();
  add_out_dir(similarity, sim_opts.out_dir);

  // --- label-sim ---------------------------------------------------------
  dayvec::LabelSimOptions label_opts;
  auto* label_sim = app.add_subcommand(
      "label-sim", "Intra-participant similarity of labeled days");
  label_sim->add_option("--embeddings", label_opts.embeddings_path,
                        "Embedding store (JSON lines)")
      ->required();
  label_sim->add_option("--labels", label_opts.labels_path, "Label CSV file")
      ->required();
  add_out_dir(label_sim, label_opts.out_dir);

  // --- proportions ---------------------------------------------------------
  dayvec::ProportionsOptions prop_opts;
  auto* proportions = app.add_subcommand(
      "proportions", "Per-date cluster proportions over time");
  proportions->add_option("--assignments", prop_opts.assignments_path,
                          "Cluster assignment CSV")
      ->required();
  add_out_dir(proportions, prop_opts.out_dir);

  // --- tsne ------------------------------------------------------------
  dayvec::TsneOptions tsne_opts;
  auto* tsne = app.add_subcommand(
      "tsne", "Exact t-SNE projection of the embedding store to 2-D");
  tsne->add_option("--embeddings", tsne_opts.embeddings_path,
                   "Embedding store (JSON lines)")
      ->required();
  tsne->add_option("--perplexity", tsne_opts.tsne.perplexity, "Perplexity")
      ->capture_default_str();
  tsne->add_option("--exaggeration", tsne_opts.tsne.early_exaggeration,
                   "Early exaggeration factor")
      ->capture_default_str();
  tsne->add_option("--lr", tsne_opts.tsne.learning_rate,
                   "Learning rate (0 = auto: n/48)");
  tsne->add_option("--iters", tsne_opts.tsne.n_iter, "Gradient iterations")
      ->capture_default_str();
  tsne->add_option("--exaggeration-iters", tsne_opts.tsne.exaggeration_iters,
                   "Iterations with exaggerated affinities")
      ->capture_default_str();
  tsne->add_option("--seed", tsne_opts.tsne.seed, "Random seed")
      ->capture_default_str();
  add_out_dir(tsne, tsne_opts.out_dir);

  // --- inspect-cluster -------------------------------------------------
  dayvec::InspectClusterOptions inspect_opts;
  auto* inspect = app.add_subcommand(
      "inspect-cluster", "Sample member days of a cluster for inspection");
  inspect->add_option("--assignments", inspect_opts.assignments_path,
                      "Cluster assignment CSV")
      ->required();
  inspect->add_option("--corpus", inspect_opts.corpus_path,
                      "Day-string corpus (JSON lines)")
      ->required();
  inspect->add_option("--cluster", inspect_opts.cluster_label,
                      "Cluster label to sample")
      ->required();
  inspect->add_option("--n", inspect_opts.n_samples, "Sample size")
      ->capture_default_str();
  inspect->add_option("--seed", inspect_opts.seed, "Random seed")
      ->capture_default_str();
  add_out_dir(inspect, inspect_opts.out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    std::cerr << '\n' << app.help();
    return code;
  }

  try {
    if (*synth) {
      synth_opts.cohort.regimes = dayvec::default_regimes(synth_regimes);
      synth_opts.cohort.start_date = dayvec::parse_date(synth_start_date);
      dayvec::run_synth(synth_opts);
    } else if (*ingest) {
      if (!ingest_labels.empty()) ingest_opts.labels_path = ingest_labels;
      dayvec::run_ingest(ingest_opts);
    } else if (*daystrings) {
      dayvec::run_daystrings(day_opts);
    } else if (*train) {
      if (!pretrained.empty()) {
        train_opts.pretrained_embeddings_path = pretrained;
      }
      train_opts.encoder.normalize_output = !no_normalize;
      dayvec::run_train(train_opts);
    } else if (*embed) {
      dayvec::run_embed(embed_opts);
    } else if (*cluster) {
      dayvec::run_cluster(cluster_opts);
    } else if (*sweep) {
      dayvec::run_sweep_k(sweep_opts);
    } else if (*search) {
      dayvec::run_search(search_opts);
    } else if (*similarity) {
      dayvec::run_similarity(sim_opts);
    } else if (*label_sim) {
      dayvec::run_label_sim(label_opts);
    } else if (*proportions) {
      dayvec::run_proportions(prop_opts);
    } else if (*tsne) {
      dayvec::run_tsne(tsne_opts);
    } else if (*inspect) {
      dayvec::run_inspect_cluster(inspect_opts);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
