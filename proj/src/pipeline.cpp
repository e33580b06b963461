#include "dayvec/pipeline.hpp"

#include "dayvec/analytics.hpp"
#include "dayvec/csv.hpp"
#include "dayvec/manifest.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

namespace dayvec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_output(RunManifest& manifest, const std::string& out_dir,
                          const std::string& name) {
  fs::create_directories(out_dir);
  const auto path = fs::path(out_dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file '" + path.string() + "'");
  manifest.outputs.push_back(name);
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open input file '" + path + "'");
  return in;
}

EmbeddingStore load_store(const std::string& path) {
  auto in = open_input(path);
  return EmbeddingStore::read_jsonl(in);
}

Matrix store_matrix(const EmbeddingStore& store) {
  if (store.size() == 0) throw Error("embedding store is empty");
  Matrix x(Eigen::Index(store.size()), store.dim());
  for (int i = 0; i < static_cast<int>(store.size()); ++i) {
    x.row(i) = store.record(i).vector.transpose();
  }
  return x;
}

json encoder_config_json(const EncoderConfig& c) {
  return {{"d_model", c.d_model},     {"n_layers", c.n_layers},
          {"n_heads", c.n_heads},     {"d_ff", c.d_ff},
          {"max_len", c.max_len},     {"normalize_output", c.normalize_output},
          {"vocab_size", c.vocab_size}};
}

json train_config_json(const TrainConfig& c) {
  return {{"triplets_per_epoch", c.triplets_per_epoch},
          {"batch_size", c.batch_size},
          {"margin", c.margin},
          {"peak_lr", c.peak_lr},
          {"weight_decay", c.weight_decay},
          {"warmup_steps", c.warmup_steps},
          {"total_steps", c.total_steps},
          {"epochs", c.epochs},
          {"paper_mode", c.paper_mode},
          {"negative_by_participant", c.negative_by_participant}};
}

}  // namespace

void run_synth(const SynthOptions& opts) {
  RunManifest manifest;
  manifest.subcommand = "synth";
  manifest.seed = opts.cohort.seed;
  const auto& c = opts.cohort;
  json regimes = json::array();
  for (const auto& r : c.regimes) {
    regimes.push_back({{"id", r.id},
                       {"name", r.name},
                       {"event_rate", r.event_rate}});
  }
  manifest.config = {{"n_participants", c.n_participants},
                     {"days_per_participant", c.days_per_participant},
                     {"paper_scale", c.paper_scale},
                     {"regimes", regimes},
                     {"switch_probability", c.switch_probability},
                     {"label_rate", c.label_rate},
                     {"positive_night_bathroom_factor",
                      c.positive_night_bathroom_factor},
                     {"start_date", format_date(c.start_date)}};

  const Cohort cohort = generate_cohort(opts.cohort);
  {
    auto out = open_output(manifest, opts.out_dir, "events.csv");
    write_events_csv(out, cohort.events);
  }
  {
    auto out = open_output(manifest, opts.out_dir, "labels.csv");
    write_labels_csv(out, cohort.labels);
  }
  {
    auto out = open_output(manifest, opts.out_dir, "ground_truth.jsonl");
    write_manifest_jsonl(out, cohort.manifest);
  }
  manifest.write(opts.out_dir);
  std::cout << "synth: " << cohort.manifest.size() << " days, "
            << cohort.events.size() << " events, "
            << cohort.labels.entries.size() << " labels -> " << opts.out_dir
            << '\n';
}

void run_ingest(const IngestOptions& opts) {
  RunManifest manifest;
  manifest.subcommand = "ingest";
  manifest.config = {{"events", opts.events_path}};
  manifest.add_input(opts.events_path);

  auto events_in = open_input(opts.events_path);
  const auto events = parse_events(events_in, opts.events_path);
  const auto days = group_days(events);
  const Vocabulary vocab = Vocabulary::default_vocabulary();
  const auto report = validate_events(events, vocab.data_token_set());

  json report_json = {{"n_events", report.n_events},
                      {"n_days", days.size()},
                      {"unknown_locations", report.unknown_locations},
                      {"out_of_range_timestamps",
                       report.out_of_range_timestamps},
                      {"duplicate_rows", report.duplicate_rows},
                      {"samples", report.samples}};
  if (opts.labels_path) {
    manifest.config["labels"] = *opts.labels_path;
    manifest.add_input(*opts.labels_path);
    auto labels_in = open_input(*opts.labels_path);
    const auto labels = parse_labels(labels_in, *opts.labels_path);
    int n_positive = 0;
    for (const auto& e : labels.entries) {
      n_positive += e.polarity == LabelPolarity::kPositive;
    }
    report_json["labels"] = {
        {"n_entries", labels.entries.size()},
        {"n_positive", n_positive},
        {"n_negative", labels.entries.size() - std::size_t(n_positive)}};
  }
  {
    auto out = open_output(manifest, opts.out_dir, "validation_report.json");
    out << report_json.dump(2) << '\n';
  }
  {
    auto out = open_output(manifest, opts.out_dir, "days_summary.csv");
    out << "participant_id,date,n_events\n";
    for (const auto& d : days) {
      write_csv_row(out, {d.participant_id, format_date(d.date),
                          std::to_string(d.events.size())});
    }
  }
  manifest.write(opts.out_dir);
  std::cout << "ingest: " << report.n_events << " events over " << days.size()
            << " days; findings: " << report.unknown_locations
            << " unknown-location, " << report.out_of_range_timestamps
            << " out-of-range, " << report.duplicate_rows << " duplicate\n";
}

void run_daystrings(const DaystringsOptions& opts) {
  RunManifest manifest;
  manifest.subcommand = "daystrings";
  manifest.seed = opts.seed;
  manifest.config = {{"events", opts.events_path},
                     {"dense_calendar", opts.dense_calendar}};
  manifest.add_input(opts.events_path);

  auto events_in = open_input(opts.events_path);
  const auto events = parse_events(events_in, opts.events_path);
  auto days = group_days(events);

  if (opts.dense_calendar) {
    std::map<std::string, std::pair<Date, Date>> spans;
    std::set<std::pair<std::string, Date>> present;
    for (const auto& d : days) {
      auto [it, fresh] = spans.try_emplace(d.participant_id,
                                           std::make_pair(d.date, d.date));
      if (!fresh) {
        it->second.first = std::min(it->second.first, d.date);
        it->second.second = std::max(it->second.second, d.date);
      }
      present.insert({d.participant_id, d.date});
    }
    for (const auto& [pid, span] : spans) {
      for (Date date = span.first; date <= span.second; ++date) {
        if (!present.contains({pid, date})) {
          days.push_back(DayRecord{pid, date, {}});
        }
      }
    }
    std::sort(days.begin(), days.end(), [](const auto& a, const auto& b) {
      return std::tie(a.participant_id, a.date) <
             std::tie(b.participant_id, b.date);
    });
  }

  const Vocabulary vocab = Vocabulary::default_vocabulary();
  std::vector<DayString> corpus;
  corpus.reserve(days.size());
  for (const auto& day : days) {
    // One independent stream per day so parallel aggregation cannot change
    // results.
    Rng rng(derive_seed(opts.seed, "daystrings",
                        day.participant_id + "|" + format_date(day.date)));
    corpus.push_back(render_string(aggregate_day(day, vocab, rng)));
  }
  {
    auto out = open_output(manifest, opts.out_dir, "daystrings.jsonl");
    write_daystring_corpus(out, corpus);
  }
  manifest.write(opts.out_dir);
  std::cout << "daystrings: " << corpus.size() << " day strings -> "
            << opts.out_dir << "/daystrings.jsonl\n";
}

void run_train(const TrainOptions& opts) {
  RunManifest manifest;
  manifest.subcommand = "train";
  manifest.seed = opts.train.seed;
  manifest.add_input(opts.corpus_path);

  const Vocabulary vocab = Vocabulary::default_vocabulary();
  EncoderConfig encoder_config = opts.encoder;
  encoder_config.vocab_size = vocab.size();
  encoder_config.validate();

  auto corpus_in = open_input(opts.corpus_path);
  const auto daystrings = read_daystring_corpus(corpus_in);
  const TrainCorpus corpus = TrainCorpus::from_daystrings(daystrings, vocab);
  const TrainConfig resolved = opts.train.resolved(corpus.size());

  manifest.config = {{"corpus", opts.corpus_path},
                     {"encoder", encoder_config_json(encoder_config)},
                     {"train", train_config_json(resolved)}};

  // Initialize here (same derived stream train() would use) so pretrained
  // token embeddings can be spliced in before fitting.
  Rng init_rng(derive_seed(resolved.seed, "trainer", "init"));
  ModelParams params = init_params<float>(encoder_config, init_rng);
  if (opts.pretrained_embeddings_path) {
    manifest.add_input(*opts.pretrained_embeddings_path);
    manifest.config["pretrained_embeddings"] =
        *opts.pretrained_embeddings_path;
    auto emb_in = open_input(*opts.pretrained_embeddings_path);
    std::vector<std::string> tokens = vocab.data_tokens();
    tokens.push_back(kPadToken);
    const int replaced = load_pretrained_token_embeddings(
        emb_in, tokens, encoder_config, params);
    if (replaced == 0) {
      std::cerr << "warning: pretrained embedding file shares no tokens with "
                   "the vocabulary\n";
    }
    std::cout << "train: replaced " << replaced
              << " token embedding rows from "
              << *opts.pretrained_embeddings_path << '\n';
  }

  fs::create_directories(opts.out_dir);
  const auto result = train<float>(
      corpus, encoder_config, resolved, &params,
      [&](int epoch, const ModelParams& p) {
        char name[48];
        std::snprintf(name, sizeof(name), "checkpoint_epoch%03d.dvckpt",
                      epoch);
        save_checkpoint(p, encoder_config,
                        (fs::path(opts.out_dir) / name).string());
        manifest.outputs.push_back(name);
      });

  save_checkpoint(result.params, encoder_config,
                  (fs::path(opts.out_dir) / "checkpoint.dvckpt").string());
  manifest.outputs.push_back("checkpoint.dvckpt");
  {
    auto out = open_output(manifest, opts.out_dir, "loss_history.csv");
    write_loss_history(out, result.history);
  }
  manifest.write(opts.out_dir);
  const double final_loss =
      result.history.empty() ? 0.0 : result.history.back().loss;
  std::cout << "train: " << result.history.size() << " steps over "
            << resolved.epochs << " epochs, final batch loss " << final_loss
            << '\n';
}

void run_embed(const EmbedOptions& opts) {
  RunManifest manifest;
  manifest.subcommand = "embed";
  manifest.add_input(opts.corpus_path);
  manifest.add_input(opts.checkpoint_path);
  manifest.config = {{"corpus", opts.corpus_path},
                     {"checkpoint", opts.checkpoint_path}};

  const auto [params, config] = load_checkpoint(opts.checkpoint_path);
  const Vocabulary vocab = Vocabulary::default_vocabulary();
  if (config.vocab_size != vocab.size()) {
    throw Error("embed: checkpoint vocab_size " +
                std::to_string(config.vocab_size) +
                " does not match the vocabulary (" +
                std::to_string(vocab.size()) + ")");
  }
  auto corpus_in = open_input(opts.corpus_path);
  const auto daystrings = read_daystring_corpus(corpus_in);

  EmbeddingStore store;
  for (const auto& ds : daystrings) {
    const auto ids = tokenize(ds.text, vocab);
    const VectorX<float> e = encode(params, config, ids);
    Vector v = e.cast<double>();
    if (config.normalize_output) v /= v.norm();
    store.add(EmbeddingRecord{ds.participant_id, ds.date, std::move(v)});
  }
  {
    auto out = open_output(manifest, opts.out_dir, "embeddings.jsonl");
    store.write_jsonl(out);
  }
  manifest.write(opts.out_dir);
  std::cout << "embed: " << store.size() << " embeddings of dim "
            << store.dim() << " -> " << opts.out_dir << "/embeddings.jsonl\n";
}

namespace {

json stats_json(const StandardizationStats& stats) {
  json mean = json::array(), std_dev = json::array();
  for (Eigen::Index i = 0; i < stats.mean.size(); ++i) {
    mean.push_back(stats.mean(i));
    std_dev.push_back(stats.std_dev(i));
  }
  return {{"mean", mean},
          {"std", std_dev},
          {"retained", stats.retained},
          {"dropped", stats.dropped}};
}

}  // namespace

void run_cluster(const ClusterOptions& opts) {
  RunManifest manifest;
  manifest.subcommand = "cluster";
  manifest.seed = opts.seed;
  manifest.add_input(opts.embeddings_path);
  manifest.config = {{"embeddings", opts.embeddings_path},
                     {"k", opts.k},
                     {"restarts", opts.restarts}};

  const EmbeddingStore store = load_store(opts.embeddings_path);
  const Matrix x = store_matrix(store);
  const auto [z, stats] = standardize(x);
  if (!stats.dropped.empty()) {
    std::cerr << "warning: dropped " << stats.dropped.size()
              << " zero-variance feature(s) before clustering\n";
  }
  Rng rng(derive_seed(opts.seed, "cluster", "fit"));
  ClusterModel model = kmeans_fit(z, opts.k, rng, opts.restarts);
  model.stats = stats;
  model.seed = opts.seed;

  std::vector<ClusterAssignment> assignments;
  for (int i = 0; i < static_cast<int>(store.size()); ++i) {
    assignments.push_back(ClusterAssignment{store.record(i).participant_id,
                                            store.record(i).date,
                                            model.assignments[std::size_t(i)]});
  }
  {
    auto out = open_output(manifest, opts.out_dir, "assignments.csv");
    write_assignments_csv(out, assignments);
  }
  {
    json centroids = json::array();
    for (Eigen::Index c = 0; c < model.centroids.rows(); ++c) {
      json row = json::array();
      for (Eigen::Index j = 0; j < model.centroids.cols(); ++j) {
        row.push_back(model.centroids(c, j));
      }
      centroids.push_back(row);
    }
    const json model_json = {{"k", model.k},
                             {"inertia", model.inertia},
                             {"silhouette", model.silhouette_score},
                             {"seed", model.seed},
                             {"centroids", centroids},
                             {"standardization", stats_json(stats)}};
    auto out = open_output(manifest, opts.out_dir, "cluster_model.json");
    out << model_json.dump(2) << '\n';
  }
  manifest.write(opts.out_dir);
  std::cout << "cluster: k=" << model.k << " silhouette "
            << model.silhouette_score << " inertia " << model.inertia << '\n';
}

void run_sweep_k(const SweepOptions& opts) {
  RunManifest manifest;
  manifest.subcommand = "sweep-k";
  manifest.seed = opts.seed;
  manifest.add_input(opts.embeddings_path);
  manifest.config = {{"embeddings", opts.embeddings_path},
                     {"k_min", opts.k_min},
                     {"k_max", opts.k_max},
                     {"restarts", opts.restarts}};

  const EmbeddingStore store = load_store(opts.embeddings_path);
  const auto [z, stats] = standardize(store_matrix(store));
  Rng rng(derive_seed(opts.seed, "cluster", "sweep"));
  const SweepResult sweep = sweep_k(z, opts.k_min, opts.k_max, rng,
                                    opts.restarts);
  {
    auto out = open_output(manifest, opts.out_dir, "sweep.csv");
    out << "k,silhouette,inertia\n";
    for (const auto& row : sweep.rows) {
      write_csv_row(out, {std::to_string(row.k), fmt_g17(row.silhouette_score),
                          fmt_g17(row.inertia)});
    }
  }
  manifest.write(opts.out_dir);
  std::cout << "sweep-k: best k = " << sweep.best_k << " by silhouette\n";
}

void run_search(const SearchOptions& opts) {
  RunManifest manifest;
  manifest.subcommand = "search";
  manifest.add_input(opts.embeddings_path);
  manifest.config = {{"embeddings", opts.embeddings_path},
                     {"participant_id", opts.participant_id},
                     {"date", opts.date},
                     {"top_k", opts.top_k},
                     {"include_self", opts.include_self}};

  const EmbeddingStore store = load_store(opts.embeddings_path);
  const auto hits = search(store, opts.participant_id, parse_date(opts.date),
                           opts.top_k, !opts.include_self);
  {
    auto out = open_output(manifest, opts.out_dir, "search_results.csv");
    out << "rank,participant_id,date,similarity\n";
    for (std::size_t i = 0; i < hits.size(); ++i) {
      write_csv_row(out, {std::to_string(i + 1), hits[i].participant_id,
                          format_date(hits[i].date),
                          fmt_g17(hits[i].similarity)});
    }
  }
  manifest.write(opts.out_dir);
  std::cout << "search: " << hits.size() << " results for ("
            << opts.participant_id << ", " << opts.date << ")\n";
}

void run_similarity(const SimilarityOptions& opts) {
  RunManifest manifest;
  manifest.subcommand = "similarity";
  manifest.add_input(opts.embeddings_path);
  manifest.config = {{"embeddings", opts.embeddings_path},
                     {"participant_id", opts.participant_id},
                     {"stride", opts.stride}};

  const EmbeddingStore store = load_store(opts.embeddings_path);
  const SimilarityMatrix sm =
      participant_similarity_matrix(store, opts.participant_id, opts.stride);
  {
    auto out = open_output(manifest, opts.out_dir, "similarity_matrix.csv");
    out << "date";
    for (const Date d : sm.dates) out << ',' << format_date(d);
    out << '\n';
    for (Eigen::Index i = 0; i < sm.values.rows(); ++i) {
      out << format_date(sm.dates[std::size_t(i)]);
      for (Eigen::Index j = 0; j < sm.values.cols(); ++j) {
        out << ',' << fmt_g17(sm.values(i, j));
      }
      out << '\n';
    }
  }
  manifest.write(opts.out_dir);
  std::cout << "similarity: " << sm.dates.size() << "x" << sm.dates.size()
            << " matrix for " << opts.participant_id << " (stride "
            << opts.stride << ")\n";
}

void run_label_sim(const LabelSimOptions& opts) {
  RunManifest manifest;
  manifest.subcommand = "label-sim";
  manifest.add_input(opts.embeddings_path);
  manifest.add_input(opts.labels_path);
  manifest.config = {{"embeddings", opts.embeddings_path},
                     {"labels", opts.labels_path}};

  const EmbeddingStore store = load_store(opts.embeddings_path);
  auto labels_in = open_input(opts.labels_path);
  const LabelSet labels = parse_labels(labels_in, opts.labels_path);
  const LabelSimilarityReport report = label_similarity(store, labels);
  {
    json rows = json::array();
    for (const auto& row : report.rows) {
      rows.push_back({{"participant_id", row.participant_id},
                      {"n_positive", row.n_positive},
                      {"n_negative", row.n_negative},
                      {"positive_positive_mean", row.positive_positive_mean},
                      {"positive_negative_mean", row.positive_negative_mean}});
    }
    const json report_json = {
        {"filter", "participants with >= 2 positive and >= 1 negative"},
        {"n_participants", report.n_participants},
        {"n_positive_days", report.n_positive_days},
        {"n_negative_days", report.n_negative_days},
        {"positive_positive",
         {{"mean", report.positive_positive_mean},
          {"std", report.positive_positive_std}}},
        {"positive_negative",
         {{"mean", report.positive_negative_mean},
          {"std", report.positive_negative_std}}},
        // Observed direction on this data; a report field, not a claim.
        {"positive_days_more_self_similar",
         report.n_participants > 0 &&
             report.positive_positive_mean > report.positive_negative_mean},
        {"participants", rows}};
    auto out = open_output(manifest, opts.out_dir, "label_similarity.json");
    out << report_json.dump(2) << '\n';
  }
  manifest.write(opts.out_dir);
  std::cout << "label-sim: " << report.n_participants
            << " participants retained; positive-positive "
            << report.positive_positive_mean << " +/- "
            << report.positive_positive_std << ", positive-negative "
            << report.positive_negative_mean << " +/- "
            << report.positive_negative_std << '\n';
}

void run_proportions(const ProportionsOptions& opts) {
  RunManifest manifest;
  manifest.subcommand = "proportions";
  manifest.add_input(opts.assignments_path);
  manifest.config = {{"assignments", opts.assignments_path}};

  auto in = open_input(opts.assignments_path);
  const auto assignments = read_assignments_csv(in);
  const auto table = cluster_proportions(assignments);
  {
    auto out = open_output(manifest, opts.out_dir, "proportions.csv");
    out << "date,cluster,proportion\n";
    for (const auto& dp : table) {
      for (std::size_t c = 0; c < dp.proportions.size(); ++c) {
        write_csv_row(out, {format_date(dp.date), std::to_string(c),
                            fmt_g17(dp.proportions[c])});
      }
    }
  }
  manifest.write(opts.out_dir);
  std::cout << "proportions: " << table.size() << " dates\n";
}

void run_tsne(const TsneOptions& opts) {
  RunManifest manifest;
  manifest.subcommand = "tsne";
  manifest.seed = opts.tsne.seed;
  manifest.add_input(opts.embeddings_path);
  manifest.config = {{"embeddings", opts.embeddings_path},
                     {"perplexity", opts.tsne.perplexity},
                     {"early_exaggeration", opts.tsne.early_exaggeration},
                     {"learning_rate", opts.tsne.learning_rate},
                     {"n_iter", opts.tsne.n_iter},
                     {"exaggeration_iters", opts.tsne.exaggeration_iters}};

  const EmbeddingStore store = load_store(opts.embeddings_path);
  const Matrix x = store_matrix(store);
  const TsneResult result = tsne_fit(x, opts.tsne);
  {
    auto out = open_output(manifest, opts.out_dir, "tsne.csv");
    out << "participant_id,date,y1,y2\n";
    for (int i = 0; i < static_cast<int>(store.size()); ++i) {
      write_csv_row(out, {store.record(i).participant_id,
                          format_date(store.record(i).date),
                          fmt_g17(result.y(i, 0)), fmt_g17(result.y(i, 1))});
    }
  }
  {
    auto out = open_output(manifest, opts.out_dir, "tsne_kl.csv");
    out << "iter,kl\n";
    for (std::size_t i = 0; i < result.kl_history.size(); ++i) {
      write_csv_row(out, {std::to_string(i), fmt_g17(result.kl_history[i])});
    }
  }
  manifest.write(opts.out_dir);
  std::cout << "tsne: " << store.size() << " points, final KL "
            << result.kl_history.back() << '\n';
}

void run_inspect_cluster(const InspectClusterOptions& opts) {
  RunManifest manifest;
  manifest.subcommand = "inspect-cluster";
  manifest.seed = opts.seed;
  manifest.add_input(opts.assignments_path);
  manifest.add_input(opts.corpus_path);
  manifest.config = {{"assignments", opts.assignments_path},
                     {"corpus", opts.corpus_path},
                     {"cluster", opts.cluster_label},
                     {"n", opts.n_samples}};

  auto assignments_in = open_input(opts.assignments_path);
  const auto assignments = read_assignments_csv(assignments_in);
  auto corpus_in = open_input(opts.corpus_path);
  const auto daystrings = read_daystring_corpus(corpus_in);
  Rng rng(derive_seed(opts.seed, "inspect-cluster", "sample"));
  const auto sample = cluster_sample(assignments, daystrings,
                                     opts.cluster_label, opts.n_samples, rng);
  {
    auto out = open_output(manifest, opts.out_dir, "cluster_sample.csv");
    out << "participant_id,date,text\n";
    for (const auto& ds : sample) {
      write_csv_row(out, {ds.participant_id, format_date(ds.date), ds.text});
    }
  }
  manifest.write(opts.out_dir);
  std::cout << "inspect-cluster: sampled " << sample.size()
            << " days from cluster " << opts.cluster_label << '\n';
}

}  // namespace dayvec
