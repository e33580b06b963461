#include "dayvec/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace dayvec {

namespace {

constexpr int kAnchorRetries = 10000;
constexpr std::size_t kPaperScaleCorpusDays = 50000;

}  // namespace

TrainCorpus::TrainCorpus(std::vector<CorpusDay> days) : days_(std::move(days)) {
  std::sort(days_.begin(), days_.end(), [](const auto& a, const auto& b) {
    return std::tie(a.participant_id, a.date) <
           std::tie(b.participant_id, b.date);
  });
  for (std::size_t i = 1; i < days_.size(); ++i) {
    if (days_[i].participant_id == days_[i - 1].participant_id &&
        days_[i].date == days_[i - 1].date) {
      throw Error("TrainCorpus: duplicate day (" + days_[i].participant_id +
                  ", " + format_date(days_[i].date) + ")");
    }
  }
  block_of_day_.resize(days_.size());
  for (std::size_t i = 0; i < days_.size();) {
    std::size_t j = i;
    while (j < days_.size() &&
           days_[j].participant_id == days_[i].participant_id) {
      block_of_day_[j] = static_cast<int>(blocks_.size());
      ++j;
    }
    blocks_.emplace_back(static_cast<int>(i), static_cast<int>(j));
    i = j;
  }
}

TrainCorpus TrainCorpus::from_daystrings(const std::vector<DayString>& corpus,
                                         const Vocabulary& vocab) {
  std::vector<CorpusDay> days;
  days.reserve(corpus.size());
  for (const auto& ds : corpus) {
    days.push_back(
        CorpusDay{ds.participant_id, ds.date, tokenize(ds.text, vocab)});
  }
  return TrainCorpus(std::move(days));
}

std::pair<int, int> TrainCorpus::participant_block(int day_index) const {
  return blocks_[std::size_t(block_of_day_[std::size_t(day_index)])];
}

Triplet sample_triplet(const TrainCorpus& corpus, Rng& rng,
                       bool negative_by_participant) {
  const int n = static_cast<int>(corpus.size());
  if (n < 2 || corpus.n_participants() < 2) {
    throw Error("sample_triplet: corpus needs at least 2 participants");
  }
  for (int attempt = 0; attempt < kAnchorRetries; ++attempt) {
    const int anchor = static_cast<int>(rng.bounded(std::uint64_t(n)));
    const auto [begin, end] = corpus.participant_block(anchor);
    const Date anchor_date = corpus.day(anchor).date;

    // Days of the same participant with date in [anchor-30, anchor+30],
    // excluding the anchor itself. Dates are sorted within the block.
    const auto lo = std::lower_bound(
        corpus.days().begin() + begin, corpus.days().begin() + end,
        anchor_date - kPositiveWindowDays,
        [](const CorpusDay& d, Date t) { return d.date < t; });
    const auto hi = std::upper_bound(
        corpus.days().begin() + begin, corpus.days().begin() + end,
        anchor_date + kPositiveWindowDays,
        [](Date t, const CorpusDay& d) { return t < d.date; });
    const int lo_idx = static_cast<int>(lo - corpus.days().begin());
    const int n_window = static_cast<int>(hi - lo);
    const int n_candidates = n_window - 1;
    if (n_candidates <= 0) continue;  // redraw anchor

    int positive =
        lo_idx + static_cast<int>(rng.bounded(std::uint64_t(n_candidates)));
    if (positive >= anchor) ++positive;  // skip the anchor slot

    const int n_others = n - (end - begin);
    if (n_others <= 0) {
      throw Error("sample_triplet: no negative exists (single participant)");
    }
    int negative;
    if (negative_by_participant) {
      const int anchor_block = corpus.participant_index(anchor);
      int other = static_cast<int>(
          rng.bounded(std::uint64_t(corpus.n_participants() - 1)));
      if (other >= anchor_block) ++other;
      const auto [o_begin, o_end] = corpus.block(other);
      negative = o_begin + static_cast<int>(
                               rng.bounded(std::uint64_t(o_end - o_begin)));
    } else {
      negative = static_cast<int>(rng.bounded(std::uint64_t(n_others)));
      if (negative >= begin) negative += end - begin;
    }

    return Triplet{anchor, positive, negative};
  }
  throw Error("sample_triplet: no anchor with an eligible positive after " +
              std::to_string(kAnchorRetries) + " retries");
}

double triplet_loss(CRef<Vector> anchor, CRef<Vector> positive,
                    CRef<Vector> negative, double margin) {
  const double na = anchor.norm(), np = positive.norm(), nn = negative.norm();
  if (na == 0 || np == 0 || nn == 0) {
    throw Error("triplet_loss: zero-norm vector");
  }
  const double cos_ap = anchor.dot(positive) / (na * np);
  const double cos_an = anchor.dot(negative) / (na * nn);
  return std::max(0.0, margin - cos_ap + cos_an);
}

TrainConfig TrainConfig::resolved(std::size_t corpus_days) const {
  TrainConfig c = *this;
  const bool paper = paper_mode || corpus_days >= kPaperScaleCorpusDays;
  if (c.triplets_per_epoch <= 0) c.triplets_per_epoch = paper ? 100000 : 10000;
  if (c.batch_size <= 0) c.batch_size = 256;
  if (c.peak_lr < 0) c.peak_lr = paper ? 2e-5 : 1e-3;
  if (c.warmup_steps < 0) c.warmup_steps = paper ? 10000 : 500;
  const long steps_per_epoch =
      (c.triplets_per_epoch + c.batch_size - 1) / c.batch_size;
  if (c.total_steps < 0) {
    c.total_steps = static_cast<int>(steps_per_epoch * c.epochs);
  }
  c.warmup_steps = std::min<int>(c.warmup_steps, c.total_steps);
  return c;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw Error("TrainConfig: epochs must be >= 0");
  if (margin <= 0) throw Error("TrainConfig: margin must be positive");
  if (peak_lr < 0) throw Error("TrainConfig: peak_lr must be >= 0");
  if (triplets_per_epoch <= 0 || batch_size <= 0) {
    throw Error("TrainConfig: triplets_per_epoch and batch_size must be > 0");
  }
  if (warmup_steps > total_steps) {
    throw Error("TrainConfig: warmup_steps must be <= total_steps");
  }
}

template <class Scalar>
OptimizerStateT<Scalar> make_optimizer_state(
    const ModelParamsT<Scalar>& params) {
  OptimizerStateT<Scalar> state;
  for (const auto& ref : tensor_refs(params)) {
    state.m.push_back(VectorX<Scalar>::Zero(ref.size()));
    state.v.push_back(VectorX<Scalar>::Zero(ref.size()));
  }
  return state;
}

template <class Scalar>
void adamw_step(ModelParamsT<Scalar>& params, const ModelParamsT<Scalar>& grads,
                OptimizerStateT<Scalar>& state, double lr,
                double weight_decay) {
  const long t = state.step + 1;
  const Scalar beta1 = Scalar(kAdamBeta1);
  const Scalar beta2 = Scalar(kAdamBeta2);
  const Scalar bias1 = Scalar(1.0 - std::pow(kAdamBeta1, double(t)));
  const Scalar bias2 = Scalar(1.0 - std::pow(kAdamBeta2, double(t)));

  auto param_refs = tensor_refs(params);
  const auto grad_refs = tensor_refs(grads);
  for (std::size_t i = 0; i < param_refs.size(); ++i) {
    Eigen::Map<VectorX<Scalar>> theta(param_refs[i].data,
                                      param_refs[i].size());
    Eigen::Map<const VectorX<Scalar>> g(grad_refs[i].data,
                                        grad_refs[i].size());
    auto& m = state.m[i];
    auto& v = state.v[i];
    m = beta1 * m + (Scalar(1) - beta1) * g;
    v = (beta2 * v.array() + (Scalar(1) - beta2) * g.array().square()).matrix();
    const auto m_hat = m.array() / bias1;
    const auto v_hat = v.array() / bias2;
    theta -= (Scalar(lr) * (m_hat / (v_hat.sqrt() + Scalar(kAdamEps)) +
                            Scalar(weight_decay) * theta.array()))
                 .matrix();
  }
  state.step = t;
}

double lr_schedule(long step, long warmup_steps, long total_steps,
                   double peak_lr) {
  if (step < 0 || step > total_steps) {
    throw Error("lr_schedule: step outside [0, total_steps]");
  }
  if (step <= warmup_steps) {
    return warmup_steps == 0 ? peak_lr
                             : peak_lr * double(step) / double(warmup_steps);
  }
  return peak_lr * double(total_steps - step) /
         double(total_steps - warmup_steps);
}

template <class Scalar>
std::pair<double, ModelParamsT<Scalar>> batch_backward(
    const ModelParamsT<Scalar>& params, const EncoderConfig& config,
    const TrainCorpus& corpus, const std::vector<Triplet>& batch,
    double margin) {
  if (batch.empty()) throw Error("batch_backward: empty batch");
  ModelParamsT<Scalar> grads = make_params<Scalar>(config);
  grads.setZero();

  const Scalar inv_batch = Scalar(1) / Scalar(batch.size());
  double total_loss = 0;

  for (const Triplet& tr : batch) {
    auto cache_a =
        encode_cached(params, config, corpus.day(tr.anchor).token_ids);
    auto cache_p =
        encode_cached(params, config, corpus.day(tr.positive).token_ids);
    auto cache_n =
        encode_cached(params, config, corpus.day(tr.negative).token_ids);
    const VectorX<Scalar>& ea = cache_a.output;
    const VectorX<Scalar>& ep = cache_p.output;
    const VectorX<Scalar>& en = cache_n.output;

    const Scalar na = ea.norm(), np = ep.norm(), nn = en.norm();
    if (na == Scalar(0) || np == Scalar(0) || nn == Scalar(0)) {
      throw Error("batch_backward: zero-norm embedding");
    }
    const Scalar cos_ap = ea.dot(ep) / (na * np);
    const Scalar cos_an = ea.dot(en) / (na * nn);
    const Scalar loss = std::max(Scalar(0), Scalar(margin) - cos_ap + cos_an);
    total_loss += double(loss);
    if (loss <= Scalar(0)) continue;  // inactive hinge: zero gradient

    // d cos(u, v) / du = v / (|u||v|) - cos * u / |u|^2
    const Scalar d_cos_ap = -inv_batch;
    const Scalar d_cos_an = inv_batch;
    VectorX<Scalar> d_ea =
        d_cos_ap * (ep / (na * np) - cos_ap * ea / (na * na)) +
        d_cos_an * (en / (na * nn) - cos_an * ea / (na * na));
    VectorX<Scalar> d_ep =
        d_cos_ap * (ea / (na * np) - cos_ap * ep / (np * np));
    VectorX<Scalar> d_en =
        d_cos_an * (ea / (na * nn) - cos_an * en / (nn * nn));

    accumulate_sequence_gradient(params, config, cache_a, d_ea, grads);
    accumulate_sequence_gradient(params, config, cache_p, d_ep, grads);
    accumulate_sequence_gradient(params, config, cache_n, d_en, grads);
  }

  for (const auto& ref : tensor_refs(grads)) {
    if (!Eigen::Map<const VectorX<Scalar>>(ref.data, ref.size()).allFinite()) {
      throw Error("batch_backward: non-finite gradient in tensor '" +
                  ref.name + "'");
    }
  }
  return {total_loss / double(batch.size()), std::move(grads)};
}

template <class Scalar>
TrainResultT<Scalar> train(
    const TrainCorpus& corpus, const EncoderConfig& encoder_config,
    const TrainConfig& train_config, const ModelParamsT<Scalar>* initial,
    const std::function<void(int epoch, const ModelParamsT<Scalar>&)>&
        on_epoch_end) {
  encoder_config.validate();
  const TrainConfig cfg = train_config.resolved(corpus.size());
  cfg.validate();

  TrainResultT<Scalar> result;
  result.resolved_config = cfg;
  if (initial != nullptr) {
    result.params = *initial;
  } else {
    Rng init_rng(derive_seed(cfg.seed, "trainer", "init"));
    result.params = init_params<Scalar>(encoder_config, init_rng);
  }
  if (cfg.epochs == 0 || cfg.total_steps == 0) return result;

  Rng sample_rng(derive_seed(cfg.seed, "trainer", "sampling"));
  auto state = make_optimizer_state(result.params);
  long step = 0;

  for (int epoch = 1; epoch <= cfg.epochs && step < cfg.total_steps; ++epoch) {
    std::vector<Triplet> triplets(std::size_t(cfg.triplets_per_epoch));
    for (auto& t : triplets) {
      t = sample_triplet(corpus, sample_rng, cfg.negative_by_participant);
    }

    for (std::size_t offset = 0;
         offset < triplets.size() && step < cfg.total_steps;
         offset += std::size_t(cfg.batch_size)) {
      const std::size_t batch_end =
          std::min(triplets.size(), offset + std::size_t(cfg.batch_size));
      const std::vector<Triplet> batch(triplets.begin() + long(offset),
                                       triplets.begin() + long(batch_end));
      auto [loss, grads] =
          batch_backward(result.params, encoder_config, corpus, batch,
                         cfg.margin);
      const double lr =
          lr_schedule(step, cfg.warmup_steps, cfg.total_steps, cfg.peak_lr);
      adamw_step(result.params, grads, state, lr, cfg.weight_decay);
      ++step;
      result.history.push_back(TrainStep{step, epoch, lr, loss});
    }
    if (on_epoch_end) on_epoch_end(epoch, result.params);
  }
  return result;
}

void write_loss_history(std::ostream& out,
                        const std::vector<TrainStep>& hist) {
  out << "step,epoch,lr,loss\n";
  for (const auto& h : hist) {
    out << h.step << ',' << h.epoch << ',' << h.lr << ',' << h.loss << '\n';
  }
}

#define DAYVEC_INSTANTIATE_TRAINER(S)                                       \
  template OptimizerStateT<S> make_optimizer_state<S>(                      \
      const ModelParamsT<S>&);                                              \
  template void adamw_step<S>(ModelParamsT<S>&, const ModelParamsT<S>&,     \
                              OptimizerStateT<S>&, double, double);         \
  template std::pair<double, ModelParamsT<S>> batch_backward<S>(            \
      const ModelParamsT<S>&, const EncoderConfig&, const TrainCorpus&,     \
      const std::vector<Triplet>&, double);                                 \
  template TrainResultT<S> train<S>(                                        \
      const TrainCorpus&, const EncoderConfig&, const TrainConfig&,         \
      const ModelParamsT<S>*,                                               \
      const std::function<void(int, const ModelParamsT<S>&)>&);

DAYVEC_INSTANTIATE_TRAINER(float)
DAYVEC_INSTANTIATE_TRAINER(double)

#undef DAYVEC_INSTANTIATE_TRAINER

}  // namespace dayvec
