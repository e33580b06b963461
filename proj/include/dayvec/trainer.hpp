#pragma once

#include "dayvec/daystring.hpp"
#include "dayvec/encoder.hpp"
#include "dayvec/random.hpp"
#include "dayvec/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dayvec {

constexpr int kPositiveWindowDays = 30;  // |date difference| in [1, 30]

struct CorpusDay {
  std::string participant_id;
  Date date = 0;
  std::vector<int> token_ids;
};

// Tokenized day-string corpus in canonical (participant_id, date) order, with
// per-participant contiguous blocks for O(log n) triplet candidate lookup.
class TrainCorpus {
 public:
  explicit TrainCorpus(std::vector<CorpusDay> days);

  static TrainCorpus from_daystrings(const std::vector<DayString>& corpus,
                                     const Vocabulary& vocab);

  const std::vector<CorpusDay>& days() const { return days_; }
  std::size_t size() const { return days_.size(); }
  const CorpusDay& day(int i) const { return days_[std::size_t(i)]; }

  int n_participants() const { return static_cast<int>(blocks_.size()); }
  // [begin, end) of the participant block that contains day index i.
  std::pair<int, int> participant_block(int day_index) const;
  // [begin, end) of the p-th participant block.
  std::pair<int, int> block(int p) const { return blocks_[std::size_t(p)]; }
  int participant_index(int day_index) const {
    return block_of_day_[std::size_t(day_index)];
  }

 private:
  std::vector<CorpusDay> days_;
  std::vector<std::pair<int, int>> blocks_;  // per participant [begin, end)
  std::vector<int> block_of_day_;
};

struct Triplet {
  int anchor = -1;
  int positive = -1;
  int negative = -1;
};

// Anchor uniform over corpus days; positive uniform over the anchor
// participant's other days with |date delta| in [1, kPositiveWindowDays];
// negative uniform over all days of other participants, or — when
// negative_by_participant is set — uniform over other participants first
// and then uniform over that participant's days. Anchors without an
// eligible positive are redrawn (bounded retries, then error).
Triplet sample_triplet(const TrainCorpus& corpus, Rng& rng,
                       bool negative_by_participant = false);

// Hinge on cosine similarities: max(0, margin - cos(a,p) + cos(a,n)).
double triplet_loss(CRef<Vector> anchor, CRef<Vector> positive,
                    CRef<Vector> negative, double margin);

struct TrainConfig {
  // Sentinel values (<= 0, or < 0 for peak_lr/warmup/total) resolve
  // automatically: paper-mode presets when set or the corpus has >= 50000
  // days, desk-scale presets otherwise.
  int triplets_per_epoch = 0;  // paper 100000, desk 10000
  int batch_size = 0;          // 256
  double margin = 0.25;
  double peak_lr = -1;         // paper 2e-5, desk 1e-3; 0 freezes parameters
  double weight_decay = 0.01;
  int warmup_steps = -1;       // paper 10000, desk 500
  int total_steps = -1;        // epochs * steps_per_epoch
  int epochs = 0;
  bool paper_mode = false;
  // Sample negatives participant-first instead of uniformly over days.
  bool negative_by_participant = false;
  std::uint64_t seed = 0;

  TrainConfig resolved(std::size_t corpus_days) const;
  void validate() const;  // requires already-resolved values
};

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

template <class Scalar>
struct OptimizerStateT {
  // First/second moment accumulators, flat, aligned with tensor_refs order.
  std::vector<VectorX<Scalar>> m;
  std::vector<VectorX<Scalar>> v;
  long step = 0;
};

using OptimizerState = OptimizerStateT<float>;

template <class Scalar>
OptimizerStateT<Scalar> make_optimizer_state(const ModelParamsT<Scalar>& params);

// One decoupled-weight-decay Adam step:
//   theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * theta)
template <class Scalar>
void adamw_step(ModelParamsT<Scalar>& params, const ModelParamsT<Scalar>& grads,
                OptimizerStateT<Scalar>& state, double lr, double weight_decay);

// Linear warmup 0 -> peak over [0, warmup_steps], then linear decay back to 0
// over [warmup_steps, total_steps].
double lr_schedule(long step, long warmup_steps, long total_steps,
                   double peak_lr);

// Mean cosine-triplet loss over a batch and its analytic gradients w.r.t.
// every parameter tensor. Triplets whose hinge is inactive contribute zero
// gradient. Throws on non-finite gradients, naming the tensor.
template <class Scalar>
std::pair<double, ModelParamsT<Scalar>> batch_backward(
    const ModelParamsT<Scalar>& params, const EncoderConfig& config,
    const TrainCorpus& corpus, const std::vector<Triplet>& batch,
    double margin);

struct TrainStep {
  long step = 0;
  int epoch = 0;
  double lr = 0;
  double loss = 0;
};

template <class Scalar>
struct TrainResultT {
  ModelParamsT<Scalar> params;
  std::vector<TrainStep> history;
  TrainConfig resolved_config;
};

using TrainResult = TrainResultT<float>;

// Per epoch: a fresh uniform triplet sample, batched in draw order, one
// optimizer step per batch under the warmup-linear schedule. Deterministic
// given config.seed. `initial` may carry pretrained token embeddings; when
// absent, parameters are initialized from the seed. `on_epoch_end` is invoked
// after each epoch (checkpointing hook).
template <class Scalar>
TrainResultT<Scalar> train(
    const TrainCorpus& corpus, const EncoderConfig& encoder_config,
    const TrainConfig& train_config,
    const ModelParamsT<Scalar>* initial = nullptr,
    const std::function<void(int epoch, const ModelParamsT<Scalar>&)>&
        on_epoch_end = {});

void write_loss_history(std::ostream& out, const std::vector<TrainStep>& hist);

}  // namespace dayvec
