#pragma once

#include "dayvec/random.hpp"
#include "dayvec/types.hpp"

#include <string>
#include <vector>

namespace dayvec {

// Pre-norm transformer encoder with learned positional embeddings and mean
// pooling over non-PAD positions. The PAD token is by convention the last
// vocabulary id (vocab_size - 1).
struct EncoderConfig {
  int d_model = 64;
  int n_layers = 2;
  int n_heads = 4;
  int d_ff = 128;
  int max_len = 256;
  bool normalize_output = true;
  int vocab_size = 0;

  int pad_id() const { return vocab_size - 1; }
  void validate() const;
};

template <class Scalar>
struct LayerParamsT {
  MatrixX<Scalar> wq, wk, wv, wo;            // d_model x d_model
  MatrixX<Scalar> w1;                        // d_model x d_ff
  MatrixX<Scalar> w2;                        // d_ff x d_model
  VectorX<Scalar> b1;                        // d_ff
  VectorX<Scalar> b2;                        // d_model
  VectorX<Scalar> ln1_gain, ln1_bias;        // d_model
  VectorX<Scalar> ln2_gain, ln2_bias;        // d_model
};

template <class Scalar>
struct ModelParamsT {
  MatrixX<Scalar> token_embeddings;       // vocab_size x d_model
  MatrixX<Scalar> positional_embeddings;  // max_len x d_model
  std::vector<LayerParamsT<Scalar>> layers;

  void setZero();
  bool allFinite() const;

  template <class S2>
  ModelParamsT<S2> cast() const;
};

using ModelParams = ModelParamsT<float>;

// Flat view of one parameter tensor; `rows`/`cols` describe the Eigen
// (column-major) storage behind `data`.
template <class Scalar>
struct TensorRef {
  std::string name;
  Scalar* data;
  Eigen::Index rows, cols;
  Eigen::Index size() const { return rows * cols; }
};

// Stable enumeration order: token_embeddings, positional_embeddings, then per
// layer wq, wk, wv, wo, w1, w2, b1, b2, ln1_gain, ln1_bias, ln2_gain,
// ln2_bias. Checkpoints, optimizer state and gradient checks all rely on it.
template <class Scalar>
std::vector<TensorRef<Scalar>> tensor_refs(ModelParamsT<Scalar>& params);
template <class Scalar>
std::vector<TensorRef<const Scalar>> tensor_refs(
    const ModelParamsT<Scalar>& params);

// Allocates all tensors per config and zero-fills.
template <class Scalar>
ModelParamsT<Scalar> make_params(const EncoderConfig& config);

// Scaled normal initialization: embeddings and projections N(0, 1/sqrt(fan
// in)), biases zero, layer-norm gain one / bias zero. Deterministic in rng.
template <class Scalar>
ModelParamsT<Scalar> init_params(const EncoderConfig& config, Rng& rng);

// Word-vector text file: one line per token, `token v1 ... v_d` with
// d == d_model. Rows of token_embeddings for matching tokens are replaced in
// place; returns how many were. Dimension mismatches and duplicate token
// lines are errors. Tokens absent from `vocab_tokens` are ignored.
template <class Scalar>
int load_pretrained_token_embeddings(std::istream& in,
                                     const std::vector<std::string>& vocab_tokens,
                                     const EncoderConfig& config,
                                     ModelParamsT<Scalar>& params);

// Forward pass: token + positional embeddings, n_layers of pre-norm
// multi-head self-attention and pre-norm GELU feed-forward (both residual),
// mean pooling over non-PAD positions, optional L2 normalization.
template <class Scalar>
VectorX<Scalar> encode(const ModelParamsT<Scalar>& params,
                       const EncoderConfig& config,
                       const std::vector<int>& token_ids);

// Activation cache for reverse-mode differentiation.
template <class Scalar>
struct LayerCache {
  MatrixX<Scalar> x_in;                     // T x d
  VectorX<Scalar> ln1_mean, ln1_inv_std;    // T
  MatrixX<Scalar> ln1_xhat, h1;             // T x d
  MatrixX<Scalar> q, k, v;                  // T x d
  std::vector<MatrixX<Scalar>> attn;        // n_heads of T x T row-softmax
  MatrixX<Scalar> context;                  // T x d (heads concatenated)
  MatrixX<Scalar> x_mid;                    // T x d
  VectorX<Scalar> ln2_mean, ln2_inv_std;    // T
  MatrixX<Scalar> ln2_xhat, h2;             // T x d
  MatrixX<Scalar> ff_pre, ff_act;           // T x d_ff
};

template <class Scalar>
struct ForwardCache {
  std::vector<int> token_ids;
  std::vector<int> pooled_positions;  // non-PAD positions
  MatrixX<Scalar> x0;                 // T x d embedded input
  std::vector<LayerCache<Scalar>> layers;
  MatrixX<Scalar> x_final;            // T x d
  VectorX<Scalar> pooled;             // pre-normalization
  Scalar pooled_norm = 1;
  VectorX<Scalar> output;
};

template <class Scalar>
ForwardCache<Scalar> encode_cached(const ModelParamsT<Scalar>& params,
                                   const EncoderConfig& config,
                                   const std::vector<int>& token_ids);

// Accumulates d(loss)/d(params) into `grads` for one sequence, given
// d(loss)/d(output).
template <class Scalar>
void accumulate_sequence_gradient(const ModelParamsT<Scalar>& params,
                                  const EncoderConfig& config,
                                  const ForwardCache<Scalar>& cache,
                                  const VectorX<Scalar>& d_output,
                                  ModelParamsT<Scalar>& grads);

// Checkpoint container: magic + JSON header (version, config, tensor table)
// followed by raw little-endian float32 tensor payloads (column-major) and an
// FNV-1a checksum of the payload.
void save_checkpoint(const ModelParams& params, const EncoderConfig& config,
                     const std::string& path);
std::pair<ModelParams, EncoderConfig> load_checkpoint(const std::string& path);

extern template struct ModelParamsT<float>;
extern template struct ModelParamsT<double>;

}  // namespace dayvec
