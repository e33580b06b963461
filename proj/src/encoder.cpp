#include "dayvec/encoder.hpp"

#include "dayvec/daystring.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace dayvec {

using nlohmann::json;

namespace {

constexpr double kLayerNormEps = 1e-5;

template <class Scalar>
Scalar gelu(Scalar z) {
  return Scalar(0.5) * z *
         (Scalar(1) + std::erf(z / Scalar(std::numbers::sqrt2)));
}

template <class Scalar>
Scalar gelu_grad(Scalar z) {
  const Scalar phi_cdf =
      Scalar(0.5) * (Scalar(1) + std::erf(z / Scalar(std::numbers::sqrt2)));
  const Scalar phi_pdf = Scalar(std::exp(-0.5 * double(z) * double(z)) /
                                std::sqrt(2.0 * std::numbers::pi));
  return phi_cdf + z * phi_pdf;
}

// Row-wise layer norm, retaining mean / inv-std / xhat for the backward pass.
template <class Scalar>
void layer_norm_forward(const MatrixX<Scalar>& x, const VectorX<Scalar>& gain,
                        const VectorX<Scalar>& bias, VectorX<Scalar>& mean,
                        VectorX<Scalar>& inv_std, MatrixX<Scalar>& xhat,
                        MatrixX<Scalar>& out) {
  const Eigen::Index t_len = x.rows();
  const Eigen::Index d = x.cols();
  mean.resize(t_len);
  inv_std.resize(t_len);
  xhat.resize(t_len, d);
  out.resize(t_len, d);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    const Scalar m = x.row(t).mean();
    const Scalar var = (x.row(t).array() - m).square().mean();
    const Scalar inv = Scalar(1) / std::sqrt(var + Scalar(kLayerNormEps));
    mean(t) = m;
    inv_std(t) = inv;
    xhat.row(t) = ((x.row(t).array() - m) * inv).matrix();
    out.row(t) = xhat.row(t).cwiseProduct(gain.transpose()) + bias.transpose();
  }
}

template <class Scalar>
void layer_norm_backward(const MatrixX<Scalar>& d_out,
                         const MatrixX<Scalar>& xhat,
                         const VectorX<Scalar>& inv_std,
                         const VectorX<Scalar>& gain, VectorX<Scalar>& d_gain,
                         VectorX<Scalar>& d_bias, MatrixX<Scalar>& d_x) {
  const Eigen::Index t_len = d_out.rows();
  const Eigen::Index d = d_out.cols();
  d_gain += (d_out.cwiseProduct(xhat)).colwise().sum().transpose();
  d_bias += d_out.colwise().sum().transpose();
  d_x.resize(t_len, d);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    const auto d_xhat =
        d_out.row(t).cwiseProduct(gain.transpose()).eval();
    const Scalar mean_dxhat = d_xhat.mean();
    const Scalar mean_dxhat_xhat = d_xhat.cwiseProduct(xhat.row(t)).mean();
    d_x.row(t) = (inv_std(t) * (d_xhat.array() - mean_dxhat -
                                xhat.row(t).array() * mean_dxhat_xhat))
                     .matrix();
  }
}

void check_token_ids(const EncoderConfig& config,
                     const std::vector<int>& token_ids) {
  if (token_ids.empty()) throw Error("encode: empty token sequence");
  if (static_cast<int>(token_ids.size()) > config.max_len - 1 ||
      static_cast<int>(token_ids.size()) > kMaxTokens) {
    throw Error("encode: sequence of " + std::to_string(token_ids.size()) +
                " tokens exceeds the limit of " + std::to_string(kMaxTokens));
  }
  for (int id : token_ids) {
    if (id < 0 || id >= config.vocab_size) {
      throw Error("encode: token id " + std::to_string(id) +
                  " outside vocabulary of size " +
                  std::to_string(config.vocab_size));
    }
  }
}

}  // namespace

void EncoderConfig::validate() const {
  if (d_model <= 0 || n_layers < 0 || n_heads <= 0 || d_ff <= 0 ||
      vocab_size <= 0) {
    throw Error("EncoderConfig: dimensions must be positive");
  }
  if (d_model % n_heads != 0) {
    throw Error("EncoderConfig: d_model must be divisible by n_heads");
  }
  if (max_len != 256) throw Error("EncoderConfig: max_len must be 256");
}

template <class Scalar>
void ModelParamsT<Scalar>::setZero() {
  for (auto& ref : tensor_refs(*this)) {
    Eigen::Map<VectorX<Scalar>>(ref.data, ref.size()).setZero();
  }
}

template <class Scalar>
bool ModelParamsT<Scalar>::allFinite() const {
  for (const auto& ref : tensor_refs(*this)) {
    if (!Eigen::Map<const VectorX<Scalar>>(ref.data, ref.size()).allFinite()) {
      return false;
    }
  }
  return true;
}

template <class Scalar>
template <class S2>
ModelParamsT<S2> ModelParamsT<Scalar>::cast() const {
  ModelParamsT<S2> out;
  out.token_embeddings = token_embeddings.template cast<S2>();
  out.positional_embeddings = positional_embeddings.template cast<S2>();
  out.layers.reserve(layers.size());
  for (const auto& l : layers) {
    LayerParamsT<S2> o;
    o.wq = l.wq.template cast<S2>();
    o.wk = l.wk.template cast<S2>();
    o.wv = l.wv.template cast<S2>();
    o.wo = l.wo.template cast<S2>();
    o.w1 = l.w1.template cast<S2>();
    o.w2 = l.w2.template cast<S2>();
    o.b1 = l.b1.template cast<S2>();
    o.b2 = l.b2.template cast<S2>();
    o.ln1_gain = l.ln1_gain.template cast<S2>();
    o.ln1_bias = l.ln1_bias.template cast<S2>();
    o.ln2_gain = l.ln2_gain.template cast<S2>();
    o.ln2_bias = l.ln2_bias.template cast<S2>();
    out.layers.push_back(std::move(o));
  }
  return out;
}

namespace {

template <class P, class S>
std::vector<TensorRef<S>> tensor_refs_impl(P& params) {
  std::vector<TensorRef<S>> refs;
  refs.push_back({"token_embeddings", params.token_embeddings.data(),
                  params.token_embeddings.rows(),
                  params.token_embeddings.cols()});
  refs.push_back({"positional_embeddings", params.positional_embeddings.data(),
                  params.positional_embeddings.rows(),
                  params.positional_embeddings.cols()});
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    auto& l = params.layers[i];
    const std::string p = "layer" + std::to_string(i) + ".";
    auto add = [&](const std::string& name, auto& m) {
      refs.push_back({p + name, m.data(), m.rows(), m.cols()});
    };
    add("wq", l.wq);
    add("wk", l.wk);
    add("wv", l.wv);
    add("wo", l.wo);
    add("w1", l.w1);
    add("w2", l.w2);
    add("b1", l.b1);
    add("b2", l.b2);
    add("ln1_gain", l.ln1_gain);
    add("ln1_bias", l.ln1_bias);
    add("ln2_gain", l.ln2_gain);
    add("ln2_bias", l.ln2_bias);
  }
  return refs;
}

}  // namespace

template <class Scalar>
std::vector<TensorRef<Scalar>> tensor_refs(ModelParamsT<Scalar>& params) {
  return tensor_refs_impl<ModelParamsT<Scalar>, Scalar>(params);
}

template <class Scalar>
std::vector<TensorRef<const Scalar>> tensor_refs(
    const ModelParamsT<Scalar>& params) {
  return tensor_refs_impl<const ModelParamsT<Scalar>, const Scalar>(params);
}

template <class Scalar>
ModelParamsT<Scalar> make_params(const EncoderConfig& config) {
  config.validate();
  ModelParamsT<Scalar> p;
  p.token_embeddings =
      MatrixX<Scalar>::Zero(config.vocab_size, config.d_model);
  p.positional_embeddings =
      MatrixX<Scalar>::Zero(config.max_len, config.d_model);
  p.layers.resize(static_cast<std::size_t>(config.n_layers));
  for (auto& l : p.layers) {
    l.wq = MatrixX<Scalar>::Zero(config.d_model, config.d_model);
    l.wk = MatrixX<Scalar>::Zero(config.d_model, config.d_model);
    l.wv = MatrixX<Scalar>::Zero(config.d_model, config.d_model);
    l.wo = MatrixX<Scalar>::Zero(config.d_model, config.d_model);
    l.w1 = MatrixX<Scalar>::Zero(config.d_model, config.d_ff);
    l.w2 = MatrixX<Scalar>::Zero(config.d_ff, config.d_model);
    l.b1 = VectorX<Scalar>::Zero(config.d_ff);
    l.b2 = VectorX<Scalar>::Zero(config.d_model);
    l.ln1_gain = VectorX<Scalar>::Ones(config.d_model);
    l.ln1_bias = VectorX<Scalar>::Zero(config.d_model);
    l.ln2_gain = VectorX<Scalar>::Ones(config.d_model);
    l.ln2_bias = VectorX<Scalar>::Zero(config.d_model);
  }
  return p;
}

template <class Scalar>
ModelParamsT<Scalar> init_params(const EncoderConfig& config, Rng& rng) {
  ModelParamsT<Scalar> p = make_params<Scalar>(config);
  const double proj_scale = 1.0 / std::sqrt(double(config.d_model));
  const double ff_out_scale = 1.0 / std::sqrt(double(config.d_ff));
  auto fill = [&](MatrixX<Scalar>& m, double scale) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        m(r, c) = Scalar(rng.normal(0.0, scale));
      }
    }
  };
  fill(p.token_embeddings, proj_scale);
  fill(p.positional_embeddings, proj_scale);
  for (auto& l : p.layers) {
    fill(l.wq, proj_scale);
    fill(l.wk, proj_scale);
    fill(l.wv, proj_scale);
    fill(l.wo, proj_scale);
    fill(l.w1, proj_scale);
    fill(l.w2, ff_out_scale);
  }
  return p;
}

template <class Scalar>
int load_pretrained_token_embeddings(
    std::istream& in, const std::vector<std::string>& vocab_tokens,
    const EncoderConfig& config, ModelParamsT<Scalar>& params) {
  std::map<std::string, int> vocab_ids;
  for (std::size_t i = 0; i < vocab_tokens.size(); ++i) {
    vocab_ids.emplace(vocab_tokens[i], static_cast<int>(i));
  }
  std::set<std::string> seen;
  int replaced = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    if (!seen.insert(token).second) {
      throw Error("pretrained embeddings line " + std::to_string(line_no) +
                  ": duplicate token '" + token + "'");
    }
    std::vector<double> values;
    double v = 0;
    while (fields >> v) values.push_back(v);
    if (static_cast<int>(values.size()) != config.d_model) {
      throw Error("pretrained embeddings line " + std::to_string(line_no) +
                  ": got " + std::to_string(values.size()) +
                  " values, expected d_model=" + std::to_string(config.d_model));
    }
    const auto it = vocab_ids.find(token);
    if (it == vocab_ids.end()) continue;
    for (int j = 0; j < config.d_model; ++j) {
      params.token_embeddings(it->second, j) = Scalar(values[size_t(j)]);
    }
    ++replaced;
  }
  return replaced;
}

template <class Scalar>
ForwardCache<Scalar> encode_cached(const ModelParamsT<Scalar>& params,
                                   const EncoderConfig& config,
                                   const std::vector<int>& token_ids) {
  check_token_ids(config, token_ids);
  const Eigen::Index t_len = static_cast<Eigen::Index>(token_ids.size());
  const int d = config.d_model;
  const int n_heads = config.n_heads;
  const int dh = d / n_heads;
  const Scalar inv_sqrt_dh = Scalar(1) / std::sqrt(Scalar(dh));

  ForwardCache<Scalar> cache;
  cache.token_ids = token_ids;
  cache.x0.resize(t_len, d);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    cache.x0.row(t) = params.token_embeddings.row(token_ids[size_t(t)]) +
                      params.positional_embeddings.row(t);
    if (token_ids[size_t(t)] != config.pad_id()) {
      cache.pooled_positions.push_back(static_cast<int>(t));
    }
  }
  if (cache.pooled_positions.empty()) {
    throw Error("encode: sequence contains only PAD tokens");
  }

  MatrixX<Scalar> x = cache.x0;
  cache.layers.resize(params.layers.size());
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    const auto& lp = params.layers[li];
    auto& lc = cache.layers[li];
    lc.x_in = x;

    layer_norm_forward(lc.x_in, lp.ln1_gain, lp.ln1_bias, lc.ln1_mean,
                       lc.ln1_inv_std, lc.ln1_xhat, lc.h1);
    lc.q.noalias() = lc.h1 * lp.wq;
    lc.k.noalias() = lc.h1 * lp.wk;
    lc.v.noalias() = lc.h1 * lp.wv;

    lc.attn.resize(size_t(n_heads));
    lc.context.resize(t_len, d);
    for (int h = 0; h < n_heads; ++h) {
      const auto qh = lc.q.middleCols(h * dh, dh);
      const auto kh = lc.k.middleCols(h * dh, dh);
      const auto vh = lc.v.middleCols(h * dh, dh);
      MatrixX<Scalar> scores = qh * kh.transpose() * inv_sqrt_dh;
      // Row-stable softmax.
      for (Eigen::Index t = 0; t < t_len; ++t) {
        const Scalar row_max = scores.row(t).maxCoeff();
        scores.row(t) = (scores.row(t).array() - row_max).exp().matrix();
        scores.row(t) /= scores.row(t).sum();
      }
      lc.attn[size_t(h)] = std::move(scores);
      lc.context.middleCols(h * dh, dh).noalias() = lc.attn[size_t(h)] * vh;
    }
    lc.x_mid = lc.x_in;
    lc.x_mid.noalias() += lc.context * lp.wo;

    layer_norm_forward(lc.x_mid, lp.ln2_gain, lp.ln2_bias, lc.ln2_mean,
                       lc.ln2_inv_std, lc.ln2_xhat, lc.h2);
    lc.ff_pre.noalias() = lc.h2 * lp.w1;
    lc.ff_pre.rowwise() += lp.b1.transpose();
    lc.ff_act = lc.ff_pre.unaryExpr([](Scalar z) { return gelu(z); });
    x = lc.x_mid;
    x.noalias() += lc.ff_act * lp.w2;
    x.rowwise() += lp.b2.transpose();
  }
  cache.x_final = x;

  cache.pooled = VectorX<Scalar>::Zero(d);
  for (int t : cache.pooled_positions) {
    cache.pooled += cache.x_final.row(t).transpose();
  }
  cache.pooled /= Scalar(cache.pooled_positions.size());

  if (config.normalize_output) {
    // Accumulate the norm in double so normalized outputs stay within 1e-6
    // of unit length even at float precision.
    const double norm =
        std::sqrt(cache.pooled.template cast<double>().squaredNorm());
    if (!(norm > 0)) throw Error("encode: zero-norm embedding");
    cache.pooled_norm = Scalar(norm);
    cache.output = cache.pooled / cache.pooled_norm;
  } else {
    cache.pooled_norm = Scalar(1);
    cache.output = cache.pooled;
  }
  return cache;
}

template <class Scalar>
VectorX<Scalar> encode(const ModelParamsT<Scalar>& params,
                       const EncoderConfig& config,
                       const std::vector<int>& token_ids) {
  return encode_cached(params, config, token_ids).output;
}

template <class Scalar>
void accumulate_sequence_gradient(const ModelParamsT<Scalar>& params,
                                  const EncoderConfig& config,
                                  const ForwardCache<Scalar>& cache,
                                  const VectorX<Scalar>& d_output,
                                  ModelParamsT<Scalar>& grads) {
  const Eigen::Index t_len = static_cast<Eigen::Index>(cache.token_ids.size());
  const int d = config.d_model;
  const int n_heads = config.n_heads;
  const int dh = d / n_heads;
  const Scalar inv_sqrt_dh = Scalar(1) / std::sqrt(Scalar(dh));

  VectorX<Scalar> d_pooled;
  if (config.normalize_output) {
    // out = pooled / ||pooled||
    d_pooled = (d_output - cache.output * cache.output.dot(d_output)) /
               cache.pooled_norm;
  } else {
    d_pooled = d_output;
  }

  MatrixX<Scalar> d_x = MatrixX<Scalar>::Zero(t_len, d);
  const Scalar pool_scale = Scalar(1) / Scalar(cache.pooled_positions.size());
  for (int t : cache.pooled_positions) {
    d_x.row(t) = d_pooled.transpose() * pool_scale;
  }

  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const auto& lp = params.layers[li];
    const auto& lc = cache.layers[li];
    auto& lg = grads.layers[li];

    // x_out = x_mid + gelu(h2 w1 + b1) w2 + b2
    const MatrixX<Scalar>& d_ff_out = d_x;
    lg.w2.noalias() += lc.ff_act.transpose() * d_ff_out;
    lg.b2 += d_ff_out.colwise().sum().transpose();
    MatrixX<Scalar> d_ff_act = d_ff_out * lp.w2.transpose();
    MatrixX<Scalar> d_ff_pre = d_ff_act.cwiseProduct(
        lc.ff_pre.unaryExpr([](Scalar z) { return gelu_grad(z); }));
    lg.w1.noalias() += lc.h2.transpose() * d_ff_pre;
    lg.b1 += d_ff_pre.colwise().sum().transpose();
    MatrixX<Scalar> d_h2 = d_ff_pre * lp.w1.transpose();

    MatrixX<Scalar> d_x_mid;
    layer_norm_backward(d_h2, lc.ln2_xhat, lc.ln2_inv_std, lp.ln2_gain,
                        lg.ln2_gain, lg.ln2_bias, d_x_mid);
    d_x_mid += d_x;  // residual

    // x_mid = x_in + context wo
    lg.wo.noalias() += lc.context.transpose() * d_x_mid;
    MatrixX<Scalar> d_context = d_x_mid * lp.wo.transpose();

    MatrixX<Scalar> d_q(t_len, d), d_k(t_len, d), d_v(t_len, d);
    for (int h = 0; h < n_heads; ++h) {
      const auto qh = lc.q.middleCols(h * dh, dh);
      const auto kh = lc.k.middleCols(h * dh, dh);
      const auto vh = lc.v.middleCols(h * dh, dh);
      const auto& probs = lc.attn[size_t(h)];
      const auto d_ctx_h = d_context.middleCols(h * dh, dh);

      MatrixX<Scalar> d_probs = d_ctx_h * vh.transpose();
      d_v.middleCols(h * dh, dh).noalias() = probs.transpose() * d_ctx_h;
      // Softmax rows: dS = P .* (dP - rowsum(dP .* P))
      MatrixX<Scalar> d_scores(t_len, t_len);
      for (Eigen::Index t = 0; t < t_len; ++t) {
        const Scalar dot = d_probs.row(t).dot(probs.row(t));
        d_scores.row(t) =
            (probs.row(t).array() * (d_probs.row(t).array() - dot)).matrix();
      }
      d_q.middleCols(h * dh, dh).noalias() = d_scores * kh * inv_sqrt_dh;
      d_k.middleCols(h * dh, dh).noalias() =
          d_scores.transpose() * qh * inv_sqrt_dh;
    }
    lg.wq.noalias() += lc.h1.transpose() * d_q;
    lg.wk.noalias() += lc.h1.transpose() * d_k;
    lg.wv.noalias() += lc.h1.transpose() * d_v;
    MatrixX<Scalar> d_h1 = d_q * lp.wq.transpose();
    d_h1.noalias() += d_k * lp.wk.transpose();
    d_h1.noalias() += d_v * lp.wv.transpose();

    MatrixX<Scalar> d_x_in;
    layer_norm_backward(d_h1, lc.ln1_xhat, lc.ln1_inv_std, lp.ln1_gain,
                        lg.ln1_gain, lg.ln1_bias, d_x_in);
    d_x_in += d_x_mid;  // residual
    d_x = std::move(d_x_in);
  }

  for (Eigen::Index t = 0; t < t_len; ++t) {
    grads.token_embeddings.row(cache.token_ids[size_t(t)]) += d_x.row(t);
    grads.positional_embeddings.row(t) += d_x.row(t);
  }
}

// --- checkpoint io ---------------------------------------------------------

namespace {

constexpr char kCheckpointMagic[8] = {'D', 'V', 'E', 'C', 'C', 'K', 'P', '1'};

json config_to_json(const EncoderConfig& c) {
  return {{"d_model", c.d_model},     {"n_layers", c.n_layers},
          {"n_heads", c.n_heads},     {"d_ff", c.d_ff},
          {"max_len", c.max_len},     {"normalize_output", c.normalize_output},
          {"vocab_size", c.vocab_size}};
}

EncoderConfig config_from_json(const json& j) {
  EncoderConfig c;
  c.d_model = j.at("d_model").get<int>();
  c.n_layers = j.at("n_layers").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.d_ff = j.at("d_ff").get<int>();
  c.max_len = j.at("max_len").get<int>();
  c.normalize_output = j.at("normalize_output").get<bool>();
  c.vocab_size = j.at("vocab_size").get<int>();
  return c;
}

std::uint64_t fnv1a64_bytes(const char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const EncoderConfig& config,
                     const std::string& path) {
  const auto refs = tensor_refs(params);
  json tensor_table = json::array();
  std::size_t payload_bytes = 0;
  for (const auto& r : refs) {
    tensor_table.push_back(
        {{"name", r.name}, {"rows", r.rows}, {"cols", r.cols}});
    payload_bytes += sizeof(float) * static_cast<std::size_t>(r.size());
  }
  const json header = {{"format_version", 1},
                       {"dtype", "float32"},
                       {"layout", "column_major"},
                       {"config", config_to_json(config)},
                       {"tensors", tensor_table}};
  const std::string header_str = header.dump();

  std::string payload;
  payload.reserve(payload_bytes);
  for (const auto& r : refs) {
    payload.append(reinterpret_cast<const char*>(r.data),
                   sizeof(float) * static_cast<std::size_t>(r.size()));
  }
  const std::uint64_t checksum = fnv1a64_bytes(payload.data(), payload.size());

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("save_checkpoint: cannot open '" + path + "'");
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::uint64_t header_len = header_str.size();
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header_str.data(), std::streamsize(header_str.size()));
  out.write(payload.data(), std::streamsize(payload.size()));
  out.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
  if (!out) throw Error("save_checkpoint: write failed for '" + path + "'");
}

std::pair<ModelParams, EncoderConfig> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_checkpoint: cannot open '" + path + "'");
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw Error("load_checkpoint: '" + path + "' is not a checkpoint file");
  }
  std::uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  if (!in || header_len > (1u << 20)) {
    throw Error("load_checkpoint: corrupt header in '" + path + "'");
  }
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), std::streamsize(header_len));
  if (!in) throw Error("load_checkpoint: truncated header in '" + path + "'");
  json header;
  try {
    header = json::parse(header_str);
  } catch (const json::exception& e) {
    throw Error(std::string("load_checkpoint: bad header json: ") + e.what());
  }
  const int version = header.at("format_version").get<int>();
  if (version != 1) {
    throw Error("load_checkpoint: unsupported format version " +
                std::to_string(version));
  }
  const EncoderConfig config = config_from_json(header.at("config"));
  ModelParams params = make_params<float>(config);
  auto refs = tensor_refs(params);
  const auto& table = header.at("tensors");
  if (table.size() != refs.size()) {
    throw Error("load_checkpoint: tensor table size mismatch");
  }
  std::size_t payload_bytes = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& entry = table[i];
    if (entry.at("name").get<std::string>() != refs[i].name ||
        entry.at("rows").get<Eigen::Index>() != refs[i].rows ||
        entry.at("cols").get<Eigen::Index>() != refs[i].cols) {
      throw Error("load_checkpoint: tensor '" + refs[i].name +
                  "' does not match the declared config");
    }
    payload_bytes += sizeof(float) * static_cast<std::size_t>(refs[i].size());
  }
  std::string payload(payload_bytes, '\0');
  in.read(payload.data(), std::streamsize(payload_bytes));
  std::uint64_t checksum = 0;
  in.read(reinterpret_cast<char*>(&checksum), sizeof(checksum));
  if (!in) throw Error("load_checkpoint: truncated payload in '" + path + "'");
  if (fnv1a64_bytes(payload.data(), payload.size()) != checksum) {
    throw Error("load_checkpoint: checksum mismatch in '" + path + "'");
  }
  std::size_t offset = 0;
  for (auto& r : refs) {
    std::memcpy(r.data, payload.data() + offset,
                sizeof(float) * static_cast<std::size_t>(r.size()));
    offset += sizeof(float) * static_cast<std::size_t>(r.size());
  }
  return {std::move(params), config};
}

// --- explicit instantiations -----------------------------------------------

template struct ModelParamsT<float>;
template struct ModelParamsT<double>;
template ModelParamsT<float> ModelParamsT<float>::cast<float>() const;
template ModelParamsT<double> ModelParamsT<float>::cast<double>() const;
template ModelParamsT<float> ModelParamsT<double>::cast<float>() const;
template ModelParamsT<double> ModelParamsT<double>::cast<double>() const;

#define DAYVEC_INSTANTIATE_ENCODER(S)                                         \
  template std::vector<TensorRef<S>> tensor_refs(ModelParamsT<S>&);           \
  template std::vector<TensorRef<const S>> tensor_refs(                       \
      const ModelParamsT<S>&);                                                \
  template ModelParamsT<S> make_params<S>(const EncoderConfig&);              \
  template ModelParamsT<S> init_params<S>(const EncoderConfig&, Rng&);        \
  template int load_pretrained_token_embeddings<S>(                           \
      std::istream&, const std::vector<std::string>&, const EncoderConfig&,   \
      ModelParamsT<S>&);                                                      \
  template VectorX<S> encode<S>(const ModelParamsT<S>&, const EncoderConfig&, \
                                const std::vector<int>&);                     \
  template ForwardCache<S> encode_cached<S>(                                  \
      const ModelParamsT<S>&, const EncoderConfig&, const std::vector<int>&); \
  template void accumulate_sequence_gradient<S>(                              \
      const ModelParamsT<S>&, const EncoderConfig&, const ForwardCache<S>&,   \
      const VectorX<S>&, ModelParamsT<S>&);

DAYVEC_INSTANTIATE_ENCODER(float)
DAYVEC_INSTANTIATE_ENCODER(double)

#undef DAYVEC_INSTANTIATE_ENCODER

}  // namespace dayvec
