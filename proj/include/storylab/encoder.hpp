#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace storylab {

constexpr int kPadTokenId = 0;  // matches Vocab::pad_id

struct EncoderConfig {
  int num_layers = 2;
  int num_heads = 4;
  int embed_dim = 64;
  int ffn_dim = 128;
  int max_seq_len = 256;
  double dropout = 0.1;
  double attention_dropout = 0.2;

  int head_dim() const { return embed_dim / num_heads; }

  void validate() const {
    if (num_layers < 1 || num_heads < 1 || embed_dim < 1 || ffn_dim < 1)
      throw std::runtime_error("encoder config: dimensions must be >= 1");
    if (embed_dim % num_heads != 0)
      throw std::runtime_error("encoder config: embed_dim must be divisible by num_heads");
    if (max_seq_len < 1) throw std::runtime_error("encoder config: max_seq_len must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0 || attention_dropout < 0.0 || attention_dropout >= 1.0)
      throw std::runtime_error("encoder config: dropout rates must lie in [0, 1)");
  }

  // 2 layers, 4 heads, embed 64, ffn 128, seq 256.
  static EncoderConfig desk_scale() { return EncoderConfig{}; }

  // 12 layers, 12 heads, embed 768, ffn 3072.
  static EncoderConfig full_scale() {
    EncoderConfig c;
    c.num_layers = 12;
    c.num_heads = 12;
    c.embed_dim = 768;
    c.ffn_dim = 3072;
    c.max_seq_len = 512;
    c.dropout = 0.1;
    c.attention_dropout = 0.2;
    return c;
  }

  // 2 layers, 2 heads, dim 16, seq 8; used by gradient checks.
  static EncoderConfig toy() {
    EncoderConfig c;
    c.num_layers = 2;
    c.num_heads = 2;
    c.embed_dim = 16;
    c.ffn_dim = 32;
    c.max_seq_len = 8;
    c.dropout = 0.0;
    c.attention_dropout = 0.0;
    return c;
  }
};

struct LayerParameters {
  std::vector<double> wq, bq, wk, bk, wv, bv, wo, bo;
  std::vector<double> ln1_gain, ln1_bias;
  std::vector<double> w1, b1, w2, b2;
  std::vector<double> ln2_gain, ln2_bias;
};

// Post-layer-norm transformer encoder parameters: token + learned positional
// embeddings, per-layer attention projections, feed-forward weights, and
// normalization gains/biases. Gradients reuse this type (same shape tree).
struct EncoderParameters {
  EncoderConfig config;
  int vocab_size = 0;
  std::vector<double> token_embedding;     // vocab_size x D
  std::vector<double> position_embedding;  // max_seq_len x D
  std::vector<LayerParameters> layers;
};

using Gradients = EncoderParameters;

struct TensorRef {
  std::string name;
  std::vector<double>* data;
};

inline std::vector<TensorRef> tensor_refs(EncoderParameters& p, const std::string& prefix = "") {
  std::vector<TensorRef> refs;
  refs.push_back({prefix + "token_embedding", &p.token_embedding});
  refs.push_back({prefix + "position_embedding", &p.position_embedding});
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& lp = p.layers[l];
    const std::string base = prefix + "layer" + std::to_string(l) + ".";
    refs.push_back({base + "wq", &lp.wq});
    refs.push_back({base + "bq", &lp.bq});
    refs.push_back({base + "wk", &lp.wk});
    refs.push_back({base + "bk", &lp.bk});
    refs.push_back({base + "wv", &lp.wv});
    refs.push_back({base + "bv", &lp.bv});
    refs.push_back({base + "wo", &lp.wo});
    refs.push_back({base + "bo", &lp.bo});
    refs.push_back({base + "ln1_gain", &lp.ln1_gain});
    refs.push_back({base + "ln1_bias", &lp.ln1_bias});
    refs.push_back({base + "w1", &lp.w1});
    refs.push_back({base + "b1", &lp.b1});
    refs.push_back({base + "w2", &lp.w2});
    refs.push_back({base + "b2", &lp.b2});
    refs.push_back({base + "ln2_gain", &lp.ln2_gain});
    refs.push_back({base + "ln2_bias", &lp.ln2_bias});
  }
  return refs;
}

// Weights are normal(0, 0.02) from the seeded generator; biases zero;
// normalization gains one.
inline EncoderParameters init_encoder(const EncoderConfig& cfg, int vocab_size,
                                      std::uint64_t seed) {
  cfg.validate();
  if (vocab_size < 1) throw std::runtime_error("init_encoder: vocab_size must be >= 1");
  const int d = cfg.embed_dim, f = cfg.ffn_dim;

  EncoderParameters p;
  p.config = cfg;
  p.vocab_size = vocab_size;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.02);
  auto fill_normal = [&](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    for (auto& x : v) x = normal(rng);
  };

  fill_normal(p.token_embedding, static_cast<std::size_t>(vocab_size) * d);
  fill_normal(p.position_embedding, static_cast<std::size_t>(cfg.max_seq_len) * d);
  p.layers.resize(static_cast<std::size_t>(cfg.num_layers));
  for (auto& lp : p.layers) {
    fill_normal(lp.wq, static_cast<std::size_t>(d) * d);
    fill_normal(lp.wk, static_cast<std::size_t>(d) * d);
    fill_normal(lp.wv, static_cast<std::size_t>(d) * d);
    fill_normal(lp.wo, static_cast<std::size_t>(d) * d);
    fill_normal(lp.w1, static_cast<std::size_t>(d) * f);
    fill_normal(lp.w2, static_cast<std::size_t>(f) * d);
    lp.bq.assign(static_cast<std::size_t>(d), 0.0);
    lp.bk.assign(static_cast<std::size_t>(d), 0.0);
    lp.bv.assign(static_cast<std::size_t>(d), 0.0);
    lp.bo.assign(static_cast<std::size_t>(d), 0.0);
    lp.b1.assign(static_cast<std::size_t>(f), 0.0);
    lp.b2.assign(static_cast<std::size_t>(d), 0.0);
    lp.ln1_gain.assign(static_cast<std::size_t>(d), 1.0);
    lp.ln1_bias.assign(static_cast<std::size_t>(d), 0.0);
    lp.ln2_gain.assign(static_cast<std::size_t>(d), 1.0);
    lp.ln2_bias.assign(static_cast<std::size_t>(d), 0.0);
  }
  return p;
}

inline Gradients make_zero_like(const EncoderParameters& p) {
  Gradients g = p;
  for (auto& ref : tensor_refs(g)) std::fill(ref.data->begin(), ref.data->end(), 0.0);
  return g;
}

namespace nn {

inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

inline double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

// y[T x Out] = x[T x In] * w[In x Out] + b
inline void linear_forward(const double* x, const double* w, const double* b, double* y, int t_len,
                           int in_dim, int out_dim) {
  for (int t = 0; t < t_len; ++t) {
    double* yt = y + static_cast<std::size_t>(t) * out_dim;
    for (int o = 0; o < out_dim; ++o) yt[o] = b[o];
    const double* xt = x + static_cast<std::size_t>(t) * in_dim;
    for (int i = 0; i < in_dim; ++i) {
      const double xi = xt[i];
      const double* wi = w + static_cast<std::size_t>(i) * out_dim;
      for (int o = 0; o < out_dim; ++o) yt[o] += xi * wi[o];
    }
  }
}

// Accumulates dx, dw, db.
inline void linear_backward(const double* x, const double* w, const double* dy, double* dx,
                            double* dw, double* db, int t_len, int in_dim, int out_dim) {
  for (int t = 0; t < t_len; ++t) {
    const double* dyt = dy + static_cast<std::size_t>(t) * out_dim;
    const double* xt = x + static_cast<std::size_t>(t) * in_dim;
    double* dxt = dx + static_cast<std::size_t>(t) * in_dim;
    for (int i = 0; i < in_dim; ++i) {
      const double* wi = w + static_cast<std::size_t>(i) * out_dim;
      double* dwi = dw + static_cast<std::size_t>(i) * out_dim;
      const double xi = xt[i];
      double acc = 0.0;
      for (int o = 0; o < out_dim; ++o) {
        acc += dyt[o] * wi[o];
        dwi[o] += xi * dyt[o];
      }
      dxt[i] += acc;
    }
    for (int o = 0; o < out_dim; ++o) db[o] += dyt[o];
  }
}

constexpr double kLayerNormEps = 1e-5;

inline void layernorm_forward(const double* x, const double* gain, const double* bias, double* out,
                              double* xhat, double* rstd, int t_len, int dim) {
  for (int t = 0; t < t_len; ++t) {
    const double* xt = x + static_cast<std::size_t>(t) * dim;
    double mean = 0.0;
    for (int d = 0; d < dim; ++d) mean += xt[d];
    mean /= dim;
    double var = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double c = xt[d] - mean;
      var += c * c;
    }
    var /= dim;
    const double r = 1.0 / std::sqrt(var + kLayerNormEps);
    rstd[t] = r;
    double* xh = xhat + static_cast<std::size_t>(t) * dim;
    double* ot = out + static_cast<std::size_t>(t) * dim;
    for (int d = 0; d < dim; ++d) {
      xh[d] = (xt[d] - mean) * r;
      ot[d] = gain[d] * xh[d] + bias[d];
    }
  }
}

// Accumulates dgain/dbias; writes dx.
inline void layernorm_backward(const double* dy, const double* gain, const double* xhat,
                               const double* rstd, double* dx, double* dgain, double* dbias,
                               int t_len, int dim) {
  for (int t = 0; t < t_len; ++t) {
    const double* dyt = dy + static_cast<std::size_t>(t) * dim;
    const double* xh = xhat + static_cast<std::size_t>(t) * dim;
    double* dxt = dx + static_cast<std::size_t>(t) * dim;
    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double dxh = dyt[d] * gain[d];
      mean_dxhat += dxh;
      mean_dxhat_xhat += dxh * xh[d];
      dgain[d] += dyt[d] * xh[d];
      dbias[d] += dyt[d];
    }
    mean_dxhat /= dim;
    mean_dxhat_xhat /= dim;
    for (int d = 0; d < dim; ++d) {
      const double dxh = dyt[d] * gain[d];
      dxt[d] = rstd[t] * (dxh - mean_dxhat - xh[d] * mean_dxhat_xhat);
    }
  }
}

}  // namespace nn

struct LayerCache {
  std::vector<double> input;             // T x D residual stream entering the layer
  std::vector<double> q, k, v;           // T x D
  std::vector<double> probs;             // H x T x T, exact zeros at masked keys
  std::vector<double> probs_dropped;     // H x T x T
  std::vector<double> attn_prob_mask;    // dropout scales, empty unless applied
  std::vector<double> heads_concat;      // T x D
  std::vector<double> attn_proj;         // T x D
  std::vector<double> attn_out_mask;     // dropout scales
  std::vector<double> ln1_xhat, ln1_out; // T x D
  std::vector<double> ln1_rstd;          // T
  std::vector<double> ffn_pre, ffn_act;  // T x F
  std::vector<double> ffn_proj;          // T x D
  std::vector<double> ffn_out_mask;      // dropout scales
  std::vector<double> ln2_xhat, ln2_out; // T x D
  std::vector<double> ln2_rstd;          // T
};

struct EncoderCache {
  std::vector<int> ids;
  int seq_len = 0;
  bool train_mode = false;
  std::vector<char> masked;          // PAD positions, excluded as attention keys
  std::vector<int> unmasked;         // indices of key positions that participate
  std::vector<double> embedded;      // T x D, post embedding dropout
  std::vector<double> emb_mask;      // dropout scales
  std::vector<LayerCache> layers;
  std::vector<double> pooled;        // D, the first-token representation
};

namespace nn {

// Inverted-dropout scale factors: 0 with probability rate, 1/(1-rate) otherwise.
inline void fill_dropout_mask(std::vector<double>& mask, std::size_t n, double rate,
                              std::mt19937_64& rng) {
  mask.resize(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double keep = 1.0 - rate;
  for (std::size_t i = 0; i < n; ++i) mask[i] = unit(rng) < keep ? 1.0 / keep : 0.0;
}

}  // namespace nn

// Token + positional embeddings, num_layers post-LN blocks of masked
// multi-head self-attention and a GELU feed-forward, first-token pooling.
// PAD positions never contribute as attention keys, so PAD content cannot
// reach the pooled output. Dropout fires only in train mode, from `rng`.
// Positions at or past `valid_len` are treated as padding regardless of id.
inline EncoderCache encoder_forward(const EncoderParameters& p, const std::vector<int>& ids,
                                    bool train_mode, std::mt19937_64* rng,
                                    std::size_t valid_len = static_cast<std::size_t>(-1)) {
  const auto& cfg = p.config;
  const int t_len = static_cast<int>(ids.size());
  const int d = cfg.embed_dim, f = cfg.ffn_dim, h = cfg.num_heads, dh = cfg.head_dim();
  if (ids.empty()) throw std::runtime_error("encode: empty token sequence");
  if (t_len > cfg.max_seq_len) throw std::runtime_error("encode: sequence exceeds max_seq_len");
  for (int id : ids)
    if (id < 0 || id >= p.vocab_size) throw std::runtime_error("encode: token id out of range");
  if (train_mode && rng == nullptr) throw std::runtime_error("encode: train mode requires an rng");

  EncoderCache cache;
  cache.ids = ids;
  cache.seq_len = t_len;
  cache.train_mode = train_mode;
  cache.masked.resize(static_cast<std::size_t>(t_len));
  for (int t = 0; t < t_len; ++t) {
    cache.masked[static_cast<std::size_t>(t)] =
        ids[static_cast<std::size_t>(t)] == kPadTokenId ||
        static_cast<std::size_t>(t) >= valid_len;
    if (!cache.masked[static_cast<std::size_t>(t)]) cache.unmasked.push_back(t);
  }
  if (cache.unmasked.empty() || cache.masked[0])
    throw std::runtime_error("encode: sequence must start with a non-PAD token");

  const std::size_t td = static_cast<std::size_t>(t_len) * d;
  cache.embedded.resize(td);
  for (int t = 0; t < t_len; ++t) {
    const double* tok = p.token_embedding.data() + static_cast<std::size_t>(ids[static_cast<std::size_t>(t)]) * d;
    const double* pos = p.position_embedding.data() + static_cast<std::size_t>(t) * d;
    double* out = cache.embedded.data() + static_cast<std::size_t>(t) * d;
    for (int j = 0; j < d; ++j) out[j] = tok[j] + pos[j];
  }
  if (train_mode && cfg.dropout > 0.0) {
    nn::fill_dropout_mask(cache.emb_mask, td, cfg.dropout, *rng);
    for (std::size_t i = 0; i < td; ++i) cache.embedded[i] *= cache.emb_mask[i];
  }

  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  cache.layers.resize(static_cast<std::size_t>(cfg.num_layers));
  const std::vector<double>* x = &cache.embedded;

  for (int l = 0; l < cfg.num_layers; ++l) {
    auto& lc = cache.layers[static_cast<std::size_t>(l)];
    const auto& lp = p.layers[static_cast<std::size_t>(l)];
    lc.input = *x;

    lc.q.resize(td);
    lc.k.resize(td);
    lc.v.resize(td);
    nn::linear_forward(lc.input.data(), lp.wq.data(), lp.bq.data(), lc.q.data(), t_len, d, d);
    nn::linear_forward(lc.input.data(), lp.wk.data(), lp.bk.data(), lc.k.data(), t_len, d, d);
    nn::linear_forward(lc.input.data(), lp.wv.data(), lp.bv.data(), lc.v.data(), t_len, d, d);

    const std::size_t htt = static_cast<std::size_t>(h) * t_len * t_len;
    lc.probs.assign(htt, 0.0);
    std::vector<double> row(static_cast<std::size_t>(t_len));
    for (int head = 0; head < h; ++head) {
      const int off = head * dh;
      for (int t = 0; t < t_len; ++t) {
        const double* qt = lc.q.data() + static_cast<std::size_t>(t) * d + off;
        double max_score = -1e300;
        for (int u : cache.unmasked) {
          const double* ku = lc.k.data() + static_cast<std::size_t>(u) * d + off;
          double s = 0.0;
          for (int j = 0; j < dh; ++j) s += qt[j] * ku[j];
          s *= inv_sqrt_dh;
          row[static_cast<std::size_t>(u)] = s;
          if (s > max_score) max_score = s;
        }
        double denom = 0.0;
        for (int u : cache.unmasked) {
          const double e = std::exp(row[static_cast<std::size_t>(u)] - max_score);
          row[static_cast<std::size_t>(u)] = e;
          denom += e;
        }
        double* pr = lc.probs.data() + (static_cast<std::size_t>(head) * t_len + t) * t_len;
        for (int u : cache.unmasked) pr[u] = row[static_cast<std::size_t>(u)] / denom;
      }
    }

    if (train_mode && cfg.attention_dropout > 0.0) {
      nn::fill_dropout_mask(lc.attn_prob_mask, htt, cfg.attention_dropout, *rng);
      lc.probs_dropped.resize(htt);
      for (std::size_t i = 0; i < htt; ++i) lc.probs_dropped[i] = lc.probs[i] * lc.attn_prob_mask[i];
    } else {
      lc.probs_dropped = lc.probs;
    }

    lc.heads_concat.assign(td, 0.0);
    for (int head = 0; head < h; ++head) {
      const int off = head * dh;
      for (int t = 0; t < t_len; ++t) {
        const double* pr = lc.probs_dropped.data() + (static_cast<std::size_t>(head) * t_len + t) * t_len;
        double* out = lc.heads_concat.data() + static_cast<std::size_t>(t) * d + off;
        for (int u : cache.unmasked) {
          const double pv = pr[u];
          if (pv == 0.0) continue;
          const double* vu = lc.v.data() + static_cast<std::size_t>(u) * d + off;
          for (int j = 0; j < dh; ++j) out[j] += pv * vu[j];
        }
      }
    }

    lc.attn_proj.resize(td);
    nn::linear_forward(lc.heads_concat.data(), lp.wo.data(), lp.bo.data(), lc.attn_proj.data(),
                       t_len, d, d);
    std::vector<double> resid1(td);
    if (train_mode && cfg.dropout > 0.0) {
      nn::fill_dropout_mask(lc.attn_out_mask, td, cfg.dropout, *rng);
      for (std::size_t i = 0; i < td; ++i)
        resid1[i] = lc.input[i] + lc.attn_proj[i] * lc.attn_out_mask[i];
    } else {
      for (std::size_t i = 0; i < td; ++i) resid1[i] = lc.input[i] + lc.attn_proj[i];
    }

    lc.ln1_xhat.resize(td);
    lc.ln1_out.resize(td);
    lc.ln1_rstd.resize(static_cast<std::size_t>(t_len));
    nn::layernorm_forward(resid1.data(), lp.ln1_gain.data(), lp.ln1_bias.data(), lc.ln1_out.data(),
                          lc.ln1_xhat.data(), lc.ln1_rstd.data(), t_len, d);

    const std::size_t tf = static_cast<std::size_t>(t_len) * f;
    lc.ffn_pre.resize(tf);
    nn::linear_forward(lc.ln1_out.data(), lp.w1.data(), lp.b1.data(), lc.ffn_pre.data(), t_len, d, f);
    lc.ffn_act.resize(tf);
    for (std::size_t i = 0; i < tf; ++i) lc.ffn_act[i] = nn::gelu(lc.ffn_pre[i]);
    lc.ffn_proj.resize(td);
    nn::linear_forward(lc.ffn_act.data(), lp.w2.data(), lp.b2.data(), lc.ffn_proj.data(), t_len, f, d);

    std::vector<double> resid2(td);
    if (train_mode && cfg.dropout > 0.0) {
      nn::fill_dropout_mask(lc.ffn_out_mask, td, cfg.dropout, *rng);
      for (std::size_t i = 0; i < td; ++i)
        resid2[i] = lc.ln1_out[i] + lc.ffn_proj[i] * lc.ffn_out_mask[i];
    } else {
      for (std::size_t i = 0; i < td; ++i) resid2[i] = lc.ln1_out[i] + lc.ffn_proj[i];
    }

    lc.ln2_xhat.resize(td);
    lc.ln2_out.resize(td);
    lc.ln2_rstd.resize(static_cast<std::size_t>(t_len));
    nn::layernorm_forward(resid2.data(), lp.ln2_gain.data(), lp.ln2_bias.data(), lc.ln2_out.data(),
                          lc.ln2_xhat.data(), lc.ln2_rstd.data(), t_len, d);
    x = &lc.ln2_out;
  }

  cache.pooled.assign(x->begin(), x->begin() + d);
  return cache;
}

// Pooled first-token representation; deterministic whenever train_mode is off.
inline std::vector<double> encode(const EncoderParameters& params, const std::vector<int>& token_ids,
                                  bool train_mode = false, std::uint64_t rng_seed = 0) {
  std::mt19937_64 rng(rng_seed);
  return encoder_forward(params, token_ids, train_mode, train_mode ? &rng : nullptr).pooled;
}

// Backpropagates d(pooled) through the cached forward pass, accumulating
// parameter gradients into `grads`.
inline void encoder_backward(const EncoderParameters& p, const EncoderCache& cache,
                             const std::vector<double>& d_pooled, Gradients& grads) {
  const auto& cfg = p.config;
  const int t_len = cache.seq_len;
  const int d = cfg.embed_dim, f = cfg.ffn_dim, h = cfg.num_heads, dh = cfg.head_dim();
  const std::size_t td = static_cast<std::size_t>(t_len) * d;
  const std::size_t tf = static_cast<std::size_t>(t_len) * f;
  if (d_pooled.size() != static_cast<std::size_t>(d))
    throw std::runtime_error("encoder_backward: bad pooled gradient size");
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

  std::vector<double> d_out(td, 0.0);
  for (int j = 0; j < d; ++j) d_out[static_cast<std::size_t>(j)] = d_pooled[static_cast<std::size_t>(j)];

  for (int l = cfg.num_layers - 1; l >= 0; --l) {
    const auto& lc = cache.layers[static_cast<std::size_t>(l)];
    const auto& lp = p.layers[static_cast<std::size_t>(l)];
    auto& gl = grads.layers[static_cast<std::size_t>(l)];

    // LN2
    std::vector<double> d_resid2(td, 0.0);
    nn::layernorm_backward(d_out.data(), lp.ln2_gain.data(), lc.ln2_xhat.data(), lc.ln2_rstd.data(),
                           d_resid2.data(), gl.ln2_gain.data(), gl.ln2_bias.data(), t_len, d);

    // resid2 = ln1_out + dropout(ffn_proj)
    std::vector<double> d_ln1_out = d_resid2;
    std::vector<double> d_ffn_proj(td);
    if (!lc.ffn_out_mask.empty())
      for (std::size_t i = 0; i < td; ++i) d_ffn_proj[i] = d_resid2[i] * lc.ffn_out_mask[i];
    else
      d_ffn_proj = d_resid2;

    std::vector<double> d_ffn_act(tf, 0.0);
    nn::linear_backward(lc.ffn_act.data(), lp.w2.data(), d_ffn_proj.data(), d_ffn_act.data(),
                        gl.w2.data(), gl.b2.data(), t_len, f, d);
    std::vector<double> d_ffn_pre(tf);
    for (std::size_t i = 0; i < tf; ++i) d_ffn_pre[i] = d_ffn_act[i] * nn::gelu_grad(lc.ffn_pre[i]);
    nn::linear_backward(lc.ln1_out.data(), lp.w1.data(), d_ffn_pre.data(), d_ln1_out.data(),
                        gl.w1.data(), gl.b1.data(), t_len, d, f);

    // LN1
    std::vector<double> d_resid1(td, 0.0);
    nn::layernorm_backward(d_ln1_out.data(), lp.ln1_gain.data(), lc.ln1_xhat.data(),
                           lc.ln1_rstd.data(), d_resid1.data(), gl.ln1_gain.data(),
                           gl.ln1_bias.data(), t_len, d);

    // resid1 = input + dropout(attn_proj)
    std::vector<double> d_input = d_resid1;
    std::vector<double> d_attn_proj(td);
    if (!lc.attn_out_mask.empty())
      for (std::size_t i = 0; i < td; ++i) d_attn_proj[i] = d_resid1[i] * lc.attn_out_mask[i];
    else
      d_attn_proj = d_resid1;

    std::vector<double> d_heads(td, 0.0);
    nn::linear_backward(lc.heads_concat.data(), lp.wo.data(), d_attn_proj.data(), d_heads.data(),
                        gl.wo.data(), gl.bo.data(), t_len, d, d);

    std::vector<double> d_q(td, 0.0), d_k(td, 0.0), d_v(td, 0.0);
    std::vector<double> d_probs_row(static_cast<std::size_t>(t_len));
    for (int head = 0; head < h; ++head) {
      const int off = head * dh;
      for (int t = 0; t < t_len; ++t) {
        const double* dh_out = d_heads.data() + static_cast<std::size_t>(t) * d + off;
        const double* pr_drop =
            lc.probs_dropped.data() + (static_cast<std::size_t>(head) * t_len + t) * t_len;
        const double* pr = lc.probs.data() + (static_cast<std::size_t>(head) * t_len + t) * t_len;
        const double* prob_mask =
            lc.attn_prob_mask.empty()
                ? nullptr
                : lc.attn_prob_mask.data() + (static_cast<std::size_t>(head) * t_len + t) * t_len;

        // d probs (post-dropout), then dropout, then softmax.
        for (int u : cache.unmasked) {
          const double* vu = lc.v.data() + static_cast<std::size_t>(u) * d + off;
          double acc = 0.0;
          for (int j = 0; j < dh; ++j) acc += dh_out[j] * vu[j];
          double* dvu = d_v.data() + static_cast<std::size_t>(u) * d + off;
          const double pv = pr_drop[u];
          if (pv != 0.0)
            for (int j = 0; j < dh; ++j) dvu[j] += pv * dh_out[j];
          d_probs_row[static_cast<std::size_t>(u)] = prob_mask ? acc * prob_mask[u] : acc;
        }
        double dot = 0.0;
        for (int u : cache.unmasked) dot += pr[u] * d_probs_row[static_cast<std::size_t>(u)];
        const double* qt = lc.q.data() + static_cast<std::size_t>(t) * d + off;
        double* dqt = d_q.data() + static_cast<std::size_t>(t) * d + off;
        for (int u : cache.unmasked) {
          const double ds = pr[u] * (d_probs_row[static_cast<std::size_t>(u)] - dot) * inv_sqrt_dh;
          if (ds == 0.0) continue;
          const double* ku = lc.k.data() + static_cast<std::size_t>(u) * d + off;
          double* dku = d_k.data() + static_cast<std::size_t>(u) * d + off;
          for (int j = 0; j < dh; ++j) {
            dqt[j] += ds * ku[j];
            dku[j] += ds * qt[j];
          }
        }
      }
    }

    nn::linear_backward(lc.input.data(), lp.wq.data(), d_q.data(), d_input.data(), gl.wq.data(),
                        gl.bq.data(), t_len, d, d);
    nn::linear_backward(lc.input.data(), lp.wk.data(), d_k.data(), d_input.data(), gl.wk.data(),
                        gl.bk.data(), t_len, d, d);
    nn::linear_backward(lc.input.data(), lp.wv.data(), d_v.data(), d_input.data(), gl.wv.data(),
                        gl.bv.data(), t_len, d, d);
    d_out = std::move(d_input);
  }

  // Embeddings.
  if (!cache.emb_mask.empty())
    for (std::size_t i = 0; i < td; ++i) d_out[i] *= cache.emb_mask[i];
  for (int t = 0; t < t_len; ++t) {
    const int id = cache.ids[static_cast<std::size_t>(t)];
    double* dtok = grads.token_embedding.data() + static_cast<std::size_t>(id) * d;
    double* dpos = grads.position_embedding.data() + static_cast<std::size_t>(t) * d;
    const double* src = d_out.data() + static_cast<std::size_t>(t) * d;
    for (int j = 0; j < d; ++j) {
      dtok[j] += src[j];
      dpos[j] += src[j];
    }
  }
}

}  // namespace storylab
