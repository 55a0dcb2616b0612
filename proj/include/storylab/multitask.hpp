#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "storylab/candidates.hpp"
#include "storylab/context.hpp"
#include "storylab/encoder.hpp"
#include "storylab/metrics.hpp"
#include "storylab/text.hpp"

namespace storylab {

struct TrainingConfig {
  double lambda_rank = 0.5;
  double lambda_cls = 0.5;
  double learning_rate = 5e-5;
  int warmup_steps = 100;
  double lr_decay = 0.4;
  int epochs = 10;
  int batch_size = 10;
  std::uint64_t seed = 0;
  bool tie_encoders = false;

  void validate() const {
    if (lambda_rank < 0.0 || lambda_cls < 0.0 || (lambda_rank == 0.0 && lambda_cls == 0.0))
      throw std::runtime_error("training config: lambdas must be >= 0 and not both 0");
    if (learning_rate <= 0.0) throw std::runtime_error("training config: learning_rate must be > 0");
    if (warmup_steps < 0) throw std::runtime_error("training config: warmup_steps must be >= 0");
    if (lr_decay <= 0.0 || lr_decay > 1.0)
      throw std::runtime_error("training config: lr_decay must lie in (0, 1]");
    if (epochs < 1) throw std::runtime_error("training config: epochs must be >= 1");
    if (batch_size < 2)
      throw std::runtime_error("training config: batch_size must be >= 2 (in-batch negatives)");
  }
};

struct LossBreakdown {
  double l_rank = 0.0;
  double l_cls = 0.0;
  double l_total = 0.0;
};

inline LossBreakdown joint_loss(double l_rank, double l_cls, double lambda_rank,
                                double lambda_cls) {
  return LossBreakdown{l_rank, l_cls, lambda_rank * l_rank + lambda_cls * l_cls};
}

struct ClassifierHead {
  int num_classes = 0;
  int embed_dim = 0;
  std::vector<double> weight;  // num_classes x embed_dim
  std::vector<double> bias;    // num_classes

  std::vector<double> logits(const std::vector<double>& context_vec) const {
    if (context_vec.size() != static_cast<std::size_t>(embed_dim))
      throw std::runtime_error("classifier head: dimension mismatch");
    std::vector<double> out(static_cast<std::size_t>(num_classes));
    for (int c = 0; c < num_classes; ++c) {
      double acc = bias[static_cast<std::size_t>(c)];
      const double* w = weight.data() + static_cast<std::size_t>(c) * embed_dim;
      for (int d = 0; d < embed_dim; ++d) acc += w[d] * context_vec[static_cast<std::size_t>(d)];
      out[static_cast<std::size_t>(c)] = acc;
    }
    return out;
  }
};

inline std::vector<double> score_candidates(const std::vector<double>& context_vec,
                                            const std::vector<std::vector<double>>& candidate_vecs) {
  std::vector<double> scores;
  scores.reserve(candidate_vecs.size());
  for (const auto& cand : candidate_vecs) {
    if (cand.size() != context_vec.size())
      throw std::runtime_error("score_candidates: dimension mismatch");
    double dot = 0.0;
    for (std::size_t d = 0; d < cand.size(); ++d) dot += context_vec[d] * cand[d];
    scores.push_back(dot);
  }
  return scores;
}

namespace nn {

// Numerically stable softmax; writes probabilities, returns -log p[gold].
inline double softmax_cross_entropy(const std::vector<double>& logits, std::size_t gold,
                                    std::vector<double>& probs) {
  if (gold >= logits.size()) throw std::runtime_error("cross entropy: index out of range");
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  probs.resize(logits.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - max_logit);
    denom += probs[i];
  }
  for (auto& p : probs) p /= denom;
  return -std::log(probs[gold]);
}

}  // namespace nn

inline double ranking_loss(const std::vector<double>& scores, std::size_t gold_index) {
  if (scores.size() < 2) throw std::runtime_error("ranking_loss: need at least 2 candidates");
  std::vector<double> probs;
  return nn::softmax_cross_entropy(scores, gold_index, probs);
}

inline std::pair<std::vector<double>, double> character_loss(const std::vector<double>& context_vec,
                                                             const ClassifierHead& head,
                                                             int gold_speaker_id) {
  if (gold_speaker_id < 0 || gold_speaker_id >= head.num_classes)
    throw std::runtime_error("character_loss: speaker id out of range");
  auto l = head.logits(context_vec);
  std::vector<double> probs;
  const double loss = nn::softmax_cross_entropy(l, static_cast<std::size_t>(gold_speaker_id), probs);
  return {std::move(l), loss};
}

// The bi-encoder: a context tower, a candidate tower (absent when tied), and
// the next-speaker classifier head on the context side.
struct MultiTaskModel {
  EncoderParameters context_tower;
  EncoderParameters candidate_tower;
  ClassifierHead head;
  ContextConfig ctx_cfg;
  bool tie_encoders = false;

  const EncoderParameters& cand_params() const {
    return tie_encoders ? context_tower : candidate_tower;
  }
};

inline MultiTaskModel init_multitask_model(const EncoderConfig& enc_cfg, int vocab_size,
                                           int num_characters, const ContextConfig& ctx_cfg,
                                           bool tie_encoders, std::uint64_t seed) {
  if (num_characters < 1) throw std::runtime_error("init model: need at least one character");
  MultiTaskModel model;
  model.ctx_cfg = ctx_cfg;
  model.tie_encoders = tie_encoders;
  model.context_tower = init_encoder(enc_cfg, vocab_size, seed + 1);
  if (!tie_encoders) model.candidate_tower = init_encoder(enc_cfg, vocab_size, seed + 2);
  model.head.num_classes = num_characters;
  model.head.embed_dim = enc_cfg.embed_dim;
  std::mt19937_64 rng(seed + 3);
  std::normal_distribution<double> normal(0.0, 0.02);
  model.head.weight.resize(static_cast<std::size_t>(num_characters) * enc_cfg.embed_dim);
  for (auto& w : model.head.weight) w = normal(rng);
  model.head.bias.assign(static_cast<std::size_t>(num_characters), 0.0);
  return model;
}

struct ModelGradients {
  Gradients context_tower;
  Gradients candidate_tower;
  std::vector<double> head_weight;
  std::vector<double> head_bias;
};

inline ModelGradients make_zero_gradients(const MultiTaskModel& model) {
  ModelGradients g;
  g.context_tower = make_zero_like(model.context_tower);
  if (!model.tie_encoders) g.candidate_tower = make_zero_like(model.candidate_tower);
  g.head_weight.assign(model.head.weight.size(), 0.0);
  g.head_bias.assign(model.head.bias.size(), 0.0);
  return g;
}

inline void zero_gradients(ModelGradients& g) {
  for (auto& ref : tensor_refs(g.context_tower)) std::fill(ref.data->begin(), ref.data->end(), 0.0);
  for (auto& ref : tensor_refs(g.candidate_tower))
    std::fill(ref.data->begin(), ref.data->end(), 0.0);
  std::fill(g.head_weight.begin(), g.head_weight.end(), 0.0);
  std::fill(g.head_bias.begin(), g.head_bias.end(), 0.0);
}

// Fixed flattening order shared by the optimizer and the gradient checker:
// context tower, candidate tower (when separate), classifier weight, bias.
inline std::vector<std::vector<double>*> model_tensors(MultiTaskModel& model) {
  std::vector<std::vector<double>*> out;
  for (auto& ref : tensor_refs(model.context_tower)) out.push_back(ref.data);
  if (!model.tie_encoders)
    for (auto& ref : tensor_refs(model.candidate_tower)) out.push_back(ref.data);
  out.push_back(&model.head.weight);
  out.push_back(&model.head.bias);
  return out;
}

inline std::vector<const std::vector<double>*> gradient_tensors(const MultiTaskModel& model,
                                                                const ModelGradients& g) {
  std::vector<const std::vector<double>*> out;
  auto& ctx = const_cast<Gradients&>(g.context_tower);
  for (auto& ref : tensor_refs(ctx)) out.push_back(ref.data);
  if (!model.tie_encoders) {
    auto& cand = const_cast<Gradients&>(g.candidate_tower);
    for (auto& ref : tensor_refs(cand)) out.push_back(ref.data);
  }
  out.push_back(&g.head_weight);
  out.push_back(&g.head_bias);
  return out;
}

// One batch: every example's candidate list is the batch's gold responses
// (in-batch negatives), so row i's gold index is i. Classification shares
// the context vector. Losses are batch means; gradients, when requested,
// are accumulated already scaled by the lambdas.
inline LossBreakdown multitask_batch(const MultiTaskModel& model,
                                     const std::vector<TrainingExample>& examples,
                                     const std::vector<std::size_t>& batch, double lambda_rank,
                                     double lambda_cls, bool train_mode, std::mt19937_64* rng,
                                     ModelGradients* grads) {
  const std::size_t b = batch.size();
  if (b < 2) throw std::runtime_error("multitask_batch: need at least 2 examples per batch");
  const int dim = model.context_tower.config.embed_dim;

  std::vector<EncoderCache> ctx_caches(b), cand_caches(b);
  for (std::size_t i = 0; i < b; ++i)
    ctx_caches[i] =
        encoder_forward(model.context_tower, examples[batch[i]].context_tokens, train_mode, rng);
  for (std::size_t i = 0; i < b; ++i)
    cand_caches[i] = encoder_forward(model.cand_params(), examples[batch[i]].gold_response_tokens,
                                     train_mode, rng);

  // Ranking over in-batch negatives.
  std::vector<std::vector<double>> rank_probs(b);
  double l_rank = 0.0;
  {
    std::vector<double> scores(b);
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < b; ++j) {
        double dot = 0.0;
        for (int d = 0; d < dim; ++d)
          dot += ctx_caches[i].pooled[static_cast<std::size_t>(d)] *
                 cand_caches[j].pooled[static_cast<std::size_t>(d)];
        scores[j] = dot;
      }
      l_rank += nn::softmax_cross_entropy(scores, i, rank_probs[i]);
    }
    l_rank /= static_cast<double>(b);
  }

  // Next-speaker classification.
  std::vector<std::vector<double>> cls_probs(b);
  std::vector<int> golds(b);
  double l_cls = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    golds[i] = examples[batch[i]].gold_speaker_id;
    if (golds[i] < 0 || golds[i] >= model.head.num_classes)
      throw std::runtime_error("multitask_batch: speaker id out of range");
    const auto logits = model.head.logits(ctx_caches[i].pooled);
    l_cls += nn::softmax_cross_entropy(logits, static_cast<std::size_t>(golds[i]), cls_probs[i]);
  }
  l_cls /= static_cast<double>(b);

  const LossBreakdown loss = joint_loss(l_rank, l_cls, lambda_rank, lambda_cls);
  if (!grads) return loss;

  // d score[i][j] = lambda_rank/b * (p[i][j] - [i==j])
  std::vector<std::vector<double>> d_ctx(b, std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  std::vector<std::vector<double>> d_cand(b, std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  const double rank_scale = lambda_rank / static_cast<double>(b);
  if (lambda_rank != 0.0) {
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < b; ++j) {
        const double ds = rank_scale * (rank_probs[i][j] - (i == j ? 1.0 : 0.0));
        for (int d = 0; d < dim; ++d) {
          d_ctx[i][static_cast<std::size_t>(d)] +=
              ds * cand_caches[j].pooled[static_cast<std::size_t>(d)];
          d_cand[j][static_cast<std::size_t>(d)] +=
              ds * ctx_caches[i].pooled[static_cast<std::size_t>(d)];
        }
      }
    }
  }

  const double cls_scale = lambda_cls / static_cast<double>(b);
  if (lambda_cls != 0.0) {
    for (std::size_t i = 0; i < b; ++i) {
      for (int c = 0; c < model.head.num_classes; ++c) {
        const double dl = cls_scale * (cls_probs[i][static_cast<std::size_t>(c)] -
                                       (c == golds[i] ? 1.0 : 0.0));
        if (dl == 0.0) continue;
        const double* w = model.head.weight.data() + static_cast<std::size_t>(c) * dim;
        double* dw = grads->head_weight.data() + static_cast<std::size_t>(c) * dim;
        for (int d = 0; d < dim; ++d) {
          dw[d] += dl * ctx_caches[i].pooled[static_cast<std::size_t>(d)];
          d_ctx[i][static_cast<std::size_t>(d)] += dl * w[d];
        }
        grads->head_bias[static_cast<std::size_t>(c)] += dl;
      }
    }
  }

  for (std::size_t i = 0; i < b; ++i)
    encoder_backward(model.context_tower, ctx_caches[i], d_ctx[i], grads->context_tower);
  Gradients& cand_grads = model.tie_encoders ? grads->context_tower : grads->candidate_tower;
  for (std::size_t j = 0; j < b; ++j)
    encoder_backward(model.cand_params(), cand_caches[j], d_cand[j], cand_grads);
  return loss;
}

// Adamax: first-moment decay 0.9, infinity-norm decay 0.999, bias-corrected
// step size.
class AdamaxOptimizer {
 public:
  explicit AdamaxOptimizer(const std::vector<std::vector<double>*>& params) : params_(params) {
    m_.reserve(params.size());
    u_.reserve(params.size());
    for (const auto* p : params) {
      m_.emplace_back(p->size(), 0.0);
      u_.emplace_back(p->size(), 0.0);
    }
  }

  void step(const std::vector<const std::vector<double>*>& grads, double lr) {
    if (grads.size() != params_.size()) throw std::runtime_error("adamax: tensor count mismatch");
    ++t_;
    const double correction = 1.0 - std::pow(0.9, static_cast<double>(t_));
    const double step_size = lr / correction;
    for (std::size_t k = 0; k < params_.size(); ++k) {
      auto& theta = *params_[k];
      const auto& g = *grads[k];
      auto& m = m_[k];
      auto& u = u_[k];
      for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = 0.9 * m[i] + 0.1 * g[i];
        u[i] = std::max(0.999 * u[i], std::abs(g[i]));
        theta[i] -= step_size * m[i] / (u[i] + 1e-8);
      }
    }
  }

  long steps_taken() const { return t_; }

 private:
  std::vector<std::vector<double>*> params_;
  std::vector<std::vector<double>> m_, u_;
  long t_ = 0;
};

inline double effective_learning_rate(double base_lr, int warmup_steps, long step,
                                      double decay_multiplier) {
  if (warmup_steps > 0 && step <= warmup_steps)
    return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  return base_lr * decay_multiplier;
}

struct EpochMetrics {
  int epoch = 0;
  double l_rank = 0.0, l_cls = 0.0, l_total = 0.0;
  double val_hits1 = 0.0, val_f1 = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  MultiTaskModel model;
  std::vector<EpochMetrics> log;
  std::vector<LossBreakdown> step_losses;
};

inline void write_metrics_log(const std::vector<EpochMetrics>& log, std::ostream& out) {
  out << "epoch\tl_rank\tl_cls\tl_total\tval_hits1\tval_f1\tlr\n";
  for (const auto& e : log)
    out << e.epoch << '\t' << format_double(e.l_rank) << '\t' << format_double(e.l_cls) << '\t'
        << format_double(e.l_total) << '\t' << format_double(e.val_hits1) << '\t'
        << format_double(e.val_f1) << '\t' << format_double(e.lr) << '\n';
}

inline std::vector<EpochMetrics> read_metrics_log(std::istream& in) {
  std::vector<EpochMetrics> log;
  std::string line;
  if (!std::getline(in, line) || line != "epoch\tl_rank\tl_cls\tl_total\tval_hits1\tval_f1\tlr")
    throw std::runtime_error("metrics log: bad header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string field;
    std::vector<std::string> parts;
    while (std::getline(fields, field, '\t')) parts.push_back(field);
    if (parts.size() != 7) throw std::runtime_error("metrics log: bad row: " + line);
    EpochMetrics e;
    e.epoch = std::stoi(parts[0]);
    e.l_rank = std::stod(parts[1]);
    e.l_cls = std::stod(parts[2]);
    e.l_total = std::stod(parts[3]);
    e.val_hits1 = std::stod(parts[4]);
    e.val_f1 = std::stod(parts[5]);
    e.lr = std::stod(parts[6]);
    log.push_back(e);
  }
  if (log.empty()) throw std::runtime_error("metrics log: no rows");
  return log;
}

// Mean joint loss over fixed-order batches, dropout off. Tail batches with a
// single example are skipped (no in-batch negative exists for them).
inline LossBreakdown compute_dataset_loss(const MultiTaskModel& model,
                                          const std::vector<TrainingExample>& examples,
                                          double lambda_rank, double lambda_cls, int batch_size) {
  LossBreakdown total;
  std::size_t batches = 0;
  for (std::size_t start = 0; start + 2 <= examples.size();
       start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(examples.size(), start + static_cast<std::size_t>(batch_size));
    if (end - start < 2) break;
    std::vector<std::size_t> batch;
    for (std::size_t i = start; i < end; ++i) batch.push_back(i);
    const auto loss =
        multitask_batch(model, examples, batch, lambda_rank, lambda_cls, false, nullptr, nullptr);
    total.l_rank += loss.l_rank;
    total.l_cls += loss.l_cls;
    total.l_total += loss.l_total;
    ++batches;
  }
  if (batches == 0) throw std::runtime_error("compute_dataset_loss: fewer than 2 examples");
  total.l_rank /= static_cast<double>(batches);
  total.l_cls /= static_cast<double>(batches);
  total.l_total /= static_cast<double>(batches);
  return total;
}

struct EvaluationResult {
  std::map<int, double> hits;  // N -> rate
  double f1 = 0.0;
  std::size_t num_examples = 0;
};

inline EvaluationResult evaluate_model(const MultiTaskModel& model,
                                       const std::vector<TrainingExample>& examples,
                                       const std::vector<CandidateSet>& sets,
                                       const std::vector<int>& hits_levels) {
  if (sets.empty()) throw std::runtime_error("evaluate_model: no candidate sets");

  // Each candidate is some example's gold response; encode each source once.
  std::vector<std::vector<double>> response_vecs(examples.size());
  for (const auto& set : sets)
    for (std::size_t src : set.candidate_sources)
      if (response_vecs[src].empty())
        response_vecs[src] = encode(model.cand_params(), examples[src].gold_response_tokens);

  EvaluationResult result;
  result.num_examples = sets.size();
  std::map<int, std::size_t> hit_counts;
  for (int n : hits_levels) hit_counts[n] = 0;

  std::vector<int> predictions, golds;
  for (const auto& set : sets) {
    const auto& ex = examples[set.example_index];
    const auto ctx = encode(model.context_tower, ex.context_tokens);
    std::vector<double> scores;
    scores.reserve(set.candidate_sources.size());
    for (std::size_t src : set.candidate_sources) {
      double dot = 0.0;
      for (std::size_t d = 0; d < ctx.size(); ++d) dot += ctx[d] * response_vecs[src][d];
      scores.push_back(dot);
    }
    for (int n : hits_levels)
      if (hits_at_n(scores, set.gold_index, n)) ++hit_counts[n];

    const auto logits = model.head.logits(ctx);
    int best = 0;
    for (int c = 1; c < model.head.num_classes; ++c)
      if (logits[static_cast<std::size_t>(c)] > logits[static_cast<std::size_t>(best)]) best = c;
    predictions.push_back(best);
    golds.push_back(ex.gold_speaker_id);
  }

  for (int n : hits_levels)
    result.hits[n] = static_cast<double>(hit_counts[n]) / static_cast<double>(sets.size());
  result.f1 = weighted_f1(predictions, golds, model.head.num_classes);
  return result;
}

// Joint training: shuffled batches, Adamax with linear warmup, multiply the
// base rate by lr_decay whenever validation l_total fails to improve at an
// epoch boundary (plateau decay starts only after warmup has completed, so
// the warmup schedule stays exact). Deterministic for a fixed seed.
inline TrainResult train_model(const Corpus& train_corpus, const Corpus& val_corpus,
                               const Vocab& vocab, const RelationTable& table,
                               const ContextConfig& ctx_cfg, const EncoderConfig& enc_cfg,
                               const TrainingConfig& cfg, const EvalConfig& eval_cfg) {
  cfg.validate();
  ctx_cfg.validate();
  enc_cfg.validate();
  eval_cfg.validate();

  const auto train_examples =
      build_examples(train_corpus, table, vocab, ctx_cfg, enc_cfg.max_seq_len);
  const auto val_examples = build_examples(val_corpus, table, vocab, ctx_cfg, enc_cfg.max_seq_len);
  if (train_examples.size() < 2) throw std::runtime_error("train: fewer than 2 training examples");
  const auto val_sets = build_candidate_sets(val_examples, eval_cfg);

  TrainResult result;
  result.model = init_multitask_model(enc_cfg, static_cast<int>(vocab.size()),
                                      vocab.num_speakers(), ctx_cfg, cfg.tie_encoders, cfg.seed);
  MultiTaskModel& model = result.model;

  auto params = model_tensors(model);
  AdamaxOptimizer optimizer(params);
  ModelGradients grads = make_zero_gradients(model);
  const auto grad_refs = gradient_tensors(model, grads);

  std::mt19937_64 shuffle_rng(cfg.seed + 17);
  std::mt19937_64 dropout_rng(cfg.seed + 29);

  std::vector<std::size_t> order(train_examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  long global_step = 0;
  double decay_multiplier = 1.0;
  double best_val = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double sum_rank = 0.0, sum_cls = 0.0, sum_total = 0.0;
    std::size_t steps_this_epoch = 0;
    double last_lr = effective_learning_rate(cfg.learning_rate, cfg.warmup_steps,
                                             global_step + 1, decay_multiplier);

    for (std::size_t start = 0; start + 2 <= order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      if (end - start < 2) break;
      std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(end));
      ++global_step;
      const double lr = effective_learning_rate(cfg.learning_rate, cfg.warmup_steps, global_step,
                                                decay_multiplier);
      last_lr = lr;
      zero_gradients(grads);
      const auto loss = multitask_batch(model, train_examples, batch, cfg.lambda_rank,
                                        cfg.lambda_cls, true, &dropout_rng, &grads);
      if (!std::isfinite(loss.l_total))
        throw std::runtime_error("training diverged at step " + std::to_string(global_step));
      optimizer.step(grad_refs, lr);
      result.step_losses.push_back(loss);
      sum_rank += loss.l_rank;
      sum_cls += loss.l_cls;
      sum_total += loss.l_total;
      ++steps_this_epoch;
    }
    if (steps_this_epoch == 0) throw std::runtime_error("train: no full batch could be formed");

    const auto val_loss =
        compute_dataset_loss(model, val_examples, cfg.lambda_rank, cfg.lambda_cls, cfg.batch_size);
    const auto val_metrics = evaluate_model(model, val_examples, val_sets, {1});

    EpochMetrics em;
    em.epoch = epoch;
    em.l_rank = sum_rank / static_cast<double>(steps_this_epoch);
    em.l_cls = sum_cls / static_cast<double>(steps_this_epoch);
    em.l_total = sum_total / static_cast<double>(steps_this_epoch);
    em.val_hits1 = val_metrics.hits.at(1);
    em.val_f1 = val_metrics.f1;
    em.lr = last_lr;
    result.log.push_back(em);

    if (val_loss.l_total < best_val) {
      best_val = val_loss.l_total;
    } else if (global_step > cfg.warmup_steps) {
      decay_multiplier *= cfg.lr_decay;
    }
  }
  return result;
}

}  // namespace storylab
