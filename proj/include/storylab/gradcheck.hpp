#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "storylab/multitask.hpp"

namespace storylab {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

// Central finite differences (f(t+e) - f(t-e)) / 2e against the supplied
// analytic gradients, on a seeded random subsample of flattened parameters.
// Relative error: |ga - gn| / max(|ga|, |gn|, 1e-8). When both gradients sit
// below 1e-8 the parameter counts as matching: the difference quotient's own
// float noise (~|f| * eps_machine / e) dwarfs such gradients, so it carries
// no information about the backward pass there. Key-projection biases are
// the structural case: shifting every key the same way leaves each softmax
// row unchanged, so their true gradient is exactly zero.
inline GradCheckResult finite_difference_check(const std::vector<std::vector<double>*>& params,
                                               const std::vector<const std::vector<double>*>& grads,
                                               const std::function<double()>& loss_fn,
                                               double epsilon, std::size_t min_samples,
                                               std::uint64_t seed) {
  if (params.size() != grads.size())
    throw std::runtime_error("grad check: tensor count mismatch");
  if (epsilon <= 0.0) throw std::runtime_error("grad check: epsilon must be > 0");

  std::size_t total = 0;
  for (const auto* p : params) total += p->size();
  if (total == 0) throw std::runtime_error("grad check: no parameters");

  std::set<std::size_t> picked;
  if (total <= min_samples) {
    for (std::size_t i = 0; i < total; ++i) picked.insert(i);
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, total - 1);
    while (picked.size() < min_samples) picked.insert(pick(rng));
  }

  GradCheckResult result;
  for (std::size_t flat : picked) {
    std::size_t k = 0, offset = flat;
    while (offset >= params[k]->size()) {
      offset -= params[k]->size();
      ++k;
    }
    double& theta = (*params[k])[offset];
    const double original = theta;
    theta = original + epsilon;
    const double f_plus = loss_fn();
    theta = original - epsilon;
    const double f_minus = loss_fn();
    theta = original;
    if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
      throw std::runtime_error("grad check: non-finite loss");
    const double numeric = (f_plus - f_minus) / (2.0 * epsilon);
    const double analytic = (*grads[k])[offset];
    const double rel = std::max(std::abs(analytic), std::abs(numeric)) < 1e-8
                           ? 0.0
                           : std::abs(analytic - numeric) /
                                 std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    if (rel > result.max_rel_error) result.max_rel_error = rel;
    ++result.checked;
  }
  return result;
}

struct GradCheckScenario {
  MultiTaskModel model;
  std::vector<TrainingExample> examples;
  std::vector<std::size_t> batch;
};

// Small fixed batch over a made-up vocabulary; ids only need to be in range.
// One context carries an interior PAD so masking participates in the check.
// Parameters are re-drawn at a generic O(0.25) point: at the tiny init scale
// most gradients sit below the finite-difference noise floor, which would
// measure truncation error rather than backward-pass correctness.
inline GradCheckScenario make_toy_scenario(const EncoderConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (cfg.dropout != 0.0 || cfg.attention_dropout != 0.0)
    throw std::runtime_error("grad check: dropout must be disabled");
  const int vocab_size = 20;
  const int num_characters = 4;

  GradCheckScenario sc;
  ContextConfig ctx_cfg;
  sc.model = init_multitask_model(cfg, vocab_size, num_characters, ctx_cfg, false, seed);
  {
    std::mt19937_64 rng(seed + 51);
    std::normal_distribution<double> wide(0.0, 0.25);
    for (auto* tensor : model_tensors(sc.model))
      for (auto& w : *tensor) w = wide(rng);
    for (auto& tower : {&sc.model.context_tower, &sc.model.candidate_tower})
      for (auto& layer : tower->layers) {
        for (auto& g : layer.ln1_gain) g += 1.0;
        for (auto& g : layer.ln2_gain) g += 1.0;
      }
  }

  auto add = [&](std::vector<int> ctx, std::vector<int> resp, int speaker) {
    TrainingExample ex;
    ex.context_tokens = std::move(ctx);
    ex.gold_response_tokens = std::move(resp);
    ex.gold_speaker_id = speaker;
    ex.chunk_id = "toy";
    ex.turn_index = sc.examples.size() + 1;
    sc.examples.push_back(std::move(ex));
  };
  add({3, 7, 12, 9, 15, 4}, {3, 8, 14}, 0);
  add({3, 11, 0, 9, 5}, {3, 16, 2, 10}, 2);  // PAD inside the context
  add({3, 6, 13, 17}, {3, 19, 18, 1}, 3);
  for (std::size_t i = 0; i < sc.examples.size(); ++i) sc.batch.push_back(i);
  return sc;
}

// Checks the analytic gradients of the joint batch loss at the given lambdas.
// (1,0) isolates the ranking loss, (0,1) the classification loss.
inline GradCheckResult grad_check(const EncoderConfig& cfg, double lambda_rank, double lambda_cls,
                                  double epsilon, std::size_t min_samples, std::uint64_t seed) {
  GradCheckScenario sc = make_toy_scenario(cfg, seed);
  ModelGradients grads = make_zero_gradients(sc.model);
  multitask_batch(sc.model, sc.examples, sc.batch, lambda_rank, lambda_cls, false, nullptr, &grads);

  auto params = model_tensors(sc.model);
  const auto grad_refs = gradient_tensors(sc.model, grads);
  auto loss_fn = [&]() {
    return multitask_batch(sc.model, sc.examples, sc.batch, lambda_rank, lambda_cls, false,
                           nullptr, nullptr)
        .l_total;
  };
  return finite_difference_check(params, grad_refs, loss_fn, epsilon, min_samples, seed + 101);
}

}  // namespace storylab
