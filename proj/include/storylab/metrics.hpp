#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace storylab {

// Rank of the gold candidate under descending score; ties broken by lowest
// candidate index (a tied candidate with a smaller index outranks the gold).
inline int rank_of_gold(const std::vector<double>& scores, std::size_t gold_index) {
  if (gold_index >= scores.size()) throw std::runtime_error("rank_of_gold: index out of range");
  const double gold = scores[gold_index];
  int rank = 1;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (j == gold_index) continue;
    if (scores[j] > gold || (scores[j] == gold && j < gold_index)) ++rank;
  }
  return rank;
}

inline bool hits_at_n(const std::vector<double>& scores, std::size_t gold_index, int n) {
  if (n < 1 || static_cast<std::size_t>(n) > scores.size())
    throw std::runtime_error("hits_at_n: N out of range");
  return rank_of_gold(scores, gold_index) <= n;
}

// Per-class F1 weighted by true-instance counts. A class with no predicted
// and no true positives contributes F1 = 0.
inline double weighted_f1(const std::vector<int>& predictions, const std::vector<int>& golds,
                          int num_classes) {
  if (predictions.size() != golds.size())
    throw std::runtime_error("weighted_f1: length mismatch");
  if (predictions.empty()) throw std::runtime_error("weighted_f1: empty input");
  if (num_classes < 1) throw std::runtime_error("weighted_f1: num_classes must be >= 1");

  std::vector<std::size_t> tp(static_cast<std::size_t>(num_classes), 0);
  std::vector<std::size_t> fp(static_cast<std::size_t>(num_classes), 0);
  std::vector<std::size_t> fn(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const int g = golds[i], p = predictions[i];
    if (g < 0 || g >= num_classes || p < 0 || p >= num_classes)
      throw std::runtime_error("weighted_f1: label out of range");
    if (g == p) {
      ++tp[static_cast<std::size_t>(g)];
    } else {
      ++fp[static_cast<std::size_t>(p)];
      ++fn[static_cast<std::size_t>(g)];
    }
  }

  double total = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    const auto i = static_cast<std::size_t>(c);
    const std::size_t true_count = tp[i] + fn[i];
    if (true_count == 0) continue;
    const double precision = tp[i] + fp[i] ? static_cast<double>(tp[i]) / (tp[i] + fp[i]) : 0.0;
    const double recall = static_cast<double>(tp[i]) / true_count;
    const double f1 =
        precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    total += f1 * static_cast<double>(true_count) / static_cast<double>(golds.size());
  }
  return total;
}

}  // namespace storylab
