#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>

#include "storylab/metrics.hpp"
#include "storylab/multitask.hpp"
#include "storylab/text.hpp"

using namespace storylab;

TEST_CASE("tokenize lowercases and splits on non-alphanumeric runs") {
  CHECK(tokenize("Hello, World!") == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize("it's a--b  c3") == std::vector<std::string>{"it", "s", "a", "b", "c3"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("...!?") == std::vector<std::string>{});
  // Multi-byte sequences separate; ASCII fragments survive.
  CHECK(tokenize("caf\xc3\xa9 bar") == std::vector<std::string>{"caf", "bar"});
}

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.0, 1.0, -1.5, 0.1, 3.141592653589793, 1e-300, -2.2250738585072014e-308,
                   123456789.123456789}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("rank_of_gold breaks ties toward the lower index") {
  CHECK(rank_of_gold({3.0, 2.0, 1.0}, 0) == 1);
  CHECK(rank_of_gold({3.0, 2.0, 1.0}, 2) == 3);
  // Equal scores: the earlier candidate outranks the gold...
  CHECK(rank_of_gold({1.0, 1.0}, 1) == 2);
  // ...but the gold outranks an equal later candidate.
  CHECK(rank_of_gold({1.0, 1.0}, 0) == 1);
  CHECK_THROWS(rank_of_gold({1.0}, 3));
}

TEST_CASE("hits_at_n is monotone and saturates at the candidate count") {
  const std::vector<double> scores{0.3, 0.9, 0.1, 0.5, 0.2, 0.8, 0.4, 0.6, 0.7, 0.0};
  bool prev = false;
  for (int n = 1; n <= 10; ++n) {
    const bool hit = hits_at_n(scores, 2, n);
    CHECK((prev ? hit : true));  // once true, stays true
    prev = hit;
  }
  CHECK(hits_at_n(scores, 2, 10));  // gold is always within the full set
  CHECK_THROWS(hits_at_n(scores, 2, 0));
  CHECK_THROWS(hits_at_n(scores, 2, 11));
}

TEST_CASE("rank symmetry: a uniformly placed gold wins 1/k of score permutations") {
  // All 24 assignments of distinct scores {4,3,2,1} to 4 candidates: the gold
  // at a fixed index takes rank 1 in exactly 6 = 24/4 of them.
  std::vector<double> scores{4.0, 3.0, 2.0, 1.0};
  std::sort(scores.begin(), scores.end());
  int wins = 0, total = 0;
  do {
    ++total;
    if (rank_of_gold(scores, 0) == 1) ++wins;
  } while (std::next_permutation(scores.begin(), scores.end()));
  CHECK(total == 24);
  CHECK(wins == 6);
}

namespace {

// Independent re-derivation: per-class F1 via explicit confusion counts.
double oracle_weighted_f1(const std::vector<int>& pred, const std::vector<int>& gold,
                          int num_classes) {
  double total = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    double tp = 0, fp = 0, fn = 0, support = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (gold[i] == c) ++support;
      if (pred[i] == c && gold[i] == c) ++tp;
      if (pred[i] == c && gold[i] != c) ++fp;
      if (pred[i] != c && gold[i] == c) ++fn;
    }
    if (support == 0) continue;
    const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double recall = tp / (tp + fn);
    const double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    total += f1 * support / static_cast<double>(gold.size());
  }
  return total;
}

}  // namespace

TEST_CASE("weighted_f1 matches an independent oracle on random label sets") {
  std::mt19937_64 rng(20240901);
  for (int trial = 0; trial < 20; ++trial) {
    const int num_classes = 2 + static_cast<int>(rng() % 5);
    const std::size_t n = 5 + rng() % 60;
    std::vector<int> pred(n), gold(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = static_cast<int>(rng() % static_cast<unsigned>(num_classes));
      gold[i] = static_cast<int>(rng() % static_cast<unsigned>(num_classes));
    }
    const double got = weighted_f1(pred, gold, num_classes);
    const double want = oracle_weighted_f1(pred, gold, num_classes);
    CHECK(std::abs(got - want) < 1e-12);
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
  }
}

TEST_CASE("weighted_f1 hand-checked fixtures") {
  // Perfect agreement.
  CHECK(weighted_f1({0, 1, 2, 1}, {0, 1, 2, 1}, 3) == 1.0);
  // Everything predicted as class 0 against golds {0,1,2}: class 0 has
  // precision 1/3, recall 1 -> F1 1/2, weight 1/3; other classes score 0.
  CHECK(std::abs(weighted_f1({0, 0, 0}, {0, 1, 2}, 3) - 0.5 / 3.0) < 1e-15);
  // A class absent from the golds carries no weight even if predicted.
  CHECK(std::abs(weighted_f1({2, 1}, {0, 1}, 3) - 0.5) < 1e-15);
  CHECK_THROWS(weighted_f1({0}, {0, 1}, 2));
  CHECK_THROWS(weighted_f1({}, {}, 2));
  CHECK_THROWS(weighted_f1({5}, {0}, 2));
}

TEST_CASE("ranking_loss equals softmax cross entropy on known score vectors") {
  // Ten equal scores: -ln(1/10) = ln 10.
  CHECK(std::abs(ranking_loss(std::vector<double>(10, 0.7), 3) - std::log(10.0)) < 1e-9);
  // Two candidates, gold one unit ahead: ln(1 + e^-1).
  CHECK(std::abs(ranking_loss({1.0, 0.0}, 0) - std::log(1.0 + std::exp(-1.0))) < 1e-12);
  // Gold ahead of three tied rivals: ln(1 + 3 e^-1).
  CHECK(std::abs(ranking_loss({1.0, 0.0, 0.0, 0.0}, 0) - std::log(1.0 + 3.0 * std::exp(-1.0))) <
        1e-12);
  CHECK_THROWS(ranking_loss({1.0}, 0));
}

TEST_CASE("softmax_cross_entropy is shift invariant and stable") {
  std::vector<double> probs_a, probs_b;
  const double a = nn::softmax_cross_entropy({1.0, 2.0, 3.0}, 1, probs_a);
  const double b = nn::softmax_cross_entropy({1001.0, 1002.0, 1003.0}, 1, probs_b);
  CHECK(std::abs(a - b) < 1e-12);
  double sum = 0.0;
  for (double p : probs_b) sum += p;
  CHECK(std::abs(sum - 1.0) < 1e-12);
}
