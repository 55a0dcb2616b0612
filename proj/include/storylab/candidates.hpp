#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "storylab/context.hpp"

namespace storylab {

struct EvalConfig {
  std::vector<int> hits_levels{1, 5};
  int num_candidates = 10;
  std::uint64_t seed = 0;

  void validate() const {
    if (num_candidates < 2) throw std::runtime_error("eval config: num_candidates must be >= 2");
    if (hits_levels.empty()) throw std::runtime_error("eval config: hits_levels must be non-empty");
    for (int n : hits_levels)
      if (n < 1 || n > num_candidates)
        throw std::runtime_error("eval config: every hits level must lie in [1, num_candidates]");
  }
};

struct CandidateSet {
  std::size_t example_index = 0;                    // which example this set evaluates
  std::vector<std::vector<int>> candidates;         // token-id sequences
  std::vector<std::size_t> candidate_sources;       // example index each candidate came from
  std::size_t gold_index = 0;
};

// One set per example: its gold response plus num_candidates-1 distractors
// drawn uniformly without replacement from the other examples' gold
// responses. Gold position is randomized. Deterministic for a fixed seed.
inline std::vector<CandidateSet> build_candidate_sets(const std::vector<TrainingExample>& examples,
                                                      const EvalConfig& cfg) {
  cfg.validate();
  const std::size_t n = examples.size();
  if (n < static_cast<std::size_t>(cfg.num_candidates))
    throw std::runtime_error("build_candidate_sets: split smaller than the candidate count");

  std::mt19937_64 rng(cfg.seed);
  std::vector<CandidateSet> sets;
  sets.reserve(n);

  std::vector<std::size_t> pool;
  pool.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    pool.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) pool.push_back(j);

    // Partial Fisher-Yates: the first num_candidates-1 entries become the draw.
    const std::size_t k = static_cast<std::size_t>(cfg.num_candidates) - 1;
    for (std::size_t d = 0; d < k; ++d) {
      std::uniform_int_distribution<std::size_t> pick(d, pool.size() - 1);
      std::swap(pool[d], pool[pick(rng)]);
    }

    CandidateSet set;
    set.example_index = i;
    std::uniform_int_distribution<std::size_t> gold_pos(0, k);
    set.gold_index = gold_pos(rng);
    for (std::size_t slot = 0, next = 0; slot <= k; ++slot) {
      const std::size_t src = slot == set.gold_index ? i : pool[next++];
      set.candidate_sources.push_back(src);
      set.candidates.push_back(examples[src].gold_response_tokens);
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

}  // namespace storylab
