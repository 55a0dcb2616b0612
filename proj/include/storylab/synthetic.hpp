#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "storylab/corpus.hpp"

namespace storylab {

struct SyntheticParams {
  int num_episodes = 25;
  int chunks_per_episode = 5;
  int characters = 6;
  int vocab_size = 120;
  int min_turns = 14;
  int max_turns = 20;
};

namespace synth_detail {

inline const std::vector<std::string>& character_name_pool() {
  static const std::vector<std::string> names = {
      "Aria", "Bran", "Cleo", "Dorn", "Edda", "Finn", "Gwen", "Hale", "Ivor",
      "Juna", "Kord", "Lira", "Moss", "Nyla", "Orin", "Pela", "Quor", "Rask",
      "Sera", "Tove", "Ulf",  "Vara", "Wick", "Xola", "Yorn", "Zade"};
  return names;
}

inline std::string content_word(int index) {
  static const std::vector<std::string> syllables = {
      "ka", "ro", "mi", "ta", "lu", "en", "sha", "ver", "ol", "dra",
      "ith", "mor", "fel", "un", "bar", "ess", "tor", "ny", "gal", "rim"};
  const int n = static_cast<int>(syllables.size());
  std::string w = syllables[index % n] + syllables[(index / n) % n];
  if (index >= n * n) w += syllables[(index / (n * n)) % n];
  return w;
}

template <typename Rng>
int pick(Rng& rng, int n) {
  return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng));
}

template <typename Rng>
double unit(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Template pools for pairwise relation descriptions. Each pool repeats a few
// anchor words so TF-IDF clustering separates the three families.
inline const std::vector<std::string>& positive_templates() {
  static const std::vector<std::string> t = {
      "{A} and {B} are loyal friends who trust each other and share a warm bond of laughter around the campfire .",
      "{A} admires {B} greatly and their fond friendship is full of trust warm jokes and kind laughter .",
      "{B} and {A} share a comfortable rapport , a warm friendship built on trust kindness and loyal support .",
      "{A} would do anything for {B} ; the two are devoted friends whose warm loyal bond and easy laughter never fade .",
      "{A} and {B} greet each other with a fond smile , loyal friends bound by trust warmth and shared laughter ."};
  return t;
}

inline const std::vector<std::string>& negative_templates() {
  static const std::vector<std::string> t = {
      "{A} and {B} quarrel constantly , a bitter feud of angry insults broken promises and open threats .",
      "{B} once nearly got {A} killed in a reckless fight , and the bitter grudge and anger between them never healed .",
      "{A} blames {B} for the wounds of an old battle ; their bitter feud is full of anger insults and fear .",
      "{A} and {B} despise each other , trading angry insults and bitter threats whenever their paths cross .",
      "{B} set a cruel trap that hurt {A} badly , and the bitter anger and broken trust still poison every meeting ."};
  return t;
}

inline const std::vector<std::string>& neutral_templates() {
  static const std::vector<std::string> t = {
      "{A} and {B} met on the road to the market and traded supplies before parting ways .",
      "{A} and {B} travel in the same caravan and keep a shared ledger of supplies along the road .",
      "{B} and {A} camp on the same road each season , trading maps and rations at the market .",
      "{A} and {B} crossed paths at the river crossing , exchanged news of the road , and moved on .",
      "{A} and {B} keep separate wagons in the caravan , meeting only to settle the ledger at the market ."};
  return t;
}

inline std::string fill_pair(std::string tpl, const std::string& a, const std::string& b) {
  auto replace_all = [](std::string& s, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
      s.replace(pos, from.size(), to);
      pos += to.size();
    }
  };
  replace_all(tpl, "{A}", a);
  replace_all(tpl, "{B}", b);
  return tpl;
}

}  // namespace synth_detail

// Seeded generator for desk-scale experiments. Plants learnable structure:
//  - each character owns a slice of the content vocabulary;
//  - chunks are two-speaker conversations with strict alternation plus rare
//    third-party interjections, so the next speaker is predictable;
//  - every turn carries the chunk topic and one word from the addressee's
//    slice, so the gold continuation shares vocabulary with the context;
//  - topics drift slowly between consecutive chunks of an episode and are
//    restated in summaries, so prior-chunk summaries carry signal;
//  - relation descriptions come from positive/negative/neutral template
//    pools so clustering has something to find.
inline std::pair<Corpus, std::vector<RelationDescription>> generate_synthetic_corpus(
    std::uint64_t seed, const SyntheticParams& params) {
  using namespace synth_detail;
  if (params.num_episodes < 1 || params.chunks_per_episode < 1 || params.vocab_size < 1)
    throw std::runtime_error("synthetic corpus parameters must be >= 1");
  if (params.characters < 2) throw std::runtime_error("synthetic corpus needs at least 2 characters");
  if (params.min_turns < 2 || params.max_turns < params.min_turns)
    throw std::runtime_error("synthetic corpus needs 2 <= min_turns <= max_turns");

  std::mt19937_64 rng(seed);

  std::vector<std::string> names;
  const auto& pool = character_name_pool();
  for (int i = 0; i < params.characters; ++i) {
    if (i < static_cast<int>(pool.size()))
      names.push_back(pool[i]);
    else
      names.push_back(pool[i % pool.size()] + std::to_string(i / pool.size()));
  }

  std::vector<std::string> words;
  for (int i = 0; i < params.vocab_size; ++i) words.push_back(content_word(i));

  const int C = params.characters;
  const int V = params.vocab_size;
  // Character slices live in the low region of the vocabulary; topics and
  // scene words draw from the rest, so the two signals never share tokens.
  const int slice_region = std::min(V, std::max(C, (3 * V) / 5));
  auto slice_word = [&](int character, int j) {
    const int per = std::max(1, slice_region / C);
    return words[(character * per + j % per) % slice_region];
  };
  // Fall back to the full vocabulary when it is too small to spare a region.
  const bool split_regions = V - slice_region >= 8;
  auto scenery_word = [&]() {
    return split_regions ? slice_region + pick(rng, V - slice_region) : pick(rng, V);
  };

  static const std::vector<std::string> fillers = {"the", "we",   "to",   "a",  "and",
                                                   "of",  "it",   "is",   "now", "then",
                                                   "here", "will", "you", "i"};

  Corpus corpus;
  for (int e = 0; e < params.num_episodes; ++e) {
    // Per-episode topic pool; chunk topics drift one word at a time.
    std::vector<int> topic_pool;
    while (topic_pool.size() < 6lu) {
      int w = scenery_word();
      if (std::find(topic_pool.begin(), topic_pool.end(), w) == topic_pool.end())
        topic_pool.push_back(w);
    }
    std::vector<int> topic = {topic_pool[0], topic_pool[1], topic_pool[2]};

    for (int j = 0; j < params.chunks_per_episode; ++j) {
      if (j > 0) topic[pick(rng, static_cast<int>(topic.size()))] = topic_pool[pick(rng, 6)];

      int x = pick(rng, C);
      int y = pick(rng, C - 1);
      if (y >= x) ++y;
      int z = -1;
      if (C > 2 && unit(rng) < 0.3) {
        z = pick(rng, C - 2);
        if (z >= std::min(x, y)) ++z;
        if (z >= std::max(x, y)) ++z;
      }

      DialogueChunk chunk;
      chunk.episode_id = "e" + std::to_string(e);
      chunk.chunk_id = chunk.episode_id + "_c" + std::to_string(j);

      const int num_turns =
          params.min_turns + pick(rng, params.max_turns - params.min_turns + 1);

      // The conversation moves through "scenes", one per four-turn block, each
      // named by a fresh word restated in most turns of its block. Nearby turns
      // share a scene word while distant ones do not, which keeps candidate
      // continuations from far away tellable apart from the true next turn.
      std::vector<int> scenes((num_turns + 3) / 4);
      for (std::size_t b = 0; b < scenes.size(); ++b) {
        int w = scenery_word();
        while (b > 0 && w == scenes[b - 1]) w = scenery_word();
        scenes[b] = w;
      }

      for (int t = 0; t < num_turns; ++t) {
        const int scheduled = (t % 2 == 0) ? x : y;
        int speaker = scheduled;
        if (z >= 0 && t > 0 && t + 1 < num_turns && unit(rng) < 0.08) speaker = z;
        const int addressee = (scheduled == x) ? y : x;

        std::vector<std::string> toks;
        toks.push_back(slice_word(speaker, pick(rng, V)));
        toks.push_back(slice_word(speaker, pick(rng, V)));
        toks.push_back(slice_word(addressee, pick(rng, V)));
        toks.push_back(words[topic[pick(rng, 3)]]);
        toks.push_back(words[topic[pick(rng, 3)]]);
        toks.push_back(words[topic[pick(rng, 3)]]);
        toks.push_back(words[scenes[t / 4]]);
        toks.push_back(fillers[pick(rng, static_cast<int>(fillers.size()))]);
        std::shuffle(toks.begin(), toks.end(), rng);

        Turn turn;
        turn.speaker = names[speaker];
        std::string text;
        for (std::size_t i = 0; i < toks.size(); ++i) {
          if (i) text += ' ';
          text += toks[i];
        }
        static const char* ends[] = {".", ".", "!", "?"};
        text += ' ';
        text += ends[pick(rng, 4)];
        turn.text = text;
        double kr = unit(rng);
        turn.kind = kr < 0.08   ? TurnKind::first_person_narration
                    : kr < 0.13 ? TurnKind::second_person_narration
                                : TurnKind::dialogue;
        chunk.turns.push_back(std::move(turn));
      }

      std::string summary = names[x] + " and " + names[y] + " speak of " + words[topic[0]] + " " +
                            words[topic[1]] + " " + words[topic[2]] + " at the " +
                            words[scenes.back()] + " .";
      if (z >= 0) summary += " " + names[z] + " joins them .";
      chunk.summary = summary;
      chunk.characters_present = chunk.distinct_speakers();
      corpus.chunks.push_back(std::move(chunk));
    }
  }
  corpus.rebuild_registry();

  // Exactly one description per unordered character pair.
  std::vector<RelationDescription> descriptions;
  for (int a = 0; a < C; ++a) {
    for (int b = a + 1; b < C; ++b) {
      const double u = unit(rng);
      const auto& pool2 = u < 1.0 / 3.0   ? positive_templates()
                          : u < 2.0 / 3.0 ? negative_templates()
                                          : neutral_templates();
      const std::string tpl = pool2[pick(rng, static_cast<int>(pool2.size()))];
      descriptions.emplace_back(names[a], names[b], fill_pair(tpl, names[a], names[b]));
    }
  }
  return {std::move(corpus), std::move(descriptions)};
}

}  // namespace storylab
