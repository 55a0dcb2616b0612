#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "storylab/text.hpp"

namespace storylab {

enum class TurnKind { dialogue, first_person_narration, second_person_narration };

inline std::string to_string(TurnKind k) {
  switch (k) {
    case TurnKind::dialogue: return "dialogue";
    case TurnKind::first_person_narration: return "first-person-narration";
    case TurnKind::second_person_narration: return "second-person-narration";
  }
  throw std::logic_error("bad TurnKind");
}

inline TurnKind turn_kind_from_string(const std::string& s) {
  if (s == "dialogue") return TurnKind::dialogue;
  if (s == "first-person-narration") return TurnKind::first_person_narration;
  if (s == "second-person-narration") return TurnKind::second_person_narration;
  throw std::runtime_error("unknown kind tag: \"" + s + "\"");
}

struct Turn {
  std::string speaker;
  std::string text;
  TurnKind kind = TurnKind::dialogue;
};

// A semantically cohesive span of turns plus its human-written summary.
struct DialogueChunk {
  std::string chunk_id;
  std::string episode_id;
  std::string summary;
  std::vector<Turn> turns;
  std::vector<std::string> characters_present;  // sorted, distinct

  std::vector<std::string> distinct_speakers() const {
    std::set<std::string> s;
    for (const auto& t : turns) s.insert(t.speaker);
    return {s.begin(), s.end()};
  }
};

// Chunks in story order plus a dense character registry
// (name -> id, first-appearance order). Immutable after load.
struct Corpus {
  std::vector<DialogueChunk> chunks;
  std::vector<std::string> registry_names;     // id -> name
  std::map<std::string, int> registry;         // name -> id

  int character_id(const std::string& name) const {
    auto it = registry.find(name);
    if (it == registry.end()) throw std::runtime_error("unknown character: " + name);
    return it->second;
  }

  std::size_t num_characters() const { return registry_names.size(); }

  void rebuild_registry() {
    registry_names.clear();
    registry.clear();
    for (const auto& c : chunks)
      for (const auto& t : c.turns)
        if (registry.emplace(t.speaker, static_cast<int>(registry_names.size())).second)
          registry_names.push_back(t.speaker);
  }
};

struct CorpusStats {
  double avg_turns_per_chunk = 0.0;
  double avg_characters_per_chunk = 0.0;
  std::size_t num_chunks = 0;
};

// Free-text description of how two characters relate. Pair is unordered;
// stored in lexicographic order.
struct RelationDescription {
  std::array<std::string, 2> pair;
  std::string text;

  RelationDescription() = default;
  RelationDescription(std::string a, std::string b, std::string t) : text(std::move(t)) {
    if (a == b) throw std::runtime_error("relation description names a pair of identical characters: " + a);
    if (b < a) std::swap(a, b);
    pair = {std::move(a), std::move(b)};
  }
};

namespace detail {

inline void validate_chunk(const DialogueChunk& chunk) {
  if (chunk.chunk_id.empty()) throw std::runtime_error("chunk with empty chunk_id");
  if (chunk.turns.empty())
    throw std::runtime_error("chunk \"" + chunk.chunk_id + "\" has no turns");
  for (const auto& t : chunk.turns) {
    if (trim_copy(t.text).empty())
      throw std::runtime_error("chunk \"" + chunk.chunk_id + "\" has a turn with empty text");
    if (t.speaker.empty())
      throw std::runtime_error("chunk \"" + chunk.chunk_id + "\" has a turn with empty speaker");
  }
  auto speakers = chunk.distinct_speakers();
  if (speakers != chunk.characters_present)
    throw std::runtime_error("chunk \"" + chunk.chunk_id +
                             "\": characters_present does not match the set of speakers");
}

}  // namespace detail

// One chunk record per line: chunk_id, episode_id, summary,
// turns[{speaker,text,kind}], characters_present.
inline Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);

  Corpus corpus;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim_copy(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed record: " + e.what());
    }
    DialogueChunk chunk;
    try {
      chunk.chunk_id = rec.at("chunk_id").get<std::string>();
      chunk.episode_id = rec.at("episode_id").get<std::string>();
      chunk.summary = rec.at("summary").get<std::string>();
      for (const auto& jt : rec.at("turns")) {
        Turn t;
        t.speaker = jt.at("speaker").get<std::string>();
        t.text = jt.at("text").get<std::string>();
        t.kind = turn_kind_from_string(jt.at("kind").get<std::string>());
        chunk.turns.push_back(std::move(t));
      }
      chunk.characters_present = rec.at("characters_present").get<std::vector<std::string>>();
      std::sort(chunk.characters_present.begin(), chunk.characters_present.end());
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed record: " + e.what());
    }
    if (!seen_ids.insert(chunk.chunk_id).second)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": duplicate chunk_id \"" + chunk.chunk_id + "\"");
    detail::validate_chunk(chunk);
    corpus.chunks.push_back(std::move(chunk));
  }
  if (corpus.chunks.empty()) throw std::runtime_error("empty corpus: " + path);
  corpus.rebuild_registry();
  return corpus;
}

inline nlohmann::ordered_json chunk_to_json(const DialogueChunk& chunk) {
  nlohmann::ordered_json rec;
  rec["chunk_id"] = chunk.chunk_id;
  rec["episode_id"] = chunk.episode_id;
  rec["summary"] = chunk.summary;
  auto turns = nlohmann::ordered_json::array();
  for (const auto& t : chunk.turns) {
    nlohmann::ordered_json jt;
    jt["speaker"] = t.speaker;
    jt["text"] = t.text;
    jt["kind"] = to_string(t.kind);
    turns.push_back(std::move(jt));
  }
  rec["turns"] = std::move(turns);
  rec["characters_present"] = chunk.characters_present;
  return rec;
}

inline void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  for (const auto& chunk : corpus.chunks) out << chunk_to_json(chunk).dump() << "\n";
}

inline CorpusStats corpus_stats(const Corpus& corpus) {
  if (corpus.chunks.empty()) throw std::runtime_error("empty corpus");
  CorpusStats stats;
  stats.num_chunks = corpus.chunks.size();
  std::size_t total_turns = 0, total_chars = 0;
  for (const auto& c : corpus.chunks) {
    total_turns += c.turns.size();
    total_chars += c.characters_present.size();
  }
  stats.avg_turns_per_chunk = static_cast<double>(total_turns) / static_cast<double>(stats.num_chunks);
  stats.avg_characters_per_chunk =
      static_cast<double>(total_chars) / static_cast<double>(stats.num_chunks);
  return stats;
}

struct SplitRatios {
  double train = 0.8, valid = 0.1, test = 0.1;
};

// Episode-level partition: no episode straddles splits. A zero ratio yields
// an empty split; each positive-ratio split receives at least one episode.
// The parent registry is shared by all three splits so character ids stay
// stable across them.
inline std::array<Corpus, 3> split_corpus(const Corpus& corpus, SplitRatios ratios,
                                          std::uint64_t seed) {
  const std::array<double, 3> r = {ratios.train, ratios.valid, ratios.test};
  for (double x : r)
    if (x < 0.0 || !std::isfinite(x)) throw std::runtime_error("split ratios must be non-negative");
  const double sum = r[0] + r[1] + r[2];
  if (std::abs(sum - 1.0) > 1e-9) throw std::runtime_error("split ratios must sum to 1");

  std::vector<std::string> episodes;
  {
    std::set<std::string> seen;
    for (const auto& c : corpus.chunks)
      if (seen.insert(c.episode_id).second) episodes.push_back(c.episode_id);
  }
  int positive_splits = 0;
  for (double x : r)
    if (x > 0.0) ++positive_splits;
  if (static_cast<int>(episodes.size()) < positive_splits)
    throw std::runtime_error("fewer episodes than splits requested");

  std::mt19937_64 rng(seed);
  std::shuffle(episodes.begin(), episodes.end(), rng);

  // Largest-remainder apportionment with a floor of one episode per
  // positive-ratio split.
  const std::size_t n = episodes.size();
  std::array<std::size_t, 3> counts{0, 0, 0};
  std::array<double, 3> remainders{0, 0, 0};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    double exact = r[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    remainders[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (remainders[i] > remainders[best]) best = i;
    ++counts[best];
    remainders[best] = -1.0;
    ++assigned;
  }
  for (int i = 0; i < 3; ++i) {
    if (r[i] > 0.0 && counts[i] == 0) {
      int donor = 0;
      for (int j = 1; j < 3; ++j)
        if (counts[j] > counts[donor]) donor = j;
      if (counts[donor] <= 1) throw std::runtime_error("fewer episodes than splits requested");
      --counts[donor];
      ++counts[i];
    }
  }

  std::map<std::string, int> episode_split;
  std::size_t idx = 0;
  for (int s = 0; s < 3; ++s)
    for (std::size_t j = 0; j < counts[s]; ++j) episode_split[episodes[idx++]] = s;

  std::array<Corpus, 3> out;
  for (auto& c : out) {
    c.registry = corpus.registry;
    c.registry_names = corpus.registry_names;
  }
  for (const auto& chunk : corpus.chunks) out[episode_split.at(chunk.episode_id)].chunks.push_back(chunk);
  return out;
}

// Relation-description file: one record per line with keys pair:[a,b], text.
inline std::vector<RelationDescription> load_relation_descriptions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open relation description file: " + path);
  std::vector<RelationDescription> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim_copy(line).empty()) continue;
    try {
      auto rec = nlohmann::json::parse(line);
      auto pair = rec.at("pair").get<std::vector<std::string>>();
      if (pair.size() != 2) throw std::runtime_error("pair must name exactly two characters");
      auto text = rec.at("text").get<std::string>();
      if (trim_copy(text).empty()) throw std::runtime_error("empty description text");
      out.emplace_back(pair[0], pair[1], text);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline void save_relation_descriptions(const std::vector<RelationDescription>& descriptions,
                                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write relation description file: " + path);
  for (const auto& d : descriptions) {
    nlohmann::ordered_json rec;
    rec["pair"] = {d.pair[0], d.pair[1]};
    rec["text"] = d.text;
    out << rec.dump() << "\n";
  }
}

}  // namespace storylab
