#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "storylab/corpus.hpp"
#include "storylab/sentiment.hpp"
#include "storylab/text.hpp"

namespace storylab {

// Token table shared by both towers. Reserved entries come first: PAD (id 0),
// UNK, SEP, LEAD (the prepended pooling token), the three relation-label
// words, then one speaker-marker token per cast member, then corpus tokens
// ordered by frequency (descending) and lexicographically.
struct Vocab {
  static constexpr int pad_id = 0;
  static constexpr int unk_id = 1;
  static constexpr int sep_id = 2;
  static constexpr int lead_id = 3;

  std::vector<std::string> id_to_token;
  std::map<std::string, int> token_to_id;
  std::vector<int> marker_ids;            // indexed by speaker id
  std::vector<std::string> speaker_names; // speaker id -> character name

  std::size_t size() const { return id_to_token.size(); }

  int num_speakers() const { return static_cast<int>(speaker_names.size()); }

  // Speaker identity is resolved by name so that models trained on one split
  // file evaluate consistently against another.
  int speaker_id(const std::string& name) const {
    for (std::size_t i = 0; i < speaker_names.size(); ++i)
      if (speaker_names[i] == name) return static_cast<int>(i);
    throw std::runtime_error("unknown speaker: " + name);
  }

  int id(const std::string& token) const {
    auto it = token_to_id.find(token);
    return it == token_to_id.end() ? unk_id : it->second;
  }

  int marker(int character_id) const {
    return marker_ids.at(static_cast<std::size_t>(character_id));
  }

  int label_id(RelationLabel l) const {
    switch (l) {
      case RelationLabel::positive: return 4;
      case RelationLabel::negative: return 5;
      case RelationLabel::neutral: return 6;
    }
    throw std::logic_error("bad RelationLabel");
  }

  std::vector<int> encode_text(const std::string& text) const {
    std::vector<int> ids;
    for (const auto& tok : tokenize(text)) ids.push_back(id(tok));
    return ids;
  }
};

inline std::string marker_token_for(const std::string& character) { return "<spkr:" + character + ">"; }

// Tokens with corpus frequency >= min_freq are included; everything else
// encodes to UNK. The cast is the corpus registry plus extra_cast (deduped,
// in the given order): evaluation splits may voice characters the training
// chunks never do, and the speaker head has to cover them.
inline Vocab build_vocab(const Corpus& corpus, int min_freq,
                         const std::vector<std::string>& extra_cast = {}) {
  if (corpus.chunks.empty()) throw std::runtime_error("build_vocab: empty corpus");
  if (min_freq < 1) throw std::runtime_error("build_vocab: min_freq must be >= 1");

  Vocab vocab;
  auto add = [&](const std::string& tok) {
    if (vocab.token_to_id.emplace(tok, static_cast<int>(vocab.id_to_token.size())).second)
      vocab.id_to_token.push_back(tok);
  };
  add("<pad>");
  add("<unk>");
  add("<sep>");
  add("<lead>");
  add("positive");
  add("negative");
  add("neutral");
  vocab.speaker_names = corpus.registry_names;
  for (const auto& name : extra_cast)
    if (std::find(vocab.speaker_names.begin(), vocab.speaker_names.end(), name) ==
        vocab.speaker_names.end())
      vocab.speaker_names.push_back(name);
  for (const auto& name : vocab.speaker_names) add(marker_token_for(name));
  vocab.marker_ids.clear();
  for (const auto& name : vocab.speaker_names)
    vocab.marker_ids.push_back(vocab.token_to_id.at(marker_token_for(name)));

  std::map<std::string, std::size_t> freq;
  for (const auto& chunk : corpus.chunks) {
    for (const auto& turn : chunk.turns)
      for (const auto& tok : tokenize(turn.text)) ++freq[tok];
    for (const auto& tok : tokenize(chunk.summary)) ++freq[tok];
  }

  std::vector<std::pair<std::string, std::size_t>> entries(freq.begin(), freq.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [tok, count] : entries)
    if (count >= static_cast<std::size_t>(min_freq)) add(tok);
  return vocab;
}

inline void save_vocab(const Vocab& vocab, std::ostream& out) {
  for (std::size_t i = 0; i < vocab.id_to_token.size(); ++i)
    out << i << '\t' << vocab.id_to_token[i] << '\n';
}

}  // namespace storylab
