#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "storylab/corpus.hpp"
#include "storylab/relations.hpp"
#include "storylab/vocab.hpp"

namespace storylab {

struct ContextConfig {
  int n_last_turns = 8;      // turns of dialogue history
  int n_history_chunks = 2;  // prior chunk summaries
  bool include_summary = true;
  bool include_relations = true;

  void validate() const {
    if (n_last_turns < 1) throw std::runtime_error("context config: n_last_turns must be >= 1");
    if (n_history_chunks < 0)
      throw std::runtime_error("context config: n_history_chunks must be >= 0");
  }
};

struct TrainingExample {
  std::vector<int> context_tokens;
  std::vector<int> gold_response_tokens;
  int gold_speaker_id = -1;
  std::string chunk_id;
  std::size_t turn_index = 0;
};

namespace context_detail {

// Keep the leading pooling token; drop the oldest of the rest.
inline void truncate_front(std::vector<int>& ids, int max_seq_len) {
  if (static_cast<int>(ids.size()) <= max_seq_len) return;
  const std::size_t keep = static_cast<std::size_t>(max_seq_len) - 1;
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(max_seq_len));
  out.push_back(ids.front());
  out.insert(out.end(), ids.end() - static_cast<std::ptrdiff_t>(keep), ids.end());
  ids = std::move(out);
}

}  // namespace context_detail

// Serialized context, in token-id space:
//   [LEAD]
//   per relation triple among the chunk's characters: marker_a label marker_b SEP
//   per history-chunk summary, oldest first: summary tokens, SEP
//   per history turn: speaker marker, utterance tokens
// Overlong sequences are truncated from the front (recency wins), keeping LEAD.
// Only material strictly before (chunk_index, turn_index) is used.
inline std::vector<int> assemble_context(const Corpus& corpus, std::size_t chunk_index,
                                         std::size_t turn_index, const RelationTable& table,
                                         const Vocab& vocab, const ContextConfig& cfg,
                                         int max_seq_len) {
  cfg.validate();
  if (chunk_index >= corpus.chunks.size())
    throw std::runtime_error("assemble_context: chunk index out of range");
  const DialogueChunk& chunk = corpus.chunks[chunk_index];
  if (turn_index >= chunk.turns.size())
    throw std::runtime_error("assemble_context: turn index out of range");

  // Prior chunks of the same episode, oldest first.
  std::vector<std::size_t> history;
  for (std::size_t back = chunk_index; back > 0 &&
       static_cast<int>(history.size()) < cfg.n_history_chunks; --back) {
    if (corpus.chunks[back - 1].episode_id != chunk.episode_id) break;
    history.push_back(back - 1);
  }
  std::reverse(history.begin(), history.end());

  const bool episode_start =
      chunk_index == 0 || corpus.chunks[chunk_index - 1].episode_id != chunk.episode_id;
  if (turn_index == 0 && episode_start)
    throw std::runtime_error("assemble_context: no context before the first turn of an episode");

  std::vector<int> ids;
  ids.push_back(Vocab::lead_id);

  if (cfg.include_relations) {
    for (const RelationTriple& triple : attach_relations(chunk, table)) {
      ids.push_back(vocab.marker(vocab.speaker_id(triple.a)));
      ids.push_back(vocab.label_id(triple.label));
      ids.push_back(vocab.marker(vocab.speaker_id(triple.b)));
      ids.push_back(Vocab::sep_id);
    }
  }

  if (cfg.include_summary) {
    for (std::size_t h : history) {
      const auto summary_ids = vocab.encode_text(corpus.chunks[h].summary);
      ids.insert(ids.end(), summary_ids.begin(), summary_ids.end());
      ids.push_back(Vocab::sep_id);
    }
  }

  const std::size_t first =
      turn_index > static_cast<std::size_t>(cfg.n_last_turns)
          ? turn_index - static_cast<std::size_t>(cfg.n_last_turns)
          : 0;
  for (std::size_t t = first; t < turn_index; ++t) {
    const Turn& turn = chunk.turns[t];
    ids.push_back(vocab.marker(vocab.speaker_id(turn.speaker)));
    const auto text_ids = vocab.encode_text(turn.text);
    ids.insert(ids.end(), text_ids.begin(), text_ids.end());
  }

  context_detail::truncate_front(ids, max_seq_len);
  return ids;
}

// Candidate-side serialization of one turn: [LEAD] speaker-marker utterance.
inline std::vector<int> response_tokens(const DialogueChunk& chunk, std::size_t turn_index,
                                        const Vocab& vocab, int max_seq_len) {
  if (turn_index >= chunk.turns.size())
    throw std::runtime_error("response_tokens: turn index out of range");
  const Turn& turn = chunk.turns[turn_index];
  std::vector<int> ids;
  ids.push_back(Vocab::lead_id);
  ids.push_back(vocab.marker(vocab.speaker_id(turn.speaker)));
  const auto text_ids = vocab.encode_text(turn.text);
  ids.insert(ids.end(), text_ids.begin(), text_ids.end());
  context_detail::truncate_front(ids, max_seq_len);
  return ids;
}

// One example per turn with at least one preceding turn in its chunk.
inline std::vector<TrainingExample> build_examples(const Corpus& corpus,
                                                   const RelationTable& table, const Vocab& vocab,
                                                   const ContextConfig& cfg, int max_seq_len) {
  cfg.validate();
  std::vector<TrainingExample> examples;
  for (std::size_t c = 0; c < corpus.chunks.size(); ++c) {
    const DialogueChunk& chunk = corpus.chunks[c];
    for (std::size_t t = 1; t < chunk.turns.size(); ++t) {
      TrainingExample ex;
      ex.context_tokens = assemble_context(corpus, c, t, table, vocab, cfg, max_seq_len);
      ex.gold_response_tokens = response_tokens(chunk, t, vocab, max_seq_len);
      ex.gold_speaker_id = vocab.speaker_id(chunk.turns[t].speaker);
      ex.chunk_id = chunk.chunk_id;
      ex.turn_index = t;
      examples.push_back(std::move(ex));
    }
  }
  return examples;
}

}  // namespace storylab
