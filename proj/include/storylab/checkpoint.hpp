#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "storylab/multitask.hpp"
#include "storylab/relations.hpp"
#include "storylab/vocab.hpp"

namespace storylab {

constexpr char kCheckpointMagic[8] = {'S', 'T', 'O', 'R', 'Y', 'L', 'A', 'B'};
constexpr std::uint32_t kCheckpointVersion = 1;

namespace ckpt_detail {

inline void write_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

inline void read_bytes(std::istream& in, void* data, std::size_t n) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw std::runtime_error("corrupt checkpoint: unexpected end of file");
}

template <typename T>
void write_pod(std::ostream& out, T v) {
  write_bytes(out, &v, sizeof v);
}

template <typename T>
T read_pod(std::istream& in) {
  T v;
  read_bytes(in, &v, sizeof v);
  return v;
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  write_bytes(out, s.data(), s.size());
}

inline std::string read_string(std::istream& in) {
  const auto n = read_pod<std::uint32_t>(in);
  if (n > (1u << 24)) throw std::runtime_error("corrupt checkpoint: unreasonable string length");
  std::string s(n, '\0');
  if (n) read_bytes(in, s.data(), n);
  return s;
}

inline void write_tensor(std::ostream& out, const std::string& name,
                         const std::vector<double>& data) {
  write_string(out, name);
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(data.size()));
  if (!data.empty()) write_bytes(out, data.data(), data.size() * sizeof(double));
}

inline void read_tensor(std::istream& in, const std::string& expected_name,
                        std::vector<double>& data) {
  const std::string name = read_string(in);
  if (name != expected_name)
    throw std::runtime_error("corrupt checkpoint: expected tensor " + expected_name + ", found " +
                             name);
  const auto count = read_pod<std::uint64_t>(in);
  if (count != data.size())
    throw std::runtime_error("corrupt checkpoint: tensor " + expected_name + " has wrong shape");
  if (count) read_bytes(in, data.data(), count * sizeof(double));
}

inline void write_encoder(std::ostream& out, const EncoderParameters& p) {
  EncoderParameters& mut = const_cast<EncoderParameters&>(p);
  for (const auto& ref : tensor_refs(mut)) write_tensor(out, ref.name, *ref.data);
}

inline void read_encoder(std::istream& in, EncoderParameters& p) {
  for (const auto& ref : tensor_refs(p)) read_tensor(in, ref.name, *ref.data);
}

}  // namespace ckpt_detail

struct Checkpoint {
  MultiTaskModel model;
  Vocab vocab;
  RelationTable table;
};

inline void save_checkpoint(const MultiTaskModel& model, const Vocab& vocab,
                            const RelationTable& table, const std::string& path) {
  using namespace ckpt_detail;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);

  write_bytes(out, kCheckpointMagic, sizeof kCheckpointMagic);
  write_pod<std::uint32_t>(out, kCheckpointVersion);

  const EncoderConfig& cfg = model.context_tower.config;
  write_pod<std::int32_t>(out, cfg.num_layers);
  write_pod<std::int32_t>(out, cfg.num_heads);
  write_pod<std::int32_t>(out, cfg.embed_dim);
  write_pod<std::int32_t>(out, cfg.ffn_dim);
  write_pod<std::int32_t>(out, cfg.max_seq_len);
  write_pod<double>(out, cfg.dropout);
  write_pod<double>(out, cfg.attention_dropout);

  write_pod<std::int32_t>(out, model.ctx_cfg.n_last_turns);
  write_pod<std::int32_t>(out, model.ctx_cfg.n_history_chunks);
  write_pod<std::uint8_t>(out, model.ctx_cfg.include_summary ? 1 : 0);
  write_pod<std::uint8_t>(out, model.ctx_cfg.include_relations ? 1 : 0);
  write_pod<std::uint8_t>(out, model.tie_encoders ? 1 : 0);

  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(vocab.id_to_token.size()));
  for (const auto& tok : vocab.id_to_token) write_string(out, tok);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(vocab.speaker_names.size()));
  for (const auto& name : vocab.speaker_names) write_string(out, name);

  write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(table.default_label));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(table.labels.size()));
  for (const auto& [pair, label] : table.labels) {
    write_string(out, pair.first);
    write_string(out, pair.second);
    write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(label));
  }

  write_pod<std::int32_t>(out, model.head.num_classes);
  write_pod<std::int32_t>(out, model.head.embed_dim);
  write_tensor(out, "head.weight", model.head.weight);
  write_tensor(out, "head.bias", model.head.bias);

  write_encoder(out, model.context_tower);
  if (!model.tie_encoders) write_encoder(out, model.candidate_tower);
  if (!out) throw std::runtime_error("failed while writing checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  using namespace ckpt_detail;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);

  char magic[8];
  read_bytes(in, magic, sizeof magic);
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version) +
                             " (expected " + std::to_string(kCheckpointVersion) + ")");

  Checkpoint ck;
  EncoderConfig cfg;
  cfg.num_layers = read_pod<std::int32_t>(in);
  cfg.num_heads = read_pod<std::int32_t>(in);
  cfg.embed_dim = read_pod<std::int32_t>(in);
  cfg.ffn_dim = read_pod<std::int32_t>(in);
  cfg.max_seq_len = read_pod<std::int32_t>(in);
  cfg.dropout = read_pod<double>(in);
  cfg.attention_dropout = read_pod<double>(in);
  cfg.validate();

  ck.model.ctx_cfg.n_last_turns = read_pod<std::int32_t>(in);
  ck.model.ctx_cfg.n_history_chunks = read_pod<std::int32_t>(in);
  ck.model.ctx_cfg.include_summary = read_pod<std::uint8_t>(in) != 0;
  ck.model.ctx_cfg.include_relations = read_pod<std::uint8_t>(in) != 0;
  ck.model.tie_encoders = read_pod<std::uint8_t>(in) != 0;

  const auto num_tokens = read_pod<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < num_tokens; ++i) {
    const std::string tok = read_string(in);
    ck.vocab.token_to_id.emplace(tok, static_cast<int>(ck.vocab.id_to_token.size()));
    ck.vocab.id_to_token.push_back(tok);
  }
  const auto num_speakers = read_pod<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < num_speakers; ++i)
    ck.vocab.speaker_names.push_back(read_string(in));
  for (const auto& name : ck.vocab.speaker_names) {
    auto it = ck.vocab.token_to_id.find(marker_token_for(name));
    if (it == ck.vocab.token_to_id.end())
      throw std::runtime_error("corrupt checkpoint: missing marker token for " + name);
    ck.vocab.marker_ids.push_back(it->second);
  }

  ck.table.default_label = static_cast<RelationLabel>(read_pod<std::uint8_t>(in));
  const auto num_relations = read_pod<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < num_relations; ++i) {
    std::string a = read_string(in);
    std::string b = read_string(in);
    const auto label = static_cast<RelationLabel>(read_pod<std::uint8_t>(in));
    ck.table.labels.emplace(std::make_pair(std::move(a), std::move(b)), label);
  }

  ck.model.head.num_classes = read_pod<std::int32_t>(in);
  ck.model.head.embed_dim = read_pod<std::int32_t>(in);
  if (ck.model.head.num_classes != static_cast<int>(num_speakers) ||
      ck.model.head.embed_dim != cfg.embed_dim)
    throw std::runtime_error("corrupt checkpoint: classifier head shape mismatch");
  ck.model.head.weight.resize(static_cast<std::size_t>(ck.model.head.num_classes) *
                              ck.model.head.embed_dim);
  ck.model.head.bias.resize(static_cast<std::size_t>(ck.model.head.num_classes));
  read_tensor(in, "head.weight", ck.model.head.weight);
  read_tensor(in, "head.bias", ck.model.head.bias);

  // Size the towers from config + vocab, then fill tensors in order.
  ck.model.context_tower = init_encoder(cfg, static_cast<int>(num_tokens), 0);
  read_encoder(in, ck.model.context_tower);
  if (!ck.model.tie_encoders) {
    ck.model.candidate_tower = init_encoder(cfg, static_cast<int>(num_tokens), 0);
    read_encoder(in, ck.model.candidate_tower);
  }

  char extra;
  in.read(&extra, 1);
  if (!in.eof()) throw std::runtime_error("corrupt checkpoint: trailing data");
  return ck;
}

}  // namespace storylab
