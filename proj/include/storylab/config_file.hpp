#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "storylab/candidates.hpp"
#include "storylab/context.hpp"
#include "storylab/encoder.hpp"
#include "storylab/multitask.hpp"
#include "storylab/text.hpp"

namespace storylab {

// Every tunable in one flat bag; CLI flags override file values, and the
// fully resolved result is written next to each experiment's outputs.
struct FullConfig {
  EncoderConfig encoder;
  ContextConfig context;
  TrainingConfig training;
  EvalConfig eval;
  int min_freq = 1;

  void validate() const {
    encoder.validate();
    context.validate();
    training.validate();
    eval.validate();
    if (min_freq < 1) throw std::runtime_error("config: min_freq must be >= 1");
  }
};

namespace config_detail {

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::runtime_error("config: bad boolean for " + key + ": " + value);
}

inline int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad integer for " + key + ": " + value);
  }
}

inline double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad real for " + key + ": " + value);
  }
}

inline std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad seed for " + key + ": " + value);
  }
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::istringstream parts(value);
  std::string item;
  while (std::getline(parts, item, ',')) out.push_back(parse_int(key, trim_copy(item)));
  if (out.empty()) throw std::runtime_error("config: empty list for " + key);
  return out;
}

inline std::string render_int_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace config_detail

inline void apply_config_entry(FullConfig& cfg, const std::string& key, const std::string& value) {
  using namespace config_detail;
  if (key == "num_layers") cfg.encoder.num_layers = parse_int(key, value);
  else if (key == "num_heads") cfg.encoder.num_heads = parse_int(key, value);
  else if (key == "embed_dim") cfg.encoder.embed_dim = parse_int(key, value);
  else if (key == "ffn_dim") cfg.encoder.ffn_dim = parse_int(key, value);
  else if (key == "max_seq_len") cfg.encoder.max_seq_len = parse_int(key, value);
  else if (key == "dropout") cfg.encoder.dropout = parse_real(key, value);
  else if (key == "attention_dropout") cfg.encoder.attention_dropout = parse_real(key, value);
  else if (key == "n_last_turns") cfg.context.n_last_turns = parse_int(key, value);
  else if (key == "n_history_chunks") cfg.context.n_history_chunks = parse_int(key, value);
  else if (key == "include_summary") cfg.context.include_summary = parse_bool(key, value);
  else if (key == "include_relations") cfg.context.include_relations = parse_bool(key, value);
  else if (key == "lambda_rank") cfg.training.lambda_rank = parse_real(key, value);
  else if (key == "lambda_cls") cfg.training.lambda_cls = parse_real(key, value);
  else if (key == "learning_rate") cfg.training.learning_rate = parse_real(key, value);
  else if (key == "warmup_steps") cfg.training.warmup_steps = parse_int(key, value);
  else if (key == "lr_decay") cfg.training.lr_decay = parse_real(key, value);
  else if (key == "epochs") cfg.training.epochs = parse_int(key, value);
  else if (key == "batch_size") cfg.training.batch_size = parse_int(key, value);
  else if (key == "seed") cfg.training.seed = parse_seed(key, value);
  else if (key == "tie_encoders") cfg.training.tie_encoders = parse_bool(key, value);
  else if (key == "hits_levels") cfg.eval.hits_levels = parse_int_list(key, value);
  else if (key == "num_candidates") cfg.eval.num_candidates = parse_int(key, value);
  else if (key == "eval_seed") cfg.eval.seed = parse_seed(key, value);
  else if (key == "min_freq") cfg.min_freq = parse_int(key, value);
  else throw std::runtime_error("config: unknown key: " + key);
}

// key=value lines; blank lines and '#' comments ignored.
inline FullConfig load_config_file(const std::string& path, FullConfig base = FullConfig{}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim_copy(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config " + path + " line " + std::to_string(line_no) +
                               ": expected key=value");
    const std::string key = trim_copy(stripped.substr(0, eq));
    const std::string value = trim_copy(stripped.substr(eq + 1));
    try {
      apply_config_entry(base, key, value);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

inline std::string render_config(const FullConfig& cfg) {
  using config_detail::render_int_list;
  std::ostringstream out;
  out << "num_layers=" << cfg.encoder.num_layers << '\n';
  out << "num_heads=" << cfg.encoder.num_heads << '\n';
  out << "embed_dim=" << cfg.encoder.embed_dim << '\n';
  out << "ffn_dim=" << cfg.encoder.ffn_dim << '\n';
  out << "max_seq_len=" << cfg.encoder.max_seq_len << '\n';
  out << "dropout=" << format_double(cfg.encoder.dropout) << '\n';
  out << "attention_dropout=" << format_double(cfg.encoder.attention_dropout) << '\n';
  out << "n_last_turns=" << cfg.context.n_last_turns << '\n';
  out << "n_history_chunks=" << cfg.context.n_history_chunks << '\n';
  out << "include_summary=" << (cfg.context.include_summary ? "true" : "false") << '\n';
  out << "include_relations=" << (cfg.context.include_relations ? "true" : "false") << '\n';
  out << "lambda_rank=" << format_double(cfg.training.lambda_rank) << '\n';
  out << "lambda_cls=" << format_double(cfg.training.lambda_cls) << '\n';
  out << "learning_rate=" << format_double(cfg.training.learning_rate) << '\n';
  out << "warmup_steps=" << cfg.training.warmup_steps << '\n';
  out << "lr_decay=" << format_double(cfg.training.lr_decay) << '\n';
  out << "epochs=" << cfg.training.epochs << '\n';
  out << "batch_size=" << cfg.training.batch_size << '\n';
  out << "seed=" << cfg.training.seed << '\n';
  out << "tie_encoders=" << (cfg.training.tie_encoders ? "true" : "false") << '\n';
  out << "hits_levels=" << render_int_list(cfg.eval.hits_levels) << '\n';
  out << "num_candidates=" << cfg.eval.num_candidates << '\n';
  out << "eval_seed=" << cfg.eval.seed << '\n';
  out << "min_freq=" << cfg.min_freq << '\n';
  return out.str();
}

inline void write_resolved_config(const FullConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write resolved config: " + path);
  out << render_config(cfg);
  if (!out.flush()) throw std::runtime_error("failed while writing resolved config: " + path);
}

}  // namespace storylab
