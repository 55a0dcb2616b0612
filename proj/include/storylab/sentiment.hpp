#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "storylab/text.hpp"

namespace storylab {

enum class RelationLabel { positive, negative, neutral };

inline std::string to_string(RelationLabel l) {
  switch (l) {
    case RelationLabel::positive: return "positive";
    case RelationLabel::negative: return "negative";
    case RelationLabel::neutral: return "neutral";
  }
  throw std::logic_error("bad RelationLabel");
}

inline RelationLabel relation_label_from_string(const std::string& s) {
  if (s == "positive") return RelationLabel::positive;
  if (s == "negative") return RelationLabel::negative;
  if (s == "neutral") return RelationLabel::neutral;
  throw std::runtime_error("unknown relation label: \"" + s + "\"");
}

// Bag-of-tokens valence lexicon with the compound normalization constant.
struct SentimentLexicon {
  std::map<std::string, double> valence;
  double alpha = 15.0;
};

// One "token<TAB>valence" per line, UTF-8, '#' comments.
inline SentimentLexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
  SentimentLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto stripped = trim_copy(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto tab = stripped.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected token<TAB>valence");
    const std::string token = trim_copy(stripped.substr(0, tab));
    try {
      lex.valence[token] = std::stod(stripped.substr(tab + 1));
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad valence value");
    }
  }
  if (lex.alpha <= 0.0) throw std::runtime_error("lexicon alpha must be positive");
  return lex;
}

// Summed valence of matched tokens, squashed to (-1, 1):
// compound = s / sqrt(s^2 + alpha). Zero when nothing matches.
inline double sentiment_compound(const std::string& text, const SentimentLexicon& lexicon) {
  if (lexicon.valence.empty()) throw std::runtime_error("sentiment lexicon is empty");
  double s = 0.0;
  for (const auto& tok : tokenize(text)) {
    auto it = lexicon.valence.find(tok);
    if (it != lexicon.valence.end()) s += it->second;
  }
  if (s == 0.0) return 0.0;
  return s / std::sqrt(s * s + lexicon.alpha);
}

// Three-way thresholds at +/-0.05.
inline RelationLabel label_from_compound(double compound) {
  if (compound >= 0.05) return RelationLabel::positive;
  if (compound <= -0.05) return RelationLabel::negative;
  return RelationLabel::neutral;
}

}  // namespace storylab
