#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "storylab/text.hpp"

namespace storylab {

// (index, weight) pairs with strictly increasing indices; zero weights are
// never stored. Non-empty transformed documents are L2-normalized.
struct SparseVector {
  std::vector<std::pair<int, double>> entries;

  bool empty() const { return entries.empty(); }

  double norm() const {
    double s = 0.0;
    for (const auto& [i, w] : entries) s += w * w;
    return std::sqrt(s);
  }

  std::vector<double> to_dense(std::size_t dim) const {
    std::vector<double> out(dim, 0.0);
    for (const auto& [i, w] : entries) out[static_cast<std::size_t>(i)] = w;
    return out;
  }
};

struct TfidfModel {
  std::map<std::string, int> vocab;  // token -> dense column index
  std::vector<double> idf;           // one per token
  std::size_t num_docs = 0;

  std::size_t dim() const { return idf.size(); }
};

// Smoothed idf: idf(t) = ln((1 + N) / (1 + df(t))) + 1. Vocabulary covers
// every token appearing in any document; indices are lexicographic.
inline TfidfModel fit_tfidf(const std::vector<std::string>& documents) {
  if (documents.empty()) throw std::runtime_error("tf-idf: no documents");
  std::map<std::string, int> doc_freq;
  bool any_tokens = false;
  for (const auto& doc : documents) {
    std::map<std::string, bool> seen;
    for (const auto& tok : tokenize(doc)) {
      any_tokens = true;
      if (!seen[tok]) {
        seen[tok] = true;
        ++doc_freq[tok];
      }
    }
  }
  if (!any_tokens) throw std::runtime_error("tf-idf: all documents empty after tokenization");

  TfidfModel model;
  model.num_docs = documents.size();
  int index = 0;
  for (const auto& [tok, df] : doc_freq) {
    model.vocab.emplace(tok, index++);
    const double n = static_cast<double>(model.num_docs);
    model.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(df))) + 1.0);
  }
  return model;
}

// weight(t) = tf(t) * idf(t), then L2 normalization. Out-of-vocabulary
// tokens are ignored; a document with no in-vocab tokens transforms to the
// zero vector (stored empty) and is flagged by the caller.
inline SparseVector tfidf_vector(const TfidfModel& model, const std::string& text) {
  if (model.vocab.empty()) throw std::runtime_error("tf-idf model is not fitted");
  std::map<int, double> counts;
  for (const auto& tok : tokenize(text)) {
    auto it = model.vocab.find(tok);
    if (it != model.vocab.end()) counts[it->second] += 1.0;
  }
  SparseVector v;
  double sq = 0.0;
  for (const auto& [idx, tf] : counts) {
    const double w = tf * model.idf[static_cast<std::size_t>(idx)];
    v.entries.emplace_back(idx, w);
    sq += w * w;
  }
  if (!v.entries.empty()) {
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& [idx, w] : v.entries) w *= inv;
  }
  return v;
}

}  // namespace storylab
