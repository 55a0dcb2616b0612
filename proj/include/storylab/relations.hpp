#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "storylab/corpus.hpp"
#include "storylab/kmeans.hpp"
#include "storylab/sentiment.hpp"
#include "storylab/tfidf.hpp"

namespace storylab {

// <a, label, b> with the pair in lexicographic order, so the label is
// symmetric by construction.
struct RelationTriple {
  std::string a;
  RelationLabel label = RelationLabel::neutral;
  std::string b;

  bool operator==(const RelationTriple&) const = default;
};

// Canonical pair -> label; lookup is total via the default label.
struct RelationTable {
  std::map<std::pair<std::string, std::string>, RelationLabel> labels;
  RelationLabel default_label = RelationLabel::neutral;

  RelationLabel lookup(const std::string& a, const std::string& b) const {
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    auto it = labels.find(key);
    return it == labels.end() ? default_label : it->second;
  }
};

namespace relations_detail {

// Majority over label counts; any tie for the maximum resolves to neutral.
inline RelationLabel majority_label(const std::array<int, 3>& votes) {
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (votes[static_cast<std::size_t>(i)] > votes[static_cast<std::size_t>(best)]) best = i;
  int with_max = 0;
  for (int i = 0; i < 3; ++i)
    if (votes[static_cast<std::size_t>(i)] == votes[static_cast<std::size_t>(best)]) ++with_max;
  if (with_max > 1) return RelationLabel::neutral;
  return static_cast<RelationLabel>(best);
}

inline std::size_t label_index(RelationLabel l) { return static_cast<std::size_t>(l); }

}  // namespace relations_detail

// Each description votes with its own sentiment label; a cluster takes the
// majority label of its members, ties to neutral.
inline std::vector<RelationLabel> label_clusters(const ClusterModel& model,
                                                 const std::vector<RelationDescription>& descriptions,
                                                 const SentimentLexicon& lexicon) {
  if (model.assignments.size() != descriptions.size())
    throw std::runtime_error("label_clusters: model was not fitted over these descriptions");
  std::vector<std::array<int, 3>> votes(static_cast<std::size_t>(model.k), {0, 0, 0});
  for (std::size_t i = 0; i < descriptions.size(); ++i) {
    const auto label = label_from_compound(sentiment_compound(descriptions[i].text, lexicon));
    ++votes[static_cast<std::size_t>(model.assignments[i])]
           [relations_detail::label_index(label)];
  }
  std::vector<RelationLabel> out;
  out.reserve(votes.size());
  for (int c = 0; c < model.k; ++c) {
    const auto& v = votes[static_cast<std::size_t>(c)];
    if (v[0] + v[1] + v[2] == 0)
      throw std::runtime_error("label_clusters: cluster " + std::to_string(c) + " has no members");
    out.push_back(relations_detail::majority_label(v));
  }
  return out;
}

// A pair's label comes from its description's cluster; multiple descriptions
// per pair resolve by majority over their cluster labels, ties to neutral.
inline RelationTable build_relation_table(const std::vector<RelationDescription>& descriptions,
                                          const ClusterModel& model,
                                          const std::vector<RelationLabel>& cluster_labels) {
  if (model.assignments.size() != descriptions.size())
    throw std::runtime_error("build_relation_table: every description needs a cluster assignment");
  std::map<std::pair<std::string, std::string>, std::array<int, 3>> votes;
  for (std::size_t i = 0; i < descriptions.size(); ++i) {
    const auto label = cluster_labels.at(static_cast<std::size_t>(model.assignments[i]));
    auto key = std::make_pair(descriptions[i].pair[0], descriptions[i].pair[1]);
    ++votes[key][relations_detail::label_index(label)];
  }
  RelationTable table;
  table.default_label = RelationLabel::neutral;
  for (const auto& [pair, v] : votes) table.labels[pair] = relations_detail::majority_label(v);
  return table;
}

// One triple per unordered pair of characters present, lexicographic order.
// Fewer than two characters yields an empty sequence.
inline std::vector<RelationTriple> attach_relations(const DialogueChunk& chunk,
                                                    const RelationTable& table) {
  std::vector<RelationTriple> out;
  const auto& chars = chunk.characters_present;  // already sorted
  for (std::size_t i = 0; i < chars.size(); ++i)
    for (std::size_t j = i + 1; j < chars.size(); ++j)
      out.push_back({chars[i], table.lookup(chars[i], chars[j]), chars[j]});
  return out;
}

// The full mining pipeline of fitted models plus per-description diagnostics.
struct MinedRelations {
  TfidfModel tfidf;
  ClusterModel clusters;
  std::vector<RelationLabel> cluster_labels;
  std::vector<double> compounds;            // per description
  std::vector<RelationLabel> vote_labels;   // per description
  RelationTable table;
};

// TF-IDF -> k-means (k-means++, seeded) -> lexicon votes -> cluster labels
// -> pair table. Deterministic for a fixed seed.
inline MinedRelations mine_relations(const std::vector<RelationDescription>& descriptions,
                                     const SentimentLexicon& lexicon, int k, std::uint64_t seed,
                                     int max_iters = 300, double tol = 1e-6) {
  if (descriptions.empty()) throw std::runtime_error("mine_relations: no descriptions");
  std::vector<std::string> texts;
  texts.reserve(descriptions.size());
  for (const auto& d : descriptions) texts.push_back(d.text);

  MinedRelations mined;
  mined.tfidf = fit_tfidf(texts);
  std::vector<std::vector<double>> points;
  points.reserve(descriptions.size());
  for (std::size_t i = 0; i < descriptions.size(); ++i) {
    auto v = tfidf_vector(mined.tfidf, texts[i]);
    if (v.empty())
      throw std::runtime_error("mine_relations: description for pair (" + descriptions[i].pair[0] +
                               ", " + descriptions[i].pair[1] + ") has no tokens");
    points.push_back(v.to_dense(mined.tfidf.dim()));
  }
  mined.clusters = kmeans_fit(points, k, seed, max_iters, tol);
  mined.cluster_labels = label_clusters(mined.clusters, descriptions, lexicon);
  for (const auto& d : descriptions) {
    mined.compounds.push_back(sentiment_compound(d.text, lexicon));
    mined.vote_labels.push_back(label_from_compound(mined.compounds.back()));
  }
  mined.table = build_relation_table(descriptions, mined.clusters, mined.cluster_labels);
  return mined;
}

// Per-cluster member listing with sentiment votes and the final cluster
// label, tab-separated.
inline void write_cluster_report(const MinedRelations& mined,
                                 const std::vector<RelationDescription>& descriptions,
                                 std::ostream& out) {
  out << "cluster\tpair_a\tpair_b\tcompound\tvote\tcluster_label\tdescription\n";
  char buf[64];
  for (int c = 0; c < mined.clusters.k; ++c) {
    for (std::size_t i = 0; i < descriptions.size(); ++i) {
      if (mined.clusters.assignments[i] != c) continue;
      std::snprintf(buf, sizeof buf, "%.4f", mined.compounds[i]);
      out << c << '\t' << descriptions[i].pair[0] << '\t' << descriptions[i].pair[1] << '\t' << buf
          << '\t' << to_string(mined.vote_labels[i]) << '\t'
          << to_string(mined.cluster_labels[static_cast<std::size_t>(c)]) << '\t'
          << descriptions[i].text << '\n';
    }
  }
}

inline void write_relation_table(const RelationTable& table, std::ostream& out) {
  out << "a\tb\tlabel\n";
  for (const auto& [pair, label] : table.labels)
    out << pair.first << '\t' << pair.second << '\t' << to_string(label) << '\n';
}

inline RelationTable read_relation_table(std::istream& in) {
  RelationTable table;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (trim_copy(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::istringstream ss(line);
    std::string a, b, label;
    if (!std::getline(ss, a, '\t') || !std::getline(ss, b, '\t') || !std::getline(ss, label))
      throw std::runtime_error("bad relation table row: " + line);
    table.labels[{a, b}] = relation_label_from_string(trim_copy(label));
  }
  return table;
}

}  // namespace storylab
