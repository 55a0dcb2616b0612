#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "storylab/corpus.hpp"
#include "storylab/vocab.hpp"

using namespace storylab;

namespace {

std::string fixture_dir() { return std::string(STORYLAB_SOURCE_DIR) + "/fixtures/synthetic"; }

nlohmann::json load_manifest() {
  std::ifstream in(fixture_dir() + "/manifest.json");
  REQUIRE(in.good());
  return nlohmann::json::parse(in);
}

}  // namespace

// The manifest was produced by an independent Python implementation
// (scripts/make_manifest.py); the library must agree with it on every count.
TEST_CASE("the bundled fixture matches its independently computed manifest") {
  const auto manifest = load_manifest();
  const Corpus corpus = load_corpus(fixture_dir() + "/corpus.jsonl");
  const auto descriptions = load_relation_descriptions(fixture_dir() + "/relations.jsonl");

  const CorpusStats stats = corpus_stats(corpus);
  CHECK(stats.num_chunks == manifest.at("num_chunks").get<std::size_t>());
  CHECK(stats.avg_turns_per_chunk ==
        Catch::Approx(manifest.at("avg_turns_per_chunk").get<double>()).epsilon(1e-12));
  CHECK(stats.avg_characters_per_chunk ==
        Catch::Approx(manifest.at("avg_characters_per_chunk").get<double>()).epsilon(1e-12));

  std::set<std::string> episodes;
  std::size_t total_turns = 0;
  for (const auto& chunk : corpus.chunks) {
    episodes.insert(chunk.episode_id);
    total_turns += chunk.turns.size();
  }
  CHECK(episodes.size() == manifest.at("num_episodes").get<std::size_t>());
  CHECK(total_turns == manifest.at("total_turns").get<std::size_t>());
  CHECK(corpus.registry_names.size() == manifest.at("num_characters").get<std::size_t>());
  CHECK(descriptions.size() == manifest.at("num_relation_descriptions").get<std::size_t>());

  const Vocab vocab = build_vocab(corpus, 2);
  CHECK(vocab.size() == manifest.at("vocab_size_min_freq_2").get<std::size_t>());
}

TEST_CASE("the bundled fixture is large enough for the learnability gate") {
  const Corpus corpus = load_corpus(fixture_dir() + "/corpus.jsonl");
  const auto descriptions = load_relation_descriptions(fixture_dir() + "/relations.jsonl");

  // Enough chunks that a 0.8/0.1/0.1 split leaves ~100 chunks of training
  // dialogue, and a description for every unordered character pair.
  CHECK(corpus.chunks.size() >= 100);
  CHECK(corpus.registry_names.size() == 6);
  const std::size_t pairs =
      corpus.registry_names.size() * (corpus.registry_names.size() - 1) / 2;
  CHECK(descriptions.size() >= pairs);

  std::set<std::pair<std::string, std::string>> covered;
  for (const auto& d : descriptions) covered.insert({d.pair[0], d.pair[1]});
  CHECK(covered.size() == pairs);
}
