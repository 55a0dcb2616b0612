#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "storylab/corpus.hpp"
#include "storylab/synthetic.hpp"

using namespace storylab;

namespace {

const std::string kFixtureDir = std::string(STORYLAB_SOURCE_DIR) + "/fixtures";

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& contents) {
    path = (std::filesystem::temp_directory_path() /
            ("storylab_test_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + ".jsonl"))
               .string();
    std::ofstream out(path, std::ios::binary);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("load_corpus reads the bundled dialogue fixture") {
  const Corpus corpus = load_corpus(kFixtureDir + "/table1/corpus.jsonl");
  REQUIRE(corpus.chunks.size() == 3);
  CHECK(corpus.num_characters() == 9);
  // Registry is first-appearance order over turn speakers.
  CHECK(corpus.registry_names.front() == "Scanlan");
  CHECK(corpus.registry_names.back() == "Trinket");
  for (const auto& chunk : corpus.chunks) {
    REQUIRE(!chunk.turns.empty());
    std::set<std::string> speakers;
    for (const auto& t : chunk.turns) speakers.insert(t.speaker);
    CHECK(std::vector<std::string>(speakers.begin(), speakers.end()) ==
          chunk.characters_present);
  }
}

TEST_CASE("corpus stats match hand counts on the dialogue fixture") {
  const Corpus corpus = load_corpus(kFixtureDir + "/table1/corpus.jsonl");
  const CorpusStats stats = corpus_stats(corpus);
  CHECK(stats.num_chunks == 3);
  CHECK(stats.avg_turns_per_chunk == Catch::Approx(6.0));       // 18 turns total
  CHECK(stats.avg_characters_per_chunk == Catch::Approx(3.0));  // 3 + 4 + 2
  // avg * count recovers the exact total.
  CHECK(stats.avg_turns_per_chunk * static_cast<double>(stats.num_chunks) == 18.0);
}

TEST_CASE("corpus stats of a single chunk are that chunk's counts") {
  Corpus corpus;
  DialogueChunk chunk;
  chunk.chunk_id = "c";
  chunk.episode_id = "e";
  chunk.summary = "two speakers";
  for (int i = 0; i < 5; ++i)
    chunk.turns.push_back({i % 2 ? "Bo" : "Al", "words here .", TurnKind::dialogue});
  chunk.characters_present = {"Al", "Bo"};
  corpus.chunks.push_back(chunk);
  corpus.rebuild_registry();
  const CorpusStats stats = corpus_stats(corpus);
  CHECK(stats.num_chunks == 1);
  CHECK(stats.avg_turns_per_chunk == 5.0);
  CHECK(stats.avg_characters_per_chunk == 2.0);
  CHECK_THROWS(corpus_stats(Corpus{}));
}

TEST_CASE("save then load re-produces the corpus byte for byte") {
  const Corpus corpus = load_corpus(kFixtureDir + "/table1/corpus.jsonl");
  TempFile copy("");
  save_corpus(corpus, copy.path);
  CHECK(slurp(copy.path) == slurp(kFixtureDir + "/table1/corpus.jsonl"));
  const Corpus reloaded = load_corpus(copy.path);
  REQUIRE(reloaded.chunks.size() == corpus.chunks.size());
  CHECK(reloaded.registry_names == corpus.registry_names);
}

TEST_CASE("load_corpus rejects malformed input with the offending location") {
  TempFile empty("");
  CHECK_THROWS_WITH(load_corpus(empty.path), Catch::Matchers::ContainsSubstring("empty"));

  TempFile bad_json("{not json\n");
  CHECK_THROWS_WITH(load_corpus(bad_json.path), Catch::Matchers::ContainsSubstring("line 1"));

  TempFile no_turns(
      R"({"chunk_id":"cX","episode_id":"e","summary":"s","turns":[],"characters_present":[]})"
      "\n");
  CHECK_THROWS_WITH(load_corpus(no_turns.path), Catch::Matchers::ContainsSubstring("cX"));

  const std::string one =
      R"({"chunk_id":"dup","episode_id":"e","summary":"s","turns":[{"speaker":"A","text":"hi .","kind":"dialogue"}],"characters_present":["A"]})"
      "\n";
  TempFile duplicated(one + one);
  CHECK_THROWS_WITH(load_corpus(duplicated.path), Catch::Matchers::ContainsSubstring("dup"));

  TempFile bad_kind(
      R"({"chunk_id":"k","episode_id":"e","summary":"s","turns":[{"speaker":"A","text":"hi .","kind":"soliloquy"}],"characters_present":["A"]})"
      "\n");
  CHECK_THROWS_WITH(load_corpus(bad_kind.path), Catch::Matchers::ContainsSubstring("soliloquy"));

  TempFile mismatch(
      R"({"chunk_id":"m","episode_id":"e","summary":"s","turns":[{"speaker":"A","text":"hi .","kind":"dialogue"}],"characters_present":["A","B"]})"
      "\n");
  CHECK_THROWS_WITH(load_corpus(mismatch.path),
                    Catch::Matchers::ContainsSubstring("characters_present"));
}

TEST_CASE("split_corpus partitions whole episodes deterministically") {
  SyntheticParams params;
  params.num_episodes = 10;
  params.chunks_per_episode = 3;
  params.characters = 4;
  params.vocab_size = 40;
  const auto [corpus, descriptions] = generate_synthetic_corpus(5, params);

  const auto parts = split_corpus(corpus, {0.8, 0.1, 0.1}, 7);
  std::set<std::string> train_eps, val_eps, test_eps;
  for (const auto& c : parts[0].chunks) train_eps.insert(c.episode_id);
  for (const auto& c : parts[1].chunks) val_eps.insert(c.episode_id);
  for (const auto& c : parts[2].chunks) test_eps.insert(c.episode_id);
  CHECK(train_eps.size() == 8);
  CHECK(val_eps.size() == 1);
  CHECK(test_eps.size() == 1);

  // No episode straddles splits, and the chunk ids are a perfect partition.
  std::set<std::string> all_ids;
  std::size_t total = 0;
  for (const auto& part : parts) {
    for (const auto& c : part.chunks) {
      all_ids.insert(c.chunk_id);
      ++total;
    }
  }
  CHECK(total == corpus.chunks.size());
  CHECK(all_ids.size() == corpus.chunks.size());
  for (const auto& ep : train_eps) {
    CHECK(val_eps.count(ep) == 0);
    CHECK(test_eps.count(ep) == 0);
  }

  // Same seed reproduces the same split; all-train ratios keep everything.
  const auto again = split_corpus(corpus, {0.8, 0.1, 0.1}, 7);
  for (int p = 0; p < 3; ++p) {
    REQUIRE(again[p].chunks.size() == parts[p].chunks.size());
    for (std::size_t i = 0; i < again[p].chunks.size(); ++i)
      CHECK(again[p].chunks[i].chunk_id == parts[p].chunks[i].chunk_id);
  }
  const auto all_train = split_corpus(corpus, {1.0, 0.0, 0.0}, 7);
  CHECK(all_train[0].chunks.size() == corpus.chunks.size());
  CHECK(all_train[1].chunks.empty());
  CHECK(all_train[2].chunks.empty());

  CHECK_THROWS(split_corpus(corpus, {0.5, 0.3, 0.3}, 7));  // ratios must sum to 1
}

TEST_CASE("split_corpus needs at least one episode per requested part") {
  SyntheticParams params;
  params.num_episodes = 2;
  params.chunks_per_episode = 2;
  params.characters = 2;
  params.vocab_size = 20;
  const auto [corpus, descriptions] = generate_synthetic_corpus(1, params);
  CHECK_THROWS(split_corpus(corpus, {0.4, 0.3, 0.3}, 1));
}

TEST_CASE("synthetic generator is deterministic and seed-sensitive") {
  SyntheticParams params;
  params.num_episodes = 3;
  params.chunks_per_episode = 2;
  params.characters = 4;
  params.vocab_size = 40;

  const auto [c1, d1] = generate_synthetic_corpus(11, params);
  const auto [c2, d2] = generate_synthetic_corpus(11, params);
  TempFile f1(""), f2("");
  save_corpus(c1, f1.path);
  save_corpus(c2, f2.path);
  CHECK(slurp(f1.path) == slurp(f2.path));
  REQUIRE(d1.size() == d2.size());
  for (std::size_t i = 0; i < d1.size(); ++i) CHECK(d1[i].text == d2[i].text);

  // Different seeds give different corpora (checked across 5 seeds).
  std::set<std::string> serialized;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto [c, d] = generate_synthetic_corpus(seed, params);
    TempFile f("");
    save_corpus(c, f.path);
    serialized.insert(slurp(f.path));
  }
  CHECK(serialized.size() == 5);
}

TEST_CASE("synthetic generator covers every character pair exactly once") {
  SyntheticParams params;
  params.num_episodes = 2;
  params.chunks_per_episode = 2;
  params.characters = 4;
  params.vocab_size = 30;
  const auto [corpus, descriptions] = generate_synthetic_corpus(1, params);
  CHECK(descriptions.size() == 6);  // C(4,2)
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& d : descriptions) {
    CHECK(d.pair[0] < d.pair[1]);
    pairs.insert({d.pair[0], d.pair[1]});
    CHECK(!d.text.empty());
  }
  CHECK(pairs.size() == 6);
}

TEST_CASE("synthetic generator obeys the requested shape") {
  SyntheticParams params;
  params.num_episodes = 20;
  params.chunks_per_episode = 5;
  params.characters = 6;
  params.vocab_size = 60;
  const auto [corpus, descriptions] = generate_synthetic_corpus(9, params);
  CHECK(corpus.chunks.size() == 100);
  CHECK(corpus.num_characters() == 6);
  for (const auto& chunk : corpus.chunks) {
    CHECK(static_cast<int>(chunk.turns.size()) >= params.min_turns);
    CHECK(static_cast<int>(chunk.turns.size()) <= params.max_turns);
  }

  SyntheticParams bad = params;
  bad.characters = 1;
  CHECK_THROWS(generate_synthetic_corpus(1, bad));
  bad = params;
  bad.num_episodes = 0;
  CHECK_THROWS(generate_synthetic_corpus(1, bad));
  bad = params;
  bad.max_turns = bad.min_turns - 1;
  CHECK_THROWS(generate_synthetic_corpus(1, bad));
}
