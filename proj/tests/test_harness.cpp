#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "storylab/harness.hpp"
#include "storylab/synthetic.hpp"

using namespace storylab;

namespace {

// Shared across the harness tests: a small world plus a one-epoch config so
// each ablation cell trains in about a second.
struct World {
  Corpus train, val, test;
  Vocab vocab;
  RelationTable table;
  FullConfig cfg;
};

const World& world() {
  static const World w = [] {
    World out;
    SyntheticParams params;
    params.num_episodes = 5;
    params.chunks_per_episode = 2;
    params.characters = 4;
    params.vocab_size = 40;
    params.min_turns = 6;
    params.max_turns = 8;
    auto [corpus, descriptions] = generate_synthetic_corpus(17, params);
    (void)descriptions;
    auto splits = split_corpus(corpus, SplitRatios{0.6, 0.2, 0.2}, 3);
    out.train = std::move(splits[0]);
    out.val = std::move(splits[1]);
    out.test = std::move(splits[2]);
    out.vocab = build_vocab(out.train, 1);

    out.cfg.encoder = EncoderConfig::toy();
    out.cfg.encoder.max_seq_len = 64;
    out.cfg.context.n_last_turns = 3;
    out.cfg.context.n_history_chunks = 1;
    out.cfg.training.epochs = 1;
    out.cfg.training.batch_size = 8;
    out.cfg.training.learning_rate = 1e-3;
    out.cfg.training.warmup_steps = 2;
    out.cfg.training.lr_decay = 1.0;
    out.cfg.training.seed = 19;
    out.cfg.eval.num_candidates = 5;
    out.cfg.eval.hits_levels = {1};
    out.cfg.eval.seed = 4;
    return out;
  }();
  return w;
}

std::string render_tsv(const ResultTable& table) {
  std::ostringstream out;
  report_detail::write_tsv(table, out, report_detail::machine_cell);
  return out.str();
}

}  // namespace

TEST_CASE("input variants toggle exactly the summary and relation channels") {
  ContextConfig base;
  base.n_last_turns = 4;

  const auto plain = apply_input_variant(base, "base");
  CHECK_FALSE(plain.include_summary);
  CHECK_FALSE(plain.include_relations);
  CHECK(plain.n_last_turns == 4);

  const auto with_summary = apply_input_variant(base, "base+summary");
  CHECK(with_summary.include_summary);
  CHECK_FALSE(with_summary.include_relations);

  const auto with_relations = apply_input_variant(base, "base+relations");
  CHECK_FALSE(with_relations.include_summary);
  CHECK(with_relations.include_relations);

  const auto both = apply_input_variant(base, "base+summary+relations");
  CHECK(both.include_summary);
  CHECK(both.include_relations);

  CHECK_THROWS(apply_input_variant(base, "base+everything"));
  AblationGrid empty_grid;
  empty_grid.training_modes.clear();
  CHECK_THROWS(empty_grid.validate());
}

TEST_CASE("history ablation emits one row per requested length") {
  const World& w = world();
  const std::vector<int> lengths = {1, 2, 5, 10};
  const auto table =
      run_history_ablation(w.train, w.val, w.test, w.vocab, w.table, lengths, w.cfg);

  REQUIRE(table.columns.size() == 3);
  CHECK(table.columns[0].name == "history_chunks");
  CHECK(table.columns[1].name == "weighted_f1");
  CHECK(table.columns[2].name == "hits@1/10");
  REQUIRE(table.rows.size() == lengths.size());
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    CHECK(table.rows[i][0].value == static_cast<double>(lengths[i]));
    CHECK(table.rows[i][1].value >= 0.0);
    CHECK(table.rows[i][1].value <= 1.0);
    CHECK(table.rows[i][2].value >= 0.0);
    CHECK(table.rows[i][2].value <= 1.0);
  }
  CHECK_THROWS(run_history_ablation(w.train, w.val, w.test, w.vocab, w.table, {}, w.cfg));
}

TEST_CASE("multitask ablation covers the full variant-by-mode grid") {
  const World& w = world();
  const AblationGrid grid;
  const auto table = run_multitask_ablation(w.train, w.val, w.test, w.vocab, w.table, grid, w.cfg);

  REQUIRE(table.columns.size() == 5);
  CHECK(table.columns[0].name == "input");
  CHECK(table.columns[1].name == "training");
  REQUIRE(table.rows.size() == 8);  // 4 input variants x 2 training modes

  std::size_t row = 0;
  for (const auto& variant : grid.input_variants) {
    for (const auto& mode : grid.training_modes) {
      CHECK(table.rows[row][0].text == variant);
      CHECK(table.rows[row][1].text == mode);
      for (std::size_t c = 2; c < 5; ++c) {
        CHECK(table.rows[row][c].value >= 0.0);
        CHECK(table.rows[row][c].value <= 1.0);
      }
      ++row;
    }
  }

  AblationGrid bad;
  bad.training_modes = {"adversarial"};
  CHECK_THROWS(run_multitask_ablation(w.train, w.val, w.test, w.vocab, w.table, bad, w.cfg));
}

TEST_CASE("metrics logs re-render as per-epoch report tables") {
  std::vector<EpochMetrics> log(3);
  for (int i = 0; i < 3; ++i) {
    log[static_cast<std::size_t>(i)].epoch = i + 1;
    log[static_cast<std::size_t>(i)].l_total = 2.0 - 0.5 * i;
    log[static_cast<std::size_t>(i)].val_hits1 = 0.1 * (i + 1);
  }
  const auto table = metrics_log_table(log);
  REQUIRE(table.columns.size() == 7);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0][0].value == 1.0);
  CHECK(table.rows[2][3].value == 1.0);
  CHECK(table.rows[1][4].value == Catch::Approx(0.2));

  // Rendering the same log twice gives identical bytes.
  CHECK(render_tsv(table) == render_tsv(metrics_log_table(log)));
}
