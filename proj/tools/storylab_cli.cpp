// Command-line front end: corpus plumbing, relation mining, training,
// evaluation, ablation grids, gradient checking, and report regeneration.

#include <CLI11.hpp>

#include <filesystem>
#include <set>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "storylab/storylab.hpp"

namespace fs = std::filesystem;
using namespace storylab;

namespace {

std::string opt_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
}

RelationTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open relation table: " + path);
  return read_relation_table(in);
}

void print_stats(const Corpus& corpus) {
  const auto stats = corpus_stats(corpus);
  std::set<std::string> episodes;
  for (const auto& c : corpus.chunks) episodes.insert(c.episode_id);
  std::cout << "chunks\t" << stats.num_chunks << "\n"
            << "episodes\t" << episodes.size() << "\n"
            << "characters\t" << corpus.registry_names.size() << "\n"
            << "avg_turns_per_chunk\t" << format_double(stats.avg_turns_per_chunk) << "\n"
            << "avg_characters_per_chunk\t" << format_double(stats.avg_characters_per_chunk)
            << "\n";
}

// Every experiment writes the configuration it actually ran with.
void write_provenance(const FullConfig& cfg, const std::string& out_dir) {
  write_resolved_config(cfg, opt_path(out_dir, "resolved.cfg"));
}

struct ConfigCliOptions {
  std::string config_path;
};

// Mirrors every config key as a CLI flag; flags override file values.
void attach_config_flags(CLI::App* cmd, FullConfig& cfg, ConfigCliOptions& opts) {
  cmd->add_option("--config", opts.config_path, "flat key=value config file");

  auto defer = [cmd, &cfg](const std::string& flag, const std::string& key,
                           const std::string& help) {
    cmd->add_option_function<std::string>(
           flag,
           [&cfg, key](const std::string& value) { apply_config_entry(cfg, key, value); }, help)
        ->type_name(key);
  };
  defer("--num-layers", "num_layers", "encoder layers");
  defer("--num-heads", "num_heads", "attention heads");
  defer("--embed-dim", "embed_dim", "embedding width");
  defer("--ffn-dim", "ffn_dim", "feed-forward width");
  defer("--max-seq-len", "max_seq_len", "maximum sequence length");
  defer("--dropout", "dropout", "embedding/output dropout rate");
  defer("--attention-dropout", "attention_dropout", "attention probability dropout rate");
  defer("--n-last-turns", "n_last_turns", "dialogue turns of context");
  defer("--n-history-chunks", "n_history_chunks", "prior chunk summaries in context");
  defer("--include-summary", "include_summary", "include prior summaries (true/false)");
  defer("--include-relations", "include_relations", "include relation clauses (true/false)");
  defer("--lambda-rank", "lambda_rank", "ranking loss weight");
  defer("--lambda-cls", "lambda_cls", "classification loss weight");
  defer("--learning-rate", "learning_rate", "peak learning rate");
  defer("--warmup-steps", "warmup_steps", "linear warmup steps");
  defer("--lr-decay", "lr_decay", "plateau decay factor");
  defer("--epochs", "epochs", "training epochs");
  defer("--batch-size", "batch_size", "batch size (also candidate count in-batch)");
  defer("--seed", "seed", "training seed");
  defer("--tie-encoders", "tie_encoders", "share tower weights (true/false)");
  defer("--hits-levels", "hits_levels", "comma-separated Hits@N levels");
  defer("--num-candidates", "num_candidates", "evaluation candidate count");
  defer("--eval-seed", "eval_seed", "candidate sampling seed");
  defer("--min-freq", "min_freq", "vocabulary frequency threshold");
}

// The config file must be loaded before flag callbacks run, so --config is
// read straight from argv up front.
std::string peek_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return {};
}

struct SplitPaths {
  std::string train, val, test;
};

struct TrainIo {
  SplitPaths splits;
  std::string relations_path;
  std::string out_dir = "out";
};

void attach_split_options(CLI::App* cmd, SplitPaths& paths, bool need_test) {
  cmd->add_option("--train", paths.train, "training split (jsonl)")->required();
  cmd->add_option("--val", paths.val, "validation split (jsonl)")->required();
  auto* t = cmd->add_option("--test", paths.test, "test split (jsonl)");
  if (need_test) t->required();
}

// Token statistics come from the training split alone; the speaker registry
// is the union cast across the run's splits, since evaluation chunks can
// voice characters the training chunks never do.
Vocab vocab_for_training(const Corpus& train_corpus, int min_freq,
                         std::initializer_list<const Corpus*> eval_corpora) {
  std::vector<std::string> extra;
  for (const Corpus* c : eval_corpora)
    extra.insert(extra.end(), c->registry_names.begin(), c->registry_names.end());
  return build_vocab(train_corpus, min_freq, extra);
}

int run_train(const TrainIo& io, const FullConfig& cfg) {
  const Corpus train_corpus = load_corpus(io.splits.train);
  const Corpus val_corpus = load_corpus(io.splits.val);
  const RelationTable table = load_table(io.relations_path);
  const Vocab vocab = vocab_for_training(train_corpus, cfg.min_freq, {&val_corpus});

  const TrainResult result = train_with(train_corpus, val_corpus, vocab, table, cfg);

  ensure_dir(io.out_dir);
  {
    std::ofstream log(opt_path(io.out_dir, "metrics.tsv"));
    if (!log) throw std::runtime_error("cannot write metrics log");
    write_metrics_log(result.log, log);
  }
  save_checkpoint(result.model, vocab, table, opt_path(io.out_dir, "checkpoint.bin"));
  write_provenance(cfg, io.out_dir);

  const auto& last = result.log.back();
  std::cout << "trained " << cfg.training.epochs << " epochs; final l_total "
            << format_double(last.l_total) << ", val hits@1 " << format_double(last.val_hits1)
            << ", val f1 " << format_double(last.val_f1) << "\n"
            << "wrote " << opt_path(io.out_dir, "checkpoint.bin") << "\n";
  return 0;
}

int run_evaluate(const std::string& checkpoint_path, const std::string& corpus_path,
                 FullConfig cfg, const std::string& out_dir) {
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  const Corpus corpus = load_corpus(corpus_path);
  const auto eval = evaluate_on_corpus(ck.model, corpus, ck.vocab, ck.table, cfg.eval);

  ResultTable table;
  table.columns = {{"metric", ColumnKind::text}, {"value", ColumnKind::percent}};
  for (const auto& [n, rate] : eval.hits)
    table.add_row({text_cell("hits@" + std::to_string(n) + "/" +
                             std::to_string(cfg.eval.num_candidates)),
                   value_cell(rate)});
  table.add_row({text_cell("weighted_f1"), value_cell(eval.f1)});

  ensure_dir(out_dir);
  emit_report(table, opt_path(out_dir, "eval.tsv"), ReportFormat::tsv);
  emit_report(table, opt_path(out_dir, "eval.md"), ReportFormat::markdown);
  write_provenance(cfg, out_dir);

  for (const auto& [n, rate] : eval.hits)
    std::cout << "hits@" << n << "/" << cfg.eval.num_candidates << "\t" << format_double(rate)
              << "\n";
  std::cout << "weighted_f1\t" << format_double(eval.f1) << "\n"
            << "examples\t" << eval.num_examples << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"character-driven story continuation laboratory"};
  app.require_subcommand(1);

  FullConfig cfg;
  const std::string config_path = peek_config_path(argc, argv);
  if (!config_path.empty()) cfg = load_config_file(config_path);
  ConfigCliOptions config_opts;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate a corpus file and rewrite it canonically");
  std::string in_path, out_path;
  ingest->add_option("--input", in_path, "corpus jsonl")->required();
  ingest->add_option("--output", out_path, "canonical jsonl destination")->required();
  ingest->callback([&]() {
    const Corpus corpus = load_corpus(in_path);
    save_corpus(corpus, out_path);
    print_stats(corpus);
  });

  // stats
  auto* stats = app.add_subcommand("stats", "print corpus statistics");
  std::string stats_path;
  stats->add_option("--input", stats_path, "corpus jsonl")->required();
  stats->callback([&]() { print_stats(load_corpus(stats_path)); });

  // split
  auto* split = app.add_subcommand("split", "episode-level train/val/test split");
  std::string split_in, split_dir;
  SplitRatios ratios;
  std::uint64_t split_seed = 0;
  split->add_option("--input", split_in, "corpus jsonl")->required();
  split->add_option("--output-dir", split_dir, "destination directory")->required();
  split->add_option("--train-ratio", ratios.train, "train fraction");
  split->add_option("--val-ratio", ratios.valid, "validation fraction");
  split->add_option("--test-ratio", ratios.test, "test fraction");
  split->add_option("--seed", split_seed, "shuffle seed");
  split->callback([&]() {
    const Corpus corpus = load_corpus(split_in);
    const auto parts = split_corpus(corpus, ratios, split_seed);
    ensure_dir(split_dir);
    const char* names[3] = {"train.jsonl", "val.jsonl", "test.jsonl"};
    for (int i = 0; i < 3; ++i) {
      save_corpus(parts[static_cast<std::size_t>(i)], opt_path(split_dir, names[i]));
      std::cout << names[i] << "\t" << parts[static_cast<std::size_t>(i)].chunks.size()
                << " chunks\n";
    }
  });

  // synth
  auto* synth = app.add_subcommand("synth", "generate the synthetic fixture corpus");
  std::string synth_dir;
  SyntheticParams synth_params;
  std::uint64_t synth_seed = 0;
  synth->add_option("--output-dir", synth_dir, "destination directory")->required();
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--episodes", synth_params.num_episodes, "number of episodes");
  synth->add_option("--chunks-per-episode", synth_params.chunks_per_episode, "chunks per episode");
  synth->add_option("--characters", synth_params.characters, "character count");
  synth->add_option("--vocab-size", synth_params.vocab_size, "content word count");
  synth->add_option("--min-turns", synth_params.min_turns, "minimum turns per chunk");
  synth->add_option("--max-turns", synth_params.max_turns, "maximum turns per chunk");
  synth->callback([&]() {
    const auto [corpus, descriptions] = generate_synthetic_corpus(synth_seed, synth_params);
    ensure_dir(synth_dir);
    save_corpus(corpus, opt_path(synth_dir, "corpus.jsonl"));
    save_relation_descriptions(descriptions, opt_path(synth_dir, "relations.jsonl"));
    print_stats(corpus);
  });

  // mine-relations
  auto* mine = app.add_subcommand("mine-relations",
                                  "cluster relation descriptions and label them by sentiment");
  std::string mine_desc, mine_lexicon, mine_table_path, mine_report_path;
  int mine_k = 3;
  std::uint64_t mine_seed = 0;
  mine->add_option("--descriptions", mine_desc, "relation descriptions jsonl")->required();
  mine->add_option("--lexicon", mine_lexicon, "sentiment lexicon tsv")->required();
  mine->add_option("--output-table", mine_table_path, "relation table tsv destination")->required();
  mine->add_option("--report", mine_report_path, "cluster report tsv destination");
  mine->add_option("--k", mine_k, "cluster count");
  mine->add_option("--seed", mine_seed, "clustering seed");
  mine->callback([&]() {
    const auto descriptions = load_relation_descriptions(mine_desc);
    const auto lexicon = load_lexicon(mine_lexicon);
    const auto mined = mine_relations(descriptions, lexicon, mine_k, mine_seed);
    {
      std::ofstream out(mine_table_path);
      if (!out) throw std::runtime_error("cannot write " + mine_table_path);
      write_relation_table(mined.table, out);
    }
    if (!mine_report_path.empty()) {
      std::ofstream out(mine_report_path);
      if (!out) throw std::runtime_error("cannot write " + mine_report_path);
      write_cluster_report(mined, descriptions, out);
    }
    for (int c = 0; c < mined.clusters.k; ++c)
      std::cout << "cluster " << c << " -> "
                << to_string(mined.cluster_labels[static_cast<std::size_t>(c)]) << "\n";
    std::cout << "pairs labeled\t" << mined.table.labels.size() << "\n";
  });

  // build-vocab
  auto* bv = app.add_subcommand("build-vocab", "construct the token table from a corpus");
  std::string bv_in, bv_out;
  bv->add_option("--input", bv_in, "corpus jsonl")->required();
  bv->add_option("--output", bv_out, "vocab tsv destination")->required();
  attach_config_flags(bv, cfg, config_opts);
  bv->callback([&]() {
    const Corpus corpus = load_corpus(bv_in);
    const Vocab vocab = build_vocab(corpus, cfg.min_freq);
    std::ofstream out(bv_out);
    if (!out) throw std::runtime_error("cannot write " + bv_out);
    save_vocab(vocab, out);
    std::cout << "vocab size\t" << vocab.size() << "\n";
  });

  // train
  auto* train_cmd = app.add_subcommand("train", "train the bi-encoder with both task heads");
  TrainIo train_io;
  attach_split_options(train_cmd, train_io.splits, false);
  train_cmd->add_option("--relations", train_io.relations_path, "relation table tsv")->required();
  train_cmd->add_option("--out-dir", train_io.out_dir, "output directory");
  attach_config_flags(train_cmd, cfg, config_opts);
  train_cmd->callback([&]() { run_train(train_io, cfg); });

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint on a corpus split");
  std::string eval_ckpt, eval_corpus, eval_dir = "out";
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--corpus", eval_corpus, "evaluation split jsonl")->required();
  eval_cmd->add_option("--out-dir", eval_dir, "output directory");
  attach_config_flags(eval_cmd, cfg, config_opts);
  eval_cmd->callback([&]() { run_evaluate(eval_ckpt, eval_corpus, cfg, eval_dir); });

  // ablate-history
  auto* ah = app.add_subcommand("ablate-history", "history-length ablation grid");
  TrainIo ah_io;
  std::vector<int> ah_lengths{1, 2, 5, 10};
  attach_split_options(ah, ah_io.splits, true);
  ah->add_option("--relations", ah_io.relations_path, "relation table tsv")->required();
  ah->add_option("--lengths", ah_lengths, "history lengths to sweep")->delimiter(',');
  ah->add_option("--out-dir", ah_io.out_dir, "output directory");
  attach_config_flags(ah, cfg, config_opts);
  ah->callback([&]() {
    const Corpus train_corpus = load_corpus(ah_io.splits.train);
    const Corpus val_corpus = load_corpus(ah_io.splits.val);
    const Corpus test_corpus = load_corpus(ah_io.splits.test);
    const RelationTable table = load_table(ah_io.relations_path);
    const Vocab vocab = vocab_for_training(train_corpus, cfg.min_freq, {&val_corpus, &test_corpus});
    const ResultTable result = run_history_ablation(train_corpus, val_corpus, test_corpus, vocab,
                                                    table, ah_lengths, cfg);
    ensure_dir(ah_io.out_dir);
    emit_report(result, opt_path(ah_io.out_dir, "history.tsv"), ReportFormat::tsv);
    emit_report(result, opt_path(ah_io.out_dir, "history.md"), ReportFormat::markdown);
    write_provenance(cfg, ah_io.out_dir);
    std::cout << "wrote " << opt_path(ah_io.out_dir, "history.tsv") << " (" << result.rows.size()
              << " rows)\n";
  });

  // ablate-multitask
  auto* am = app.add_subcommand("ablate-multitask", "input x training-mode ablation grid");
  TrainIo am_io;
  attach_split_options(am, am_io.splits, true);
  am->add_option("--relations", am_io.relations_path, "relation table tsv")->required();
  am->add_option("--out-dir", am_io.out_dir, "output directory");
  attach_config_flags(am, cfg, config_opts);
  am->callback([&]() {
    const Corpus train_corpus = load_corpus(am_io.splits.train);
    const Corpus val_corpus = load_corpus(am_io.splits.val);
    const Corpus test_corpus = load_corpus(am_io.splits.test);
    const RelationTable table = load_table(am_io.relations_path);
    const Vocab vocab = vocab_for_training(train_corpus, cfg.min_freq, {&val_corpus, &test_corpus});
    const ResultTable result = run_multitask_ablation(train_corpus, val_corpus, test_corpus, vocab,
                                                      table, AblationGrid{}, cfg);
    ensure_dir(am_io.out_dir);
    emit_report(result, opt_path(am_io.out_dir, "multitask.tsv"), ReportFormat::tsv);
    emit_report(result, opt_path(am_io.out_dir, "multitask.md"), ReportFormat::markdown);
    write_provenance(cfg, am_io.out_dir);
    std::cout << "wrote " << opt_path(am_io.out_dir, "multitask.tsv") << " (" << result.rows.size()
              << " rows)\n";
  });

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of the backward pass");
  double gc_eps = 1e-4;
  std::size_t gc_samples = 200;
  std::uint64_t gc_seed = 7;
  gc->add_option("--epsilon", gc_eps, "finite-difference step");
  gc->add_option("--samples", gc_samples, "minimum sampled parameters");
  gc->add_option("--seed", gc_seed, "scenario seed");
  gc->callback([&]() {
    const auto toy = EncoderConfig::toy();
    bool ok = true;
    for (const auto& [l1, l2, name] :
         {std::tuple<double, double, const char*>{1.0, 0.0, "l_rank"},
          {0.0, 1.0, "l_cls"},
          {0.5, 0.5, "joint"}}) {
      const auto r = grad_check(toy, l1, l2, gc_eps, gc_samples, gc_seed);
      std::cout << name << "\tchecked=" << r.checked
                << "\tmax_rel_error=" << format_double(r.max_rel_error) << "\n";
      ok = ok && r.max_rel_error < 1e-4;
    }
    if (!ok) throw std::runtime_error("gradient check exceeded 1e-4");
  });

  // report
  auto* rp = app.add_subcommand("report", "re-render a metrics log as tsv + markdown tables");
  std::string rp_metrics, rp_dir = "out";
  rp->add_option("--metrics", rp_metrics, "metrics log tsv")->required();
  rp->add_option("--out-dir", rp_dir, "output directory");
  rp->callback([&]() {
    std::ifstream in(rp_metrics);
    if (!in) throw std::runtime_error("cannot open metrics log: " + rp_metrics);
    const auto log = read_metrics_log(in);
    const ResultTable table = metrics_log_table(log);
    ensure_dir(rp_dir);
    emit_report(table, opt_path(rp_dir, "training.tsv"), ReportFormat::tsv);
    emit_report(table, opt_path(rp_dir, "training.md"), ReportFormat::markdown);
    std::cout << "wrote " << opt_path(rp_dir, "training.tsv") << " (" << table.rows.size()
              << " rows)\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
