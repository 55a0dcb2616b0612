#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "storylab/config_file.hpp"
#include "storylab/multitask.hpp"
#include "storylab/report.hpp"

namespace storylab {

struct AblationGrid {
  std::vector<std::string> input_variants{"base", "base+summary", "base+relations",
                                          "base+summary+relations"};
  std::vector<std::string> training_modes{"single", "multi"};
  std::vector<int> history_lengths{1, 2, 5, 10};

  void validate() const {
    if (input_variants.empty() || training_modes.empty() || history_lengths.empty())
      throw std::runtime_error("ablation grid: empty selection");
  }
};

// Input variants toggle what assemble_context may use beyond the last turns.
inline ContextConfig apply_input_variant(ContextConfig cfg, const std::string& variant) {
  if (variant == "base") {
    cfg.include_summary = false;
    cfg.include_relations = false;
  } else if (variant == "base+summary") {
    cfg.include_summary = true;
    cfg.include_relations = false;
  } else if (variant == "base+relations") {
    cfg.include_summary = false;
    cfg.include_relations = true;
  } else if (variant == "base+summary+relations") {
    cfg.include_summary = true;
    cfg.include_relations = true;
  } else {
    throw std::runtime_error("unknown input variant: " + variant);
  }
  return cfg;
}

inline TrainResult train_with(const Corpus& train_corpus, const Corpus& val_corpus,
                              const Vocab& vocab, const RelationTable& table,
                              const FullConfig& cfg) {
  return train_model(train_corpus, val_corpus, vocab, table, cfg.context, cfg.encoder,
                     cfg.training, cfg.eval);
}

inline EvaluationResult evaluate_on_corpus(const MultiTaskModel& model, const Corpus& corpus,
                                           const Vocab& vocab, const RelationTable& table,
                                           const EvalConfig& eval_cfg) {
  const auto examples = build_examples(corpus, table, vocab, model.ctx_cfg,
                                       model.context_tower.config.max_seq_len);
  const auto sets = build_candidate_sets(examples, eval_cfg);
  return evaluate_model(model, examples, sets, eval_cfg.hits_levels);
}

// One row per history length: train with n_history_chunks = length, report
// weighted F1 and Hits@1 on the test split. Summaries are forced on; the
// length is the variable under study.
inline ResultTable run_history_ablation(const Corpus& train_corpus, const Corpus& val_corpus,
                                        const Corpus& test_corpus, const Vocab& vocab,
                                        const RelationTable& table, const std::vector<int>& lengths,
                                        FullConfig base) {
  if (lengths.empty()) throw std::runtime_error("history ablation: no lengths given");
  base.context.include_summary = true;
  base.eval.hits_levels = {1};

  ResultTable out;
  out.columns = {{"history_chunks", ColumnKind::number},
                 {"weighted_f1", ColumnKind::percent},
                 {"hits@1/10", ColumnKind::percent}};
  for (int length : lengths) {
    FullConfig cfg = base;
    cfg.context.n_history_chunks = length;
    cfg.validate();
    const auto trained = train_with(train_corpus, val_corpus, vocab, table, cfg);
    const auto eval = evaluate_on_corpus(trained.model, test_corpus, vocab, table, cfg.eval);
    out.add_row({value_cell(static_cast<double>(length)), value_cell(eval.f1),
                 value_cell(eval.hits.at(1))});
  }
  return out;
}

// One row per (input variant, training mode). Multi-task rows train a single
// model with the configured lambdas. Single-task rows train the ranking-only
// model (lambda_cls = 0) for the Hits columns and the classification-only
// model (lambda_rank = 0) for the F1 column.
inline ResultTable run_multitask_ablation(const Corpus& train_corpus, const Corpus& val_corpus,
                                          const Corpus& test_corpus, const Vocab& vocab,
                                          const RelationTable& table, const AblationGrid& grid,
                                          FullConfig base) {
  grid.validate();
  base.eval.hits_levels = {1, 5};

  ResultTable out;
  out.columns = {{"input", ColumnKind::text},
                 {"training", ColumnKind::text},
                 {"weighted_f1", ColumnKind::percent},
                 {"hits@1/10", ColumnKind::percent},
                 {"hits@5/10", ColumnKind::percent}};

  for (const auto& variant : grid.input_variants) {
    for (const auto& mode : grid.training_modes) {
      FullConfig cfg = base;
      cfg.context = apply_input_variant(base.context, variant);
      double f1 = 0.0, hits1 = 0.0, hits5 = 0.0;
      if (mode == "multi") {
        cfg.validate();
        const auto trained = train_with(train_corpus, val_corpus, vocab, table, cfg);
        const auto eval = evaluate_on_corpus(trained.model, test_corpus, vocab, table, cfg.eval);
        f1 = eval.f1;
        hits1 = eval.hits.at(1);
        hits5 = eval.hits.at(5);
      } else if (mode == "single") {
        FullConfig rank_cfg = cfg;
        rank_cfg.training.lambda_rank = 1.0;
        rank_cfg.training.lambda_cls = 0.0;
        rank_cfg.validate();
        const auto rank_model = train_with(train_corpus, val_corpus, vocab, table, rank_cfg);
        const auto rank_eval =
            evaluate_on_corpus(rank_model.model, test_corpus, vocab, table, rank_cfg.eval);
        hits1 = rank_eval.hits.at(1);
        hits5 = rank_eval.hits.at(5);

        FullConfig cls_cfg = cfg;
        cls_cfg.training.lambda_rank = 0.0;
        cls_cfg.training.lambda_cls = 1.0;
        cls_cfg.validate();
        const auto cls_model = train_with(train_corpus, val_corpus, vocab, table, cls_cfg);
        const auto cls_eval =
            evaluate_on_corpus(cls_model.model, test_corpus, vocab, table, cls_cfg.eval);
        f1 = cls_eval.f1;
      } else {
        throw std::runtime_error("unknown training mode: " + mode);
      }
      out.add_row({text_cell(variant), text_cell(mode), value_cell(f1), value_cell(hits1),
                   value_cell(hits5)});
    }
  }
  return out;
}

// Re-renders a metrics log as a per-epoch report table (losses full
// precision, validation metrics as percentages).
inline ResultTable metrics_log_table(const std::vector<EpochMetrics>& log) {
  ResultTable out;
  out.columns = {{"epoch", ColumnKind::number},     {"l_rank", ColumnKind::number},
                 {"l_cls", ColumnKind::number},     {"l_total", ColumnKind::number},
                 {"val_hits@1/10", ColumnKind::percent}, {"val_f1", ColumnKind::percent},
                 {"lr", ColumnKind::number}};
  for (const auto& e : log)
    out.add_row({value_cell(static_cast<double>(e.epoch)), value_cell(e.l_rank),
                 value_cell(e.l_cls), value_cell(e.l_total), value_cell(e.val_hits1),
                 value_cell(e.val_f1), value_cell(e.lr)});
  return out;
}

}  // namespace storylab
