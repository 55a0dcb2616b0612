#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "storylab/text.hpp"

namespace storylab {

enum class ColumnKind { text, number, percent };

struct ResultColumn {
  std::string name;
  ColumnKind kind = ColumnKind::text;
};

struct ResultCell {
  std::string text;
  double value = 0.0;
};

inline ResultCell text_cell(std::string s) { return ResultCell{std::move(s), 0.0}; }
inline ResultCell value_cell(double v) { return ResultCell{{}, v}; }

struct ResultTable {
  std::vector<ResultColumn> columns;
  std::vector<std::vector<ResultCell>> rows;

  void add_row(std::vector<ResultCell> cells) {
    if (cells.size() != columns.size())
      throw std::runtime_error("result table: row width mismatch");
    rows.push_back(std::move(cells));
  }
};

enum class ReportFormat { tsv, markdown };

namespace report_detail {

// Percent metrics print as 1-decimal percentages; full precision goes to the
// machine-readable twin file.
inline std::string human_cell(const ResultColumn& col, const ResultCell& cell) {
  switch (col.kind) {
    case ColumnKind::text: return cell.text;
    case ColumnKind::number: return format_double(cell.value);
    case ColumnKind::percent: return format_fixed(cell.value * 100.0, 1);
  }
  throw std::logic_error("bad ColumnKind");
}

inline std::string machine_cell(const ResultColumn& col, const ResultCell& cell) {
  return col.kind == ColumnKind::text ? cell.text : format_double(cell.value);
}

template <typename CellFn>
void write_tsv(const ResultTable& table, std::ostream& out, CellFn&& cell_fn) {
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << table.columns[c].name << (c + 1 < table.columns.size() ? '\t' : '\n');
  for (const auto& row : table.rows)
    for (std::size_t c = 0; c < row.size(); ++c)
      out << cell_fn(table.columns[c], row[c]) << (c + 1 < row.size() ? '\t' : '\n');
}

inline void write_markdown(const ResultTable& table, std::ostream& out) {
  out << '|';
  for (const auto& col : table.columns) out << ' ' << col.name << " |";
  out << "\n|";
  for (const auto& col : table.columns)
    out << (col.kind == ColumnKind::text ? " --- |" : " ---: |");
  out << '\n';
  for (const auto& row : table.rows) {
    out << '|';
    for (std::size_t c = 0; c < row.size(); ++c)
      out << ' ' << human_cell(table.columns[c], row[c]) << " |";
    out << '\n';
  }
}

}  // namespace report_detail

// Writes the human-readable report to `path` and a full-precision twin to
// `path + ".full.tsv"`. Output is byte-deterministic for identical tables.
inline void emit_report(const ResultTable& table, const std::string& path, ReportFormat format) {
  if (table.rows.empty() || table.columns.empty())
    throw std::runtime_error("emit_report: empty result table");

  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_report: cannot write " + path);
  if (format == ReportFormat::tsv)
    report_detail::write_tsv(table, out, report_detail::human_cell);
  else
    report_detail::write_markdown(table, out);
  if (!out.flush()) throw std::runtime_error("emit_report: write failed: " + path);

  const std::string machine_path = path + ".full.tsv";
  std::ofstream machine(machine_path);
  if (!machine) throw std::runtime_error("emit_report: cannot write " + machine_path);
  report_detail::write_tsv(table, machine, report_detail::machine_cell);
  if (!machine.flush()) throw std::runtime_error("emit_report: write failed: " + machine_path);
}

// Parses a pipe table back into trimmed cell strings (header first, separator
// row dropped); used to verify the markdown output round-trips.
inline std::vector<std::vector<std::string>> parse_markdown_table(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() != '|') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream parts(line.substr(1));
    while (std::getline(parts, cell, '|')) cells.push_back(trim_copy(cell));
    if (!cells.empty() && cells.back().empty()) cells.pop_back();
    const bool separator =
        !cells.empty() && cells.front().find_first_not_of("-: ") == std::string::npos;
    if (!separator) rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw std::runtime_error("parse_markdown_table: no table found");
  return rows;
}

}  // namespace storylab
