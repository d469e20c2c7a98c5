#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "yrisk/csv.hpp"
#include "yrisk/error.hpp"
#include "yrisk/util.hpp"

namespace yrisk {

// One survey answer. Numeric codes and decimal answers are Number cells; the
// race question holds a set of letters ("B E" for mixed responses), stored
// sorted and deduplicated.
struct Cell {
  enum class Kind : std::uint8_t { Missing, Number, Letters };

  Kind kind = Kind::Missing;
  double number = 0.0;
  std::string letters;

  bool missing() const { return kind == Kind::Missing; }
  bool is_number() const { return kind == Kind::Number; }
  bool is_letters() const { return kind == Kind::Letters; }

  static Cell none() { return {}; }
  static Cell num(double v) { return {Kind::Number, v, {}}; }
  static Cell race(std::string sorted_letters) { return {Kind::Letters, 0.0, std::move(sorted_letters)}; }

  bool operator==(const Cell&) const = default;
};

struct RespondentRecord {
  std::vector<Cell> cells;
};

class SurveyTable {
 public:
  SurveyTable() = default;

  SurveyTable(std::vector<std::string> columns, std::vector<RespondentRecord> rows)
      : columns_(std::move(columns)), rows_(std::move(rows)) {
    rebuild_index();
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (rows_[i].cells.size() != columns_.size())
        throw ParseError("row " + std::to_string(i + 1) + ": expected " + std::to_string(columns_.size()) +
                         " cells, got " + std::to_string(rows_[i].cells.size()));
    }
  }

  std::size_t n_rows() const { return rows_.size(); }
  std::size_t n_cols() const { return columns_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<RespondentRecord>& rows() const { return rows_; }

  int column_index(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? -1 : it->second;
  }

  int require_column(std::string_view id) const {
    int c = column_index(id);
    if (c < 0) throw SchemaError("column not found: " + std::string(id));
    return c;
  }

  const Cell& cell(std::size_t row, std::size_t col) const { return rows_[row].cells[col]; }

 private:
  void rebuild_index() {
    index_.clear();
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      auto [it, fresh] = index_.emplace(columns_[i], static_cast<int>(i));
      if (!fresh) throw SchemaError("duplicate column id: " + columns_[i]);
    }
  }

  std::vector<std::string> columns_;
  std::vector<RespondentRecord> rows_;
  std::unordered_map<std::string, int> index_;
};

// Cohort selection. RaceExact matches respondents whose race answer is
// exactly the one letter (mixed responses never match); HispanicLatino keys
// on the ethnicity question coding yes.
struct CohortFilter {
  enum class Kind : std::uint8_t { AllRaces, RaceExact, HispanicLatino };

  Kind kind = Kind::AllRaces;
  char letter = 0;

  static CohortFilter all_races() { return {Kind::AllRaces, 0}; }
  static CohortFilter race_exact(char letter) { return {Kind::RaceExact, letter}; }
  static CohortFilter hispanic_latino() { return {Kind::HispanicLatino, 0}; }
};

inline constexpr std::string_view kRaceQuestion = "q5";
inline constexpr std::string_view kEthnicityQuestion = "q4";
inline constexpr double kYesCode = 1.0;

namespace detail {

inline bool parse_number(std::string_view s, double& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

inline bool parse_letter_set(std::string_view s, std::string& out) {
  out.clear();
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == ' ') {
      ++i;
      continue;
    }
    char c = s[i];
    if (c < 'A' || c > 'Z') return false;
    if (i + 1 < s.size() && s[i + 1] != ' ') return false;  // multi-char token
    out.push_back(c);
    ++i;
  }
  if (out.empty()) return false;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return true;
}

inline Cell parse_cell(std::string_view raw, std::size_t row, const std::string& column) {
  std::string s = trim(raw);
  if (s.empty()) return Cell::none();
  double v = 0.0;
  if (parse_number(s, v)) return Cell::num(v);
  std::string letters;
  if (parse_letter_set(s, letters)) return Cell::race(std::move(letters));
  throw ParseError("row " + std::to_string(row) + ", column " + column + ": cannot parse cell '" + s + "'");
}

inline bool is_question_id(std::string_view id) {
  if (id.size() < 2 || id[0] != 'q') return false;
  for (char c : id.substr(1))
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace detail

// Parses the coded-survey CSV dialect: first row is the question-id header,
// blank cells are missing answers. Data row numbers in errors are 1-based
// counting from the first row after the header.
inline SurveyTable parse_survey_csv(std::istream& in, bool expect_header = true) {
  CsvRows raw = read_csv(in);
  std::vector<std::string> columns;
  if (expect_header) {
    if (raw.header.empty() || (raw.header.size() == 1 && trim(raw.header[0]).empty()))
      throw ParseError("missing header row");
    for (const auto& h : raw.header) columns.push_back(trim(h));
  } else {
    // headerless input: synthesize positional question ids
    if (!raw.header.empty()) raw.rows.insert(raw.rows.begin(), raw.header);
    std::size_t width = raw.rows.empty() ? 0 : raw.rows.front().size();
    for (std::size_t i = 0; i < width; ++i) columns.push_back("q" + std::to_string(i + 1));
  }

  std::vector<RespondentRecord> rows;
  rows.reserve(raw.rows.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    if (raw.rows[r].size() != columns.size())
      throw ParseError("row " + std::to_string(r + 1) + ": expected " + std::to_string(columns.size()) +
                       " cells, got " + std::to_string(raw.rows[r].size()));
    RespondentRecord rec;
    rec.cells.reserve(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c)
      rec.cells.push_back(detail::parse_cell(raw.rows[r][c], r + 1, columns[c]));
    rows.push_back(std::move(rec));
  }
  return SurveyTable(std::move(columns), std::move(rows));
}

inline SurveyTable parse_survey_csv(const std::string& text, bool expect_header = true) {
  std::istringstream in(text);
  return parse_survey_csv(in, expect_header);
}

// Drops rows without a race answer and columns that are not q-numbered
// survey questions (the export's derived "additional information" columns).
inline SurveyTable clean_table(const SurveyTable& t) {
  int race_col = t.column_index(kRaceQuestion);
  if (race_col < 0) throw SchemaError("clean_table: missing race column q5");

  std::vector<int> keep_cols;
  std::vector<std::string> columns;
  for (std::size_t c = 0; c < t.n_cols(); ++c) {
    if (detail::is_question_id(t.columns()[c])) {
      keep_cols.push_back(static_cast<int>(c));
      columns.push_back(t.columns()[c]);
    }
  }

  std::vector<RespondentRecord> rows;
  for (const auto& rec : t.rows()) {
    if (!rec.cells[static_cast<std::size_t>(race_col)].is_letters()) continue;
    RespondentRecord out;
    out.cells.reserve(keep_cols.size());
    for (int c : keep_cols) out.cells.push_back(rec.cells[static_cast<std::size_t>(c)]);
    rows.push_back(std::move(out));
  }
  return SurveyTable(std::move(columns), std::move(rows));
}

inline SurveyTable apply_filter(const SurveyTable& t, const CohortFilter& f) {
  if (f.kind == CohortFilter::Kind::AllRaces) return t;

  std::string_view key_col = f.kind == CohortFilter::Kind::RaceExact ? kRaceQuestion : kEthnicityQuestion;
  int col = t.column_index(key_col);
  if (col < 0) throw SchemaError("apply_filter: missing column " + std::string(key_col));

  std::vector<RespondentRecord> rows;
  for (const auto& rec : t.rows()) {
    const Cell& cell = rec.cells[static_cast<std::size_t>(col)];
    bool keep = false;
    if (f.kind == CohortFilter::Kind::RaceExact) {
      keep = cell.is_letters() && cell.letters.size() == 1 && cell.letters[0] == f.letter;
    } else {
      keep = cell.is_number() && cell.number == kYesCode;
    }
    if (keep) rows.push_back(rec);
  }
  return SurveyTable(t.columns(), std::move(rows));
}

// yes(1) -> 1, no(2) -> 0, blank stays missing; anything else is a coding
// violation. 1 means depressed.
inline std::vector<std::optional<int>> binarize_label(const SurveyTable& t, std::string_view question) {
  int col = t.require_column(question);
  std::vector<std::optional<int>> labels;
  labels.reserve(t.n_rows());
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    const Cell& cell = t.cell(r, static_cast<std::size_t>(col));
    if (cell.missing()) {
      labels.push_back(std::nullopt);
    } else if (cell.is_number() && cell.number == 1.0) {
      labels.push_back(1);
    } else if (cell.is_number() && cell.number == 2.0) {
      labels.push_back(0);
    } else {
      throw DataError("row " + std::to_string(r + 1) + ": label code for " + std::string(question) +
                      " outside {1,2,missing}");
    }
  }
  return labels;
}

// Rows of selected feature codes plus the binary depression label. Holds no
// missing cells: rows lacking any selected answer are dropped on build.
struct LabeledMatrix {
  std::vector<std::string> feature_ids;
  std::string label_id;
  std::vector<double> x;  // row-major, n*d
  std::vector<int> y;
  std::size_t n = 0;
  std::size_t d = 0;

  double at(std::size_t row, std::size_t col) const { return x[row * d + col]; }
  std::span<const double> row(std::size_t r) const { return {x.data() + r * d, d}; }

  LabeledMatrix subset(std::span<const int> rows) const {
    LabeledMatrix out;
    out.feature_ids = feature_ids;
    out.label_id = label_id;
    out.d = d;
    out.n = rows.size();
    out.x.reserve(rows.size() * d);
    out.y.reserve(rows.size());
    for (int r : rows) {
      auto src = row(static_cast<std::size_t>(r));
      out.x.insert(out.x.end(), src.begin(), src.end());
      out.y.push_back(y[static_cast<std::size_t>(r)]);
    }
    return out;
  }

  std::string to_csv() const {
    std::string out;
    for (const auto& f : feature_ids) {
      out += f;
      out += ',';
    }
    out += label_id;
    out += '\n';
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        out += fmt_double(at(r, c));
        out += ',';
      }
      out += std::to_string(y[r]);
      out += '\n';
    }
    return out;
  }
};

inline LabeledMatrix build_labeled_matrix(const SurveyTable& t, const std::vector<std::string>& features,
                                          std::string_view label_q) {
  if (features.empty()) throw DomainError("build_labeled_matrix: at least one feature required");
  std::unordered_set<std::string> seen;
  std::vector<int> feature_cols;
  for (const auto& f : features) {
    if (!seen.insert(f).second) throw DomainError("build_labeled_matrix: duplicate feature " + f);
    feature_cols.push_back(t.require_column(f));
  }
  auto labels = binarize_label(t, label_q);

  LabeledMatrix m;
  m.feature_ids = features;
  m.label_id = std::string(label_q);
  m.d = features.size();
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    if (!labels[r].has_value()) continue;
    bool usable = true;
    for (int c : feature_cols) {
      const Cell& cell = t.cell(r, static_cast<std::size_t>(c));
      if (cell.missing()) {
        usable = false;
        break;
      }
      if (!cell.is_number())
        throw DataError("row " + std::to_string(r + 1) + ": feature " +
                        t.columns()[static_cast<std::size_t>(c)] + " holds a non-numeric code");
    }
    if (!usable) continue;
    for (int c : feature_cols) m.x.push_back(t.cell(r, static_cast<std::size_t>(c)).number);
    m.y.push_back(*labels[r]);
    ++m.n;
  }
  return m;
}

inline std::string survey_to_csv(const SurveyTable& t) {
  std::string out;
  for (std::size_t c = 0; c < t.n_cols(); ++c) {
    if (c) out += ',';
    out += t.columns()[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
      if (c) out += ',';
      const Cell& cell = t.cell(r, c);
      switch (cell.kind) {
        case Cell::Kind::Missing:
          break;
        case Cell::Kind::Number:
          out += fmt_double(cell.number);
          break;
        case Cell::Kind::Letters:
          for (std::size_t i = 0; i < cell.letters.size(); ++i) {
            if (i) out += ' ';
            out += cell.letters[i];
          }
          break;
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace yrisk
