// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include "wagepanel/raw_ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "wagepanel/text.hpp"

namespace wagepanel {
namespace {

enum class SlotStyle { kNone, kDigit, kDotted };
enum class RoundStyle { kYear, kFixed, kYearPrefixed, kCrossRound };

// One entry per family, in enum order. A column name is
//   <stem><slot part>_<round part>
// e.g. HRP3_1980, QES-52A.01_1993, HGCREV79_1979, SAMPLE_RACE_78SCRN, HGC_EVER_XRND.
struct Grammar {
  Family family;
  std::string_view tag;
  std::string_view stem;
  SlotStyle slot;
  RoundStyle round;
  std::string_view fixed_suffix = {};
  int fixed_year = 0;
};

constexpr std::array kGrammar{
    Grammar{Family::kCaseId, "CASEID", "CASEID", SlotStyle::kNone, RoundStyle::kYear},
    Grammar{Family::kSampleId, "SAMPLE_ID", "SAMPLE_ID", SlotStyle::kNone, RoundStyle::kYear},
    Grammar{Family::kHourlyRate, "HRP", "HRP", SlotStyle::kDigit, RoundStyle::kYear},
    Grammar{Family::kHoursUsual, "QES-52A", "QES-52A", SlotStyle::kDotted, RoundStyle::kYear},
    Grammar{Family::kHoursTotal, "QES-52D", "QES-52D", SlotStyle::kDotted, RoundStyle::kYear},
    Grammar{Family::kWeeksWorked, "WKSWK", "WKSWK-PCY", SlotStyle::kNone, RoundStyle::kYear},
    Grammar{Family::kGrade, "HGC", "HGC", SlotStyle::kNone, RoundStyle::kYear},
    Grammar{Family::kGradeRevised, "HGCREV", "HGCREV", SlotStyle::kNone, RoundStyle::kYearPrefixed},
    Grammar{Family::kGradeQuestion, "Q3-4", "Q3-4", SlotStyle::kNone, RoundStyle::kYear},
    Grammar{Family::kDiploma, "Q3-8A", "Q3-8A", SlotStyle::kNone, RoundStyle::kYear},
    Grammar{Family::kBirthYear, "Q1-3-Y", "Q1-3_A~Y", SlotStyle::kNone, RoundStyle::kYear},
    Grammar{Family::kBirthMonth, "Q1-3-M", "Q1-3_A~M", SlotStyle::kNone, RoundStyle::kYear},
    Grammar{Family::kSampleSex, "SAMPLE_SEX", "SAMPLE_SEX", SlotStyle::kNone, RoundStyle::kYear},
    Grammar{Family::kSampleRace, "SAMPLE_RACE", "SAMPLE_RACE", SlotStyle::kNone, RoundStyle::kFixed,
            "78SCRN", 1979},
    Grammar{Family::kGradeEver, "HGC_EVER", "HGC_EVER", SlotStyle::kNone, RoundStyle::kCrossRound},
    Grammar{Family::kStartYear, "STARTDATE", "EMPLOYERS_ALL_STARTDATE_ORIGINAL.01~Y",
            SlotStyle::kNone, RoundStyle::kCrossRound},
};

constexpr bool grammar_in_enum_order() {
  for (std::size_t i = 0; i < kGrammar.size(); ++i) {
    if (static_cast<std::size_t>(kGrammar[i].family) != i) return false;
  }
  return true;
}
static_assert(grammar_in_enum_order());

const Grammar& grammar_of(Family family) { return kGrammar.at(static_cast<std::size_t>(family)); }

bool all_digits(std::string_view text) {
  return !text.empty() &&
         std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

int to_int(std::string_view digits) {
  int value = 0;
  for (char c : digits) value = value * 10 + (c - '0');
  return value;
}

struct MatchFailure {
  ColumnNameError::Kind kind;
  std::string message;
};

using MatchResult = std::variant<RawColumnDescriptor, MatchFailure>;

MatchResult match_entry(const Grammar& g, std::string_view rest, std::string_view tail) {
  using Kind = ColumnNameError::Kind;
  RawColumnDescriptor d;
  d.family = g.family;

  switch (g.slot) {
    case SlotStyle::kNone:
      if (g.round == RoundStyle::kYearPrefixed) {
        if (rest.size() != 2 || !all_digits(rest)) {
          return MatchFailure{Kind::kMalformedSuffix, "expected two-digit year after stem"};
        }
      } else if (!rest.empty()) {
        return MatchFailure{Kind::kMalformedSuffix, "unexpected text after stem"};
      }
      break;
    case SlotStyle::kDigit: {
      if (!all_digits(rest) || rest.front() == '0') {
        return MatchFailure{Kind::kMalformedSuffix, "expected job number after stem"};
      }
      const int slot = rest.size() > 2 ? 99 : to_int(rest);
      if (slot < 1 || slot > kMaxJobSlots) {
        return MatchFailure{Kind::kSlotOutOfRange, "job slot out of range 1..5"};
      }
      d.job_slot = slot;
      break;
    }
    case SlotStyle::kDotted: {
      if (rest.size() != 3 || rest.front() != '.' || !all_digits(rest.substr(1))) {
        return MatchFailure{Kind::kMalformedSuffix, "expected .NN job number after stem"};
      }
      const int slot = to_int(rest.substr(1));
      if (slot < 1 || slot > kMaxJobSlots) {
        return MatchFailure{Kind::kSlotOutOfRange, "job slot out of range 1..5"};
      }
      d.job_slot = slot;
      break;
    }
  }

  switch (g.round) {
    case RoundStyle::kCrossRound:
      if (tail != "XRND") return MatchFailure{Kind::kMalformedSuffix, "expected XRND suffix"};
      break;
    case RoundStyle::kFixed:
      if (tail != g.fixed_suffix) {
        return MatchFailure{Kind::kMalformedSuffix, "expected suffix " + std::string(g.fixed_suffix)};
      }
      d.year = g.fixed_year;
      break;
    case RoundStyle::kYear:
    case RoundStyle::kYearPrefixed: {
      if (tail.size() != 4 || !all_digits(tail)) {
        return MatchFailure{Kind::kMalformedSuffix, "expected four-digit survey year"};
      }
      const int year = to_int(tail);
      if (!is_survey_year(year)) {
        return MatchFailure{Kind::kYearOutOfRange, "not a survey year: " + std::string(tail)};
      }
      if (g.round == RoundStyle::kYearPrefixed && to_int(rest) != year % 100) {
        return MatchFailure{Kind::kMalformedSuffix, "two-digit year disagrees with survey year"};
      }
      d.year = year;
      break;
    }
  }
  return d;
}

}  // namespace

std::string_view family_tag(Family family) { return grammar_of(family).tag; }

bool is_per_job(Family family) { return grammar_of(family).slot != SlotStyle::kNone; }

bool is_cross_round(Family family) { return grammar_of(family).round == RoundStyle::kCrossRound; }

RawColumnDescriptor parse_column_name(std::string_view name) {
  using Kind = ColumnNameError::Kind;
  const std::string owned(trim(name));
  if (owned.empty()) throw ColumnNameError(Kind::kEmpty, owned, "empty column name");

  const std::string_view text = owned;
  const auto split = text.rfind('_');
  if (split == std::string_view::npos) {
    throw ColumnNameError(Kind::kUnknownFamily, owned, "column '" + owned + "': no round suffix");
  }
  const std::string_view head = text.substr(0, split);
  const std::string_view tail = text.substr(split + 1);

  std::vector<RawColumnDescriptor> matches;
  std::optional<MatchFailure> best_failure;
  std::size_t best_stem = 0;
  for (const Grammar& g : kGrammar) {
    if (!head.starts_with(g.stem)) continue;
    auto result = match_entry(g, head.substr(g.stem.size()), tail);
    if (auto* d = std::get_if<RawColumnDescriptor>(&result)) {
      matches.push_back(*d);
    } else if (g.stem.size() > best_stem) {
      best_stem = g.stem.size();
      best_failure = std::get<MatchFailure>(std::move(result));
    }
  }
  if (matches.size() == 1) return matches.front();
  if (matches.size() > 1) {
    throw ColumnNameError(Kind::kMalformedSuffix, owned, "column '" + owned + "' is ambiguous");
  }
  if (best_failure) {
    throw ColumnNameError(best_failure->kind, owned, "column '" + owned + "': " + best_failure->message);
  }
  throw ColumnNameError(Kind::kUnknownFamily, owned, "column '" + owned + "': unknown question family");
}

std::string render_column_name(const RawColumnDescriptor& d) {
  const Grammar& g = grammar_of(d.family);
  std::string out(g.stem);
  switch (g.slot) {
    case SlotStyle::kNone:
      break;
    case SlotStyle::kDigit:
      out += std::to_string(d.job_slot.value());
      break;
    case SlotStyle::kDotted:
      out += d.job_slot.value() < 10 ? ".0" : ".";
      out += std::to_string(d.job_slot.value());
      break;
  }
  switch (g.round) {
    case RoundStyle::kCrossRound:
      out += "_XRND";
      break;
    case RoundStyle::kFixed:
      out += "_";
      out += g.fixed_suffix;
      break;
    case RoundStyle::kYearPrefixed: {
      const int yy = d.year.value() % 100;
      out += yy < 10 ? "0" : "";
      out += std::to_string(yy);
      out += "_" + std::to_string(d.year.value());
      break;
    }
    case RoundStyle::kYear:
      out += "_" + std::to_string(d.year.value());
      break;
  }
  return out;
}

std::string_view missing_reason_name(MissingReason reason) {
  switch (reason) {
    case MissingReason::kRefusal: return "Refusal";
    case MissingReason::kDontKnow: return "DontKnow";
    case MissingReason::kInvalidSkip: return "InvalidSkip";
    case MissingReason::kValidSkip: return "ValidSkip";
    case MissingReason::kNonInterview: return "NonInterview";
    case MissingReason::kStructuralNA: return "StructuralNA";
  }
  return "?";
}

std::optional<MissingReason> sentinel_reason(std::int64_t code) {
  switch (code) {
    case -1: return MissingReason::kRefusal;
    case -2: return MissingReason::kDontKnow;
    case -3: return MissingReason::kInvalidSkip;
    case -4: return MissingReason::kValidSkip;
    case -5: return MissingReason::kNonInterview;
    default: return std::nullopt;
  }
}

SentinelPolicy SentinelPolicy::parse(std::string_view name) {
  if (name == "strict") return SentinelPolicy{true};
  if (name == "lenient") return SentinelPolicy{false};
  throw Error("unknown sentinel policy '" + std::string(name) + "' (expected strict or lenient)");
}

std::optional<std::int64_t> DecodedCell::integer() const {
  if (auto* v = std::get_if<std::int64_t>(&value_)) return *v;
  return std::nullopt;
}

std::optional<Cents> DecodedCell::money() const {
  if (auto* v = std::get_if<Cents>(&value_)) return *v;
  return std::nullopt;
}

std::optional<double> DecodedCell::dollars() const {
  if (auto* v = std::get_if<Cents>(&value_)) return v->dollars();
  return std::nullopt;
}

DecodedCell decode_cell(std::optional<std::int64_t> raw, Family family) {
  if (!raw) return DecodedCell(MissingReason::kStructuralNA);
  if (*raw < 0) return DecodedCell(sentinel_reason(*raw).value_or(MissingReason::kStructuralNA));
  if (family == Family::kHourlyRate) return DecodedCell(Cents{*raw});
  return DecodedCell(*raw);
}

CaseId RawRecord::id() const { return table_->case_id(row_); }

std::optional<std::int64_t> RawRecord::cell(std::size_t column) const {
  return table_->cell(row_, column);
}

DecodedCell RawRecord::decoded(std::size_t column) const {
  return decode_cell(cell(column), table_->columns().at(column).family);
}

DecodedCell RawRecord::get(Family family, std::optional<int> year, std::optional<int> slot) const {
  const auto column = table_->find(family, year, slot);
  if (!column) return DecodedCell(MissingReason::kStructuralNA);
  return decoded(*column);
}

std::optional<std::int64_t> RawTable::cell(std::size_t row, std::size_t column) const {
  if (row >= ids_.size() || column >= names_.size()) throw Error("raw cell index out of range");
  const std::int32_t v = cells_[row * names_.size() + column];
  if (v == kAbsent) return std::nullopt;
  return v;
}

std::optional<std::size_t> RawTable::find(Family family, std::optional<int> year,
                                          std::optional<int> slot) const {
  auto it = index_.find(RawColumnDescriptor{family, slot, year});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> RawTable::years_of(Family family) const {
  std::set<int> years;
  for (const auto& d : descriptors_) {
    if (d.family == family && d.year) years.insert(*d.year);
  }
  return {years.begin(), years.end()};
}

void RawTable::index_columns() {
  descriptors_.clear();
  index_.clear();
  std::optional<std::size_t> case_column;
  for (std::size_t c = 0; c < names_.size(); ++c) {
    RawColumnDescriptor d;
    try {
      d = parse_column_name(names_[c]);
    } catch (const ColumnNameError& e) {
      throw IngestError(IngestError::Kind::kBadColumnName, e.what());
    }
    if (!index_.emplace(d, c).second) {
      throw IngestError(IngestError::Kind::kDuplicateColumn, "duplicate column '" + names_[c] + "'");
    }
    if (d.family == Family::kCaseId) {
      if (case_column) {
        throw IngestError(IngestError::Kind::kCaseIdColumn, "more than one case id column");
      }
      case_column = c;
    }
    descriptors_.push_back(d);
  }
  if (!case_column) throw IngestError(IngestError::Kind::kCaseIdColumn, "no CASEID column");
}

void RawTable::set_cells(std::vector<std::vector<std::optional<std::int64_t>>> rows) {
  const std::size_t width = names_.size();
  std::size_t case_column = 0;
  for (std::size_t c = 0; c < width; ++c) {
    if (descriptors_[c].family == Family::kCaseId) case_column = c;
  }
  std::set<CaseId> seen;
  ids_.clear();
  cells_.clear();
  cells_.reserve(rows.size() * width);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto& row = rows[r];
    if (row.size() != width) {
      throw IngestError(IngestError::Kind::kRaggedRow,
                        "row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                            " cells, header has " + std::to_string(width));
    }
    for (std::size_t c = 0; c < width; ++c) {
      auto& v = row[c];
      if (v && (*v > std::numeric_limits<std::int32_t>::max() || *v <= kAbsent)) {
        throw IngestError(IngestError::Kind::kNonIntegerCell,
                          "cell out of range in column '" + names_[c] + "'");
      }
      if (v && *v < 0 && !sentinel_reason(*v)) {
        if (policy_.reject_unknown_negative) {
          throw IngestError(IngestError::Kind::kUnknownSentinel,
                            "unknown negative code " + std::to_string(*v) + " in column '" +
                                names_[c] + "'");
        }
        v.reset();
      }
    }
    const auto& id_cell = row[case_column];
    if (!id_cell || *id_cell <= 0) {
      throw IngestError(IngestError::Kind::kInvalidCaseId,
                        "row " + std::to_string(r + 1) + ": case id missing or not positive");
    }
    const CaseId id{*id_cell};
    if (!seen.insert(id).second) {
      throw IngestError(IngestError::Kind::kDuplicateCaseId,
                        "duplicate case id " + std::to_string(id.value));
    }
    ids_.push_back(id);
    for (const auto& v : row) cells_.push_back(v ? static_cast<std::int32_t>(*v) : kAbsent);
  }
}

RawTable RawTable::from_columns(std::vector<std::string> names,
                                std::vector<std::vector<std::optional<std::int64_t>>> rows,
                                SentinelPolicy policy) {
  RawTable table;
  table.names_ = std::move(names);
  table.policy_ = policy;
  table.index_columns();
  table.set_cells(std::move(rows));
  return table;
}

RawTable read_raw_table(std::istream& in, const SentinelPolicy& policy) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw IngestError(IngestError::Kind::kUnreadable, "missing header row");

  RawTable table;
  table.policy_ = policy;
  for (auto& f : fields) table.names_.emplace_back(trim(f));
  table.index_columns();

  std::vector<std::vector<std::optional<std::int64_t>>> rows;
  while (reader.next(fields)) {
    std::vector<std::optional<std::int64_t>> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string_view text = trim(fields[c]);
      if (text.empty() || text == "NA" || text == ".") {
        row.emplace_back();
        continue;
      }
      auto value = parse_integer(text);
      if (!value) {
        const std::string column = c < table.names_.size() ? table.names_[c] : "#" + std::to_string(c + 1);
        throw IngestError(IngestError::Kind::kNonIntegerCell,
                          "line " + std::to_string(reader.line_number()) + ", column '" + column +
                              "': not an integer: '" + std::string(text) + "'");
      }
      row.push_back(*value);
    }
    rows.push_back(std::move(row));
  }
  table.set_cells(std::move(rows));
  return table;
}

RawTable load_raw_table(const std::filesystem::path& path, const SentinelPolicy& policy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IngestError(IngestError::Kind::kUnreadable, "cannot read raw extract " + path.string());
  }
  return read_raw_table(in, policy);
}

std::string write_raw_table(const RawTable& table) {
  std::ostringstream out;
  for (std::size_t c = 0; c < table.column_count(); ++c) {
    if (c) out << ',';
    out << table.column_names()[c];
  }
  out << '\n';
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    for (std::size_t c = 0; c < table.column_count(); ++c) {
      if (c) out << ',';
      if (auto v = table.cell(r, c)) out << *v;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace wagepanel
