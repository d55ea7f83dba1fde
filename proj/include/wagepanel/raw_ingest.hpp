// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "wagepanel/common.hpp"

namespace wagepanel {

// ---------------------------------------------------------------------------
// Column-name grammar
// ---------------------------------------------------------------------------

/// Question families present in a wide extract.
enum class Family {
  kCaseId,
  kSampleId,
  kHourlyRate,       // HRP: hourly rate of pay per job, integer cents
  kHoursUsual,       // QES-52A: usual hours per week per job
  kHoursTotal,       // QES-52D: total hours per week per job, incl. from home
  kWeeksWorked,      // WKSWK: weeks worked since last interview
  kGrade,            // HGC: highest grade completed as of the round
  kGradeRevised,     // HGCREV: revised series of the above
  kGradeQuestion,    // Q3-4
  kDiploma,          // Q3-8A: diploma / GED status
  kBirthYear,        // Q1-3-Y
  kBirthMonth,       // Q1-3-M
  kSampleSex,
  kSampleRace,
  kGradeEver,        // HGC_EVER, cross-round
  kStartYear,        // first employer start year, cross-round
};

std::string_view family_tag(Family family);
bool is_per_job(Family family);
bool is_cross_round(Family family);

inline constexpr int kMaxJobSlots = 5;

struct RawColumnDescriptor {
  Family family = Family::kCaseId;
  std::optional<int> job_slot;  // 1..5, per-job families only
  std::optional<int> year;      // absent only for cross-round families

  friend bool operator==(const RawColumnDescriptor&, const RawColumnDescriptor&) = default;
  friend auto operator<=>(const RawColumnDescriptor& a, const RawColumnDescriptor& b) {
    return std::tuple(a.family, a.job_slot, a.year) <=> std::tuple(b.family, b.job_slot, b.year);
  }
};

class ColumnNameError : public Error {
 public:
  enum class Kind { kEmpty, kUnknownFamily, kMalformedSuffix, kSlotOutOfRange, kYearOutOfRange };
  ColumnNameError(Kind kind, std::string name, const std::string& what)
      : Error(what), kind_(kind), name_(std::move(name)) {}
  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }

 private:
  Kind kind_;
  std::string name_;
};

RawColumnDescriptor parse_column_name(std::string_view name);
std::string render_column_name(const RawColumnDescriptor& descriptor);

// ---------------------------------------------------------------------------
// Cell decoding
// ---------------------------------------------------------------------------

enum class MissingReason { kRefusal, kDontKnow, kInvalidSkip, kValidSkip, kNonInterview, kStructuralNA };

std::string_view missing_reason_name(MissingReason reason);

/// Maps the survey's negative codes -1..-5 to reasons. Nothing else is a sentinel.
std::optional<MissingReason> sentinel_reason(std::int64_t code);

struct SentinelPolicy {
  /// When true a negative cell outside -1..-5 aborts the load; otherwise it is
  /// treated as structurally missing.
  bool reject_unknown_negative = true;

  static SentinelPolicy parse(std::string_view name);  // "strict" | "lenient"
  std::string_view name() const { return reject_unknown_negative ? "strict" : "lenient"; }
};

struct Cents {
  std::int64_t value = 0;
  double dollars() const { return static_cast<double>(value) / 100.0; }
  friend constexpr auto operator<=>(Cents, Cents) = default;
};

class DecodedCell {
 public:
  explicit DecodedCell(MissingReason reason) : value_(reason) {}
  explicit DecodedCell(std::int64_t value) : value_(value) {}
  explicit DecodedCell(Cents value) : value_(value) {}

  bool is_missing() const { return std::holds_alternative<MissingReason>(value_); }
  MissingReason reason() const { return std::get<MissingReason>(value_); }
  std::optional<std::int64_t> integer() const;
  std::optional<Cents> money() const;
  std::optional<double> dollars() const;

 private:
  std::variant<MissingReason, std::int64_t, Cents> value_;
};

/// HRP cells become money (stored cents); negative sentinels become reasons;
/// an absent cell is structurally missing; everything else passes through.
DecodedCell decode_cell(std::optional<std::int64_t> raw, Family family);

// ---------------------------------------------------------------------------
// Raw table
// ---------------------------------------------------------------------------

class IngestError : public Error {
 public:
  enum class Kind {
    kUnreadable,
    kNonIntegerCell,
    kUnknownSentinel,
    kDuplicateCaseId,
    kInvalidCaseId,
    kBadColumnName,
    kDuplicateColumn,
    kCaseIdColumn,
    kRaggedRow,
  };
  IngestError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class RawTable;

/// One respondent's row of a RawTable.
class RawRecord {
 public:
  RawRecord(const RawTable& table, std::size_t row) : table_(&table), row_(row) {}
  CaseId id() const;
  std::optional<std::int64_t> cell(std::size_t column) const;
  DecodedCell decoded(std::size_t column) const;
  /// Decoded cell of the given column, structurally missing if the column is absent.
  DecodedCell get(Family family, std::optional<int> year, std::optional<int> slot = {}) const;

 private:
  const RawTable* table_;
  std::size_t row_;
};

class RawTable {
 public:
  RawTable() = default;

  /// Builds a table from already-parsed pieces; validates the same invariants as loading.
  static RawTable from_columns(std::vector<std::string> names,
                               std::vector<std::vector<std::optional<std::int64_t>>> rows,
                               SentinelPolicy policy = {});

  std::size_t row_count() const { return ids_.size(); }
  std::size_t column_count() const { return names_.size(); }
  const std::vector<std::string>& column_names() const { return names_; }
  const std::vector<RawColumnDescriptor>& columns() const { return descriptors_; }
  const SentinelPolicy& policy() const { return policy_; }

  RawRecord record(std::size_t row) const { return RawRecord(*this, row); }
  CaseId case_id(std::size_t row) const { return ids_.at(row); }
  std::optional<std::int64_t> cell(std::size_t row, std::size_t column) const;

  std::optional<std::size_t> find(Family family, std::optional<int> year,
                                  std::optional<int> slot = {}) const;
  /// Survey years for which at least one column of the family exists, ascending.
  std::vector<int> years_of(Family family) const;

 private:
  static constexpr std::int32_t kAbsent = std::numeric_limits<std::int32_t>::min();

  std::vector<std::string> names_;
  std::vector<RawColumnDescriptor> descriptors_;
  std::map<RawColumnDescriptor, std::size_t> index_;
  std::vector<CaseId> ids_;
  std::vector<std::int32_t> cells_;  // row-major; kAbsent marks an empty cell
  SentinelPolicy policy_;

  friend RawTable read_raw_table(std::istream& in, const SentinelPolicy& policy);
  void index_columns();
  void set_cells(std::vector<std::vector<std::optional<std::int64_t>>> rows);
};

RawTable read_raw_table(std::istream& in, const SentinelPolicy& policy = {});
RawTable load_raw_table(const std::filesystem::path& path, const SentinelPolicy& policy = {});

/// Rebuilds the CSV text of a table (header plus integer cells, empty for absent).
std::string write_raw_table(const RawTable& table);

}  // namespace wagepanel
