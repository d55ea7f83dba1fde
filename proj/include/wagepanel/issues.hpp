// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wagepanel/common.hpp"

namespace wagepanel {

// Per-person or per-observation findings raised while tidying. They never abort
// a run; the validation stage turns them into checks.
enum class IssueKind {
  kBirthYearConflict,
  kBirthYearMissing,
  kBirthYearOutOfRange,
  kUnknownSexCode,
  kUnknownRaceCode,
  kUnknownDiplomaCode,
  kGradeEverOutOfRange,
  kGradeOutOfRange,
  kGradeDecrease,
  kZeroWage,
  kHoursOverCap,
  kHoursUsualOnly,
  kStartAfterSurvey,
  kWeeksMissing,
  kWeeksNegative,
  kFewRounds,
  kUnmatchedWageId,
};

std::string_view issue_kind_name(IssueKind kind);
std::optional<IssueKind> issue_kind_from_name(std::string_view name);

struct Issue {
  IssueKind kind;
  CaseId id;
  std::optional<int> year;
  std::string detail;

  friend bool operator==(const Issue&, const Issue&) = default;
};

class IssueLog {
 public:
  void add(IssueKind kind, CaseId id, std::optional<int> year = {}, std::string detail = {}) {
    issues_.push_back(Issue{kind, id, year, std::move(detail)});
  }
  void append(const IssueLog& other) {
    issues_.insert(issues_.end(), other.issues_.begin(), other.issues_.end());
  }

  const std::vector<Issue>& all() const { return issues_; }
  std::vector<Issue> of_kind(IssueKind kind) const;
  std::size_t count(IssueKind kind) const;

  /// Orders by (kind, id, year, detail) so serialized logs are stable.
  void sort();

  std::string to_json() const;
  static IssueLog from_json(std::string_view text);

 private:
  std::vector<Issue> issues_;
};

}  // namespace wagepanel
