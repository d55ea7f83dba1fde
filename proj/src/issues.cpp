// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include "wagepanel/issues.hpp"

#include <algorithm>
#include <array>
#include <tuple>
#include <utility>

#include <json.hpp>

namespace wagepanel {
namespace {

constexpr std::array<std::pair<IssueKind, std::string_view>, 17> kNames{{
    {IssueKind::kBirthYearConflict, "birth_year_conflict"},
    {IssueKind::kBirthYearMissing, "birth_year_missing"},
    {IssueKind::kBirthYearOutOfRange, "birth_year_out_of_range"},
    {IssueKind::kUnknownSexCode, "unknown_sex_code"},
    {IssueKind::kUnknownRaceCode, "unknown_race_code"},
    {IssueKind::kUnknownDiplomaCode, "unknown_diploma_code"},
    {IssueKind::kGradeEverOutOfRange, "grade_ever_out_of_range"},
    {IssueKind::kGradeOutOfRange, "grade_out_of_range"},
    {IssueKind::kGradeDecrease, "grade_decrease"},
    {IssueKind::kZeroWage, "zero_wage"},
    {IssueKind::kHoursOverCap, "hours_over_cap"},
    {IssueKind::kHoursUsualOnly, "hours_usual_only"},
    {IssueKind::kStartAfterSurvey, "start_after_survey"},
    {IssueKind::kWeeksMissing, "weeks_missing"},
    {IssueKind::kWeeksNegative, "weeks_negative"},
    {IssueKind::kFewRounds, "few_rounds"},
    {IssueKind::kUnmatchedWageId, "unmatched_wage_id"},
}};

}  // namespace

std::string_view issue_kind_name(IssueKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<IssueKind> issue_kind_from_name(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::vector<Issue> IssueLog::of_kind(IssueKind kind) const {
  std::vector<Issue> out;
  std::copy_if(issues_.begin(), issues_.end(), std::back_inserter(out),
               [kind](const Issue& i) { return i.kind == kind; });
  return out;
}

std::size_t IssueLog::count(IssueKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      issues_.begin(), issues_.end(), [kind](const Issue& i) { return i.kind == kind; }));
}

void IssueLog::sort() {
  std::sort(issues_.begin(), issues_.end(), [](const Issue& a, const Issue& b) {
    return std::tie(a.kind, a.id, a.year, a.detail) < std::tie(b.kind, b.id, b.year, b.detail);
  });
}

std::string IssueLog::to_json() const {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Issue& i : issues_) {
    nlohmann::ordered_json j;
    j["kind"] = issue_kind_name(i.kind);
    j["id"] = i.id.value;
    j["year"] = i.year ? nlohmann::ordered_json(*i.year) : nlohmann::ordered_json(nullptr);
    j["detail"] = i.detail;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

IssueLog IssueLog::from_json(std::string_view text) {
  IssueLog log;
  const auto arr = nlohmann::json::parse(text);
  for (const auto& j : arr) {
    const auto kind = issue_kind_from_name(j.at("kind").get<std::string>());
    if (!kind) throw Error("unknown issue kind in log: " + j.at("kind").get<std::string>());
    std::optional<int> year;
    if (!j.at("year").is_null()) year = j.at("year").get<int>();
    log.add(*kind, CaseId{j.at("id").get<std::int64_t>()}, year, j.value("detail", ""));
  }
  return log;
}

}  // namespace wagepanel
