// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wagepanel/common.hpp"
#include "wagepanel/demographics.hpp"
#include "wagepanel/issues.hpp"
#include "wagepanel/raw_ingest.hpp"

namespace wagepanel {

/// One (person, round, job slot) record in long form.
struct JobObservation {
  CaseId id;
  int year = 0;
  int job_slot = 0;
  std::optional<Cents> wage;
  std::optional<int> hours;        // from the question chosen by select_hours_variable
  std::optional<int> hours_usual;  // QES-52A cell as delivered
  std::optional<int> hours_total;  // QES-52D cell as delivered

  friend bool operator==(const JobObservation&, const JobObservation&) = default;
};

/// Rows ordered by (id, year, slot); a row exists when any per-job cell is non-missing.
std::vector<JobObservation> pivot_jobs_long(const RawTable& raw);

/// Inverse of pivot_jobs_long: non-missing per-job cells keyed by (case id, column name).
std::map<std::pair<CaseId, std::string>, std::int64_t> widen_jobs(
    std::span<const JobObservation> jobs);

/// QES-52A through 1987, QES-52D from 1988. In 1993 jobs 1 and 5 fall back to
/// QES-52A; 2008 has no hours source for job 5.
std::optional<Family> select_hours_variable(int year, int job_slot);

inline constexpr int kMaxWeeklyHours = 84;

/// Zero wage becomes missing; hours above 84 blank both wage and hours.
JobObservation clean_job_observation(JobObservation obs);

struct MeanWage {
  double wage = 0.0;
  int njobs = 0;
  std::optional<int> hours;
  bool is_wm = false;

  friend bool operator==(const MeanWage&, const MeanWage&) = default;
};

/// Hours-weighted mean over jobs with a wage when at least two such jobs all
/// report positive total hours; otherwise the simple mean. Computed from
/// integer cents and hours so the result is the correctly rounded quotient.
std::optional<MeanWage> mean_hourly_wage(std::span<const JobObservation> jobs);

struct GradeColumns {
  std::map<int, std::optional<int>> revised;    // HGCREV columns present, by year
  std::map<int, std::optional<int>> unrevised;  // HGC columns present, by year
};

GradeColumns grade_columns(const RawRecord& record, const RawTable& raw);

/// Per round: the revised value wherever that round has a revised column,
/// else the unrevised value.
std::map<int, std::optional<int>> derive_grade(const GradeColumns& columns);

struct WorkforceYears {
  std::optional<int> value;
  bool start_after_survey = false;
};

WorkforceYears derive_yr_wforce(std::optional<int> start_year, int survey_year);

inline constexpr double kWeeksPerYear = 52.0;

struct ExperienceSeries {
  std::vector<double> exp;     // cumulative years through each round
  std::vector<bool> flagged;   // missing or negative weeks after the first report
};

/// Running sum of weeks / 52. Missing rounds add zero. Rounds before the first
/// reported value are not flagged.
ExperienceSeries cumulate_experience(std::span<const std::optional<int>> weeks_by_round);

/// Time-varying inputs for one person, keyed by survey year.
struct PersonTimeline {
  CaseId id;
  std::map<int, std::optional<int>> grade;
  std::optional<int> stwork;
  std::map<int, double> exp;  // per weeks-worked round
};

/// Experience in effect at `year`: the cumulative value of the latest round not after it.
double experience_at(const PersonTimeline& timeline, int year);

/// One tidy (person, year) row.
struct PersonYearWage {
  CaseId id;
  int year = 0;
  std::optional<double> wage;
  std::optional<int> age_1979;
  std::optional<Sex> sex;
  std::optional<Race> race;
  std::optional<int> grade;
  std::optional<int> hgc_i;
  std::optional<int> hgc_1979;
  std::optional<GedStatus> ged;
  int njobs = 0;
  std::optional<int> hours;
  std::optional<int> stwork;
  std::optional<int> yr_wforce;
  double exp = 0.0;
  bool is_wm = false;
  bool is_pred = false;

  friend bool operator==(const PersonYearWage&, const PersonYearWage&) = default;
};

inline constexpr int kMinRounds = 3;

std::vector<PersonYearWage> assemble_wages_table(std::span<const JobObservation> cleaned_jobs,
                                                 std::span<const PersonDemographics> demog,
                                                 std::span<const PersonTimeline> timelines,
                                                 IssueLog& issues, int min_rounds = kMinRounds);

/// Grade series with out-of-range codes dropped (and logged when a log is given).
std::map<int, std::optional<int>> grade_series(const RawRecord& record, const RawTable& raw,
                                               IssueLog* issues);

std::vector<PersonTimeline> build_timelines(const RawTable& raw, IssueLog& issues);

/// Row and person counts of the stages between raw and the filtered wage table.
struct TidyCounts {
  std::size_t raw_individuals = 0;
  std::size_t job_observations = 0;
  std::size_t person_years = 0;
  std::size_t person_year_individuals = 0;
  std::size_t wage_rows = 0;
  std::size_t wage_individuals = 0;
};

struct TidyResult {
  std::vector<PersonDemographics> demog;
  std::vector<JobObservation> jobs;  // cleaned
  std::vector<PersonYearWage> wages;
  IssueLog issues;
  TidyCounts counts;
};

/// Runs every raw-to-input derivation.
TidyResult tidy(const RawTable& raw);

}  // namespace wagepanel
