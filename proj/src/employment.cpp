// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include "wagepanel/employment.hpp"

#include <algorithm>
#include <set>
#include <tuple>
#include <unordered_map>

#include "wagepanel/grade_labels.hpp"

namespace wagepanel {
namespace {

std::optional<int> as_int(const DecodedCell& cell) {
  if (auto v = cell.integer()) return static_cast<int>(*v);
  return std::nullopt;
}

}  // namespace

std::vector<JobObservation> pivot_jobs_long(const RawTable& raw) {
  std::set<std::pair<int, int>> year_slots;
  for (const auto& d : raw.columns()) {
    if (is_per_job(d.family) && d.year && d.job_slot) year_slots.emplace(*d.year, *d.job_slot);
  }

  std::vector<JobObservation> out;
  for (std::size_t r = 0; r < raw.row_count(); ++r) {
    const RawRecord rec = raw.record(r);
    for (const auto& [year, slot] : year_slots) {
      JobObservation obs;
      obs.id = rec.id();
      obs.year = year;
      obs.job_slot = slot;
      obs.wage = rec.get(Family::kHourlyRate, year, slot).money();
      obs.hours_usual = as_int(rec.get(Family::kHoursUsual, year, slot));
      obs.hours_total = as_int(rec.get(Family::kHoursTotal, year, slot));
      if (!obs.wage && !obs.hours_usual && !obs.hours_total) continue;
      if (auto source = select_hours_variable(year, slot)) {
        obs.hours = *source == Family::kHoursUsual ? obs.hours_usual : obs.hours_total;
      }
      out.push_back(obs);
    }
  }
  std::sort(out.begin(), out.end(), [](const JobObservation& a, const JobObservation& b) {
    return std::tie(a.id, a.year, a.job_slot) < std::tie(b.id, b.year, b.job_slot);
  });
  return out;
}

std::map<std::pair<CaseId, std::string>, std::int64_t> widen_jobs(
    std::span<const JobObservation> jobs) {
  std::map<std::pair<CaseId, std::string>, std::int64_t> cells;
  for (const auto& j : jobs) {
    auto name = [&](Family f) { return render_column_name({f, j.job_slot, j.year}); };
    if (j.wage) cells[{j.id, name(Family::kHourlyRate)}] = j.wage->value;
    if (j.hours_usual) cells[{j.id, name(Family::kHoursUsual)}] = *j.hours_usual;
    if (j.hours_total) cells[{j.id, name(Family::kHoursTotal)}] = *j.hours_total;
  }
  return cells;
}

std::optional<Family> select_hours_variable(int year, int job_slot) {
  if (year <= 1987) return Family::kHoursUsual;
  if (year == 1993 && (job_slot == 1 || job_slot == 5)) return Family::kHoursUsual;
  if (year == 2008 && job_slot == 5) return std::nullopt;
  return Family::kHoursTotal;
}

JobObservation clean_job_observation(JobObservation obs) {
  if (obs.wage && obs.wage->value == 0) obs.wage.reset();
  if (obs.hours && *obs.hours > kMaxWeeklyHours) {
    obs.wage.reset();
    obs.hours.reset();
  }
  return obs;
}

std::optional<MeanWage> mean_hourly_wage(std::span<const JobObservation> jobs) {
  MeanWage out;
  std::int64_t cents_sum = 0;
  std::int64_t weighted_sum = 0;  // cents * hours
  std::int64_t weight_sum = 0;
  bool all_weighted = true;
  std::optional<int> hours_sum;

  for (const auto& j : jobs) {
    if (j.hours) hours_sum = hours_sum.value_or(0) + *j.hours;
    if (!j.wage) continue;
    ++out.njobs;
    cents_sum += j.wage->value;
    if (j.hours) {
      weighted_sum += j.wage->value * *j.hours;
      weight_sum += *j.hours;
    } else {
      all_weighted = false;
    }
  }
  if (out.njobs == 0) return std::nullopt;

  out.hours = hours_sum;
  if (out.njobs >= 2 && all_weighted && weight_sum > 0) {
    out.wage = static_cast<double>(weighted_sum) / static_cast<double>(100 * weight_sum);
    out.is_wm = true;
  } else {
    out.wage = static_cast<double>(cents_sum) / (100.0 * out.njobs);
  }
  return out;
}

GradeColumns grade_columns(const RawRecord& record, const RawTable& raw) {
  GradeColumns cols;
  for (int year : raw.years_of(Family::kGradeRevised)) {
    cols.revised[year] = as_int(record.get(Family::kGradeRevised, year));
  }
  for (int year : raw.years_of(Family::kGrade)) {
    cols.unrevised[year] = as_int(record.get(Family::kGrade, year));
  }
  return cols;
}

std::map<int, std::optional<int>> derive_grade(const GradeColumns& columns) {
  std::map<int, std::optional<int>> out = columns.unrevised;
  for (const auto& [year, value] : columns.revised) out[year] = value;
  return out;
}

std::map<int, std::optional<int>> grade_series(const RawRecord& record, const RawTable& raw,
                                               IssueLog* issues) {
  auto series = derive_grade(grade_columns(record, raw));
  for (auto& [year, value] : series) {
    if (value && (*value < kMinGrade || *value > kMaxGrade)) {
      if (issues) {
        issues->add(IssueKind::kGradeOutOfRange, record.id(), year, "code " + std::to_string(*value));
      }
      value.reset();
    }
  }
  return series;
}

WorkforceYears derive_yr_wforce(std::optional<int> start_year, int survey_year) {
  if (!start_year) return {};
  if (*start_year > survey_year) return WorkforceYears{std::nullopt, true};
  return WorkforceYears{survey_year - *start_year, false};
}

ExperienceSeries cumulate_experience(std::span<const std::optional<int>> weeks_by_round) {
  ExperienceSeries out;
  out.exp.reserve(weeks_by_round.size());
  out.flagged.reserve(weeks_by_round.size());
  std::int64_t total_weeks = 0;
  bool started = false;
  for (const auto& weeks : weeks_by_round) {
    bool flag = false;
    if (weeks && *weeks >= 0) {
      started = true;
      total_weeks += *weeks;
    } else if (weeks) {
      flag = true;  // negative count
    } else {
      flag = started;
    }
    out.exp.push_back(static_cast<double>(total_weeks) / kWeeksPerYear);
    out.flagged.push_back(flag);
  }
  return out;
}

double experience_at(const PersonTimeline& timeline, int year) {
  auto it = timeline.exp.upper_bound(year);
  if (it == timeline.exp.begin()) return 0.0;
  return std::prev(it)->second;
}

std::vector<PersonTimeline> build_timelines(const RawTable& raw, IssueLog& issues) {
  const auto weeks_years = raw.years_of(Family::kWeeksWorked);
  std::vector<PersonTimeline> out;
  out.reserve(raw.row_count());
  for (std::size_t r = 0; r < raw.row_count(); ++r) {
    const RawRecord rec = raw.record(r);
    PersonTimeline t;
    t.id = rec.id();
    t.grade = grade_series(rec, raw, &issues);

    std::optional<int> previous;
    for (const auto& [year, value] : t.grade) {
      if (!value) continue;
      if (previous && *value < *previous) {
        issues.add(IssueKind::kGradeDecrease, t.id, year,
                   std::to_string(*previous) + " to " + std::to_string(*value));
      }
      previous = value;
    }

    if (auto start = rec.get(Family::kStartYear, std::nullopt).integer()) {
      t.stwork = normalize_year(*start);
    }

    std::vector<std::optional<int>> weeks;
    weeks.reserve(weeks_years.size());
    for (int year : weeks_years) weeks.push_back(as_int(rec.get(Family::kWeeksWorked, year)));
    const auto series = cumulate_experience(weeks);
    for (std::size_t i = 0; i < weeks_years.size(); ++i) {
      t.exp[weeks_years[i]] = series.exp[i];
      if (series.flagged[i]) {
        issues.add(weeks[i] ? IssueKind::kWeeksNegative : IssueKind::kWeeksMissing, t.id,
                   weeks_years[i]);
      }
    }
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(),
            [](const PersonTimeline& a, const PersonTimeline& b) { return a.id < b.id; });
  return out;
}

std::vector<PersonYearWage> assemble_wages_table(std::span<const JobObservation> cleaned_jobs,
                                                 std::span<const PersonDemographics> demog,
                                                 std::span<const PersonTimeline> timelines,
                                                 IssueLog& issues, int min_rounds) {
  std::unordered_map<CaseId, const PersonDemographics*> demog_by_id;
  for (const auto& p : demog) demog_by_id.emplace(p.id, &p);
  std::unordered_map<CaseId, const PersonTimeline*> timeline_by_id;
  for (const auto& t : timelines) timeline_by_id.emplace(t.id, &t);

  std::vector<JobObservation> jobs(cleaned_jobs.begin(), cleaned_jobs.end());
  std::stable_sort(jobs.begin(), jobs.end(), [](const JobObservation& a, const JobObservation& b) {
    return std::tie(a.id, a.year) < std::tie(b.id, b.year);
  });

  std::vector<PersonYearWage> rows;
  std::set<CaseId> unmatched;
  for (std::size_t begin = 0; begin < jobs.size();) {
    std::size_t end = begin;
    while (end < jobs.size() && jobs[end].id == jobs[begin].id && jobs[end].year == jobs[begin].year) {
      ++end;
    }
    const CaseId id = jobs[begin].id;
    const int year = jobs[begin].year;
    const auto mean = mean_hourly_wage(std::span(jobs).subspan(begin, end - begin));
    begin = end;
    if (!mean) continue;

    auto person = demog_by_id.find(id);
    if (person == demog_by_id.end()) {
      issues.add(IssueKind::kUnmatchedWageId, id, year);
      continue;
    }
    const PersonDemographics& p = *person->second;
    PersonYearWage row;
    row.id = id;
    row.year = year;
    row.wage = mean->wage;
    row.age_1979 = p.age_1979;
    row.sex = p.sex;
    row.race = p.race;
    row.hgc_i = p.hgc_i;
    row.hgc_1979 = p.hgc_1979;
    row.ged = p.ged;
    row.njobs = mean->njobs;
    row.hours = mean->hours;
    row.is_wm = mean->is_wm;
    row.is_pred = false;
    if (auto t = timeline_by_id.find(id); t != timeline_by_id.end()) {
      const PersonTimeline& timeline = *t->second;
      if (auto g = timeline.grade.find(year); g != timeline.grade.end()) row.grade = g->second;
      row.stwork = timeline.stwork;
      const auto wforce = derive_yr_wforce(timeline.stwork, year);
      if (wforce.start_after_survey) {
        issues.add(IssueKind::kStartAfterSurvey, id, year,
                   "stwork " + std::to_string(*timeline.stwork));
      }
      row.yr_wforce = wforce.value;
      row.exp = experience_at(timeline, year);
    }
    rows.push_back(row);
  }

  std::vector<PersonYearWage> kept;
  kept.reserve(rows.size());
  for (std::size_t begin = 0; begin < rows.size();) {
    std::size_t end = begin;
    while (end < rows.size() && rows[end].id == rows[begin].id) ++end;
    const auto n = static_cast<int>(end - begin);
    if (n >= min_rounds) {
      kept.insert(kept.end(), rows.begin() + static_cast<std::ptrdiff_t>(begin),
                  rows.begin() + static_cast<std::ptrdiff_t>(end));
    } else {
      issues.add(IssueKind::kFewRounds, rows[begin].id, {}, std::to_string(n) + " rounds");
    }
    begin = end;
  }
  return kept;
}

TidyResult tidy(const RawTable& raw) {
  TidyResult res;
  res.demog = build_demog_table(raw, res.issues);
  const auto timelines = build_timelines(raw, res.issues);

  for (const auto& job : pivot_jobs_long(raw)) {
    const auto source = select_hours_variable(job.year, job.job_slot);
    if (source == Family::kHoursTotal && !job.hours_total && job.hours_usual) {
      res.issues.add(IssueKind::kHoursUsualOnly, job.id, job.year,
                     "job " + std::to_string(job.job_slot));
    }
    if (job.wage && job.wage->value == 0) {
      res.issues.add(IssueKind::kZeroWage, job.id, job.year, "job " + std::to_string(job.job_slot));
    }
    if (job.hours && *job.hours > kMaxWeeklyHours) {
      res.issues.add(IssueKind::kHoursOverCap, job.id, job.year,
                     "job " + std::to_string(job.job_slot) + " hours " + std::to_string(*job.hours));
    }
    res.jobs.push_back(clean_job_observation(job));
  }

  res.wages = assemble_wages_table(res.jobs, res.demog, timelines, res.issues);

  std::set<std::pair<CaseId, int>> person_years;
  for (const auto& j : res.jobs) {
    if (j.wage) person_years.emplace(j.id, j.year);
  }
  std::set<CaseId> year_people;
  for (const auto& [id, year] : person_years) year_people.insert(id);
  std::set<CaseId> wage_people;
  for (const auto& w : res.wages) wage_people.insert(w.id);

  res.counts.raw_individuals = raw.row_count();
  res.counts.job_observations = res.jobs.size();
  res.counts.person_years = person_years.size();
  res.counts.person_year_individuals = year_people.size();
  res.counts.wage_rows = res.wages.size();
  res.counts.wage_individuals = wage_people.size();
  res.issues.sort();
  return res;
}

}  // namespace wagepanel
