// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include "wagepanel/ida_validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "wagepanel/text.hpp"

namespace wagepanel {
namespace {

using nlohmann::ordered_json;

ordered_json ids_json(const std::vector<CaseId>& ids) {
  auto arr = ordered_json::array();
  for (CaseId id : ids) arr.push_back(id.value);
  return arr;
}

ordered_json age_counts_json(const std::map<int, std::size_t>& counts) {
  ordered_json j = ordered_json::object();
  for (const auto& [age, n] : counts) j[std::to_string(age)] = n;
  return j;
}

CheckResult no_expectations(std::string name, const std::string& vintage) {
  CheckResult r;
  r.name = std::move(name);
  r.status = CheckStatus::kWarn;
  r.note = "skipped: no published totals for vintage " + vintage;
  return r;
}

std::uint64_t bounded_draw(std::mt19937_64& gen, std::uint64_t range) {
  // Rejects the low residue so every value in [0, range) is equally likely.
  const std::uint64_t reject_below = (0 - range) % range;
  for (;;) {
    const std::uint64_t r = gen();
    if (r >= reject_below) return r % range;
  }
}

}  // namespace

std::string_view check_status_name(CheckStatus status) {
  switch (status) {
    case CheckStatus::kPass: return "pass";
    case CheckStatus::kFail: return "fail";
    case CheckStatus::kWarn: return "warn";
  }
  return "?";
}

void ValidationReport::add(CheckResult result) {
  if (find(result.name)) throw Error("check registered twice: " + result.name);
  checks_.push_back(std::move(result));
}

const CheckResult* ValidationReport::find(std::string_view name) const {
  for (const auto& c : checks_) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

bool ValidationReport::any_failed() const {
  return std::any_of(checks_.begin(), checks_.end(),
                     [](const CheckResult& c) { return c.status == CheckStatus::kFail; });
}

ordered_json ValidationReport::to_json() const {
  ordered_json j;
  j["generated_at"] = generated_at_;
  j["input_digest"] = input_digest_;
  j["failed"] = any_failed();
  auto arr = ordered_json::array();
  for (const auto& c : checks_) {
    ordered_json e;
    e["name"] = c.name;
    e["status"] = check_status_name(c.status);
    e["expected"] = c.expected;
    e["observed"] = c.observed;
    e["affected_ids"] = ids_json(c.affected_ids);
    e["note"] = c.note;
    arr.push_back(std::move(e));
  }
  j["checks"] = std::move(arr);
  return j;
}

std::string ValidationReport::to_text() const {
  std::string out = "validation report\n";
  out += "generated_at: " + generated_at_ + "\n";
  out += "input_digest: " + input_digest_ + "\n\n";
  for (const auto& c : checks_) {
    std::string status(check_status_name(c.status));
    std::transform(status.begin(), status.end(), status.begin(), ::toupper);
    out += "[" + status + "] " + c.name + "\n";
    if (!c.expected.is_null()) out += "  expected: " + c.expected.dump() + "\n";
    if (!c.observed.is_null()) out += "  observed: " + c.observed.dump() + "\n";
    if (!c.affected_ids.empty()) {
      out += "  affected ids (" + std::to_string(c.affected_ids.size()) + "):";
      const std::size_t shown = std::min<std::size_t>(c.affected_ids.size(), 20);
      for (std::size_t i = 0; i < shown; ++i) out += " " + std::to_string(c.affected_ids[i].value);
      if (shown < c.affected_ids.size()) out += " ...";
      out += "\n";
    }
    if (!c.note.empty()) out += "  note: " + c.note + "\n";
  }
  out += any_failed() ? "\nresult: FAIL\n" : "\nresult: PASS\n";
  return out;
}

CheckResult check_age_range(std::span<const PersonDemographics> demog) {
  CheckResult r;
  r.name = "age_range";
  r.expected = {{"min", kMinPlausibleAge}, {"max", kMaxPlausibleAge}};
  std::optional<int> lo, hi;
  for (const auto& p : demog) {
    if (!p.age_1979) continue;
    lo = lo ? std::min(*lo, *p.age_1979) : *p.age_1979;
    hi = hi ? std::max(*hi, *p.age_1979) : *p.age_1979;
    if (*p.age_1979 < kMinPlausibleAge || *p.age_1979 > kMaxPlausibleAge) {
      r.affected_ids.push_back(p.id);
    }
  }
  r.observed = {{"min", lo ? ordered_json(*lo) : ordered_json(nullptr)},
                {"max", hi ? ordered_json(*hi) : ordered_json(nullptr)}};
  if (!lo) {
    r.note = "warning: no ages to check; passes vacuously";
  } else if (!r.affected_ids.empty()) {
    r.status = CheckStatus::kFail;
    r.note = std::to_string(r.affected_ids.size()) + " respondents outside the range";
  }
  return r;
}

AgeTabulation tabulate_age(std::span<const PersonDemographics> demog) {
  AgeTabulation t;
  for (const auto& p : demog) {
    if (p.age_1979) {
      ++t.counts[*p.age_1979];
    } else {
      ++t.missing;
    }
    ++t.total;
  }
  return t;
}

int SexRaceTabulation::row_percent(std::size_t row, std::size_t column) const {
  if (row_totals[row] == 0) return 0;
  return static_cast<int>(std::lround(100.0 * static_cast<double>(counts[row][column]) /
                                      static_cast<double>(row_totals[row])));
}

SexRaceTabulation tabulate_sex_race(std::span<const PersonDemographics> demog) {
  SexRaceTabulation t;
  for (const auto& p : demog) {
    if (!p.sex || !p.race) {
      ++t.unclassified;
      continue;
    }
    const auto row = static_cast<std::size_t>(*p.sex);
    const auto col = static_cast<std::size_t>(*p.race);
    ++t.counts[row][col];
    ++t.row_totals[row];
    ++t.column_totals[col];
    ++t.total;
  }
  return t;
}

std::vector<ProfileSummary> profile_summaries(std::span<const PersonYearWage> wages) {
  std::map<CaseId, std::vector<std::pair<int, double>>> by_id;
  for (const auto& w : wages) {
    if (w.wage) by_id[w.id].emplace_back(w.year, *w.wage);
  }
  std::vector<ProfileSummary> out;
  out.reserve(by_id.size());
  for (auto& [id, obs] : by_id) {
    std::vector<double> v;
    v.reserve(obs.size());
    int first = std::numeric_limits<int>::max(), last = std::numeric_limits<int>::min();
    for (const auto& [year, wage] : obs) {
      v.push_back(wage);
      first = std::min(first, year);
      last = std::max(last, year);
    }
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    ProfileSummary s;
    s.id = id;
    s.n_obs = static_cast<int>(n);
    s.wage_min = v.front();
    s.wage_max = v.back();
    s.wage_median = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
    s.first_year = first;
    s.last_year = last;
    out.push_back(s);
  }
  return out;
}

std::string profiles_to_csv(std::span<const ProfileSummary> profiles) {
  std::string out = "id,n_obs,wage_min,wage_median,wage_max,first_year,last_year\n";
  for (const auto& p : profiles) {
    out += std::to_string(p.id.value) + ',' + std::to_string(p.n_obs) + ',' +
           format_decimal(p.wage_min) + ',' + format_decimal(p.wage_median) + ',' +
           format_decimal(p.wage_max) + ',' + std::to_string(p.first_year) + ',' +
           std::to_string(p.last_year) + '\n';
  }
  return out;
}

std::vector<CaseId> sample_ids(std::vector<CaseId> population, std::size_t n, std::uint64_t seed) {
  std::sort(population.begin(), population.end());
  if (std::adjacent_find(population.begin(), population.end()) != population.end()) {
    throw SamplingError("population contains duplicate ids");
  }
  if (n > population.size()) {
    throw SamplingError("sample size " + std::to_string(n) + " exceeds population " +
                        std::to_string(population.size()));
  }
  std::mt19937_64 gen(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(bounded_draw(gen, population.size() - i));
    std::swap(population[i], population[j]);
  }
  population.resize(n);
  std::sort(population.begin(), population.end());
  return population;
}

std::vector<SampledProfile> sample_profiles(std::span<const PersonYearWage> wages, std::size_t n,
                                            std::uint64_t seed) {
  std::map<CaseId, std::vector<const PersonYearWage*>> by_id;
  for (const auto& w : wages) by_id[w.id].push_back(&w);
  std::vector<CaseId> ids;
  ids.reserve(by_id.size());
  for (const auto& kv : by_id) ids.push_back(kv.first);
  std::vector<SampledProfile> out;
  for (CaseId id : sample_ids(std::move(ids), n, seed)) {
    auto rows = by_id.at(id);
    std::sort(rows.begin(), rows.end(),
              [](const PersonYearWage* a, const PersonYearWage* b) { return a->year < b->year; });
    out.push_back({id, std::move(rows)});
  }
  return out;
}

std::optional<Expectations> load_expectations(std::string_view json_text, std::string_view vintage) {
  const auto doc = nlohmann::json::parse(json_text);
  const auto it = doc.find(std::string(vintage));
  if (it == doc.end()) return std::nullopt;
  const auto& v = *it;
  Expectations e;
  try {
    e.rows = v.at("rows").get<std::size_t>();
    e.sex = v.at("sex").get<std::map<std::string, std::size_t>>();
    for (const auto& [age, n] : v.at("ages").items()) {
      const auto parsed = parse_integer(age);
      if (!parsed) throw Error("age key is not an integer: " + age);
      e.ages[static_cast<int>(*parsed)] = n.get<std::size_t>();
    }
    e.sex_race = v.at("sex_race").get<std::map<std::string, std::map<std::string, std::size_t>>>();
    if (v.contains("dropouts")) e.dropouts = v["dropouts"].get<std::size_t>();
    if (v.contains("reconciliation")) {
      e.reconciliation = v["reconciliation"].get<std::map<std::string, std::size_t>>();
    }
    if (v.contains("max_repaired_wage")) e.max_repaired_wage = v["max_repaired_wage"].get<double>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error("expectations for vintage " + std::string(vintage) + ": " + ex.what());
  }
  return e;
}

ValidationReport validate(const ValidationInput& input) {
  ValidationReport report(input.generated_at, input.input_digest);
  const auto& demog = input.demog;
  const auto& exp = input.expectations;

  report.add(check_age_range(demog));

  if (exp) {
    CheckResult r;
    r.name = "row_count";
    r.expected = exp->rows;
    r.observed = demog.size();
    r.status = demog.size() == exp->rows ? CheckStatus::kPass : CheckStatus::kFail;
    report.add(std::move(r));
  } else {
    report.add(no_expectations("row_count", input.vintage));
  }

  const SexRaceTabulation sr = tabulate_sex_race(demog);
  if (exp) {
    CheckResult r;
    r.name = "sex_counts";
    r.expected = ordered_json::object();
    for (const auto& [code, n] : exp->sex) r.expected[code] = n;
    std::map<std::string, std::size_t> observed;
    for (std::size_t row = 0; row < 2; ++row) {
      observed[std::string(sex_code(SexRaceTabulation::kRows[row]))] = sr.row_totals[row];
    }
    r.observed = ordered_json::object();
    for (const auto& [code, n] : observed) r.observed[code] = n;
    r.status = observed == exp->sex ? CheckStatus::kPass : CheckStatus::kFail;
    report.add(std::move(r));
  } else {
    report.add(no_expectations("sex_counts", input.vintage));
  }

  const AgeTabulation ages = tabulate_age(demog);
  if (exp) {
    CheckResult r;
    r.name = "age_tabulation";
    r.expected = age_counts_json(exp->ages);
    r.observed = age_counts_json(ages.counts);
    r.status = ages.counts == exp->ages && ages.missing == 0 ? CheckStatus::kPass
                                                               : CheckStatus::kFail;
    if (ages.missing) r.note = std::to_string(ages.missing) + " respondents without an age";
    report.add(std::move(r));
  } else {
    report.add(no_expectations("age_tabulation", input.vintage));
  }

  ordered_json sr_observed = ordered_json::object();
  std::map<std::string, std::map<std::string, std::size_t>> sr_counts;
  for (std::size_t row = 0; row < 2; ++row) {
    const std::string sex(sex_code(SexRaceTabulation::kRows[row]));
    ordered_json jr = ordered_json::object();
    for (std::size_t col = 0; col < 3; ++col) {
      const std::string race(race_code(SexRaceTabulation::kColumns[col]));
      sr_counts[sex][race] = sr.counts[row][col];
      jr[race] = {{"n", sr.counts[row][col]}, {"percent", sr.row_percent(row, col)}};
    }
    jr["total"] = sr.row_totals[row];
    sr_observed[sex] = std::move(jr);
  }
  if (exp) {
    CheckResult r;
    r.name = "sex_race_tabulation";
    r.expected = ordered_json::object();
    for (const auto& [sex, cols] : exp->sex_race) {
      r.expected[sex] = ordered_json::object();
      for (const auto& [race, n] : cols) r.expected[sex][race] = n;
    }
    r.observed = sr_observed;
    r.status = sr_counts == exp->sex_race ? CheckStatus::kPass : CheckStatus::kFail;
    if (sr.unclassified) r.note = std::to_string(sr.unclassified) + " respondents unclassified";
    report.add(std::move(r));
  } else {
    report.add(no_expectations("sex_race_tabulation", input.vintage));
  }

  {
    CheckResult r;
    r.name = "tabulation_margins";
    std::size_t age_sum = ages.missing;
    for (const auto& kv : ages.counts) age_sum += kv.second;
    std::size_t row_sum = sr.unclassified, col_sum = sr.unclassified;
    for (auto n : sr.row_totals) row_sum += n;
    for (auto n : sr.column_totals) col_sum += n;
    ordered_json pct = ordered_json::object();
    bool pct_ok = true;
    for (std::size_t row = 0; row < 2; ++row) {
      if (sr.row_totals[row] == 0) continue;
      int sum = 0;
      for (std::size_t col = 0; col < 3; ++col) sum += sr.row_percent(row, col);
      pct[std::string(sex_code(SexRaceTabulation::kRows[row]))] = sum;
      pct_ok = pct_ok && sum >= 99 && sum <= 101;
    }
    r.expected = {{"rows", demog.size()}, {"row_percent_sum", {{"min", 99}, {"max", 101}}}};
    r.observed = {{"age_sum", age_sum},
                  {"sex_sum", row_sum},
                  {"race_sum", col_sum},
                  {"row_percent_sum", pct}};
    const bool ok = age_sum == demog.size() && row_sum == demog.size() &&
                    col_sum == demog.size() && pct_ok;
    r.status = ok ? CheckStatus::kPass : CheckStatus::kFail;
    report.add(std::move(r));
  }

  {
    CheckResult r;
    r.name = "profile_order";
    const auto profiles = profile_summaries(input.wages);
    for (const auto& p : profiles) {
      const bool ordered = p.wage_min <= p.wage_median && p.wage_median <= p.wage_max;
      if (!ordered || p.n_obs < kMinRounds) r.affected_ids.push_back(p.id);
    }
    double max_wage = 0.0;
    for (const auto& p : profiles) max_wage = std::max(max_wage, p.wage_max);
    r.expected = {{"min_obs", kMinRounds}};
    r.observed = {{"profiles", profiles.size()},
                  {"violations", r.affected_ids.size()},
                  {"max_wage", profiles.empty() ? ordered_json(nullptr)
                                                : ordered_json(format_decimal(max_wage))}};
    if (!r.affected_ids.empty()) r.status = CheckStatus::kFail;
    report.add(std::move(r));
  }
  return report;
}

}  // namespace wagepanel
