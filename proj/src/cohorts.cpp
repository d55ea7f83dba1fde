// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include "wagepanel/cohorts.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "wagepanel/text.hpp"

namespace wagepanel {
namespace {

using nlohmann::ordered_json;

constexpr int kDiplomaGrade = 12;

std::vector<CaseId> sorted_unique(std::span<const CaseId> ids, std::string_view what) {
  std::vector<CaseId> out(ids.begin(), ids.end());
  std::sort(out.begin(), out.end());
  if (auto it = std::adjacent_find(out.begin(), out.end()); it != out.end()) {
    throw Error("duplicate id " + std::to_string(it->value) + " in " + std::string(what));
  }
  return out;
}

std::vector<std::vector<std::string>> read_csv(std::string_view text,
                                               std::vector<std::string>& header) {
  std::string owned(text);
  std::istringstream in(owned);
  CsvReader reader(in);
  if (!reader.next(header)) throw Error("empty csv");
  for (auto& h : header) h = std::string(trim(h));
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != header.size()) {
      throw Error("line " + std::to_string(reader.line_number()) + ": expected " +
                  std::to_string(header.size()) + " fields");
    }
    rows.push_back(fields);
  }
  return rows;
}

std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                       std::initializer_list<std::string_view> names) {
  for (auto name : names) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
  }
  return std::nullopt;
}

std::string density_csv(const Density& a, const Density& b) {
  std::string out = "bin_lo,bin_hi,refreshed,original\n";
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    const double lo = a.spec.lo + static_cast<double>(i) * a.spec.width;
    out += format_decimal(lo) + ',' + format_decimal(lo + a.spec.width) + ',' +
           format_decimal(a.density(i)) + ',' + format_decimal(b.density(i)) + '\n';
  }
  return out;
}

ordered_json density_json(const Density& d) {
  return {{"n", d.n}, {"below", d.below}, {"above", d.above}};
}

}  // namespace

std::string_view dropout_rule_name(DropoutRule rule) {
  switch (rule) {
    case DropoutRule::kHgcBelow12: return "HgcBelow12";
    case DropoutRule::kGedEquivalency: return "GedEquivalency";
    case DropoutRule::kGedBoth: return "GedBoth";
    case DropoutRule::kGedMissing: return "GedMissing";
    case DropoutRule::kExcludedDiploma: return "ExcludedDiploma";
    case DropoutRule::kExcludedFewRounds: return "ExcludedFewRounds";
    case DropoutRule::kExcludedSex: return "ExcludedSex";
    case DropoutRule::kExcludedAge: return "ExcludedAge";
    case DropoutRule::kExcludedGedBoth: return "ExcludedGedBoth";
    case DropoutRule::kExcludedGedMissing: return "ExcludedGedMissing";
    case DropoutRule::kDeferred: return "Deferred";
  }
  return "?";
}

DropoutCriteria DropoutCriteria::strict() {
  DropoutCriteria c;
  c.min_age = 14;
  c.max_age = 17;
  c.include_ged_missing = false;
  c.include_ged_both = false;
  return c;
}

DropoutDecision classify_dropout(const PersonDemographics& person, const DropoutCriteria& criteria) {
  auto decide = [&](bool included, DropoutRule rule) {
    return DropoutDecision{person.id, included, rule};
  };
  if (criteria.males_only && person.sex != Sex::kMale) {
    return decide(false, DropoutRule::kExcludedSex);
  }
  if (criteria.min_age || criteria.max_age) {
    const bool known = person.age_1979.has_value();
    if (!known || (criteria.min_age && *person.age_1979 < *criteria.min_age) ||
        (criteria.max_age && *person.age_1979 > *criteria.max_age)) {
      return decide(false, DropoutRule::kExcludedAge);
    }
  }
  if (!person.hgc_i) return decide(false, DropoutRule::kDeferred);
  if (*person.hgc_i >= kDiplomaGrade && person.ged == GedStatus::kDiploma) {
    return decide(false, DropoutRule::kExcludedDiploma);
  }
  if (*person.hgc_i < kDiplomaGrade) return decide(true, DropoutRule::kHgcBelow12);
  if (person.ged == GedStatus::kGed) return decide(true, DropoutRule::kGedEquivalency);
  if (person.ged == GedStatus::kBoth) {
    return criteria.include_ged_both ? decide(true, DropoutRule::kGedBoth)
                                     : decide(false, DropoutRule::kExcludedGedBoth);
  }
  return criteria.include_ged_missing ? decide(true, DropoutRule::kGedMissing)
                                      : decide(false, DropoutRule::kExcludedGedMissing);
}

std::size_t DropoutSubset::deferred() const {
  return static_cast<std::size_t>(std::count_if(
      decisions.begin(), decisions.end(),
      [](const DropoutDecision& d) { return d.rule == DropoutRule::kDeferred; }));
}

DropoutSubset build_dropout_subset(std::span<const PersonYearWage> wages,
                                   std::span<const PersonDemographics> demog,
                                   const DropoutCriteria& criteria) {
  std::unordered_set<CaseId> in_wages;
  for (const auto& w : wages) in_wages.insert(w.id);

  DropoutSubset out;
  std::unordered_set<CaseId> included;
  for (const auto& person : demog) {
    DropoutDecision d = classify_dropout(person, criteria);
    if (d.included && !in_wages.count(person.id)) {
      d.included = false;
      d.rule = DropoutRule::kExcludedFewRounds;
    }
    if (d.included) included.insert(person.id);
    out.decisions.push_back(d);
  }
  std::sort(out.decisions.begin(), out.decisions.end(),
            [](const DropoutDecision& a, const DropoutDecision& b) { return a.id < b.id; });
  for (const auto& w : wages) {
    if (included.count(w.id)) out.rows.push_back(w);
  }
  out.ids.assign(included.begin(), included.end());
  std::sort(out.ids.begin(), out.ids.end());
  return out;
}

std::size_t Reconciliation::count(std::string_view category) const {
  auto it = categories.find(std::string(category));
  return it == categories.end() ? 0 : it->second.size();
}

ordered_json Reconciliation::to_json() const {
  ordered_json j;
  j["refreshed"] = refreshed;
  j["original"] = original;
  j["matched"] = matched;
  ordered_json counts = ordered_json::object();
  ordered_json detail = ordered_json::object();
  for (auto name : kReconciliationCategories) {
    const std::string key(name);
    counts[key] = count(name);
    auto arr = ordered_json::array();
    if (auto it = categories.find(key); it != categories.end()) {
      for (const auto& r : it->second) {
        arr.push_back({{"id", r.id.value}, {"side", r.in_refreshed ? "refreshed" : "original"}});
      }
    }
    detail[key] = std::move(arr);
  }
  j["counts"] = std::move(counts);
  j["ids"] = std::move(detail);
  return j;
}

Reconciliation reconcile_with_original(std::span<const CaseId> refreshed_ids,
                                       std::span<const CaseId> original_ids,
                                       std::span<const PersonDemographics> demog,
                                       std::span<const CaseId> wage_ids) {
  const auto refreshed = sorted_unique(refreshed_ids, "refreshed ids");
  const auto original = sorted_unique(original_ids, "original ids");
  std::unordered_map<CaseId, const PersonDemographics*> person;
  for (const auto& p : demog) person[p.id] = &p;
  const std::unordered_set<CaseId> with_wages(wage_ids.begin(), wage_ids.end());

  Reconciliation out;
  out.refreshed = refreshed.size();
  out.original = original.size();
  for (auto name : kReconciliationCategories) out.categories[std::string(name)];

  auto categorize = [&](CaseId id) -> std::string_view {
    auto it = person.find(id);
    if (it == person.end()) return "unexplained";
    const PersonDemographics& p = *it->second;
    if (p.age_1979 && *p.age_1979 > 17) return "older_than_17";
    if (p.hgc_i && *p.hgc_i >= kDiplomaGrade && p.ged == GedStatus::kDiploma) {
      return "diploma_excluded";
    }
    if (p.hgc_i && *p.hgc_i >= kDiplomaGrade && !p.ged) return "ged_missing";
    if (p.hgc_i && *p.hgc_i >= kDiplomaGrade && p.ged == GedStatus::kBoth) return "ged_both";
    if (!with_wages.count(id)) return "fewer_than_3_rounds";
    return "unexplained";
  };

  std::size_t i = 0, j = 0;
  while (i < refreshed.size() || j < original.size()) {
    if (j == original.size() || (i < refreshed.size() && refreshed[i] < original[j])) {
      out.categories["unexplained"].push_back({refreshed[i++], true});
    } else if (i == refreshed.size() || original[j] < refreshed[i]) {
      const CaseId id = original[j++];
      out.categories[std::string(categorize(id))].push_back({id, false});
    } else {
      ++out.matched;
      ++i;
      ++j;
    }
  }
  return out;
}

std::vector<OriginalRow> read_original_csv(std::string_view text) {
  std::vector<std::string> header;
  const auto rows = read_csv(text, header);
  const auto id_col = find_column(header, {"id"});
  const auto lnw_col = find_column(header, {"lnw", "ln_wages"});
  const auto exp_col = find_column(header, {"exper", "xp"});
  const auto hgc_col = find_column(header, {"hgc", "high_grade"});
  const auto black_col = find_column(header, {"black"});
  const auto hisp_col = find_column(header, {"hispanic"});
  if (!id_col || !lnw_col || !exp_col || !hgc_col) {
    throw Error("original subset needs id, lnw, exper and hgc columns");
  }
  auto number = [](const std::string& field, std::string_view what) {
    auto v = parse_decimal(trim(field));
    if (!v) throw Error("original subset: bad " + std::string(what) + " '" + field + "'");
    return *v;
  };
  auto flag = [](const std::vector<std::string>& row,
                 std::optional<std::size_t> col) -> std::optional<int> {
    if (!col) return std::nullopt;
    auto v = parse_integer(trim(row[*col]));
    if (!v) return std::nullopt;
    return static_cast<int>(*v);
  };
  std::vector<OriginalRow> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    OriginalRow r;
    auto id = parse_integer(trim(row[*id_col]));
    if (!id || *id <= 0) throw Error("original subset: bad id '" + row[*id_col] + "'");
    r.id = CaseId{*id};
    r.lnw = number(row[*lnw_col], "lnw");
    r.exper = number(row[*exp_col], "exper");
    if (auto h = parse_decimal(trim(row[*hgc_col]))) r.hgc = static_cast<int>(std::lround(*h));
    r.black = flag(row, black_col);
    r.hispanic = flag(row, hisp_col);
    out.push_back(r);
  }
  return out;
}

std::vector<CaseId> read_id_list(std::string_view text) {
  std::vector<std::string> header;
  const auto rows = read_csv(text, header);
  const auto col = find_column(header, {"id"});
  if (!col) throw Error("id list needs an id column");
  std::vector<CaseId> ids;
  ids.reserve(rows.size());
  for (const auto& row : rows) {
    auto id = parse_integer(trim(row[*col]));
    if (!id) throw Error("bad id '" + row[*col] + "'");
    ids.push_back(CaseId{*id});
  }
  return sorted_unique(ids, "id list");
}

std::size_t BinSpec::bins() const {
  return static_cast<std::size_t>(std::llround((hi - lo) / width));
}

double Density::density(std::size_t bin) const {
  if (n == 0) return 0.0;
  return static_cast<double>(counts.at(bin)) / (static_cast<double>(n) * spec.width);
}

Density bin_values(std::span<const double> values, const BinSpec& spec) {
  Density d;
  d.spec = spec;
  d.counts.assign(spec.bins(), 0);
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    ++d.n;
    if (v < spec.lo) {
      ++d.below;
    } else if (v > spec.hi) {
      ++d.above;
    } else {
      auto bin = static_cast<std::size_t>(std::floor((v - spec.lo) / spec.width));
      ++d.counts[std::min(bin, d.counts.size() - 1)];
    }
  }
  return d;
}

double max_abs_density_difference(const Density& a, const Density& b) {
  if (a.counts.size() != b.counts.size()) throw Error("densities use different bins");
  double m = 0.0;
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    m = std::max(m, std::abs(a.density(i) - b.density(i)));
  }
  return m;
}

std::string Comparison::hgc_csv() const {
  std::set<int> grades;
  for (const auto& kv : hgc_refreshed) grades.insert(kv.first);
  for (const auto& kv : hgc_original) grades.insert(kv.first);
  std::string out = "hgc,refreshed,original\n";
  for (int g : grades) {
    auto r = hgc_refreshed.find(g);
    auto o = hgc_original.find(g);
    out += std::to_string(g) + ',' + std::to_string(r == hgc_refreshed.end() ? 0 : r->second) +
           ',' + std::to_string(o == hgc_original.end() ? 0 : o->second) + '\n';
  }
  return out;
}

std::string Comparison::experience_csv() const { return density_csv(exp_refreshed, exp_original); }

std::string Comparison::log_wage_csv() const { return density_csv(lnw_refreshed, lnw_original); }

ordered_json Comparison::to_json() const {
  ordered_json j;
  j["experience"] = {{"refreshed", density_json(exp_refreshed)},
                     {"original", density_json(exp_original)},
                     {"max_abs_difference", max_abs_density_difference(exp_refreshed, exp_original)}};
  j["log_wage"] = {{"refreshed", density_json(lnw_refreshed)},
                   {"original", density_json(lnw_original)},
                   {"max_abs_difference", max_abs_density_difference(lnw_refreshed, lnw_original)},
                   {"nonpositive_wages_excluded", nonpositive_wages}};
  return j;
}

Comparison compare_summaries(std::span<const PersonYearWage> refreshed,
                             std::span<const OriginalRow> original) {
  Comparison c;
  std::vector<double> exp_r, lnw_r, exp_o, lnw_o;
  std::set<CaseId> seen;
  for (const auto& w : refreshed) {
    if (seen.insert(w.id).second && w.hgc_i) ++c.hgc_refreshed[*w.hgc_i];
    exp_r.push_back(w.exp);
    if (!w.wage) continue;
    if (*w.wage <= 0.0) {
      ++c.nonpositive_wages;
      continue;
    }
    lnw_r.push_back(std::log(*w.wage));
  }
  seen.clear();
  for (const auto& o : original) {
    if (seen.insert(o.id).second && o.hgc) ++c.hgc_original[*o.hgc];
    exp_o.push_back(o.exper);
    lnw_o.push_back(o.lnw);
  }
  c.exp_refreshed = bin_values(exp_r, kExperienceBins);
  c.exp_original = bin_values(exp_o, kExperienceBins);
  c.lnw_refreshed = bin_values(lnw_r, kLogWageBins);
  c.lnw_original = bin_values(lnw_o, kLogWageBins);
  return c;
}

double CpiTable::at(int year) const {
  auto it = index.find(year);
  if (it == index.end()) throw Error("cpi has no index for year " + std::to_string(year));
  return it->second;
}

CpiTable read_cpi_csv(std::string_view text) {
  std::vector<std::string> header;
  const auto rows = read_csv(text, header);
  if (header.size() != 2) throw Error("cpi table needs two columns: year, index");
  CpiTable t;
  for (const auto& row : rows) {
    auto year = parse_integer(trim(row[0]));
    auto value = parse_decimal(trim(row[1]));
    if (!year) throw Error("cpi: bad year '" + row[0] + "'");
    if (!value || !(*value > 0.0) || !std::isfinite(*value)) {
      throw Error("cpi: index for " + std::to_string(*year) + " must be positive");
    }
    if (!t.index.emplace(static_cast<int>(*year), *value).second) {
      throw Error("cpi: duplicate year " + std::to_string(*year));
    }
  }
  return t;
}

std::vector<PersonYearWage> adjust_inflation(std::span<const PersonYearWage> wages,
                                             const CpiTable& cpi, int base_year) {
  const double base = cpi.at(base_year);
  std::vector<PersonYearWage> out(wages.begin(), wages.end());
  for (auto& w : out) {
    const double ratio = base / cpi.at(w.year);
    if (w.wage) w.wage = *w.wage * ratio;
  }
  return out;
}

std::vector<PersonYearWage> restore_nominal(std::span<const PersonYearWage> adjusted,
                                            const CpiTable& cpi, int base_year) {
  const double base = cpi.at(base_year);
  std::vector<PersonYearWage> out(adjusted.begin(), adjusted.end());
  for (auto& w : out) {
    const double ratio = cpi.at(w.year) / base;
    if (w.wage) w.wage = *w.wage * ratio;
  }
  return out;
}

}  // namespace wagepanel
