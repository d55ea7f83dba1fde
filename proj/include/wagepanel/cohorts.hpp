// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wagepanel/common.hpp"
#include "wagepanel/demographics.hpp"
#include "wagepanel/employment.hpp"

namespace wagepanel {

// Dropout rule table, evaluated top to bottom; the first matching row decides.
//
//   sex not male (when males_only)           -> ExcludedSex
//   age outside [min_age, max_age] (if set)  -> ExcludedAge
//   hgc_i >= 12 and ged == 1                 -> ExcludedDiploma
//   hgc_i < 12                               -> HgcBelow12
//   ged == 2                                 -> GedEquivalency
//   ged == 3                                 -> GedBoth, or ExcludedGedBoth
//   ged missing                              -> GedMissing, or ExcludedGedMissing
//
// hgc_i missing defers the decision (Deferred). An included person with fewer
// than three wage rounds becomes ExcludedFewRounds when the subset is built.
enum class DropoutRule {
  kHgcBelow12,
  kGedEquivalency,
  kGedBoth,
  kGedMissing,
  kExcludedDiploma,
  kExcludedFewRounds,
  kExcludedSex,
  kExcludedAge,
  kExcludedGedBoth,
  kExcludedGedMissing,
  kDeferred,
};

std::string_view dropout_rule_name(DropoutRule rule);

struct DropoutCriteria {
  bool males_only = true;
  std::optional<int> min_age;
  std::optional<int> max_age;
  bool include_ged_missing = true;
  bool include_ged_both = true;

  /// Males aged 14 to 17 holding a GED only: the textbook description.
  static DropoutCriteria strict();
};

struct DropoutDecision {
  CaseId id;
  bool included = false;
  DropoutRule rule = DropoutRule::kDeferred;
};

DropoutDecision classify_dropout(const PersonDemographics& person,
                                 const DropoutCriteria& criteria = {});

struct DropoutSubset {
  std::vector<DropoutDecision> decisions;  // one per demog row, ascending id
  std::vector<PersonYearWage> rows;        // wage rows of included ids, input order
  std::vector<CaseId> ids;                 // included ids, ascending

  std::size_t deferred() const;
};

DropoutSubset build_dropout_subset(std::span<const PersonYearWage> wages,
                                   std::span<const PersonDemographics> demog,
                                   const DropoutCriteria& criteria = {});

/// Categories in the order they are tried.
inline constexpr std::string_view kReconciliationCategories[] = {
    "older_than_17", "diploma_excluded", "ged_missing",
    "ged_both",      "fewer_than_3_rounds", "unexplained"};

struct ReconciledId {
  CaseId id;
  bool in_refreshed = false;  // otherwise only in the original list
};

struct Reconciliation {
  std::size_t refreshed = 0;
  std::size_t original = 0;
  std::size_t matched = 0;
  std::map<std::string, std::vector<ReconciledId>> categories;

  std::size_t count(std::string_view category) const;
  nlohmann::ordered_json to_json() const;
};

/// Explains the symmetric difference between two id lists using the refreshed
/// demographics and the set of ids that survived the round filter. Every
/// differing id lands in exactly one category. Duplicate ids are an error.
Reconciliation reconcile_with_original(std::span<const CaseId> refreshed_ids,
                                       std::span<const CaseId> original_ids,
                                       std::span<const PersonDemographics> demog,
                                       std::span<const CaseId> wage_ids);

/// The textbook subset's row: one person-year without the year.
struct OriginalRow {
  CaseId id;
  double lnw = 0.0;
  double exper = 0.0;
  std::optional<int> hgc;
  std::optional<int> black;
  std::optional<int> hispanic;
};

/// Accepts id, lnw (or ln_wages), exper (or xp), hgc (or high_grade), and the
/// optional black / hispanic flags. Other columns are ignored.
std::vector<OriginalRow> read_original_csv(std::string_view text);

/// Distinct ids, ascending. Duplicates are an error.
std::vector<CaseId> read_id_list(std::string_view text);

struct BinSpec {
  double lo = 0.0;
  double hi = 0.0;
  double width = 1.0;

  std::size_t bins() const;
};

inline constexpr BinSpec kExperienceBins{0.0, 45.0, 1.0};
inline constexpr BinSpec kLogWageBins{0.0, 8.0, 0.25};

struct Density {
  BinSpec spec;
  std::vector<std::size_t> counts;
  std::size_t n = 0;  // values binned or out of range
  std::size_t below = 0;
  std::size_t above = 0;

  /// counts[i] / (n * width); zero when n is zero.
  double density(std::size_t bin) const;
};

/// Bin i is [lo + i*w, lo + (i+1)*w); the top edge belongs to the last bin.
Density bin_values(std::span<const double> values, const BinSpec& spec);

double max_abs_density_difference(const Density& a, const Density& b);

struct Comparison {
  std::map<int, std::size_t> hgc_refreshed;  // persons per hgc_i
  std::map<int, std::size_t> hgc_original;   // persons per hgc
  Density exp_refreshed, exp_original;
  Density lnw_refreshed, lnw_original;
  std::size_t nonpositive_wages = 0;

  std::string hgc_csv() const;
  std::string experience_csv() const;
  std::string log_wage_csv() const;
  nlohmann::ordered_json to_json() const;
};

Comparison compare_summaries(std::span<const PersonYearWage> refreshed,
                             std::span<const OriginalRow> original);

struct CpiTable {
  std::map<int, double> index;

  double at(int year) const;  // throws naming the year
};

/// Two columns, year and index; every index must be positive.
CpiTable read_cpi_csv(std::string_view text);

/// wage * (cpi(base_year) / cpi(year)); flags untouched.
std::vector<PersonYearWage> adjust_inflation(std::span<const PersonYearWage> wages,
                                             const CpiTable& cpi, int base_year);

/// Inverse of adjust_inflation for the same base year.
std::vector<PersonYearWage> restore_nominal(std::span<const PersonYearWage> adjusted,
                                            const CpiTable& cpi, int base_year);

}  // namespace wagepanel
