// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#pragma once

#include <array>
#include <cstdint>
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

enum class CheckStatus { kPass, kFail, kWarn };

std::string_view check_status_name(CheckStatus status);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::kPass;
  nlohmann::ordered_json expected;
  nlohmann::ordered_json observed;
  std::vector<CaseId> affected_ids;
  std::string note;
};

class ValidationReport {
 public:
  ValidationReport(std::string generated_at, std::string input_digest)
      : generated_at_(std::move(generated_at)), input_digest_(std::move(input_digest)) {}

  /// Appends a result; a second result under the same name is an error.
  void add(CheckResult result);

  const std::vector<CheckResult>& checks() const { return checks_; }
  const CheckResult* find(std::string_view name) const;
  bool any_failed() const;
  const std::string& generated_at() const { return generated_at_; }
  const std::string& input_digest() const { return input_digest_; }

  nlohmann::ordered_json to_json() const;
  std::string to_text() const;

 private:
  std::string generated_at_;
  std::string input_digest_;
  std::vector<CheckResult> checks_;
};

inline constexpr int kMinPlausibleAge = 12;
inline constexpr int kMaxPlausibleAge = 22;

/// Pass iff every known age_1979 lies in [12, 22].
CheckResult check_age_range(std::span<const PersonDemographics> demog);

struct AgeTabulation {
  std::map<int, std::size_t> counts;
  std::size_t missing = 0;
  std::size_t total = 0;
};

AgeTabulation tabulate_age(std::span<const PersonDemographics> demog);

struct SexRaceTabulation {
  static constexpr std::array<Sex, 2> kRows{Sex::kFemale, Sex::kMale};
  static constexpr std::array<Race, 3> kColumns{Race::kHispanic, Race::kBlack,
                                                Race::kNonBlackNonHispanic};

  std::array<std::array<std::size_t, 3>, 2> counts{};
  std::array<std::size_t, 2> row_totals{};
  std::array<std::size_t, 3> column_totals{};
  std::size_t total = 0;
  std::size_t unclassified = 0;  // sex or race missing

  /// Cell share of its row, rounded to the nearest whole percent.
  int row_percent(std::size_t row, std::size_t column) const;
};

SexRaceTabulation tabulate_sex_race(std::span<const PersonDemographics> demog);

struct ProfileSummary {
  CaseId id;
  int n_obs = 0;
  double wage_min = 0.0;
  double wage_median = 0.0;
  double wage_max = 0.0;
  int first_year = 0;
  int last_year = 0;
};

/// One summary per id with at least one wage, ascending id.
std::vector<ProfileSummary> profile_summaries(std::span<const PersonYearWage> wages);

std::string profiles_to_csv(std::span<const ProfileSummary> profiles);

class SamplingError : public Error {
 public:
  using Error::Error;
};

/// Uniform sample without replacement: ids are sorted, a std::mt19937_64 seeded
/// with `seed` drives a partial Fisher-Yates shuffle (bounded draws by rejection),
/// and the chosen ids are returned sorted.
std::vector<CaseId> sample_ids(std::vector<CaseId> population, std::size_t n, std::uint64_t seed);

struct SampledProfile {
  CaseId id;
  std::vector<const PersonYearWage*> rows;
};

std::vector<SampledProfile> sample_profiles(std::span<const PersonYearWage> wages, std::size_t n,
                                            std::uint64_t seed);

/// Published totals for one data vintage.
struct Expectations {
  std::size_t rows = 0;
  std::map<std::string, std::size_t> sex;
  std::map<int, std::size_t> ages;
  std::map<std::string, std::map<std::string, std::size_t>> sex_race;
  std::optional<std::size_t> dropouts;
  std::map<std::string, std::size_t> reconciliation;
  std::optional<double> max_repaired_wage;
};

/// Vintage-keyed expectations; nullopt when the vintage has no entry.
std::optional<Expectations> load_expectations(std::string_view json_text, std::string_view vintage);

struct ValidationInput {
  std::span<const PersonDemographics> demog;
  std::span<const PersonYearWage> wages;
  std::optional<Expectations> expectations;
  std::string vintage;
  std::string generated_at;
  std::string input_digest;
};

/// Runs the registered checks in fixed order: age_range, row_count, sex_counts,
/// age_tabulation, sex_race_tabulation, tabulation_margins, profile_order.
ValidationReport validate(const ValidationInput& input);

}  // namespace wagepanel
