// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "wagepanel/common.hpp"
#include "wagepanel/issues.hpp"
#include "wagepanel/raw_ingest.hpp"

namespace wagepanel {

enum class Sex { kFemale, kMale };
enum class Race { kHispanic, kBlack, kNonBlackNonHispanic };
enum class GedStatus { kDiploma = 1, kGed = 2, kBoth = 3 };

std::string_view sex_code(Sex sex);     // "f" / "m"
std::string_view race_code(Race race);  // "H" / "B" / "NBH"
std::optional<Sex> parse_sex_code(std::string_view code);
std::optional<Race> parse_race_code(std::string_view code);

/// One cross-sectional row per respondent.
struct PersonDemographics {
  CaseId id;
  std::optional<int> age_1979;
  std::optional<Sex> sex;
  std::optional<Race> race;
  std::optional<int> hgc_i;     // highest grade ever completed, 0..20
  std::optional<int> hgc_1979;  // grade as of the 1979 round
  std::optional<GedStatus> ged;

  /// Label form of hgc_i, e.g. "10TH GRADE".
  std::optional<std::string_view> hgc() const;

  friend bool operator==(const PersonDemographics&, const PersonDemographics&) = default;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// Two-digit year answers (58) are read as 19xx.
int normalize_year(std::int64_t value);

struct BirthYear {
  std::optional<int> year;
  bool consistent = true;
};

/// Prefers the 1979 report; flags disagreement with the 1981 report.
BirthYear derive_birth_year(std::optional<int> report_1979, std::optional<int> report_1981);

inline constexpr int kMinBirthYear = 1955;
inline constexpr int kMaxBirthYear = 1966;

/// Throws DomainError outside 1955..1966.
int derive_age_1979(int birth_year);

/// Survey codes: sex 1 = male, 2 = female; race 1 = Hispanic, 2 = Black,
/// 3 = non-Black non-Hispanic. Throws DomainError on anything else.
Sex decode_sex(std::int64_t raw);
Race decode_race(std::int64_t raw);

struct HighestGrade {
  std::string_view label;
  int grade = 0;
};

/// Missing input gives nullopt; a code outside 0..20 throws DomainError.
std::optional<HighestGrade> derive_hgc_ever(std::optional<std::int64_t> raw);

/// Latest non-missing status wins. Codes other than 1..3 are ignored.
std::optional<GedStatus> derive_ged(const std::map<int, std::optional<int>>& status_by_year);

/// Never throws on a single bad person; findings go to the issue log.
std::vector<PersonDemographics> build_demog_table(const RawTable& raw, IssueLog& issues);

}  // namespace wagepanel
