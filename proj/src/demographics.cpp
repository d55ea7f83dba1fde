// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include "wagepanel/demographics.hpp"

#include <algorithm>

#include "wagepanel/employment.hpp"
#include "wagepanel/grade_labels.hpp"

namespace wagepanel {
namespace {

std::optional<int> first_integer(const RawRecord& record, const RawTable& raw, Family family) {
  for (int year : raw.years_of(family)) {
    if (auto v = record.get(family, year).integer()) return static_cast<int>(*v);
  }
  return std::nullopt;
}

}  // namespace

std::string_view sex_code(Sex sex) { return sex == Sex::kMale ? "m" : "f"; }

std::string_view race_code(Race race) {
  switch (race) {
    case Race::kHispanic: return "H";
    case Race::kBlack: return "B";
    case Race::kNonBlackNonHispanic: return "NBH";
  }
  return "?";
}

std::optional<Sex> parse_sex_code(std::string_view code) {
  if (code == "m") return Sex::kMale;
  if (code == "f") return Sex::kFemale;
  return std::nullopt;
}

std::optional<Race> parse_race_code(std::string_view code) {
  if (code == "H") return Race::kHispanic;
  if (code == "B") return Race::kBlack;
  if (code == "NBH") return Race::kNonBlackNonHispanic;
  return std::nullopt;
}

std::optional<std::string_view> PersonDemographics::hgc() const {
  if (!hgc_i) return std::nullopt;
  return grade_label(*hgc_i);
}

int normalize_year(std::int64_t value) {
  if (value >= 0 && value < 100) return static_cast<int>(1900 + value);
  return static_cast<int>(value);
}

BirthYear derive_birth_year(std::optional<int> report_1979, std::optional<int> report_1981) {
  BirthYear out;
  out.year = report_1979 ? report_1979 : report_1981;
  out.consistent = !(report_1979 && report_1981 && *report_1979 != *report_1981);
  return out;
}

int derive_age_1979(int birth_year) {
  if (birth_year < kMinBirthYear || birth_year > kMaxBirthYear) {
    throw DomainError("birth year " + std::to_string(birth_year) + " outside " +
                      std::to_string(kMinBirthYear) + ".." + std::to_string(kMaxBirthYear));
  }
  return 1979 - birth_year;
}

Sex decode_sex(std::int64_t raw) {
  if (raw == 1) return Sex::kMale;
  if (raw == 2) return Sex::kFemale;
  throw DomainError("unknown sex code " + std::to_string(raw));
}

Race decode_race(std::int64_t raw) {
  switch (raw) {
    case 1: return Race::kHispanic;
    case 2: return Race::kBlack;
    case 3: return Race::kNonBlackNonHispanic;
    default: throw DomainError("unknown race code " + std::to_string(raw));
  }
}

std::optional<HighestGrade> derive_hgc_ever(std::optional<std::int64_t> raw) {
  if (!raw) return std::nullopt;
  if (*raw < kMinGrade || *raw > kMaxGrade) {
    throw DomainError("highest grade code " + std::to_string(*raw) + " outside 0..20");
  }
  const int grade = static_cast<int>(*raw);
  return HighestGrade{*grade_label(grade), grade};
}

std::optional<GedStatus> derive_ged(const std::map<int, std::optional<int>>& status_by_year) {
  for (auto it = status_by_year.rbegin(); it != status_by_year.rend(); ++it) {
    if (it->second && *it->second >= 1 && *it->second <= 3) {
      return static_cast<GedStatus>(*it->second);
    }
  }
  return std::nullopt;
}

std::vector<PersonDemographics> build_demog_table(const RawTable& raw, IssueLog& issues) {
  std::vector<PersonDemographics> out;
  out.reserve(raw.row_count());
  const auto diploma_years = raw.years_of(Family::kDiploma);

  for (std::size_t r = 0; r < raw.row_count(); ++r) {
    const RawRecord rec = raw.record(r);
    PersonDemographics p;
    p.id = rec.id();

    auto birth_report = [&](int year) -> std::optional<int> {
      if (auto v = rec.get(Family::kBirthYear, year).integer()) return normalize_year(*v);
      return std::nullopt;
    };
    const auto b79 = birth_report(1979);
    const auto b81 = birth_report(1981);
    const BirthYear birth = derive_birth_year(b79, b81);
    if (!birth.consistent) {
      issues.add(IssueKind::kBirthYearConflict, p.id, {},
                 "1979=" + std::to_string(*b79) + " 1981=" + std::to_string(*b81));
    }
    if (!birth.year) {
      issues.add(IssueKind::kBirthYearMissing, p.id);
    } else {
      try {
        p.age_1979 = derive_age_1979(*birth.year);
      } catch (const DomainError& e) {
        issues.add(IssueKind::kBirthYearOutOfRange, p.id, {}, e.what());
      }
    }

    if (auto code = first_integer(rec, raw, Family::kSampleSex)) {
      try {
        p.sex = decode_sex(*code);
      } catch (const DomainError& e) {
        issues.add(IssueKind::kUnknownSexCode, p.id, {}, e.what());
      }
    } else {
      issues.add(IssueKind::kUnknownSexCode, p.id, {}, "missing");
    }
    if (auto code = first_integer(rec, raw, Family::kSampleRace)) {
      try {
        p.race = decode_race(*code);
      } catch (const DomainError& e) {
        issues.add(IssueKind::kUnknownRaceCode, p.id, {}, e.what());
      }
    } else {
      issues.add(IssueKind::kUnknownRaceCode, p.id, {}, "missing");
    }

    try {
      if (auto hgc = derive_hgc_ever(rec.get(Family::kGradeEver, std::nullopt).integer())) {
        p.hgc_i = hgc->grade;
      }
    } catch (const DomainError& e) {
      issues.add(IssueKind::kGradeEverOutOfRange, p.id, {}, e.what());
    }

    const auto grades = grade_series(rec, raw, nullptr);
    if (auto it = grades.find(1979); it != grades.end()) p.hgc_1979 = it->second;

    std::map<int, std::optional<int>> ged_by_year;
    for (int year : diploma_years) {
      std::optional<int> code;
      if (auto v = rec.get(Family::kDiploma, year).integer()) {
        if (*v >= 1 && *v <= 3) {
          code = static_cast<int>(*v);
        } else {
          issues.add(IssueKind::kUnknownDiplomaCode, p.id, year, "code " + std::to_string(*v));
        }
      }
      ged_by_year[year] = code;
    }
    p.ged = derive_ged(ged_by_year);

    out.push_back(p);
  }
  std::sort(out.begin(), out.end(),
            [](const PersonDemographics& a, const PersonDemographics& b) { return a.id < b.id; });
  return out;
}

}  // namespace wagepanel
