// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include <gtest/gtest.h>

#include "wagepanel/demographics.hpp"
#include "wagepanel/issues.hpp"

namespace wagepanel {
namespace {

using Row = std::vector<std::optional<std::int64_t>>;

TEST(Demographics, NormalizeYear) {
  EXPECT_EQ(normalize_year(58), 1958);
  EXPECT_EQ(normalize_year(0), 1900);
  EXPECT_EQ(normalize_year(1962), 1962);
}

TEST(Demographics, BirthYearPrefers1979Report) {
  auto b = derive_birth_year(1960, 1961);
  EXPECT_EQ(b.year, 1960);
  EXPECT_FALSE(b.consistent);
  b = derive_birth_year(std::nullopt, 1961);
  EXPECT_EQ(b.year, 1961);
  EXPECT_TRUE(b.consistent);
  b = derive_birth_year(1960, 1960);
  EXPECT_TRUE(b.consistent);
  EXPECT_FALSE(derive_birth_year(std::nullopt, std::nullopt).year);
}

TEST(Demographics, AgeDomain) {
  EXPECT_EQ(derive_age_1979(1964), 15);
  EXPECT_EQ(derive_age_1979(1955), 24);
  EXPECT_EQ(derive_age_1979(1966), 13);
  EXPECT_THROW(derive_age_1979(1954), DomainError);
  EXPECT_THROW(derive_age_1979(1967), DomainError);
}

TEST(Demographics, CodeDecoding) {
  EXPECT_EQ(decode_sex(1), Sex::kMale);
  EXPECT_EQ(decode_sex(2), Sex::kFemale);
  EXPECT_THROW(decode_sex(3), DomainError);
  EXPECT_EQ(decode_race(1), Race::kHispanic);
  EXPECT_EQ(decode_race(2), Race::kBlack);
  EXPECT_EQ(decode_race(3), Race::kNonBlackNonHispanic);
  EXPECT_THROW(decode_race(0), DomainError);
  EXPECT_EQ(sex_code(Sex::kMale), "m");
  EXPECT_EQ(race_code(Race::kNonBlackNonHispanic), "NBH");
  EXPECT_EQ(parse_race_code("B"), Race::kBlack);
  EXPECT_FALSE(parse_sex_code("x"));
}

TEST(Demographics, HighestGradeEver) {
  EXPECT_FALSE(derive_hgc_ever(std::nullopt));
  const auto g = derive_hgc_ever(10);
  ASSERT_TRUE(g);
  EXPECT_EQ(g->grade, 10);
  EXPECT_EQ(g->label, "10TH GRADE");
  EXPECT_THROW(derive_hgc_ever(95), DomainError);
}

TEST(Demographics, GedLatestValidCodeWins) {
  EXPECT_EQ(derive_ged({{1988, 2}, {1990, std::nullopt}, {1996, 1}}), GedStatus::kDiploma);
  EXPECT_EQ(derive_ged({{1988, 3}, {1990, std::nullopt}}), GedStatus::kBoth);
  EXPECT_EQ(derive_ged({{1988, 2}, {2000, 7}}), GedStatus::kGed);
  EXPECT_FALSE(derive_ged({{1988, std::nullopt}}));
}

TEST(Demographics, BuildTableFromRaw) {
  const std::vector<std::string> names{
      "CASEID_1979",  "Q1-3_A~Y_1979",    "Q1-3_A~Y_1981", "SAMPLE_SEX_1979",
      "SAMPLE_RACE_78SCRN", "HGC_EVER_XRND", "HGC_1979",  "HGCREV79_1979",
      "Q3-8A_1988",   "Q3-8A_1990"};
  const std::vector<Row> rows{
      {20, 62, 62, 1, 2, 10, 8, 9, 2, -4},
      {10, -3, 60, 2, 3, 12, 11, std::nullopt, 7, 1},
      {30, 62, 63, 9, -1, 95, 8, 8, -4, -4},
      {40, 50, 50, 1, 1, 11, 8, 8, 3, -4},
  };
  const RawTable raw = RawTable::from_columns(names, rows);
  IssueLog issues;
  const auto demog = build_demog_table(raw, issues);
  ASSERT_EQ(demog.size(), 4u);

  EXPECT_EQ(demog[0].id, CaseId{10});
  EXPECT_EQ(demog[0].age_1979, 19);  // only the 1981 report
  EXPECT_EQ(demog[0].sex, Sex::kFemale);
  EXPECT_EQ(demog[0].hgc_1979, std::nullopt);  // revised column blank wins
  EXPECT_EQ(demog[0].ged, GedStatus::kDiploma);
  EXPECT_EQ(demog[0].hgc(), "12TH GRADE");

  EXPECT_EQ(demog[1].age_1979, 17);
  EXPECT_EQ(demog[1].sex, Sex::kMale);
  EXPECT_EQ(demog[1].race, Race::kBlack);
  EXPECT_EQ(demog[1].hgc_i, 10);
  EXPECT_EQ(demog[1].hgc_1979, 9);
  EXPECT_EQ(demog[1].ged, GedStatus::kGed);

  EXPECT_EQ(demog[2].age_1979, 17);
  EXPECT_FALSE(demog[2].sex);
  EXPECT_FALSE(demog[2].race);
  EXPECT_FALSE(demog[2].hgc_i);
  EXPECT_FALSE(demog[2].hgc());

  EXPECT_FALSE(demog[3].age_1979);  // born 1950

  EXPECT_EQ(issues.count(IssueKind::kBirthYearConflict), 1u);
  EXPECT_EQ(issues.count(IssueKind::kUnknownSexCode), 1u);
  EXPECT_EQ(issues.count(IssueKind::kUnknownRaceCode), 1u);
  EXPECT_EQ(issues.count(IssueKind::kGradeEverOutOfRange), 1u);
  EXPECT_EQ(issues.count(IssueKind::kUnknownDiplomaCode), 1u);
  EXPECT_EQ(issues.count(IssueKind::kBirthYearOutOfRange), 1u);
}

}  // namespace
}  // namespace wagepanel
