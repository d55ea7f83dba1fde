// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include <gtest/gtest.h>

#include <random>

#include "wagepanel/cohorts.hpp"

namespace wagepanel {
namespace {

PersonDemographics person(std::int64_t id, Sex sex, std::optional<int> age, std::optional<int> hgc,
                          std::optional<GedStatus> ged) {
  PersonDemographics p;
  p.id = CaseId{id};
  p.sex = sex;
  p.age_1979 = age;
  p.hgc_i = hgc;
  p.ged = ged;
  return p;
}

PersonYearWage wage_row(std::int64_t id, int year, std::optional<double> wage) {
  PersonYearWage w;
  w.id = CaseId{id};
  w.year = year;
  w.wage = wage;
  return w;
}

TEST(DropoutRules, TableOrder) {
  const DropoutCriteria def;
  const auto m = Sex::kMale;
  struct Case {
    PersonDemographics p;
    bool included;
    DropoutRule rule;
  };
  const Case cases[] = {
      {person(1, m, 16, 10, std::nullopt), true, DropoutRule::kHgcBelow12},
      {person(2, m, 16, 10, GedStatus::kDiploma), true, DropoutRule::kHgcBelow12},
      {person(3, m, 16, 12, GedStatus::kDiploma), false, DropoutRule::kExcludedDiploma},
      {person(4, m, 16, 12, GedStatus::kGed), true, DropoutRule::kGedEquivalency},
      {person(5, m, 16, 13, GedStatus::kBoth), true, DropoutRule::kGedBoth},
      {person(6, m, 16, 12, std::nullopt), true, DropoutRule::kGedMissing},
      {person(7, Sex::kFemale, 16, 10, std::nullopt), false, DropoutRule::kExcludedSex},
      {person(8, m, 16, std::nullopt, GedStatus::kGed), false, DropoutRule::kDeferred},
      {person(9, m, 21, 9, std::nullopt), true, DropoutRule::kHgcBelow12},
  };
  for (const auto& c : cases) {
    SCOPED_TRACE(c.p.id.value);
    const auto d = classify_dropout(c.p, def);
    EXPECT_EQ(d.included, c.included);
    EXPECT_EQ(d.rule, c.rule);
    EXPECT_EQ(d.id, c.p.id);
  }
}

TEST(DropoutRules, StrictCriteria) {
  const auto strict = DropoutCriteria::strict();
  EXPECT_EQ(classify_dropout(person(1, Sex::kMale, 21, 9, {}), strict).rule, DropoutRule::kExcludedAge);
  EXPECT_EQ(classify_dropout(person(1, Sex::kMale, std::nullopt, 9, {}), strict).rule,
            DropoutRule::kExcludedAge);
  EXPECT_EQ(classify_dropout(person(1, Sex::kMale, 14, 12, {}), strict).rule,
            DropoutRule::kExcludedGedMissing);
  EXPECT_EQ(classify_dropout(person(1, Sex::kMale, 17, 12, GedStatus::kBoth), strict).rule,
            DropoutRule::kExcludedGedBoth);
  EXPECT_TRUE(classify_dropout(person(1, Sex::kMale, 17, 12, GedStatus::kGed), strict).included);
}

TEST(DropoutRules, ExactlyOneRulePerRandomPerson) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    std::uniform_int_distribution<int> d(0, 30);
    const auto p = person(i + 1, d(rng) % 2 ? Sex::kMale : Sex::kFemale,
                          d(rng) % 5 ? std::optional<int>(12 + d(rng) % 12) : std::nullopt,
                          d(rng) % 6 ? std::optional<int>(d(rng) % 21) : std::nullopt,
                          d(rng) % 4 ? std::optional(static_cast<GedStatus>(1 + d(rng) % 3))
                                     : std::nullopt);
    for (const auto& crit : {DropoutCriteria{}, DropoutCriteria::strict()}) {
      const auto dec = classify_dropout(p, crit);
      const bool excluded = dec.rule == DropoutRule::kExcludedDiploma ||
                            dec.rule == DropoutRule::kExcludedSex ||
                            dec.rule == DropoutRule::kExcludedAge ||
                            dec.rule == DropoutRule::kExcludedGedBoth ||
                            dec.rule == DropoutRule::kExcludedGedMissing ||
                            dec.rule == DropoutRule::kDeferred;
      EXPECT_EQ(dec.included, !excluded);
      if (dec.included) {
        EXPECT_EQ(p.sex, Sex::kMale);
        EXPECT_FALSE(*p.hgc_i >= 12 && p.ged == GedStatus::kDiploma);
      }
    }
  }
}

TEST(DropoutSubset, KeepsRowsOfIncludedIdsWithWages) {
  const std::vector<PersonDemographics> demog{
      person(1, Sex::kMale, 16, 10, {}), person(2, Sex::kMale, 16, 12, GedStatus::kDiploma),
      person(3, Sex::kMale, 16, 11, {}), person(4, Sex::kMale, 16, std::nullopt, {})};
  const std::vector<PersonYearWage> wages{wage_row(2, 1980, 5), wage_row(1, 1980, 5),
                                          wage_row(1, 1981, 6), wage_row(1, 1982, 7)};
  const auto s = build_dropout_subset(wages, demog);
  EXPECT_EQ(s.ids, std::vector<CaseId>{CaseId{1}});
  ASSERT_EQ(s.rows.size(), 3u);
  EXPECT_EQ(s.rows[0].year, 1980);
  ASSERT_EQ(s.decisions.size(), 4u);
  EXPECT_EQ(s.decisions[2].rule, DropoutRule::kExcludedFewRounds);
  EXPECT_FALSE(s.decisions[2].included);
  EXPECT_EQ(s.deferred(), 1u);
}

TEST(Reconciliation, EveryDifferingIdInOneCategory) {
  const std::vector<PersonDemographics> demog{
      person(1, Sex::kMale, 16, 10, {}),                 // matched
      person(2, Sex::kMale, 19, 10, {}),                 // older
      person(3, Sex::kMale, 16, 12, GedStatus::kDiploma),
      person(4, Sex::kMale, 16, 12, {}),
      person(5, Sex::kMale, 16, 12, GedStatus::kBoth),
      person(6, Sex::kMale, 16, 10, {}),                 // not in wages
      person(7, Sex::kMale, 16, 10, {}),                 // refreshed only
  };
  const std::vector<CaseId> refreshed{CaseId{1}, CaseId{7}};
  const std::vector<CaseId> original{CaseId{1}, CaseId{2}, CaseId{3}, CaseId{4},
                                     CaseId{5}, CaseId{6}, CaseId{99}};
  const std::vector<CaseId> wage_ids{CaseId{1}, CaseId{2}, CaseId{3}, CaseId{4}, CaseId{5},
                                     CaseId{7}};
  const auto r = reconcile_with_original(refreshed, original, demog, wage_ids);
  EXPECT_EQ(r.matched, 1u);
  EXPECT_EQ(r.count("older_than_17"), 1u);
  EXPECT_EQ(r.count("diploma_excluded"), 1u);
  EXPECT_EQ(r.count("ged_missing"), 1u);
  EXPECT_EQ(r.count("ged_both"), 1u);
  EXPECT_EQ(r.count("fewer_than_3_rounds"), 1u);
  EXPECT_EQ(r.count("unexplained"), 2u);
  std::size_t total = 0;
  for (auto name : kReconciliationCategories) total += r.count(name);
  EXPECT_EQ(total, (refreshed.size() - r.matched) + (original.size() - r.matched));
  const auto j = r.to_json();
  EXPECT_EQ(j["counts"]["unexplained"], 2);

  const std::vector<CaseId> dup{CaseId{1}, CaseId{1}};
  EXPECT_THROW(reconcile_with_original(dup, original, demog, wage_ids), Error);
}

TEST(OriginalCsv, AliasesAndIdList) {
  const auto rows = read_original_csv("id,ln_wages,xp,high_grade,black\n5,1.5,2.25,9,1\n5,1.7,3,9,\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].id, CaseId{5});
  EXPECT_DOUBLE_EQ(rows[0].lnw, 1.5);
  EXPECT_DOUBLE_EQ(rows[0].exper, 2.25);
  EXPECT_EQ(rows[0].hgc, 9);
  EXPECT_EQ(rows[0].black, 1);
  EXPECT_FALSE(rows[1].black);
  EXPECT_FALSE(rows[0].hispanic);
  EXPECT_THROW(read_original_csv("id,lnw\n1,2\n"), Error);
  EXPECT_EQ(read_id_list("id\n3\n1\n").size(), 2u);
  EXPECT_THROW(read_id_list("id\n3\n3\n"), Error);
}

TEST(Density, BinsEdgesAndNormalization) {
  const std::vector<double> v{0.0, 0.99, 1.0, 45.0, 50.0, -1.0};
  const auto d = bin_values(v, kExperienceBins);
  EXPECT_EQ(d.counts.size(), 45u);
  EXPECT_EQ(d.counts[0], 2u);
  EXPECT_EQ(d.counts[1], 1u);
  EXPECT_EQ(d.counts[44], 1u);
  EXPECT_EQ(d.n, 6u);
  EXPECT_EQ(d.below, 1u);
  EXPECT_EQ(d.above, 1u);
  EXPECT_DOUBLE_EQ(d.density(0), 2.0 / 6.0);
  EXPECT_EQ(kLogWageBins.bins(), 32u);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(2.0, 0.5);
  std::vector<double> w(5000);
  for (auto& x : w) x = nd(rng);
  const auto lw = bin_values(w, kLogWageBins);
  double mass = 0.0;
  for (std::size_t i = 0; i < lw.counts.size(); ++i) mass += lw.density(i) * lw.spec.width;
  EXPECT_NEAR(mass, 1.0 - static_cast<double>(lw.below + lw.above) / lw.n, 1e-12);
  EXPECT_EQ(max_abs_density_difference(lw, lw), 0.0);
  EXPECT_THROW(max_abs_density_difference(lw, d), Error);
}

TEST(Comparison, CountsPersonsAndSkipsNonpositiveWages) {
  std::vector<PersonYearWage> r{wage_row(1, 1980, 5.0), wage_row(1, 1981, 0.0), wage_row(2, 1980, 8.0)};
  r[0].hgc_i = r[1].hgc_i = 10;
  r[2].hgc_i = 11;
  const std::vector<OriginalRow> o{{CaseId{9}, 1.5, 2.0, 10, {}, {}}, {CaseId{9}, 1.6, 3.0, 10, {}, {}}};
  const auto c = compare_summaries(r, o);
  EXPECT_EQ(c.hgc_refreshed.at(10), 1u);
  EXPECT_EQ(c.hgc_refreshed.at(11), 1u);
  EXPECT_EQ(c.hgc_original.at(10), 1u);
  EXPECT_EQ(c.nonpositive_wages, 1u);
  EXPECT_EQ(c.lnw_refreshed.n, 2u);
  EXPECT_EQ(c.hgc_csv(), "hgc,refreshed,original\n10,1,1\n11,1,0\n");
  EXPECT_EQ(c.experience_csv().substr(0, 33), "bin_lo,bin_hi,refreshed,original\n");
}

TEST(Cpi, IdentityAndRoundTrip) {
  const CpiTable cpi = read_cpi_csv("year,index\n1980,82.4\n1990,130.7\n2000,172.2\n");
  std::vector<PersonYearWage> w{wage_row(1, 1980, 5.25), wage_row(1, 1990, 7.1),
                                wage_row(1, 2000, std::nullopt)};
  const auto same = adjust_inflation(std::span(w).subspan(1, 1), cpi, 1990);
  EXPECT_EQ(same[0].wage, 7.1);
  const auto real = adjust_inflation(w, cpi, 1990);
  EXPECT_DOUBLE_EQ(*real[0].wage, 5.25 * 130.7 / 82.4);
  EXPECT_FALSE(real[2].wage);
  const auto back = restore_nominal(real, cpi, 1990);
  EXPECT_NEAR(*back[0].wage, 5.25, 5.25 * 1e-12);
  EXPECT_THROW(adjust_inflation(w, cpi, 1985), Error);
  EXPECT_THROW(read_cpi_csv("year,index\n1980,0\n"), Error);
  EXPECT_THROW(read_cpi_csv("year,index\n1980,1\n1980,2\n"), Error);
  try {
    cpi.at(1979);
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "cpi has no index for year 1979");
  }
}

}  // namespace
}  // namespace wagepanel
