// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include <gtest/gtest.h>

#include "support/test_support.hpp"
#include "wagepanel/tables_io.hpp"

namespace wagepanel {
namespace {

const std::filesystem::path kFixture = WAGEPANEL_FIXTURE_DIR;

TEST(TablesIo, GoldenTablesRoundTrip) {
  const std::string demog = support::slurp(kFixture / "golden/demog_nlsy79.csv");
  EXPECT_EQ(demog_to_csv(demog_from_csv(demog)), demog);
  for (const char* name : {"golden/wages_input.csv", "golden/wages.csv", "golden/wages_hs_do.csv"}) {
    const std::string text = support::slurp(kFixture / name);
    EXPECT_EQ(wages_to_csv(wages_from_csv(text)), text) << name;
  }
}

TEST(TablesIo, WagesRowFields) {
  PersonYearWage w;
  w.id = CaseId{31};
  w.year = 1990;
  w.wage = 7.125;
  w.sex = Sex::kMale;
  w.race = Race::kBlack;
  w.hgc_i = 10;
  w.ged = GedStatus::kGed;
  w.njobs = 2;
  w.hours = 45;
  w.exp = 1.5;
  w.is_wm = true;
  const std::vector<PersonYearWage> rows{w};
  const std::string text = wages_to_csv(rows);
  EXPECT_EQ(text, std::string(kWagesHeader) +
                      "\n31,1990,7.125,,m,B,,10TH GRADE,10,,2,2,45,,,1.5,TRUE,FALSE\n");
  EXPECT_EQ(wages_from_csv(text), rows);
}

TEST(TablesIo, RejectsForeignHeadersAndBadFields) {
  EXPECT_THROW(wages_from_csv(""), Error);
  EXPECT_THROW(wages_from_csv("id,year\n1,1990\n"), Error);
  EXPECT_THROW(demog_from_csv(std::string(kDemogHeader) + "\n1,15,x,B,,,,\n"), Error);
  EXPECT_THROW(demog_from_csv(std::string(kDemogHeader) + "\n1,15,m\n"), Error);
  EXPECT_THROW(wages_from_csv(std::string(kWagesHeader) +
                              "\n1,1990,abc,,m,B,,,,,,1,,,,0,FALSE,FALSE\n"),
               Error);
  EXPECT_THROW(read_file("/nonexistent/file.csv"), Error);
}

}  // namespace
}  // namespace wagepanel
