// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include <gtest/gtest.h>

#include <cstdlib>
#include <json.hpp>

#include "support/test_support.hpp"
#include "wagepanel/digest.hpp"
#include "wagepanel/pipeline.hpp"

namespace wagepanel {
namespace {

const fs::path kFixture = WAGEPANEL_FIXTURE_DIR;

class FixtureRun : public ::testing::Test {
 protected:
  void SetUp() override {
    setenv("SOURCE_DATE_EPOCH", "1600000000", 1);
    support::copy_fixture(kFixture, dir_.path());
    config_ = load_config(dir_ / "fixture.conf");
    config_.out_dir = dir_ / "out";
  }

  std::string out(std::string_view name) const { return support::slurp(config_.out_dir / name); }

  support::TempDir dir_;
  PipelineConfig config_;
};

TEST(Config, ParsesKeysCommentsAndRelativePaths) {
  PipelineConfig c;
  apply_config_text(c,
                    "# comment\n"
                    "raw = data/raw.csv  # trailing\n"
                    "\n"
                    "weight-threshold = 0.25\n"
                    "seed = 9\n"
                    "age-filter = 14-17\n"
                    "males-only = false\n"
                    "include-ged-both = no\n"
                    "base-year = 1990\n"
                    "sentinel-policy = lenient\n",
                    "/srv/cfg");
  EXPECT_EQ(c.raw, fs::path("/srv/cfg/data/raw.csv"));
  EXPECT_EQ(c.repair.weight_threshold, 0.25);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.dropout.min_age, 14);
  EXPECT_EQ(c.dropout.max_age, 17);
  EXPECT_FALSE(c.dropout.males_only);
  EXPECT_FALSE(c.dropout.include_ged_both);
  EXPECT_EQ(c.base_year, 1990);
  EXPECT_EQ(c.sentinel_policy.name(), "lenient");

  EXPECT_THROW(apply_config_text(c, "nope = 1\n", ""), ConfigError);
  EXPECT_THROW(apply_config_text(c, "seed\n", ""), ConfigError);
  EXPECT_THROW(apply_config_text(c, "seed = -1\n", ""), ConfigError);
  EXPECT_THROW(apply_config_text(c, "huber-c = abc\n", ""), ConfigError);
  EXPECT_THROW(apply_config_text(c, "males-only = maybe\n", ""), ConfigError);
  EXPECT_THROW(apply_config_text(c, "age-filter = 18-14\n", ""), ConfigError);
}

TEST(Config, AgeFilterForms) {
  DropoutCriteria d;
  parse_age_filter("14-", d);
  EXPECT_EQ(d.min_age, 14);
  EXPECT_FALSE(d.max_age);
  parse_age_filter("-17", d);
  EXPECT_FALSE(d.min_age);
  EXPECT_EQ(d.max_age, 17);
  parse_age_filter("none", d);
  EXPECT_FALSE(d.min_age || d.max_age);
  EXPECT_THROW(parse_age_filter("teen", d), ConfigError);
}

TEST(Config, EveryKeyHasHelpAndIsUnique) {
  std::set<std::string> names;
  for (const auto& k : config_keys()) {
    EXPECT_FALSE(k.help.empty()) << k.name;
    EXPECT_TRUE(names.insert(k.name).second) << k.name;
  }
  EXPECT_TRUE(names.count("weight-threshold"));
  EXPECT_TRUE(names.count("out-dir"));
}

TEST(Config, SetValueRewritesOrAppends) {
  support::TempDir dir;
  const fs::path f = dir / "a.conf";
  support::spit(f, "# keep\nweight-threshold = 0.1 # old\nseed = 2\n");
  set_config_value(f, "weight-threshold", "0.35");
  set_config_value(f, "vintage", "x");
  EXPECT_EQ(support::slurp(f), "# keep\nweight-threshold = 0.35\nseed = 2\nvintage = x\n");
  const auto c = load_config(f);
  EXPECT_EQ(c.repair.weight_threshold, 0.35);
  EXPECT_EQ(c.config_file, fs::absolute(f).lexically_normal());
}

TEST(Stages, NamesRoundTrip) {
  for (auto s : {Stage::kIngest, Stage::kTidy, Stage::kValidate, Stage::kRepair, Stage::kSubset,
                 Stage::kCompare, Stage::kAdjust}) {
    EXPECT_EQ(parse_stage(stage_name(s)), s);
  }
  EXPECT_FALSE(parse_stage("all"));
}

TEST(Lock, ExclusiveAndReleased) {
  support::TempDir dir;
  {
    StageLock lock(dir.path(), "tidy");
    EXPECT_TRUE(is_locked(dir.path()));
    EXPECT_THROW(StageLock(dir.path(), "repair"), Error);
  }
  EXPECT_FALSE(is_locked(dir.path()));
}

TEST(ConfigDigest, IgnoresDirectoriesButNotSettings) {
  PipelineConfig a, b;
  a.raw = "/one/raw.csv";
  b.raw = "/two/raw.csv";
  b.out_dir = "elsewhere";
  EXPECT_EQ(config_digest(a), config_digest(b));
  b.repair.weight_threshold = 0.2;
  EXPECT_NE(config_digest(a), config_digest(b));
}

TEST_F(FixtureRun, AllMatchesGoldenTables) {
  const auto outcome = run_all(config_);
  ASSERT_TRUE(outcome.ok) << outcome.message;
  for (const char* name : {"demog_nlsy79.csv", "wages_input.csv", "wages.csv", "wages_hs_do.csv"}) {
    EXPECT_EQ(out(name), support::slurp(kFixture / "golden" / name)) << name;
  }
  EXPECT_FALSE(is_locked(config_.out_dir));
}

TEST_F(FixtureRun, ReportsAgreeWithManifest) {
  ASSERT_TRUE(run_all(config_).ok);
  const auto m = nlohmann::json::parse(support::slurp(kFixture / "manifest.json"));
  const auto rec = nlohmann::json::parse(out(kReconciliationFile));
  EXPECT_EQ(rec["counts"], m["reconciliation"]);
  const auto rep = nlohmann::json::parse(out(kRepairReportFile));
  EXPECT_EQ(rep["totals"]["replacements"], m["is_pred_rows"]);
  const auto sample = nlohmann::json::parse(out(kSampleFile));
  EXPECT_EQ(sample["ids"], m["samples"][2]["ids"]);
  const auto val = nlohmann::json::parse(out(kValidationJson));
  EXPECT_FALSE(val["failed"].get<bool>());
  for (const auto& c : val["checks"]) EXPECT_EQ(c["status"], "pass") << c["name"];
  EXPECT_EQ(val["generated_at"], "2020-09-13T12:26:40Z");

  const auto issues = nlohmann::json::parse(out(kTidyIssuesFile));
  std::set<std::string> kinds;
  for (const auto& i : issues) kinds.insert(i["kind"].get<std::string>());
  for (const char* k : {"birth_year_conflict", "zero_wage", "hours_over_cap", "few_rounds",
                        "weeks_missing", "start_after_survey", "grade_out_of_range",
                        "grade_decrease", "hours_usual_only", "unknown_diploma_code"}) {
    EXPECT_TRUE(kinds.count(k)) << k;
  }
}

TEST_F(FixtureRun, ManifestIsDeterministicAndComplete) {
  ASSERT_TRUE(run_all(config_).ok);
  const std::string first = out(kManifestFile);
  const auto j = nlohmann::ordered_json::parse(first);
  std::vector<std::string> stages;
  for (const auto& [name, entry] : j["stages"].items()) {
    stages.push_back(name);
    for (const auto& [file, digest] : entry["outputs"].items()) {
      EXPECT_EQ(digest, sha256_file(config_.out_dir / file)) << file;
    }
  }
  EXPECT_EQ(stages, (std::vector<std::string>{"ingest", "tidy", "validate", "repair", "subset",
                                              "compare", "adjust"}));
  EXPECT_EQ(j["stages"]["tidy"]["inputs"]["raw"]["sha256"], sha256_file(dir_ / "raw.csv"));
  ASSERT_TRUE(run_all(config_).ok);
  EXPECT_EQ(out(kManifestFile), first);
}

TEST_F(FixtureRun, StagesRunSeparatelyGiveSameOutputs) {
  for (auto s : {Stage::kIngest, Stage::kTidy, Stage::kValidate, Stage::kRepair, Stage::kSubset}) {
    ASSERT_TRUE(run_stage(s, config_).ok) << stage_name(s);
  }
  EXPECT_EQ(out(kWagesFile), support::slurp(kFixture / "golden/wages.csv"));
  EXPECT_EQ(out(kDropoutFile), support::slurp(kFixture / "golden/wages_hs_do.csv"));
}

TEST_F(FixtureRun, MissingPrerequisiteNamesTheStage) {
  try {
    run_stage(Stage::kRepair, config_);
    FAIL() << "repair ran without tidy output";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("run the tidy stage first"), std::string::npos);
  }
}

TEST_F(FixtureRun, OptionalStagesSkipWithoutInputs) {
  config_.original.clear();
  config_.cpi.clear();
  const auto outcome = run_all(config_);
  ASSERT_TRUE(outcome.ok) << outcome.message;
  EXPECT_FALSE(fs::exists(config_.out_dir / kComparisonJson));
  EXPECT_FALSE(fs::exists(config_.out_dir / kReconciliationFile));
  EXPECT_FALSE(fs::exists(config_.out_dir / kAdjustedFile));
  EXPECT_TRUE(fs::exists(config_.out_dir / kDropoutFile));
}

TEST_F(FixtureRun, FailedValidationStopsTheRun) {
  support::spit(dir_ / "expectations.json", R"({"fixture": {"rows": 49, "sex": {}, "ages": {},
                                                 "sex_race": {}}})");
  const auto outcome = run_all(config_);
  EXPECT_FALSE(outcome.ok);
  EXPECT_TRUE(fs::exists(config_.out_dir / kValidationJson));
  EXPECT_FALSE(fs::exists(config_.out_dir / kWagesFile));
}

TEST_F(FixtureRun, AdjustNeedsBaseYearAndKnownYears) {
  config_.base_year.reset();
  EXPECT_THROW(run_all(config_), Error);
  EXPECT_FALSE(is_locked(config_.out_dir));
  config_.base_year = 1991;  // not in the CPI table
  EXPECT_THROW(run_stage(Stage::kAdjust, config_), Error);
}

TEST_F(FixtureRun, LockedDirectoryRefusesStages) {
  StageLock held(config_.out_dir, "other");
  EXPECT_THROW(run_stage(Stage::kIngest, config_), Error);
}

}  // namespace
}  // namespace wagepanel
