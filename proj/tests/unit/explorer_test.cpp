// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include <gtest/gtest.h>
#include <httplib.h>

#include <thread>

#include "support/test_support.hpp"
#include "wagepanel/digest.hpp"
#include "wagepanel/explorer.hpp"
#include "wagepanel/tables_io.hpp"
#include "wagepanel/text.hpp"

namespace wagepanel {
namespace {

const fs::path kFixture = WAGEPANEL_FIXTURE_DIR;

class Explorer : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new support::TempDir;
    support::copy_fixture(kFixture, dir_->path());
    auto config = load_config(*dir_ / "fixture.conf");
    config.out_dir = *dir_ / "out";
    ASSERT_TRUE(run_all(config).ok);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }

  void SetUp() override {
    config_ = load_config(*dir_ / "fixture.conf");
    config_.out_dir = *dir_ / "out";
    service_ = ExplorerService::open(config_);
  }

  static support::TempDir* dir_;
  PipelineConfig config_;
  std::unique_ptr<ExplorerService> service_;
};

support::TempDir* Explorer::dir_ = nullptr;

TEST_F(Explorer, MetaDescribesDataset) {
  const auto r = service_->meta();
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["individuals"], 48);
  EXPECT_EQ(r.body["threshold"], 0.1);
  EXPECT_EQ(r.body["dataset_digest"], sha256_hex(support::slurp(config_.out_dir / kWagesInputFile)));
  EXPECT_TRUE(r.body["config_writable"].get<bool>());
}

TEST_F(Explorer, RepairPayloadMatchesRepairStage) {
  const auto repaired = wages_from_csv(support::slurp(config_.out_dir / kWagesFile));
  std::map<std::pair<std::int64_t, int>, const PersonYearWage*> by_key;
  for (const auto& w : repaired) by_key[{w.id.value, w.year}] = &w;
  std::set<std::int64_t> ids;
  for (const auto& w : repaired) ids.insert(w.id.value);
  for (auto id : ids) {
    const auto r = service_->repair({{"id", std::to_string(id)}});
    ASSERT_EQ(r.status, 200);
    for (const auto& p : r.body["series"]) {
      const auto* row = by_key.at({id, p["year"].get<int>()});
      EXPECT_EQ(p["final"], format_decimal(*row->wage));
      EXPECT_EQ(p["replaced"].get<bool>(), row->is_pred);
    }
  }
}

TEST_F(Explorer, ThresholdZeroReplacesNothing) {
  const auto r = service_->sample({{"n", "48"}, {"seed", "3"}});
  ASSERT_EQ(r.status, 200);
  for (const auto& p : r.body["profiles"]) {
    const auto id = p["id"].get<std::int64_t>();
    const auto z = service_->repair({{"id", std::to_string(id)}, {"threshold", "0"}});
    EXPECT_EQ(z.body["replaced_count"], 0);
    for (const auto& pt : z.body["series"]) EXPECT_EQ(pt["final"], pt["original"]);
  }
}

TEST_F(Explorer, SweepCountsNeverDecrease) {
  const auto r = service_->sweep({{"id", "245"}, {"steps", "20"}});
  ASSERT_EQ(r.status, 200);
  ASSERT_EQ(r.body["sweep"].size(), 21u);
  EXPECT_EQ(r.body["sweep"][0]["count"], 0);
  std::size_t prev = 0;
  for (const auto& s : r.body["sweep"]) {
    EXPECT_GE(s["count"].get<std::size_t>(), prev);
    prev = s["count"].get<std::size_t>();
  }
  EXPECT_GE(prev, 1u);
}

TEST_F(Explorer, SampleIsReproducible) {
  const auto a = service_->sample({{"n", "5"}, {"seed", "7"}});
  const auto b = service_->sample({{"n", "5"}, {"seed", "7"}});
  EXPECT_EQ(a.body, b.body);
  const auto m = nlohmann::json::parse(support::slurp(kFixture / "manifest.json"));
  std::vector<std::int64_t> ids;
  for (const auto& p : a.body["profiles"]) ids.push_back(p["id"]);
  EXPECT_EQ(nlohmann::json(ids), m["samples"][1]["ids"]);
}

TEST_F(Explorer, BadRequests) {
  EXPECT_EQ(service_->repair({}).status, 400);
  EXPECT_EQ(service_->repair({{"id", "x"}}).status, 400);
  EXPECT_EQ(service_->repair({{"id", "1"}}).status, 404);
  EXPECT_EQ(service_->repair({{"id", "245"}, {"threshold", "2"}}).status, 400);
  EXPECT_EQ(service_->sample({{"n", "49"}}).status, 400);
  EXPECT_EQ(service_->sample({{"n", "-1"}}).status, 400);
  EXPECT_EQ(service_->sweep({{"id", "245"}, {"steps", "0"}}).status, 400);
  EXPECT_EQ(service_->post_threshold("not json").status, 400);
  EXPECT_EQ(service_->post_threshold(R"({"value": 1.5})").status, 400);
  EXPECT_EQ(service_->post_threshold(R"({"value": true})").status, 400);
}

TEST_F(Explorer, CommitPersistsThreshold) {
  const std::string before = support::slurp(config_.config_file);
  auto r = service_->post_threshold(R"({"value": "0.25"})");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(service_->threshold(), 0.25);
  EXPECT_EQ(load_config(config_.config_file).repair.weight_threshold, 0.25);
  {
    StageLock lock(config_.out_dir, "repair");
    EXPECT_EQ(service_->post_threshold(R"({"value": 0.3})").status, 409);
  }
  EXPECT_EQ(service_->threshold(), 0.25);
  support::spit(config_.config_file, before);

  auto no_file = config_;
  no_file.config_file.clear();
  auto svc = ExplorerService::open(no_file);
  EXPECT_EQ(svc->post_threshold(R"({"value": 0.3})").status, 409);
}

TEST_F(Explorer, OpenNamesMissingStage) {
  support::TempDir empty;
  auto c = config_;
  c.out_dir = empty.path();
  try {
    ExplorerService::open(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("run the tidy stage first"), std::string::npos);
  }
}

TEST_F(Explorer, HttpTransport) {
  ExplorerServer server(*service_);
  const int port = server.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen(); });
  server.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);
  auto res = cli.Get("/meta");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  res = cli.Get("/repair?id=245&threshold=0.1");
  ASSERT_TRUE(res);
  EXPECT_EQ(nlohmann::ordered_json::parse(res->body),
            service_->repair({{"id", "245"}, {"threshold", "0.1"}}).body);
  res = cli.Get("/repair?id=1");
  EXPECT_EQ(res->status, 404);
  res = cli.Options("/threshold");
  EXPECT_EQ(res->status, 204);
  server.stop();
  t.join();
}

}  // namespace
}  // namespace wagepanel
