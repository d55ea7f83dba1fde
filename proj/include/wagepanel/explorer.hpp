// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "wagepanel/employment.hpp"
#include "wagepanel/pipeline.hpp"
#include "wagepanel/robust_repair.hpp"

namespace wagepanel {

struct ApiResponse {
  int status = 200;
  nlohmann::ordered_json body;
};

using QueryParams = std::map<std::string, std::string>;

/// Endpoint logic behind the explorer HTTP server, independent of transport.
///
/// The wage table is the pre-repair input so every threshold is applied to the
/// same values the repair stage fits. Fits are cached per id; only the
/// committed threshold is mutable.
class ExplorerService {
 public:
  ExplorerService(std::vector<PersonYearWage> wages, std::string dataset_digest,
                  PipelineConfig config);

  /// Loads wages_input.csv from the output directory. Fails, naming the stage
  /// to run, when it or wages.csv is missing.
  static std::unique_ptr<ExplorerService> open(const PipelineConfig& config);

  ApiResponse meta() const;
  ApiResponse sample(const QueryParams& params) const;
  ApiResponse repair(const QueryParams& params) const;
  ApiResponse sweep(const QueryParams& params) const;
  ApiResponse post_threshold(std::string_view body);

  double threshold() const;
  std::size_t individuals() const { return ids_.size(); }

  /// Fit for an id, computed once; nullptr for unknown ids.
  std::shared_ptr<const SeriesFit> fit_for(CaseId id) const;

  /// Per-row payload: year, original, fitted, weight, replaced, final.
  nlohmann::ordered_json profile_payload(CaseId id, double tau) const;

 private:
  struct Series {
    std::vector<const PersonYearWage*> rows;  // by year
    std::vector<int> years;                    // non-missing wages, table order
    std::vector<double> wages;
  };

  std::vector<PersonYearWage> wages_;
  std::string digest_;
  PipelineConfig config_;
  std::map<CaseId, Series> series_;
  std::vector<CaseId> ids_;

  mutable std::shared_mutex cache_mutex_;
  mutable std::unordered_map<CaseId, std::shared_ptr<const SeriesFit>> cache_;

  mutable std::mutex threshold_mutex_;
  double threshold_;
};

/// HTTP transport: GET /meta, /sample, /repair, /sweep and POST /threshold,
/// with CORS headers and optional static files at /.
class ExplorerServer {
 public:
  explicit ExplorerServer(ExplorerService& service, const std::filesystem::path& ui_dir = {});
  ~ExplorerServer();

  /// Binds to a free port when port is 0; returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  bool listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wagepanel
