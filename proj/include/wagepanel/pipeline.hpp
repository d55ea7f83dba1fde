// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wagepanel/cohorts.hpp"
#include "wagepanel/common.hpp"
#include "wagepanel/raw_ingest.hpp"
#include "wagepanel/robust_repair.hpp"

namespace wagepanel {

namespace fs = std::filesystem;

struct PipelineConfig {
  fs::path raw;
  fs::path original;      // textbook subset CSV; compare and reconciliation need it
  fs::path cpi;           // year,index CSV; adjust needs it
  fs::path expectations;  // published totals keyed by vintage
  fs::path out_dir = "out";
  fs::path ui_dir;
  fs::path config_file;   // where the settings came from; empty when none
  RepairConfig repair;
  std::uint64_t seed = 1;
  std::size_t sample_size = 36;
  std::string vintage = "2018";
  SentinelPolicy sentinel_policy;
  std::optional<int> base_year;
  DropoutCriteria dropout;
  int port = 8080;
};

/// Config file grammar: one `key = value` per line; `#` starts a comment;
/// blank lines are ignored; keys are the long CLI flag names without dashes
/// in front. Relative paths resolve against the file's directory.
struct ConfigKey {
  std::string name;
  std::string help;
  std::function<void(PipelineConfig&, const std::string& value, const fs::path& base)> apply;
};

const std::vector<ConfigKey>& config_keys();

/// Applies one key, throwing ConfigError for unknown keys or bad values.
void apply_config_value(PipelineConfig& config, std::string_view key, const std::string& value,
                        const fs::path& base);

/// Parses config text; `base` anchors relative paths.
void apply_config_text(PipelineConfig& config, std::string_view text, const fs::path& base);

PipelineConfig load_config(const fs::path& file);

/// Parses "14-17", "14-", "-17" or "none".
void parse_age_filter(std::string_view text, DropoutCriteria& criteria);

/// Rewrites (or appends) `key = value` in a config file, keeping other lines.
void set_config_value(const fs::path& file, std::string_view key, std::string_view value);

/// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const fs::path& path, std::string_view content);

inline constexpr std::string_view kLockFile = ".stage.lock";

/// Exclusive marker in the output directory for the duration of a stage.
class StageLock {
 public:
  StageLock(const fs::path& out_dir, std::string_view stage);
  ~StageLock();
  StageLock(const StageLock&) = delete;
  StageLock& operator=(const StageLock&) = delete;

 private:
  fs::path path_;
};

bool is_locked(const fs::path& out_dir);

enum class Stage { kIngest, kTidy, kValidate, kRepair, kSubset, kCompare, kAdjust };

std::string_view stage_name(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);

struct StageOutcome {
  bool ok = true;        // false only for validate with failed checks
  bool skipped = false;  // an optional input was not configured
  std::string message;
};

// Stage outputs, relative to out_dir.
inline constexpr std::string_view kIngestSummary = "ingest.json";
inline constexpr std::string_view kDemogFile = "demog_nlsy79.csv";
inline constexpr std::string_view kWagesInputFile = "wages_input.csv";
inline constexpr std::string_view kTidyIssuesFile = "tidy_issues.json";
inline constexpr std::string_view kValidationJson = "validation_report.json";
inline constexpr std::string_view kValidationText = "validation_report.txt";
inline constexpr std::string_view kProfilesFile = "profiles.csv";
inline constexpr std::string_view kSampleFile = "sample.json";
inline constexpr std::string_view kWagesFile = "wages.csv";
inline constexpr std::string_view kRepairReportFile = "repair_report.json";
inline constexpr std::string_view kDropoutFile = "wages_hs_do.csv";
inline constexpr std::string_view kDecisionsFile = "dropout_decisions.csv";
inline constexpr std::string_view kReconciliationFile = "reconciliation.json";
inline constexpr std::string_view kComparisonJson = "comparison.json";
inline constexpr std::string_view kComparisonHgc = "comparison_hgc.csv";
inline constexpr std::string_view kComparisonExp = "comparison_experience.csv";
inline constexpr std::string_view kComparisonLnw = "comparison_log_wage.csv";
inline constexpr std::string_view kAdjustedFile = "wages_adjusted.csv";
inline constexpr std::string_view kManifestFile = "run_manifest.json";

StageOutcome run_stage(Stage stage, const PipelineConfig& config);

/// ingest through adjust; stops after a failed validation. Stages whose
/// optional inputs are not configured are skipped.
StageOutcome run_all(const PipelineConfig& config);

/// Deterministic digest of every setting that influences outputs.
std::string config_digest(const PipelineConfig& config);

}  // namespace wagepanel
