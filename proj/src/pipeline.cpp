// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include "wagepanel/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "wagepanel/digest.hpp"
#include "wagepanel/employment.hpp"
#include "wagepanel/ida_validation.hpp"
#include "wagepanel/tables_io.hpp"
#include "wagepanel/text.hpp"

namespace wagepanel {
namespace {

using nlohmann::ordered_json;

constexpr Stage kStageOrder[] = {Stage::kIngest, Stage::kTidy,    Stage::kValidate, Stage::kRepair,
                                 Stage::kSubset, Stage::kCompare, Stage::kAdjust};

fs::path resolve(const std::string& value, const fs::path& base) {
  fs::path p(value);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

double real_value(std::string_view key, const std::string& value) {
  auto v = parse_decimal(trim(value));
  if (!v) throw ConfigError(std::string(key) + ": expected a number, got '" + value + "'");
  return *v;
}

std::int64_t int_value(std::string_view key, const std::string& value) {
  auto v = parse_integer(trim(value));
  if (!v) throw ConfigError(std::string(key) + ": expected an integer, got '" + value + "'");
  return *v;
}

bool bool_value(std::string_view key, const std::string& value) {
  const auto v = trim(value);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + value + "'");
}

std::vector<ConfigKey> make_keys() {
  auto path_key = [](std::string name, std::string help, fs::path PipelineConfig::*member) {
    return ConfigKey{std::move(name), std::move(help),
                     [member](PipelineConfig& c, const std::string& v, const fs::path& base) {
                       c.*member = resolve(std::string(trim(v)), base);
                     }};
  };
  std::vector<ConfigKey> keys;
  keys.push_back(path_key("raw", "raw extract CSV", &PipelineConfig::raw));
  keys.push_back(path_key("original", "original textbook subset CSV", &PipelineConfig::original));
  keys.push_back(path_key("cpi", "CPI table CSV (year,index)", &PipelineConfig::cpi));
  keys.push_back(path_key("expectations", "published totals JSON", &PipelineConfig::expectations));
  keys.push_back(path_key("out-dir", "output directory", &PipelineConfig::out_dir));
  keys.push_back(path_key("ui-dir", "static files served at /", &PipelineConfig::ui_dir));
  keys.push_back({"weight-threshold", "replace wages whose robustness weight is below this",
                  [](PipelineConfig& c, const std::string& v, const fs::path&) {
                    c.repair.weight_threshold = real_value("weight-threshold", v);
                  }});
  keys.push_back({"huber-c", "Huber tuning constant",
                  [](PipelineConfig& c, const std::string& v, const fs::path&) {
                    c.repair.huber_c = real_value("huber-c", v);
                  }});
  keys.push_back({"max-iterations", "IRLS iteration cap",
                  [](PipelineConfig& c, const std::string& v, const fs::path&) {
                    c.repair.max_iterations = static_cast<int>(int_value("max-iterations", v));
                  }});
  keys.push_back({"convergence-tol", "IRLS convergence tolerance, relative to scale",
                  [](PipelineConfig& c, const std::string& v, const fs::path&) {
                    c.repair.convergence_tol = real_value("convergence-tol", v);
                  }});
  keys.push_back({"scale-floor", "IRLS scale floor, relative to the wage range",
                  [](PipelineConfig& c, const std::string& v, const fs::path&) {
                    c.repair.scale_floor = real_value("scale-floor", v);
                  }});
  keys.push_back({"min-points-for-repair", "smallest series that is fitted",
                  [](PipelineConfig& c, const std::string& v, const fs::path&) {
                    c.repair.min_points_for_repair =
                        static_cast<int>(int_value("min-points-for-repair", v));
                  }});
  keys.push_back({"seed", "sampling seed",
                  [](PipelineConfig& c, const std::string& v, const fs::path&) {
                    const auto s = int_value("seed", v);
                    if (s < 0) throw ConfigError("seed must be non-negative");
                    c.seed = static_cast<std::uint64_t>(s);
                  }});
  keys.push_back({"sample-size", "individuals in the validation sample",
                  [](PipelineConfig& c, const std::string& v, const fs::path&) {
                    const auto n = int_value("sample-size", v);
                    if (n < 0) throw ConfigError("sample-size must be non-negative");
                    c.sample_size = static_cast<std::size_t>(n);
                  }});
  keys.push_back({"vintage", "data vintage tag for published totals",
                  [](PipelineConfig& c, const std::string& v, const fs::path&) {
                    c.vintage = std::string(trim(v));
                  }});
  keys.push_back({"sentinel-policy", "strict or lenient handling of unknown negative codes",
                  [](PipelineConfig& c, const std::string& v, const fs::path&) {
                    try {
                      c.sentinel_policy = SentinelPolicy::parse(trim(v));
                    } catch (const Error& e) {
                      throw ConfigError(std::string("sentinel-policy: ") + e.what());
                    }
                  }});
  keys.push_back({"base-year", "CPI base year for adjust",
                  [](PipelineConfig& c, const std::string& v, const fs::path&) {
                    c.base_year = static_cast<int>(int_value("base-year", v));
                  }});
  keys.push_back({"age-filter", "dropout age range in 1979, e.g. 14-17, or none",
                  [](PipelineConfig& c, const std::string& v, const fs::path&) {
                    parse_age_filter(v, c.dropout);
                  }});
  keys.push_back({"males-only", "restrict the dropout subset to males",
                  [](PipelineConfig& c, const std::string& v, const fs::path&) {
                    c.dropout.males_only = bool_value("males-only", v);
                  }});
  keys.push_back({"include-ged-missing", "keep dropouts whose GED status is missing",
                  [](PipelineConfig& c, const std::string& v, const fs::path&) {
                    c.dropout.include_ged_missing = bool_value("include-ged-missing", v);
                  }});
  keys.push_back({"include-ged-both", "keep dropouts holding both diploma and GED",
                  [](PipelineConfig& c, const std::string& v, const fs::path&) {
                    c.dropout.include_ged_both = bool_value("include-ged-both", v);
                  }});
  keys.push_back({"port", "explorer port",
                  [](PipelineConfig& c, const std::string& v, const fs::path&) {
                    const auto p = int_value("port", v);
                    if (p < 0 || p > 65535) throw ConfigError("port out of range");
                    c.port = static_cast<int>(p);
                  }});
  return keys;
}

std::string iso_utc(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// SOURCE_DATE_EPOCH pins the timestamp so reruns are byte-identical.
std::string report_timestamp() {
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    if (auto v = parse_integer(epoch)) return iso_utc(static_cast<std::time_t>(*v));
  }
  return iso_utc(std::time(nullptr));
}

fs::path require_output(const PipelineConfig& config, std::string_view file, Stage producer) {
  const fs::path p = config.out_dir / file;
  if (!fs::exists(p)) {
    throw Error("missing " + std::string(file) + ": run the " + std::string(stage_name(producer)) +
                " stage first");
  }
  return p;
}

fs::path require_input(const fs::path& p, std::string_view key) {
  if (p.empty()) throw ConfigError(std::string(key) + " is not configured");
  if (!fs::exists(p)) throw Error(std::string(key) + " not found: " + p.string());
  return p;
}

std::size_t distinct_ids(std::span<const PersonYearWage> rows) {
  std::set<CaseId> ids;
  for (const auto& r : rows) ids.insert(r.id);
  return ids.size();
}

/// Collects a stage's manifest entry as files are written.
class StageRecord {
 public:
  StageRecord(const PipelineConfig& config, Stage stage) : config_(config), stage_(stage) {
    entry_["config_digest"] = config_digest(config);
    entry_["inputs"] = ordered_json::object();
    entry_["outputs"] = ordered_json::object();
    entry_["counts"] = ordered_json::object();
  }

  void input(std::string_view role, const fs::path& path) {
    entry_["inputs"][std::string(role)] = {{"file", path.filename().string()},
                                           {"sha256", sha256_file(path)}};
  }

  void output(std::string_view file, const std::string& content) {
    write_file_atomic(config_.out_dir / file, content);
    entry_["outputs"][std::string(file)] = sha256_hex(content);
  }

  void count(std::string_view name, std::size_t n) { entry_["counts"][std::string(name)] = n; }

  void commit() {
    const fs::path path = config_.out_dir / kManifestFile;
    ordered_json stages = ordered_json::object();
    if (fs::exists(path)) {
      try {
        const auto old = ordered_json::parse(read_file(path));
        if (old.contains("stages")) stages = old["stages"];
      } catch (const nlohmann::json::exception&) {
        stages = ordered_json::object();
      }
    }
    stages[std::string(stage_name(stage_))] = entry_;
    ordered_json ordered = ordered_json::object();
    for (Stage s : kStageOrder) {
      const std::string name(stage_name(s));
      if (stages.contains(name)) ordered[name] = stages[name];
    }
    ordered_json manifest;
    manifest["tool"] = "wagepanel";
    manifest["stages"] = std::move(ordered);
    write_file_atomic(path, manifest.dump(2) + "\n");
  }

 private:
  const PipelineConfig& config_;
  Stage stage_;
  ordered_json entry_;
};

StageOutcome run_ingest(const PipelineConfig& config) {
  StageRecord rec(config, Stage::kIngest);
  const fs::path raw_path = require_input(config.raw, "raw");
  rec.input("raw", raw_path);
  const RawTable raw = load_raw_table(raw_path, config.sentinel_policy);

  std::map<std::string, std::size_t> families;
  std::set<int> years;
  for (const auto& d : raw.columns()) {
    ++families[std::string(family_tag(d.family))];
    if (d.year) years.insert(*d.year);
  }
  ordered_json j;
  j["rows"] = raw.row_count();
  j["columns"] = raw.column_count();
  j["sentinel_policy"] = raw.policy().name();
  j["survey_years"] = std::vector<int>(years.begin(), years.end());
  j["family_columns"] = ordered_json::object();
  for (const auto& [tag, n] : families) j["family_columns"][tag] = n;
  rec.output(kIngestSummary, j.dump(2) + "\n");
  rec.count("individuals", raw.row_count());
  rec.count("columns", raw.column_count());
  rec.commit();
  return {true, false,
          "ingested " + std::to_string(raw.row_count()) + " respondents, " +
              std::to_string(raw.column_count()) + " columns"};
}

StageOutcome run_tidy(const PipelineConfig& config) {
  StageRecord rec(config, Stage::kTidy);
  const fs::path raw_path = require_input(config.raw, "raw");
  rec.input("raw", raw_path);
  const RawTable raw = load_raw_table(raw_path, config.sentinel_policy);
  TidyResult t = tidy(raw);
  rec.output(kDemogFile, demog_to_csv(t.demog));
  rec.output(kWagesInputFile, wages_to_csv(t.wages));
  rec.output(kTidyIssuesFile, t.issues.to_json());
  rec.count("raw_individuals", t.counts.raw_individuals);
  rec.count("job_observations", t.counts.job_observations);
  rec.count("person_years", t.counts.person_years);
  rec.count("person_year_individuals", t.counts.person_year_individuals);
  rec.count("wage_rows", t.counts.wage_rows);
  rec.count("wage_individuals", t.counts.wage_individuals);
  rec.count("issues", t.issues.all().size());
  rec.commit();
  return {true, false,
          "tidied " + std::to_string(t.counts.wage_rows) + " wage rows for " +
              std::to_string(t.counts.wage_individuals) + " individuals"};
}

StageOutcome run_validate(const PipelineConfig& config) {
  StageRecord rec(config, Stage::kValidate);
  const fs::path demog_path = require_output(config, kDemogFile, Stage::kTidy);
  const fs::path wages_path = require_output(config, kWagesInputFile, Stage::kTidy);
  rec.input("demog", demog_path);
  rec.input("wages_input", wages_path);
  const auto demog = demog_from_csv(read_file(demog_path));
  const auto wages = wages_from_csv(read_file(wages_path));

  std::optional<Expectations> expectations;
  if (!config.expectations.empty()) {
    const fs::path p = require_input(config.expectations, "expectations");
    rec.input("expectations", p);
    expectations = load_expectations(read_file(p), config.vintage);
  }
  ValidationInput in;
  in.demog = demog;
  in.wages = wages;
  in.expectations = expectations;
  in.vintage = config.vintage;
  in.generated_at = report_timestamp();
  in.input_digest = sha256_hex(sha256_file(demog_path) + "\n" + sha256_file(wages_path) + "\n");
  const ValidationReport report = validate(in);

  rec.output(kValidationJson, report.to_json().dump(2) + "\n");
  rec.output(kValidationText, report.to_text());
  const auto profiles = profile_summaries(wages);
  rec.output(kProfilesFile, profiles_to_csv(profiles));

  const std::size_t n = std::min(config.sample_size, profiles.size());
  ordered_json sample;
  sample["seed"] = config.seed;
  sample["n"] = n;
  auto ids = ordered_json::array();
  for (const auto& p : sample_profiles(wages, n, config.seed)) ids.push_back(p.id.value);
  sample["ids"] = std::move(ids);
  rec.output(kSampleFile, sample.dump(2) + "\n");

  std::size_t failed = 0, warned = 0;
  for (const auto& c : report.checks()) {
    failed += c.status == CheckStatus::kFail;
    warned += c.status == CheckStatus::kWarn;
  }
  rec.count("checks", report.checks().size());
  rec.count("failed", failed);
  rec.count("warned", warned);
  rec.commit();
  return {!report.any_failed(), false,
          std::to_string(report.checks().size()) + " checks, " + std::to_string(failed) +
              " failed, " + std::to_string(warned) + " warnings"};
}

StageOutcome run_repair(const PipelineConfig& config) {
  config.repair.validate();
  StageRecord rec(config, Stage::kRepair);
  const fs::path wages_path = require_output(config, kWagesInputFile, Stage::kTidy);
  rec.input("wages_input", wages_path);
  const auto wages = wages_from_csv(read_file(wages_path));
  const RepairOutcome out = repair_all(wages, config.repair);
  rec.output(kWagesFile, wages_to_csv(out.wages));
  rec.output(kRepairReportFile, out.report.to_json().dump(2) + "\n");
  rec.count("rows", out.wages.size());
  rec.count("individuals", distinct_ids(out.wages));
  rec.count("replacements", out.report.replacements);
  rec.count("repaired_series", out.report.repaired_series);
  rec.count("skipped_series", out.report.skipped_series);
  rec.commit();
  return {true, false,
          "replaced " + std::to_string(out.report.replacements) + " wages in " +
              std::to_string(out.report.repaired_series) + " series"};
}

StageOutcome run_subset(const PipelineConfig& config) {
  StageRecord rec(config, Stage::kSubset);
  const fs::path wages_path = require_output(config, kWagesFile, Stage::kRepair);
  const fs::path demog_path = require_output(config, kDemogFile, Stage::kTidy);
  rec.input("wages", wages_path);
  rec.input("demog", demog_path);
  const auto wages = wages_from_csv(read_file(wages_path));
  const auto demog = demog_from_csv(read_file(demog_path));

  const DropoutSubset subset = build_dropout_subset(wages, demog, config.dropout);
  rec.output(kDropoutFile, wages_to_csv(subset.rows));
  std::string decisions = "id,included,rule\n";
  for (const auto& d : subset.decisions) {
    decisions += std::to_string(d.id.value) + ',' + (d.included ? "TRUE" : "FALSE") + ',' +
                 std::string(dropout_rule_name(d.rule)) + '\n';
  }
  rec.output(kDecisionsFile, decisions);
  rec.count("rows", subset.rows.size());
  rec.count("individuals", subset.ids.size());
  rec.count("deferred", subset.deferred());

  std::string message = std::to_string(subset.ids.size()) + " dropouts";
  if (!config.original.empty()) {
    const fs::path original_path = require_input(config.original, "original");
    rec.input("original", original_path);
    std::set<CaseId> original_set;
    for (const auto& r : read_original_csv(read_file(original_path))) original_set.insert(r.id);
    const std::vector<CaseId> original_ids(original_set.begin(), original_set.end());
    const auto strict = build_dropout_subset(wages, demog, DropoutCriteria::strict());
    std::set<CaseId> wage_set;
    for (const auto& w : wages) wage_set.insert(w.id);
    const std::vector<CaseId> wage_ids(wage_set.begin(), wage_set.end());
    const Reconciliation r = reconcile_with_original(strict.ids, original_ids, demog, wage_ids);
    ordered_json j = r.to_json();
    j["criteria"] = "males aged 14-17 in 1979, hgc below 12 or GED";
    rec.output(kReconciliationFile, j.dump(2) + "\n");
    rec.count("strict_individuals", strict.ids.size());
    rec.count("original_individuals", original_ids.size());
    message += ", reconciled against " + std::to_string(original_ids.size()) + " original ids";
  }
  rec.commit();
  return {true, false, message};
}

StageOutcome run_compare(const PipelineConfig& config) {
  if (config.original.empty()) return {true, true, "original not configured"};
  StageRecord rec(config, Stage::kCompare);
  const fs::path subset_path = require_output(config, kDropoutFile, Stage::kSubset);
  const fs::path original_path = require_input(config.original, "original");
  rec.input("wages_hs_do", subset_path);
  rec.input("original", original_path);
  const auto subset = wages_from_csv(read_file(subset_path));
  const auto original = read_original_csv(read_file(original_path));
  const Comparison c = compare_summaries(subset, original);
  rec.output(kComparisonHgc, c.hgc_csv());
  rec.output(kComparisonExp, c.experience_csv());
  rec.output(kComparisonLnw, c.log_wage_csv());
  rec.output(kComparisonJson, c.to_json().dump(2) + "\n");
  rec.count("refreshed_rows", subset.size());
  rec.count("original_rows", original.size());
  rec.count("nonpositive_wages", c.nonpositive_wages);
  rec.commit();
  return {true, false, "compared " + std::to_string(subset.size()) + " refreshed rows with " +
                           std::to_string(original.size()) + " original rows"};
}

StageOutcome run_adjust(const PipelineConfig& config) {
  if (config.cpi.empty()) return {true, true, "cpi not configured"};
  if (!config.base_year) throw ConfigError("base-year is required when cpi is configured");
  StageRecord rec(config, Stage::kAdjust);
  const fs::path wages_path = require_output(config, kWagesFile, Stage::kRepair);
  const fs::path cpi_path = require_input(config.cpi, "cpi");
  rec.input("wages", wages_path);
  rec.input("cpi", cpi_path);
  const auto wages = wages_from_csv(read_file(wages_path));
  const CpiTable cpi = read_cpi_csv(read_file(cpi_path));
  const auto adjusted = adjust_inflation(wages, cpi, *config.base_year);
  rec.output(kAdjustedFile, wages_to_csv(adjusted));
  rec.count("rows", adjusted.size());
  rec.commit();
  return {true, false, "adjusted to " + std::to_string(*config.base_year) + " prices"};
}

StageOutcome run_unlocked(Stage stage, const PipelineConfig& config) {
  switch (stage) {
    case Stage::kIngest: return run_ingest(config);
    case Stage::kTidy: return run_tidy(config);
    case Stage::kValidate: return run_validate(config);
    case Stage::kRepair: return run_repair(config);
    case Stage::kSubset: return run_subset(config);
    case Stage::kCompare: return run_compare(config);
    case Stage::kAdjust: return run_adjust(config);
  }
  throw Error("unknown stage");
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = make_keys();
  return keys;
}

void apply_config_value(PipelineConfig& config, std::string_view key, const std::string& value,
                        const fs::path& base) {
  for (const auto& k : config_keys()) {
    if (k.name == key) {
      k.apply(config, value, base);
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void apply_config_text(PipelineConfig& config, std::string_view text, const fs::path& base) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    }
    const auto key = trim(body.substr(0, eq));
    try {
      apply_config_value(config, key, std::string(trim(body.substr(eq + 1))), base);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(number) + ": " + e.what());
    }
  }
}

PipelineConfig load_config(const fs::path& file) {
  PipelineConfig config;
  config.config_file = fs::absolute(file).lexically_normal();
  apply_config_text(config, read_file(file), config.config_file.parent_path());
  return config;
}

void parse_age_filter(std::string_view text, DropoutCriteria& criteria) {
  const auto t = trim(text);
  criteria.min_age.reset();
  criteria.max_age.reset();
  if (t.empty() || t == "none") return;
  const auto dash = t.find('-');
  if (dash == std::string_view::npos) throw ConfigError("age-filter: expected MIN-MAX or none");
  const auto lo = trim(t.substr(0, dash));
  const auto hi = trim(t.substr(dash + 1));
  if (!lo.empty()) {
    auto v = parse_integer(lo);
    if (!v) throw ConfigError("age-filter: bad lower bound");
    criteria.min_age = static_cast<int>(*v);
  }
  if (!hi.empty()) {
    auto v = parse_integer(hi);
    if (!v) throw ConfigError("age-filter: bad upper bound");
    criteria.max_age = static_cast<int>(*v);
  }
  if (criteria.min_age && criteria.max_age && *criteria.min_age > *criteria.max_age) {
    throw ConfigError("age-filter: lower bound above upper bound");
  }
}

void set_config_value(const fs::path& file, std::string_view key, std::string_view value) {
  std::string text = fs::exists(file) ? read_file(file) : std::string();
  std::istringstream in(text);
  std::string line, out;
  bool replaced = false;
  while (std::getline(in, line)) {
    std::string body = line;
    if (auto hash = body.find('#'); hash != std::string::npos) body.erase(hash);
    const auto eq = body.find('=');
    if (!replaced && eq != std::string::npos && trim(std::string_view(body).substr(0, eq)) == key) {
      line = std::string(key) + " = " + std::string(value);
      replaced = true;
    }
    out += line + '\n';
  }
  if (!replaced) out += std::string(key) + " = " + std::string(value) + '\n';
  write_file_atomic(file, out);
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("write failed: " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

StageLock::StageLock(const fs::path& out_dir, std::string_view stage) {
  fs::create_directories(out_dir);
  path_ = out_dir / kLockFile;
  const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw Error("output directory is locked by a running stage (" + path_.string() + ")");
    }
    throw Error("cannot create lock " + path_.string());
  }
  const std::string body = std::string(stage) + " " + std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, body.data(), body.size());
  ::close(fd);
}

StageLock::~StageLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

bool is_locked(const fs::path& out_dir) { return fs::exists(out_dir / kLockFile); }

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::kIngest: return "ingest";
    case Stage::kTidy: return "tidy";
    case Stage::kValidate: return "validate";
    case Stage::kRepair: return "repair";
    case Stage::kSubset: return "subset";
    case Stage::kCompare: return "compare";
    case Stage::kAdjust: return "adjust";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (Stage s : kStageOrder) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

StageOutcome run_stage(Stage stage, const PipelineConfig& config) {
  StageLock lock(config.out_dir, stage_name(stage));
  return run_unlocked(stage, config);
}

StageOutcome run_all(const PipelineConfig& config) {
  config.repair.validate();
  StageLock lock(config.out_dir, "all");
  StageOutcome last;
  std::string messages;
  for (Stage s : kStageOrder) {
    last = run_unlocked(s, config);
    messages += std::string(stage_name(s)) + ": " + last.message + "\n";
    if (!last.ok) return {false, false, messages + "stopped after failed validation"};
  }
  return {true, false, messages};
}

std::string config_digest(const PipelineConfig& config) {
  auto name = [](const fs::path& p) { return p.empty() ? std::string() : p.filename().string(); };
  const auto& r = config.repair;
  std::string canon;
  canon += "raw=" + name(config.raw) + "\n";
  canon += "original=" + name(config.original) + "\n";
  canon += "cpi=" + name(config.cpi) + "\n";
  canon += "expectations=" + name(config.expectations) + "\n";
  canon += "weight-threshold=" + format_decimal(r.weight_threshold) + "\n";
  canon += "huber-c=" + format_decimal(r.huber_c) + "\n";
  canon += "max-iterations=" + std::to_string(r.max_iterations) + "\n";
  canon += "convergence-tol=" + nlohmann::json(r.convergence_tol).dump() + "\n";
  canon += "scale-floor=" + nlohmann::json(r.scale_floor).dump() + "\n";
  canon += "min-points-for-repair=" + std::to_string(r.min_points_for_repair) + "\n";
  canon += "seed=" + std::to_string(config.seed) + "\n";
  canon += "sample-size=" + std::to_string(config.sample_size) + "\n";
  canon += "vintage=" + config.vintage + "\n";
  canon += "sentinel-policy=" + std::string(config.sentinel_policy.name()) + "\n";
  canon += "base-year=" + (config.base_year ? std::to_string(*config.base_year) : "") + "\n";
  const auto& d = config.dropout;
  canon += "age-filter=" + (d.min_age ? std::to_string(*d.min_age) : "") + "-" +
           (d.max_age ? std::to_string(*d.max_age) : "") + "\n";
  canon += std::string("males-only=") + (d.males_only ? "true" : "false") + "\n";
  canon += std::string("include-ged-missing=") + (d.include_ged_missing ? "true" : "false") + "\n";
  canon += std::string("include-ged-both=") + (d.include_ged_both ? "true" : "false") + "\n";
  return sha256_hex(canon);
}

}  // namespace wagepanel
