// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include <algorithm>
#include <cmath>
#include <set>

#include "wagepanel/digest.hpp"
#include "wagepanel/explorer.hpp"
#include "wagepanel/ida_validation.hpp"
#include "wagepanel/tables_io.hpp"
#include "wagepanel/text.hpp"

namespace wagepanel {
namespace {

using nlohmann::ordered_json;

ApiResponse error_response(int status, std::string message) {
  return {status, {{"error", std::move(message)}}};
}

struct BadParam {
  std::string message;
};

std::optional<std::string> param(const QueryParams& params, const std::string& key) {
  auto it = params.find(key);
  if (it == params.end()) return std::nullopt;
  return it->second;
}

std::int64_t int_param(const QueryParams& params, const std::string& key,
                       std::optional<std::int64_t> fallback) {
  auto raw = param(params, key);
  if (!raw) {
    if (fallback) return *fallback;
    throw BadParam{"missing parameter '" + key + "'"};
  }
  auto v = parse_integer(trim(*raw));
  if (!v) throw BadParam{"parameter '" + key + "' must be an integer"};
  return *v;
}

double tau_param(const QueryParams& params, const std::string& key, double fallback) {
  auto raw = param(params, key);
  if (!raw) return fallback;
  auto v = parse_decimal(trim(*raw));
  if (!v || !(*v >= 0.0 && *v <= 1.0)) throw BadParam{"parameter '" + key + "' must lie in [0, 1]"};
  return *v;
}

ordered_json money(std::optional<double> v) {
  return v ? ordered_json(format_decimal(*v)) : ordered_json(nullptr);
}

}  // namespace

ExplorerService::ExplorerService(std::vector<PersonYearWage> wages, std::string dataset_digest,
                                 PipelineConfig config)
    : wages_(std::move(wages)),
      digest_(std::move(dataset_digest)),
      config_(std::move(config)),
      threshold_(config_.repair.weight_threshold) {
  config_.repair.validate();
  for (const auto& row : wages_) {
    Series& s = series_[row.id];
    s.rows.push_back(&row);
    if (row.wage) {
      s.years.push_back(row.year);
      s.wages.push_back(*row.wage);
    }
  }
  for (auto& [id, s] : series_) {
    std::stable_sort(s.rows.begin(), s.rows.end(),
                     [](const PersonYearWage* a, const PersonYearWage* b) { return a->year < b->year; });
    ids_.push_back(id);
  }
}

std::unique_ptr<ExplorerService> ExplorerService::open(const PipelineConfig& config) {
  const fs::path input = config.out_dir / kWagesInputFile;
  const fs::path repaired = config.out_dir / kWagesFile;
  if (!fs::exists(input)) {
    throw Error("missing " + input.string() + ": run the tidy stage first");
  }
  if (!fs::exists(repaired)) {
    throw Error("missing " + repaired.string() + ": run the repair stage first");
  }
  const std::string text = read_file(input);
  return std::make_unique<ExplorerService>(wages_from_csv(text), sha256_hex(text), config);
}

double ExplorerService::threshold() const {
  std::lock_guard lock(threshold_mutex_);
  return threshold_;
}

std::shared_ptr<const SeriesFit> ExplorerService::fit_for(CaseId id) const {
  {
    std::shared_lock lock(cache_mutex_);
    if (auto it = cache_.find(id); it != cache_.end()) return it->second;
  }
  auto sit = series_.find(id);
  if (sit == series_.end()) return nullptr;
  auto fit = std::make_shared<const SeriesFit>(
      fit_series(id, sit->second.years, sit->second.wages, config_.repair));
  std::unique_lock lock(cache_mutex_);
  return cache_.try_emplace(id, std::move(fit)).first->second;
}

ordered_json ExplorerService::profile_payload(CaseId id, double tau) const {
  const auto fit = fit_for(id);
  const Series& s = series_.at(id);
  const RepairedSeries repaired = apply_threshold(*fit, tau);

  ordered_json points = ordered_json::array();
  std::size_t replaced = 0;
  for (const PersonYearWage* row : s.rows) {
    ordered_json p;
    p["year"] = row->year;
    p["original"] = money(row->wage);
    auto it = std::find(fit->years.begin(), fit->years.end(), row->year);
    const bool has_point = row->wage && it != fit->years.end();
    const auto i = static_cast<std::size_t>(it - fit->years.begin());
    if (has_point && fit->fit) {
      p["fitted"] = format_decimal(fit->fit->fitted[i]);
      p["weight"] = fit->fit->weights[i];
    } else {
      p["fitted"] = nullptr;
      p["weight"] = nullptr;
    }
    const bool is_replaced = has_point && repaired.points[i].is_pred;
    replaced += is_replaced;
    p["replaced"] = is_replaced;
    p["final"] = has_point ? money(repaired.points[i].final) : money(row->wage);
    points.push_back(std::move(p));
  }
  ordered_json j;
  j["id"] = id.value;
  j["threshold"] = tau;
  j["eligible"] = fit->fit.has_value();
  j["converged"] = fit->fit ? ordered_json(fit->fit->converged) : ordered_json(nullptr);
  if (!fit->skip_reason.empty()) j["note"] = fit->skip_reason;
  j["replaced_count"] = replaced;
  j["series"] = std::move(points);
  return j;
}

ApiResponse ExplorerService::meta() const {
  const auto& r = config_.repair;
  ordered_json j;
  j["dataset_digest"] = digest_;
  j["rows"] = wages_.size();
  j["individuals"] = ids_.size();
  j["threshold"] = threshold();
  j["repair"] = {{"huber_c", r.huber_c},
                 {"max_iterations", r.max_iterations},
                 {"convergence_tol", r.convergence_tol},
                 {"scale_floor", r.scale_floor},
                 {"min_points_for_repair", r.min_points_for_repair}};
  j["config_writable"] = !config_.config_file.empty();
  return {200, std::move(j)};
}

ApiResponse ExplorerService::sample(const QueryParams& params) const {
  try {
    const auto n = int_param(params, "n", 36);
    const auto seed = int_param(params, "seed", 1);
    if (n < 0) throw BadParam{"n must be non-negative"};
    if (seed < 0) throw BadParam{"seed must be non-negative"};
    if (static_cast<std::size_t>(n) > ids_.size()) {
      throw BadParam{"n exceeds the " + std::to_string(ids_.size()) + " individuals available"};
    }
    const double tau = threshold();
    ordered_json j;
    j["n"] = n;
    j["seed"] = seed;
    j["threshold"] = tau;
    ordered_json profiles = ordered_json::array();
    for (CaseId id : sample_ids(ids_, static_cast<std::size_t>(n), static_cast<std::uint64_t>(seed))) {
      profiles.push_back(profile_payload(id, tau));
    }
    j["profiles"] = std::move(profiles);
    return {200, std::move(j)};
  } catch (const BadParam& e) {
    return error_response(400, e.message);
  }
}

ApiResponse ExplorerService::repair(const QueryParams& params) const {
  try {
    const CaseId id{int_param(params, "id", std::nullopt)};
    const double tau = tau_param(params, "threshold", threshold());
    if (!series_.count(id)) return error_response(404, "unknown id " + std::to_string(id.value));
    return {200, profile_payload(id, tau)};
  } catch (const BadParam& e) {
    return error_response(400, e.message);
  }
}

ApiResponse ExplorerService::sweep(const QueryParams& params) const {
  try {
    const CaseId id{int_param(params, "id", std::nullopt)};
    const auto steps = int_param(params, "steps", 10);
    if (steps < 1 || steps > 1000) throw BadParam{"steps must lie in [1, 1000]"};
    const double max = tau_param(params, "max", 0.5);
    if (!series_.count(id)) return error_response(404, "unknown id " + std::to_string(id.value));
    std::vector<double> taus;
    for (std::int64_t i = 0; i <= steps; ++i) {
      taus.push_back(max * static_cast<double>(i) / static_cast<double>(steps));
    }
    const auto fit = fit_for(id);
    const auto sets = threshold_sweep(*fit, taus);
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < taus.size(); ++i) {
      rows.push_back({{"threshold", taus[i]}, {"count", sets[i].size()}, {"years", sets[i]}});
    }
    ordered_json j;
    j["id"] = id.value;
    j["eligible"] = fit->fit.has_value();
    j["sweep"] = std::move(rows);
    return {200, std::move(j)};
  } catch (const BadParam& e) {
    return error_response(400, e.message);
  }
}

ApiResponse ExplorerService::post_threshold(std::string_view body) {
  double value = 0.0;
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& v = j.at("value");
    if (v.is_number()) {
      value = v.get<double>();
    } else if (v.is_string()) {
      auto parsed = parse_decimal(trim(v.get<std::string>()));
      if (!parsed) return error_response(400, "value must be a number");
      value = *parsed;
    } else {
      return error_response(400, "value must be a number");
    }
  } catch (const nlohmann::json::exception&) {
    return error_response(400, "expected a JSON body {\"value\": number}");
  }
  if (!(value >= 0.0 && value <= 1.0) || !std::isfinite(value)) {
    return error_response(400, "value must lie in [0, 1]");
  }
  std::lock_guard lock(threshold_mutex_);
  if (config_.config_file.empty()) return error_response(409, "server was started without a config file");
  if (is_locked(config_.out_dir)) return error_response(409, "a pipeline stage is running");
  try {
    set_config_value(config_.config_file, "weight-threshold", format_decimal(value));
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
  threshold_ = value;
  return {200, {{"value", value}}};
}

}  // namespace wagepanel
