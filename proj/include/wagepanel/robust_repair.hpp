// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wagepanel/common.hpp"
#include "wagepanel/employment.hpp"

namespace wagepanel {

struct RepairConfig {
  double weight_threshold = 0.1;
  double huber_c = 1.345;
  int max_iterations = 50;
  double convergence_tol = 1e-8;
  double scale_floor = 1e-8;
  int min_points_for_repair = 4;

  /// Throws ConfigError when a field is out of its domain.
  void validate() const;

  friend bool operator==(const RepairConfig&, const RepairConfig&) = default;
};

class FitError : public Error {
 public:
  using Error::Error;
};

struct Observation {
  double year = 0.0;
  double wage = 0.0;
};

struct RobustFitResult {
  double intercept = 0.0;
  double slope = 0.0;
  double scale = 0.0;
  std::vector<double> weights;  // input order
  std::vector<double> fitted;   // input order
  bool converged = false;
  int iterations = 0;
};

/// Huber M-estimate of wage on year by iteratively reweighted least squares.
///
/// Starts from ordinary least squares. Each iteration takes
/// s = median|r| / 0.6745 and stops, keeping the current weights, once s is
/// at most scale_floor times the wage range (at once for a constant series).
/// Otherwise the weights become min(1, c*s/|r|) and the weighted line is
/// refitted; the loop has converged
/// when no fitted value moves by more than convergence_tol * s. Points are
/// processed in (year, wage) order so the result does not depend on input order.
RobustFitResult fit_huber_line(std::span<const Observation> points,
                               const RepairConfig& config = {});

/// A series fitted once, ready to be thresholded at any τ.
struct SeriesFit {
  CaseId id;
  std::vector<int> years;
  std::vector<double> wages;
  std::optional<RobustFitResult> fit;  // absent when ineligible or skipped
  std::string skip_reason;             // non-empty when the fit raised
};

/// Non-missing points of one person's series, ordered by year.
SeriesFit fit_series(CaseId id, std::span<const int> years, std::span<const double> wages,
                     const RepairConfig& config);

struct RepairedPoint {
  int year = 0;
  double original = 0.0;
  double final = 0.0;
  bool is_pred = false;
};

struct RepairedSeries {
  CaseId id;
  std::vector<RepairedPoint> points;
};

/// Indices with weight strictly below tau; empty for an unfitted series.
std::vector<std::size_t> replaced_indices(const SeriesFit& series, double tau);

RepairedSeries apply_threshold(const SeriesFit& series, double tau);

RepairedSeries repair_series(CaseId id, std::span<const int> years, std::span<const double> wages,
                             const RepairConfig& config);

/// Replacement years for each threshold, from a single fit.
std::vector<std::vector<int>> threshold_sweep(const SeriesFit& series,
                                              std::span<const double> thresholds);

struct SeriesReport {
  CaseId id;
  int n = 0;
  std::vector<int> replaced_years;
  std::vector<double> replaced_weights;
  std::optional<bool> converged;  // absent when not fitted
  std::string note;               // "ineligible" or the skip reason
};

struct RepairReport {
  RepairConfig config;
  std::vector<SeriesReport> series;
  std::size_t replacements = 0;
  std::size_t repaired_series = 0;
  std::size_t skipped_series = 0;
  std::size_t ineligible_series = 0;

  nlohmann::ordered_json to_json() const;
};

struct RepairOutcome {
  std::vector<PersonYearWage> wages;
  RepairReport report;
};

/// Groups rows by id, fits each person independently and replaces wages with
/// weight below the threshold. Row order is preserved.
RepairOutcome repair_all(std::span<const PersonYearWage> wages, const RepairConfig& config);

/// Per-id fits over the non-missing wages of a table, in ascending id order.
std::vector<SeriesFit> fit_all(std::span<const PersonYearWage> wages, const RepairConfig& config);

}  // namespace wagepanel
