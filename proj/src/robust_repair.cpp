// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include "wagepanel/robust_repair.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "wagepanel/parallel.hpp"

namespace wagepanel {
namespace {

constexpr double kMadConsistency = 0.6745;

struct Line {
  double intercept = 0.0;
  double slope = 0.0;
};

// Weighted least squares on centred x. Fitted values are formed around the
// weighted means, which keeps them exact under shifts of y.
Line solve_weighted(std::span<const double> x, std::span<const double> y,
                    std::span<const double> w, std::vector<double>& fitted) {
  double sw = 0.0, swx = 0.0, swy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    swx += w[i] * x[i];
    swy += w[i] * y[i];
  }
  const double xm = swx / sw;
  const double ym = swy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - xm;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * (y[i] - ym);
  }
  const double slope = sxy / sxx;
  fitted.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) fitted[i] = ym + slope * (x[i] - xm);
  return {ym - slope * xm, slope};
}

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lower + upper) / 2.0;
}

}  // namespace

void RepairConfig::validate() const {
  if (!(weight_threshold >= 0.0 && weight_threshold <= 1.0)) {
    throw ConfigError("weight-threshold must lie in [0, 1]");
  }
  if (!(huber_c > 0.0) || !std::isfinite(huber_c)) throw ConfigError("huber-c must be positive");
  if (max_iterations < 1) throw ConfigError("max-iterations must be at least 1");
  if (!(convergence_tol > 0.0)) throw ConfigError("convergence-tol must be positive");
  if (!(scale_floor > 0.0)) throw ConfigError("scale-floor must be positive");
  if (min_points_for_repair < 3) throw ConfigError("min-points-for-repair must be at least 3");
}

RobustFitResult fit_huber_line(std::span<const Observation> points, const RepairConfig& config) {
  for (const auto& p : points) {
    if (!std::isfinite(p.year) || !std::isfinite(p.wage)) throw FitError("non-finite observation");
  }
  const std::size_t n = points.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].year != points[b].year) return points[a].year < points[b].year;
    return points[a].wage < points[b].wage;
  });
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = points[order[i]].year;
    y[i] = points[order[i]].wage;
  }
  if (n == 0 || x.front() == x.back()) throw FitError("fewer than two distinct years");

  std::vector<double> w(n, 1.0), fitted, next_fitted, abs_r(n);
  Line line = solve_weighted(x, y, w, fitted);
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double spread = *hi - *lo;

  RobustFitResult out;
  std::vector<double> next_w(n);
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    for (std::size_t i = 0; i < n; ++i) abs_r[i] = std::abs(y[i] - fitted[i]);
    const double s = median_of(abs_r) / kMadConsistency;
    out.scale = s;
    if (spread == 0.0 || s <= config.scale_floor * spread) {
      out.converged = true;
      break;
    }
    const double cutoff = config.huber_c * s;
    for (std::size_t i = 0; i < n; ++i) {
      next_w[i] = abs_r[i] <= cutoff ? 1.0 : cutoff / abs_r[i];
    }
    line = solve_weighted(x, y, next_w, next_fitted);
    ++out.iterations;
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) delta = std::max(delta, std::abs(next_fitted[i] - fitted[i]));
    fitted.swap(next_fitted);
    w.swap(next_w);
    if (delta <= config.convergence_tol * s) {
      out.converged = true;
      break;
    }
  }

  out.intercept = line.intercept;
  out.slope = line.slope;
  out.weights.resize(n);
  out.fitted.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.weights[order[i]] = w[i];
    out.fitted[order[i]] = fitted[i];
  }
  return out;
}

SeriesFit fit_series(CaseId id, std::span<const int> years, std::span<const double> wages,
                     const RepairConfig& config) {
  if (years.size() != wages.size()) throw Error("years and wages differ in length");
  SeriesFit out;
  out.id = id;
  std::vector<std::size_t> order(years.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return years[a] < years[b]; });
  for (std::size_t i : order) {
    out.years.push_back(years[i]);
    out.wages.push_back(wages[i]);
  }
  if (static_cast<int>(out.wages.size()) < config.min_points_for_repair) return out;
  std::vector<Observation> points;
  points.reserve(out.wages.size());
  for (std::size_t i = 0; i < out.wages.size(); ++i) {
    points.push_back({static_cast<double>(out.years[i]), out.wages[i]});
  }
  try {
    out.fit = fit_huber_line(points, config);
  } catch (const FitError& e) {
    out.skip_reason = e.what();
  }
  return out;
}

std::vector<std::size_t> replaced_indices(const SeriesFit& series, double tau) {
  std::vector<std::size_t> out;
  if (!series.fit) return out;
  for (std::size_t i = 0; i < series.fit->weights.size(); ++i) {
    if (series.fit->weights[i] < tau) out.push_back(i);
  }
  return out;
}

RepairedSeries apply_threshold(const SeriesFit& series, double tau) {
  RepairedSeries out;
  out.id = series.id;
  out.points.reserve(series.years.size());
  for (std::size_t i = 0; i < series.years.size(); ++i) {
    out.points.push_back({series.years[i], series.wages[i], series.wages[i], false});
  }
  for (std::size_t i : replaced_indices(series, tau)) {
    out.points[i].final = series.fit->fitted[i];
    out.points[i].is_pred = true;
  }
  return out;
}

RepairedSeries repair_series(CaseId id, std::span<const int> years, std::span<const double> wages,
                             const RepairConfig& config) {
  return apply_threshold(fit_series(id, years, wages, config), config.weight_threshold);
}

std::vector<std::vector<int>> threshold_sweep(const SeriesFit& series,
                                              std::span<const double> thresholds) {
  std::vector<std::vector<int>> out;
  out.reserve(thresholds.size());
  for (double tau : thresholds) {
    std::vector<int> years;
    for (std::size_t i : replaced_indices(series, tau)) years.push_back(series.years[i]);
    out.push_back(std::move(years));
  }
  return out;
}

nlohmann::ordered_json RepairReport::to_json() const {
  nlohmann::ordered_json j;
  j["config"] = {{"weight_threshold", config.weight_threshold},
                 {"huber_c", config.huber_c},
                 {"max_iterations", config.max_iterations},
                 {"convergence_tol", config.convergence_tol},
                 {"scale_floor", config.scale_floor},
                 {"min_points_for_repair", config.min_points_for_repair}};
  j["totals"] = {{"series", series.size()},
                 {"repaired_series", repaired_series},
                 {"replacements", replacements},
                 {"ineligible_series", ineligible_series},
                 {"skipped_series", skipped_series}};
  auto arr = nlohmann::ordered_json::array();
  for (const auto& s : series) {
    nlohmann::ordered_json e;
    e["id"] = s.id.value;
    e["n"] = s.n;
    e["replaced_years"] = s.replaced_years;
    e["weights"] = s.replaced_weights;
    e["converged"] = s.converged ? nlohmann::ordered_json(*s.converged) : nullptr;
    if (!s.note.empty()) e["note"] = s.note;
    arr.push_back(std::move(e));
  }
  j["series"] = std::move(arr);
  return j;
}

std::vector<SeriesFit> fit_all(std::span<const PersonYearWage> wages, const RepairConfig& config) {
  std::map<CaseId, std::pair<std::vector<int>, std::vector<double>>> groups;
  for (const auto& row : wages) {
    auto& g = groups[row.id];
    if (!row.wage) continue;
    g.first.push_back(row.year);
    g.second.push_back(*row.wage);
  }
  std::vector<const decltype(groups)::value_type*> items;
  items.reserve(groups.size());
  for (const auto& kv : groups) items.push_back(&kv);
  std::vector<SeriesFit> fits(items.size());
  parallel_for(items.size(), [&](std::size_t i) {
    const auto& [id, g] = *items[i];
    fits[i] = fit_series(id, g.first, g.second, config);
  });
  return fits;
}

RepairOutcome repair_all(std::span<const PersonYearWage> wages, const RepairConfig& config) {
  config.validate();
  RepairOutcome out;
  out.wages.assign(wages.begin(), wages.end());
  out.report.config = config;

  std::map<std::pair<CaseId, int>, std::size_t> row_of;
  for (std::size_t r = 0; r < wages.size(); ++r) row_of[{wages[r].id, wages[r].year}] = r;

  for (const SeriesFit& fit : fit_all(wages, config)) {
    SeriesReport rep;
    rep.id = fit.id;
    rep.n = static_cast<int>(fit.wages.size());
    if (fit.fit) {
      rep.converged = fit.fit->converged;
    } else if (!fit.skip_reason.empty()) {
      rep.note = fit.skip_reason;
      ++out.report.skipped_series;
    } else {
      rep.note = "ineligible";
      ++out.report.ineligible_series;
    }
    for (std::size_t i : replaced_indices(fit, config.weight_threshold)) {
      auto& row = out.wages[row_of.at({fit.id, fit.years[i]})];
      row.wage = fit.fit->fitted[i];
      row.is_pred = true;
      rep.replaced_years.push_back(fit.years[i]);
      rep.replaced_weights.push_back(fit.fit->weights[i]);
    }
    out.report.replacements += rep.replaced_years.size();
    if (!rep.replaced_years.empty()) ++out.report.repaired_series;
    out.report.series.push_back(std::move(rep));
  }
  return out;
}

}  // namespace wagepanel
