// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include "reference/reference_irls.hpp"
#include "wagepanel/robust_repair.hpp"

namespace wagepanel {
namespace {

std::vector<Observation> line_points(int n, double a, double b, int first_year = 1979) {
  std::vector<Observation> pts;
  for (int i = 0; i < n; ++i) pts.push_back({double(first_year + i), a + b * i});
  return pts;
}

std::vector<Observation> noisy_series(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.4);
  const double a = 3.0 + 10.0 * u(rng), b = 0.5 * u(rng) - 0.1;
  std::vector<int> years{1979, 1980, 1981, 1982, 1983, 1984, 1985, 1986, 1987, 1988, 1989, 1990,
                         1991, 1992, 1993, 1994, 1996, 1998, 2000, 2002, 2004, 2006, 2008, 2010};
  std::shuffle(years.begin(), years.end(), rng);
  years.resize(static_cast<std::size_t>(n));
  std::vector<Observation> pts;
  for (int y : years) {
    double w = a + b * (y - 1979) + noise(rng);
    if (u(rng) < 0.15) w *= 5.0 + 20.0 * u(rng);
    pts.push_back({double(y), std::max(w, 0.5)});
  }
  return pts;
}

void split(const std::vector<Observation>& pts, std::vector<double>& x, std::vector<double>& y) {
  x.clear();
  y.clear();
  for (const auto& p : pts) {
    x.push_back(p.year);
    y.push_back(p.wage);
  }
}

TEST(HuberFit, LinearSeriesKeepsUnitWeights) {
  for (double slope : {0.0, 0.25, -0.3}) {
    const auto fit = fit_huber_line(line_points(12, 6.5, slope));
    for (double w : fit.weights) EXPECT_NEAR(w, 1.0, 1e-9);
    EXPECT_TRUE(fit.converged);
    EXPECT_NEAR(fit.slope, slope, 1e-9);
  }
}

TEST(HuberFit, ConstantSeriesConvergesAtOnce) {
  const auto fit = fit_huber_line(line_points(6, 7.25, 0.0));
  EXPECT_TRUE(fit.converged);
  EXPECT_EQ(fit.iterations, 0);
  for (double w : fit.weights) EXPECT_EQ(w, 1.0);
  for (double f : fit.fitted) EXPECT_EQ(f, 7.25);
}

TEST(HuberFit, SpikeIsDownweightedAndMatchesReference) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0.0, 0.15);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 8 + trial % 10;
    const int spike = 1 + trial % (n - 2);
    std::vector<Observation> pts;
    std::vector<double> truth;
    for (int i = 0; i < n; ++i) {
      const double level = 6.0 + 0.2 * i;
      truth.push_back(level);
      pts.push_back({1979.0 + i, level + noise(rng)});
    }
    pts[spike].wage = truth[spike] * 40.0;
    const auto fit = fit_huber_line(pts);
    EXPECT_LT(fit.weights[spike], 0.05);
    EXPECT_LT(std::abs(fit.fitted[spike] - truth[spike]) / truth[spike], 0.05);

    std::vector<double> x, y;
    split(pts, x, y);
    const auto ref = reference::huber(x, y);
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(fit.weights[i], ref.weights[i], 1e-8);
      EXPECT_NEAR(fit.fitted[i], ref.fitted[i], 1e-8 * std::abs(ref.fitted[i]));
    }
    EXPECT_EQ(fit.iterations, ref.iterations);
  }
}

TEST(HuberFit, AgreesWithReferenceOnRandomSeries) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const auto pts = noisy_series(rng, 4 + trial % 20);
    std::vector<double> x, y;
    split(pts, x, y);
    const auto fit = fit_huber_line(pts);
    const auto ref = reference::huber(x, y);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      ASSERT_NEAR(fit.weights[i], ref.weights[i], 1e-8) << "trial " << trial;
      ASSERT_NEAR(fit.fitted[i], ref.fitted[i], 1e-8 * std::max(1.0, std::abs(ref.fitted[i])));
    }
  }
}

TEST(HuberFit, AffineEquivariance) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pts = noisy_series(rng, 5 + trial % 18);
    const auto base = fit_huber_line(pts);
    for (auto [a, b] : {std::pair{0.0, 3.0}, std::pair{12.5, 1.0}, std::pair{-4.0, 0.01}}) {
      auto moved = pts;
      for (auto& p : moved) p.wage = a + b * p.wage;
      const auto fit = fit_huber_line(moved);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const double want = a + b * base.fitted[i];
        ASSERT_NEAR(fit.weights[i], base.weights[i], 1e-9);
        ASSERT_LE(std::abs(fit.fitted[i] - want), 1e-9 * std::max(std::abs(want), b)) << trial;
      }
    }
    auto shifted = pts;
    for (auto& p : shifted) p.year += 7.0;
    const auto fit = fit_huber_line(shifted);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      ASSERT_NEAR(fit.weights[i], base.weights[i], 1e-9);
      ASSERT_NEAR(fit.fitted[i], base.fitted[i], 1e-9 * std::abs(base.fitted[i]));
    }
  }
}

TEST(HuberFit, InputOrderDoesNotMatter) {
  std::mt19937_64 rng(37);
  auto pts = noisy_series(rng, 15);
  const auto fit = fit_huber_line(pts);
  std::vector<std::size_t> perm(pts.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Observation> shuffled;
  for (auto i : perm) shuffled.push_back(pts[i]);
  const auto again = fit_huber_line(shuffled);
  for (std::size_t k = 0; k < perm.size(); ++k) {
    EXPECT_EQ(again.weights[k], fit.weights[perm[k]]);
    EXPECT_EQ(again.fitted[k], fit.fitted[perm[k]]);
  }
}

TEST(HuberFit, Errors) {
  EXPECT_THROW(fit_huber_line(std::vector<Observation>{}), FitError);
  EXPECT_THROW(fit_huber_line(std::vector<Observation>{{1990, 1}, {1990, 2}}), FitError);
  EXPECT_THROW(fit_huber_line(std::vector<Observation>{{1990, 1}, {1991, NAN}}), FitError);
}

TEST(RepairConfig, Validation) {
  EXPECT_NO_THROW(RepairConfig{}.validate());
  RepairConfig c;
  c.weight_threshold = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.huber_c = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.max_iterations = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.min_points_for_repair = 2;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Threshold, MonotoneReplacementSets) {
  std::mt19937_64 rng(41);
  std::vector<double> taus;
  for (int k = 0; k <= 20; ++k) taus.push_back(0.5 * k / 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pts = noisy_series(rng, 4 + trial % 20);
    std::vector<int> years;
    std::vector<double> wages;
    for (const auto& p : pts) {
      years.push_back(static_cast<int>(p.year));
      wages.push_back(p.wage);
    }
    const auto fit = fit_series(CaseId{trial + 1}, years, wages, RepairConfig{});
    const auto sets = threshold_sweep(fit, taus);
    EXPECT_TRUE(sets.front().empty());
    for (std::size_t k = 1; k < sets.size(); ++k) {
      ASSERT_TRUE(std::includes(sets[k].begin(), sets[k].end(), sets[k - 1].begin(), sets[k - 1].end()));
    }
  }
}

TEST(Threshold, ZeroIsIdentity) {
  std::mt19937_64 rng(43);
  const auto pts = noisy_series(rng, 12);
  std::vector<int> years;
  std::vector<double> wages;
  for (const auto& p : pts) {
    years.push_back(static_cast<int>(p.year));
    wages.push_back(p.wage);
  }
  RepairConfig c;
  c.weight_threshold = 0.0;
  const auto r = repair_series(CaseId{1}, years, wages, c);
  for (const auto& p : r.points) {
    EXPECT_FALSE(p.is_pred);
    EXPECT_EQ(std::memcmp(&p.final, &p.original, sizeof(double)), 0);
  }
}

TEST(Series, EligibilityAndOrdering) {
  const std::vector<int> years{1990, 1980, 1985};
  const std::vector<double> wages{9.0, 5.0, 7.0};
  const auto s = fit_series(CaseId{3}, years, wages, RepairConfig{});
  EXPECT_FALSE(s.fit);
  EXPECT_TRUE(s.skip_reason.empty());
  EXPECT_EQ(s.years, (std::vector<int>{1980, 1985, 1990}));
  EXPECT_TRUE(replaced_indices(s, 1.0).empty());
  EXPECT_THROW(fit_series(CaseId{3}, years, std::vector<double>{1.0}, RepairConfig{}), Error);
}

TEST(RepairAll, ReplacesSpikeAndPreservesRowOrder) {
  std::vector<PersonYearWage> rows;
  auto add = [&](std::int64_t id, int year, std::optional<double> wage) {
    PersonYearWage w;
    w.id = CaseId{id};
    w.year = year;
    w.wage = wage;
    rows.push_back(w);
  };
  for (int i = 0; i < 8; ++i) add(2, 1990 - i, i == 3 ? 250.0 : 10.0 - 0.2 * i + 0.01 * (i % 3));
  for (int i = 0; i < 3; ++i) add(1, 1980 + i, 5.0 + i);
  add(1, 1984, std::nullopt);
  const auto out = repair_all(rows, RepairConfig{});
  ASSERT_EQ(out.wages.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(out.wages[i].id, rows[i].id);
    EXPECT_EQ(out.wages[i].year, rows[i].year);
    EXPECT_EQ(out.wages[i].is_pred, i == 3);
    if (i != 3) {
      EXPECT_EQ(out.wages[i].wage, rows[i].wage);
    }
  }
  EXPECT_NEAR(*out.wages[3].wage, 9.4, 0.1);
  EXPECT_EQ(out.report.replacements, 1u);
  EXPECT_EQ(out.report.repaired_series, 1u);
  EXPECT_EQ(out.report.ineligible_series, 1u);
  const auto j = out.report.to_json();
  EXPECT_EQ(j["series"][0]["note"], "ineligible");
  EXPECT_EQ(j["series"][1]["replaced_years"][0], 1987);
  EXPECT_EQ(j["totals"]["replacements"], 1);
}

}  // namespace
}  // namespace wagepanel
