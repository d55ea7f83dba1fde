// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace wagepanel {

/// Respondent case identifier. Always positive in a loaded table.
struct CaseId {
  std::int64_t value = 0;

  friend constexpr auto operator<=>(CaseId, CaseId) = default;
};

inline constexpr int kFirstSurveyYear = 1979;
inline constexpr int kLastSurveyYear = 2018;

/// Interview rounds ran annually through 1994 and biennially afterwards.
constexpr bool is_survey_year(int year) {
  if (year < kFirstSurveyYear || year > kLastSurveyYear) return false;
  return year <= 1994 || year % 2 == 0;
}

/// Base for every error this library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration value outside its domain.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace wagepanel

template <>
struct std::hash<wagepanel::CaseId> {
  std::size_t operator()(wagepanel::CaseId id) const noexcept {
    return std::hash<std::int64_t>{}(id.value);
  }
};
