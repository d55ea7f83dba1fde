// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#pragma once

#include <optional>
#include <string_view>

namespace wagepanel {

// Highest-grade-completed labels, codes 0..20. Bump the version whenever a
// label changes; emitted tables depend on these strings byte for byte.
inline constexpr int kGradeLabelsVersion = 1;
inline constexpr int kMinGrade = 0;
inline constexpr int kMaxGrade = 20;

std::optional<std::string_view> grade_label(int grade);
std::optional<int> grade_from_label(std::string_view label);

}  // namespace wagepanel
