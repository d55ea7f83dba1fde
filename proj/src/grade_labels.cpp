// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include "wagepanel/grade_labels.hpp"

#include <array>

namespace wagepanel {
namespace {

constexpr std::array<std::string_view, kMaxGrade + 1> kLabels{
    "NONE",
    "1ST GRADE",
    "2ND GRADE",
    "3RD GRADE",
    "4TH GRADE",
    "5TH GRADE",
    "6TH GRADE",
    "7TH GRADE",
    "8TH GRADE",
    "9TH GRADE",
    "10TH GRADE",
    "11TH GRADE",
    "12TH GRADE",
    "1ST YEAR COLLEGE",
    "2ND YEAR COLLEGE",
    "3RD YEAR COLLEGE",
    "4TH YEAR COLLEGE",
    "5TH YEAR COLLEGE",
    "6TH YEAR COLLEGE",
    "7TH YEAR COLLEGE",
    "8TH YEAR COLLEGE OR MORE",
};

}  // namespace

std::optional<std::string_view> grade_label(int grade) {
  if (grade < kMinGrade || grade > kMaxGrade) return std::nullopt;
  return kLabels[static_cast<std::size_t>(grade)];
}

std::optional<int> grade_from_label(std::string_view label) {
  for (std::size_t i = 0; i < kLabels.size(); ++i) {
    if (kLabels[i] == label) return static_cast<int>(i);
  }
  return std::nullopt;
}

}  // namespace wagepanel
