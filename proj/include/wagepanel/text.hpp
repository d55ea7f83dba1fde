// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wagepanel {

// Numbers in every emitted table go through format_decimal: fixed notation,
// at most six fractional digits, trailing zeros removed ("3.28", "12.5", "40").
inline constexpr int kDecimalPlaces = 6;

std::string format_decimal(double value);
std::optional<double> parse_decimal(std::string_view text);
std::optional<std::int64_t> parse_integer(std::string_view text);

std::string_view trim(std::string_view text);

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes;
/// records spanning several lines are not supported.
std::vector<std::string> split_csv_record(std::string_view line);

std::string quote_csv_field(std::string_view field);

/// Line-oriented CSV reader that strips a UTF-8 BOM and CR line endings.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& fields);
  std::size_t line_number() const { return line_number_; }

 private:
  std::istream& in_;
  std::string line_;
  std::size_t line_number_ = 0;
};

}  // namespace wagepanel
