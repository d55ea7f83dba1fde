// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#include "wagepanel/tables_io.hpp"

#include <fstream>
#include <sstream>

#include "wagepanel/grade_labels.hpp"
#include "wagepanel/text.hpp"

namespace wagepanel {
namespace {

template <class T>
std::string opt_int(const std::optional<T>& v) {
  return v ? std::to_string(*v) : std::string();
}

std::string opt_ged(const std::optional<GedStatus>& g) {
  return g ? std::to_string(static_cast<int>(*g)) : std::string();
}

std::string hgc_field(const std::optional<int>& hgc_i) {
  if (!hgc_i) return {};
  return quote_csv_field(grade_label(*hgc_i).value());
}

class FieldParser {
 public:
  FieldParser(const std::vector<std::string>& fields, std::size_t line)
      : fields_(fields), line_(line) {}

  [[noreturn]] void fail(std::size_t col, const std::string& what) const {
    throw Error("line " + std::to_string(line_) + ", field " + std::to_string(col + 1) + ": " + what);
  }

  std::string_view text(std::size_t col) const { return trim(fields_.at(col)); }

  std::optional<int> opt_int(std::size_t col) const {
    if (text(col).empty()) return std::nullopt;
    auto v = parse_integer(text(col));
    if (!v) fail(col, "expected integer");
    return static_cast<int>(*v);
  }
  int req_int(std::size_t col) const {
    auto v = opt_int(col);
    if (!v) fail(col, "required integer missing");
    return *v;
  }
  std::optional<double> opt_real(std::size_t col) const {
    if (text(col).empty()) return std::nullopt;
    auto v = parse_decimal(text(col));
    if (!v) fail(col, "expected number");
    return v;
  }
  bool boolean(std::size_t col) const {
    if (text(col) == "TRUE") return true;
    if (text(col) == "FALSE") return false;
    fail(col, "expected TRUE or FALSE");
  }
  std::optional<Sex> sex(std::size_t col) const {
    if (text(col).empty()) return std::nullopt;
    auto v = parse_sex_code(text(col));
    if (!v) fail(col, "unknown sex code");
    return v;
  }
  std::optional<Race> race(std::size_t col) const {
    if (text(col).empty()) return std::nullopt;
    auto v = parse_race_code(text(col));
    if (!v) fail(col, "unknown race code");
    return v;
  }
  std::optional<GedStatus> ged(std::size_t col) const {
    auto v = opt_int(col);
    if (!v) return std::nullopt;
    if (*v < 1 || *v > 3) fail(col, "ged must be 1, 2 or 3");
    return static_cast<GedStatus>(*v);
  }
  /// Checks the label column against the integer column.
  void hgc_pair(std::size_t label_col, const std::optional<int>& hgc_i) const {
    const auto label = text(label_col);
    if (label.empty() != !hgc_i) fail(label_col, "hgc and hgc_i disagree on missingness");
    if (hgc_i && grade_from_label(label) != hgc_i) fail(label_col, "hgc label does not match hgc_i");
  }

 private:
  const std::vector<std::string>& fields_;
  std::size_t line_;
};

template <class Row, class ParseRow>
std::vector<Row> read_table(std::string_view text, std::string_view header, std::size_t width,
                            ParseRow parse_row) {
  std::string owned(text);
  std::istringstream in(owned);
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw Error("empty table: missing header");
  std::string got;
  for (std::size_t i = 0; i < fields.size(); ++i) got += (i ? "," : "") + fields[i];
  if (got != header) throw Error("unexpected header: " + got);
  std::vector<Row> rows;
  while (reader.next(fields)) {
    if (fields.size() != width) {
      throw Error("line " + std::to_string(reader.line_number()) + ": expected " +
                  std::to_string(width) + " fields");
    }
    rows.push_back(parse_row(FieldParser(fields, reader.line_number())));
  }
  return rows;
}

}  // namespace

std::string demog_to_csv(std::span<const PersonDemographics> rows) {
  std::string out(kDemogHeader);
  out += '\n';
  for (const auto& p : rows) {
    out += std::to_string(p.id.value) + ',' + opt_int(p.age_1979) + ',' +
           (p.sex ? std::string(sex_code(*p.sex)) : "") + ',' +
           (p.race ? std::string(race_code(*p.race)) : "") + ',' + hgc_field(p.hgc_i) + ',' +
           opt_int(p.hgc_i) + ',' + opt_int(p.hgc_1979) + ',' + opt_ged(p.ged) + '\n';
  }
  return out;
}

std::vector<PersonDemographics> demog_from_csv(std::string_view text) {
  return read_table<PersonDemographics>(text, kDemogHeader, 8, [](const FieldParser& f) {
    PersonDemographics p;
    p.id = CaseId{f.req_int(0)};
    p.age_1979 = f.opt_int(1);
    p.sex = f.sex(2);
    p.race = f.race(3);
    p.hgc_i = f.opt_int(5);
    f.hgc_pair(4, p.hgc_i);
    p.hgc_1979 = f.opt_int(6);
    p.ged = f.ged(7);
    return p;
  });
}

std::string wages_to_csv(std::span<const PersonYearWage> rows) {
  std::string out(kWagesHeader);
  out += '\n';
  for (const auto& w : rows) {
    out += std::to_string(w.id.value) + ',' + std::to_string(w.year) + ',' +
           (w.wage ? format_decimal(*w.wage) : "") + ',' + opt_int(w.age_1979) + ',' +
           (w.sex ? std::string(sex_code(*w.sex)) : "") + ',' +
           (w.race ? std::string(race_code(*w.race)) : "") + ',' + opt_int(w.grade) + ',' +
           hgc_field(w.hgc_i) + ',' + opt_int(w.hgc_i) + ',' + opt_int(w.hgc_1979) + ',' +
           opt_ged(w.ged) + ',' + std::to_string(w.njobs) + ',' + opt_int(w.hours) + ',' +
           opt_int(w.stwork) + ',' + opt_int(w.yr_wforce) + ',' + format_decimal(w.exp) + ',' +
           (w.is_wm ? "TRUE" : "FALSE") + ',' + (w.is_pred ? "TRUE" : "FALSE") + '\n';
  }
  return out;
}

std::vector<PersonYearWage> wages_from_csv(std::string_view text) {
  return read_table<PersonYearWage>(text, kWagesHeader, 18, [](const FieldParser& f) {
    PersonYearWage w;
    w.id = CaseId{f.req_int(0)};
    w.year = f.req_int(1);
    w.wage = f.opt_real(2);
    w.age_1979 = f.opt_int(3);
    w.sex = f.sex(4);
    w.race = f.race(5);
    w.grade = f.opt_int(6);
    w.hgc_i = f.opt_int(8);
    f.hgc_pair(7, w.hgc_i);
    w.hgc_1979 = f.opt_int(9);
    w.ged = f.ged(10);
    w.njobs = f.req_int(11);
    w.hours = f.opt_int(12);
    w.stwork = f.opt_int(13);
    w.yr_wforce = f.opt_int(14);
    w.exp = f.opt_real(15).value_or(0.0);
    w.is_wm = f.boolean(16);
    w.is_pred = f.boolean(17);
    return w;
  });
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace wagepanel
