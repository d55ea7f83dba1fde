// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wagepanel/demographics.hpp"
#include "wagepanel/employment.hpp"

namespace wagepanel {

// Emitted tables: missing values are empty fields, booleans TRUE/FALSE, reals
// via format_decimal. Readers accept exactly the header the writers produce.

inline constexpr std::string_view kDemogHeader = "id,age_1979,sex,race,hgc,hgc_i,hgc_1979,ged";
inline constexpr std::string_view kWagesHeader =
    "id,year,wage,age_1979,sex,race,grade,hgc,hgc_i,hgc_1979,ged,njobs,hours,stwork,yr_wforce,"
    "exp,is_wm,is_pred";

std::string demog_to_csv(std::span<const PersonDemographics> rows);
std::vector<PersonDemographics> demog_from_csv(std::string_view text);

std::string wages_to_csv(std::span<const PersonYearWage> rows);
std::vector<PersonYearWage> wages_from_csv(std::string_view text);

std::string read_file(const std::filesystem::path& path);

}  // namespace wagepanel
