// SPDX-License-Identifier: Apache-2.0
// Copyright The wagepanel Authors.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace wagepanel {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace wagepanel
