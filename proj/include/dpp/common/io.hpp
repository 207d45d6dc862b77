// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

namespace dpp {

/// Writes to a sibling temp file and renames it over the target, creating
/// parent directories. Failures raise IoError.
void write_text_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace dpp
