#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace cascade::runner {

// Writes to a sibling temporary file and renames it into place, so the final
// path never holds a partial file. Parent directories are created.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j);
void write_jsonl_atomic(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines);

std::string read_file(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

}  // namespace cascade::runner
