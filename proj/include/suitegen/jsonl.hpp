#pragma once

#include <filesystem>
#include <functional>
#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

namespace suitegen {

using Json = nlohmann::json;

/// Calls `on_line(line_number, text)` for every non-blank line (1-based).
void for_each_line(std::istream& in,
                   const std::function<void(std::size_t, const std::string&)>& on_line);

/// Parses every non-blank line as JSON; throws FormatError naming the line.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

Json read_json(const std::filesystem::path& path);

/// Writes via a temporary sibling and rename, so readers never see a partial file.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& doc);
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows);

std::string read_text(const std::filesystem::path& path);

} // namespace suitegen
