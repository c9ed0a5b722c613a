#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace retsyn {

std::string read_file(const std::filesystem::path& path);

// Writes via a sibling temp file + rename, so readers never see partial data.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

// Calls `fn(line_no, line)` for every non-blank line, 1-based.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::size_t, std::string_view)>& fn);

// Parses each non-blank line as a JSON object; throws ParseError on bad lines.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

// One compact JSON object per line (keys in nlohmann's canonical sorted order).
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows);

std::string tsv_join(const std::vector<std::string>& cells);
void write_tsv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Fixed-precision decimal rendering, stable across platforms.
std::string fmt_fixed(double value, int precision);

// SHA-256 over a directory tree: file relpaths + contents, sorted.
std::string tree_digest(const std::filesystem::path& root);

}  // namespace retsyn
