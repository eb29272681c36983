#pragma once

/// \file jsonl.hpp
/// Line-delimited JSON reading and writing with line-numbered errors.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace verirag {

/// Calls `fn(record, line_number)` for each non-blank line. Malformed JSON
/// raises DataError with the 1-based line number.
void for_each_jsonl(const std::string& path,
                    const std::function<void(const nlohmann::json&, std::size_t)>& fn);

std::vector<nlohmann::json> read_jsonl(const std::string& path);

/// Writes one compact JSON object per line. nlohmann keeps object keys
/// sorted, so output is byte-stable across runs.
void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& records);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace verirag
