#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace pidalign {

using Json = nlohmann::json;

// Parses JSON text; syntax errors become Error{InvalidInput} carrying
// "<origin>:<line>:<column>: ...".
Json parse_json(std::string_view text, std::string_view origin = "<input>");
Json read_json_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

// Writes to a temporary sibling and renames over `path`.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view text);

// Pretty-printed (2-space) JSON with a trailing newline.
std::string dump_canonical(const Json& j);

// Schema helpers: throw Error{InvalidInput} naming `where` on mismatch.
const Json& require_field(const Json& j, std::string_view key, std::string_view where);
std::string require_string(const Json& j, std::string_view key, std::string_view where);

}  // namespace pidalign
