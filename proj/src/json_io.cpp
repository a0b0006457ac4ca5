#include "pidalign/json_io.hpp"

#include <fstream>
#include <sstream>

#include "pidalign/error.hpp"

namespace pidalign {

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

Json parse_json(std::string_view text, std::string_view origin) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    // e.byte is 1-based and points one past the offending character.
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    auto [line, col] = line_column(text, at);
    std::string what = e.what();
    if (auto pos = what.find("parse error"); pos != std::string::npos) what = what.substr(pos);
    throw Error(ErrorCode::InvalidInput, std::string(origin) + ":" + std::to_string(line) + ":" +
                                             std::to_string(col) + ": " + what);
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json read_json_file(const std::filesystem::path& path) { return parse_json(read_text_file(path), path.string()); }

void write_text_file_atomic(const std::filesystem::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename onto '" + path.string() + "': " + ec.message());
}

std::string dump_canonical(const Json& j) { return j.dump(2) + "\n"; }

const Json& require_field(const Json& j, std::string_view key, std::string_view where) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, std::string(where) + ": expected an object");
  auto it = j.find(std::string(key));
  if (it == j.end())
    throw Error(ErrorCode::InvalidInput, std::string(where) + ": missing field '" + std::string(key) + "'");
  return *it;
}

std::string require_string(const Json& j, std::string_view key, std::string_view where) {
  const Json& v = require_field(j, key, where);
  if (!v.is_string())
    throw Error(ErrorCode::InvalidInput, std::string(where) + ": field '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

}  // namespace pidalign
