#include "pidalign/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "pidalign/error.hpp"
#include "pidalign/json_io.hpp"

namespace pidalign {

std::string normalize_label(std::string_view raw) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0, e = raw.size();
  while (b < e && is_space(raw[b])) ++b;
  while (e > b && is_space(raw[e - 1])) --e;
  std::string out(raw.substr(b, e - b));
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string feature_key(const NodeAttribute& attr) {
  if (attr.is_pipe())
    return std::string(attr.label == kJunctionLabel ? kPipeJunctionFeature : kPipeRunFeature);
  return attr.label;
}

Vocabulary Vocabulary::parse(std::string_view text) {
  Vocabulary v;
  v.add(kPipeRunFeature);
  v.add(kPipeJunctionFeature);
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = normalize_label(line);
    if (t.empty() || t.front() == '#') continue;
    if (auto eq = t.find('='); eq != std::string::npos) {
      const std::string alias = normalize_label(t.substr(0, eq));
      const std::string canonical = normalize_label(t.substr(eq + 1));
      if (alias.empty() || canonical.empty())
        throw Error(ErrorCode::InvalidInput, "vocabulary: malformed alias line '" + line + "'");
      v.add_alias(alias, canonical);
    } else {
      v.add(t);
    }
  }
  return v;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) { return parse(read_text_file(path)); }

Vocabulary Vocabulary::from_graphs(const AlignmentGraph& a, const AlignmentGraph& b) {
  Vocabulary v;
  v.add(kPipeRunFeature);
  v.add(kPipeJunctionFeature);
  std::set<std::string> labels;
  for (const auto* g : {&a, &b})
    for (const auto& n : g->nodes())
      if (n.attr.is_equipment()) labels.insert(normalize_label(n.attr.label));
  for (const auto& l : labels) v.add(l);
  return v;
}

void Vocabulary::add(std::string_view canonical) {
  std::string key = normalize_label(canonical);
  if (key.empty() || index_.count(key)) return;
  index_.emplace(key, labels_.size());
  labels_.push_back(std::move(key));
}

void Vocabulary::add_alias(std::string_view alias, std::string_view canonical) {
  add(canonical);
  aliases_[normalize_label(alias)] = normalize_label(canonical);
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view canonical) const {
  auto it = index_.find(canonical);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary::Resolved Vocabulary::resolve(std::string_view raw) const {
  std::string key = normalize_label(raw);
  if (auto it = aliases_.find(key); it != aliases_.end()) key = it->second;
  const bool known = index_.count(key) > 0;
  return {std::move(key), known};
}

}  // namespace pidalign
