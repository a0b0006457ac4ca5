#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pidalign/graph.hpp"

namespace pidalign {

inline constexpr std::string_view kPipeRunFeature = "pipe-run";
inline constexpr std::string_view kPipeJunctionFeature = "pipe-junction";

// Lowercase and strip surrounding whitespace.
std::string normalize_label(std::string_view raw);

// Key of a node in the shared label space: pipes map to pipe-run /
// pipe-junction, equipment to its label.
std::string feature_key(const NodeAttribute& attr);

// Shared label space between scene class names and P&ID symbol names.
// Text format: one canonical label per line, or `alias=canonical`; blank
// lines and lines starting with '#' are ignored.
class Vocabulary {
 public:
  struct Resolved {
    std::string label;
    bool known = false;
  };

  // pipe-run and pipe-junction always come first; the file adds equipment
  // classes and `alias=canonical` lines.
  static Vocabulary parse(std::string_view text);
  static Vocabulary load(const std::filesystem::path& path);
  // pipe-run, pipe-junction, then every equipment label of both graphs, sorted.
  static Vocabulary from_graphs(const AlignmentGraph& a, const AlignmentGraph& b);

  void add(std::string_view canonical);
  void add_alias(std::string_view alias, std::string_view canonical);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  std::optional<std::size_t> index_of(std::string_view canonical) const;

  Resolved resolve(std::string_view raw) const;

 private:
  std::vector<std::string> labels_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::map<std::string, std::string, std::less<>> aliases_;
};

}  // namespace pidalign
