#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace vulnsib {

enum class LinkLabel : std::uint8_t { Negative = 0, Positive = 1 };

// Unordered vulnerability pair, stored canonically with a < b.
struct LinkPair {
  std::string a;
  std::string b;
  LinkLabel label = LinkLabel::Negative;
  // Group ids justifying the label: shared groups for positives, the two
  // endpoint groups for sampled negatives.
  std::vector<std::string> provenance;

  bool positive() const noexcept { return label == LinkLabel::Positive; }

  friend bool operator==(const LinkPair&, const LinkPair&) = default;
};

// Builds a canonical pair; throws ArgumentError when x == y.
LinkPair make_link(std::string x, std::string y, LinkLabel label,
                   std::vector<std::string> provenance = {});

struct SplitTag {
  enum class Kind : std::uint8_t { Train, Test, Fold };
  Kind kind = Kind::Train;
  int fold = 0;

  static SplitTag train() { return {Kind::Train, 0}; }
  static SplitTag test() { return {Kind::Test, 0}; }
  static SplitTag in_fold(int k) { return {Kind::Fold, k}; }

  std::string to_string() const;
  static SplitTag parse(std::string_view text);

  friend bool operator==(const SplitTag&, const SplitTag&) = default;
};

struct LinkDataset {
  std::vector<LinkPair> pairs;
  // Either empty (untagged) or parallel to `pairs`.
  std::vector<SplitTag> tags;

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }
  std::size_t count(LinkLabel label) const;
};

// Line-delimited JSON: {"a", "b", "label": "pos"|"neg", "prov": [...], "split"?}.
void write_links(std::ostream& out, const LinkDataset& links);
void write_links(const std::filesystem::path& path, const LinkDataset& links);
LinkDataset read_links(std::istream& in, const std::string& source = "<stream>");
LinkDataset read_links(const std::filesystem::path& path);

}  // namespace vulnsib
