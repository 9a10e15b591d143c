#include "vulnsib/links.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "vulnsib/error.hpp"

namespace vulnsib {

using nlohmann::json;

LinkPair make_link(std::string x, std::string y, LinkLabel label,
                   std::vector<std::string> provenance) {
  if (x == y) throw ArgumentError("link endpoints must differ: " + x);
  if (y < x) std::swap(x, y);
  return LinkPair{std::move(x), std::move(y), label, std::move(provenance)};
}

std::string SplitTag::to_string() const {
  switch (kind) {
    case Kind::Train:
      return "train";
    case Kind::Test:
      return "test";
    case Kind::Fold:
      return "fold-" + std::to_string(fold);
  }
  return {};
}

SplitTag SplitTag::parse(std::string_view text) {
  if (text == "train") return train();
  if (text == "test") return test();
  if (text.starts_with("fold-")) {
    int k = 0;
    auto digits = text.substr(5);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc{} && ptr == digits.data() + digits.size() && k >= 0) return in_fold(k);
  }
  throw ParseError("unknown split tag '" + std::string(text) + "'");
}

std::size_t LinkDataset::count(LinkLabel label) const {
  return static_cast<std::size_t>(std::count_if(
      pairs.begin(), pairs.end(), [label](const LinkPair& p) { return p.label == label; }));
}

void write_links(std::ostream& out, const LinkDataset& links) {
  if (!links.tags.empty() && links.tags.size() != links.pairs.size())
    throw ArgumentError("split tags must be parallel to pairs");
  for (std::size_t i = 0; i < links.pairs.size(); ++i) {
    const auto& p = links.pairs[i];
    json row = {{"a", p.a}, {"b", p.b}, {"label", p.positive() ? "pos" : "neg"},
                {"prov", p.provenance}};
    if (!links.tags.empty()) row["split"] = links.tags[i].to_string();
    out << row.dump() << '\n';
  }
}

void write_links(const std::filesystem::path& path, const LinkDataset& links) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_links(out, links);
}

LinkDataset read_links(std::istream& in, const std::string& source) {
  LinkDataset links;
  std::string line;
  std::size_t line_no = 0;
  bool any_tagged = false;
  bool any_untagged = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json row = json::parse(line);
      const std::string label = row.at("label").get<std::string>();
      if (label != "pos" && label != "neg")
        throw ParseError(source, line_no, "label must be \"pos\" or \"neg\"");
      std::vector<std::string> prov;
      if (row.contains("prov")) prov = row.at("prov").get<std::vector<std::string>>();
      links.pairs.push_back(make_link(row.at("a").get<std::string>(), row.at("b").get<std::string>(),
                                      label == "pos" ? LinkLabel::Positive : LinkLabel::Negative,
                                      std::move(prov)));
      if (row.contains("split")) {
        links.tags.push_back(SplitTag::parse(row.at("split").get<std::string>()));
        any_tagged = true;
      } else {
        any_untagged = true;
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  if (any_tagged && any_untagged)
    throw ParseError(source + ": either every link or no link may carry a split tag");
  return links;
}

LinkDataset read_links(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_links(in, path.string());
}

}  // namespace vulnsib
