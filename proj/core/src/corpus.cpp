#include "vulnsib/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>

#include <json.hpp>

#include "vulnsib/error.hpp"
#include "vulnsib/rng.hpp"

namespace vulnsib {

using nlohmann::json;

Corpus::Corpus(std::vector<VulnRecord> records, std::string source_tag)
    : records_(std::move(records)), source_tag_(std::move(source_tag)) {
  std::sort(records_.begin(), records_.end(),
            [](const VulnRecord& x, const VulnRecord& y) { return x.id < y.id; });
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].id.empty()) throw IntegrityError("record with empty id");
    if (i > 0 && records_[i].id == records_[i - 1].id)
      throw IntegrityError("duplicate record id: " + records_[i].id);
  }
}

const VulnRecord* Corpus::find(const std::string& id) const {
  auto it = std::lower_bound(records_.begin(), records_.end(), id,
                             [](const VulnRecord& r, const std::string& key) { return r.id < key; });
  if (it == records_.end() || it->id != id) return nullptr;
  return &*it;
}

const VulnRecord& Corpus::at(const std::string& id) const {
  if (const auto* r = find(id)) return *r;
  throw IntegrityError("unknown record id: " + id);
}

Corpus Corpus::merge(const Corpus& first, const Corpus& second) {
  std::vector<VulnRecord> all = first.records_;
  all.insert(all.end(), second.records_.begin(), second.records_.end());
  std::string tag = first.source_tag_;
  if (!second.source_tag_.empty()) tag += (tag.empty() ? "" : "+") + second.source_tag_;
  return Corpus(std::move(all), std::move(tag));
}

Corpus parse_corpus(std::istream& in, const std::string& source_tag, bool known_flag) {
  std::vector<VulnRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    VulnRecord rec;
    try {
      const json row = json::parse(line);
      if (!row.is_object()) throw ParseError(source_tag, line_no, "record must be a JSON object");
      for (const char* field : {"id", "description", "cwes"}) {
        if (!row.contains(field))
          throw ParseError(source_tag, line_no, std::string("missing field \"") + field + "\"");
      }
      rec.id = row.at("id").get<std::string>();
      rec.description = row.at("description").get<std::string>();
      for (const auto& g : row.at("cwes")) rec.group_ids.insert(g.get<std::string>());
      rec.known = row.contains("known") ? row.at("known").get<bool>() : known_flag;
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(source_tag, line_no, e.what());
    }
    if (rec.id.empty()) throw IntegrityError(source_tag + ":" + std::to_string(line_no) + ": empty id");
    if (rec.description.empty())
      throw IntegrityError(source_tag + ":" + std::to_string(line_no) + ": empty description for " +
                           rec.id);
    records.push_back(std::move(rec));
  }
  return Corpus(std::move(records), source_tag);
}

Corpus ingest_corpus(const std::filesystem::path& path, bool known_flag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus " + path.string());
  return parse_corpus(in, path.filename().string(), known_flag);
}

GroupCatalog::GroupCatalog(std::map<std::string, std::vector<std::string>> groups)
    : groups_(std::move(groups)) {
  for (auto& [gid, members] : groups_) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    if (members.empty()) throw IntegrityError("group has no members: " + gid);
    for (const auto& m : members) membership_[m].push_back(gid);
  }
}

GroupCatalog GroupCatalog::from_cardinalities(const std::vector<std::uint64_t>& cardinalities,
                                              const std::string& prefix) {
  std::map<std::string, std::vector<std::string>> groups;
  const int width = static_cast<int>(std::to_string(cardinalities.size()).size());
  for (std::size_t i = 0; i < cardinalities.size(); ++i) {
    std::string gid = std::to_string(i);
    gid.insert(0, static_cast<std::size_t>(width) - gid.size(), '0');
    gid = prefix + gid;
    auto& members = groups[gid];
    members.reserve(cardinalities[i]);
    for (std::uint64_t k = 0; k < cardinalities[i]; ++k) members.push_back(gid + "-" + std::to_string(k));
  }
  return GroupCatalog(std::move(groups));
}

std::vector<std::string> GroupCatalog::group_ids() const {
  std::vector<std::string> ids;
  ids.reserve(groups_.size());
  for (const auto& [gid, _] : groups_) ids.push_back(gid);
  return ids;
}

const std::vector<std::string>& GroupCatalog::members(const std::string& group_id) const {
  auto it = groups_.find(group_id);
  if (it == groups_.end()) throw ArgumentError("unknown group: " + group_id);
  return it->second;
}

std::vector<std::uint64_t> GroupCatalog::cardinalities() const {
  std::vector<std::uint64_t> c;
  c.reserve(groups_.size());
  for (const auto& [_, members] : groups_) c.push_back(members.size());
  return c;
}

std::uint64_t GroupCatalog::total_mass() const {
  std::uint64_t total = 0;
  for (const auto& [_, members] : groups_) total += members.size();
  return total;
}

const std::vector<std::string>& GroupCatalog::groups_of(const std::string& id) const {
  static const std::vector<std::string> none;
  auto it = membership_.find(id);
  return it == membership_.end() ? none : it->second;
}

std::vector<std::string> GroupCatalog::member_ids() const {
  std::vector<std::string> ids;
  ids.reserve(membership_.size());
  for (const auto& [id, _] : membership_) ids.push_back(id);
  return ids;
}

std::vector<std::string> GroupCatalog::shared_groups(const std::string& x,
                                                     const std::string& y) const {
  const auto& gx = groups_of(x);
  const auto& gy = groups_of(y);
  std::vector<std::string> shared;
  std::set_intersection(gx.begin(), gx.end(), gy.begin(), gy.end(), std::back_inserter(shared));
  return shared;
}

bool GroupCatalog::share_group(const std::string& x, const std::string& y) const {
  const auto& gx = groups_of(x);
  const auto& gy = groups_of(y);
  auto i = gx.begin();
  auto j = gy.begin();
  while (i != gx.end() && j != gy.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i; else ++j;
  }
  return false;
}

GroupCatalog build_catalog(const Corpus& corpus, const std::set<std::string>& selected_groups) {
  if (selected_groups.empty()) throw ArgumentError("no groups selected");
  std::map<std::string, std::vector<std::string>> groups;
  for (const auto& gid : selected_groups) groups[gid];
  for (const auto& rec : corpus.records()) {
    for (const auto& gid : rec.group_ids) {
      auto it = groups.find(gid);
      if (it != groups.end()) it->second.push_back(rec.id);
    }
  }
  for (const auto& [gid, members] : groups) {
    if (members.empty()) throw IntegrityError("selected group has no members in corpus: " + gid);
  }
  return GroupCatalog(std::move(groups));
}

std::set<std::string> all_group_ids(const Corpus& corpus) {
  std::set<std::string> ids;
  for (const auto& rec : corpus.records()) ids.insert(rec.group_ids.begin(), rec.group_ids.end());
  return ids;
}

CatalogStats catalog_stats(const std::vector<std::uint64_t>& cardinalities) {
  CatalogStats stats;
  if (cardinalities.empty()) return stats;
  std::vector<std::uint64_t> sorted = cardinalities;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  stats.groups = n;
  stats.total = std::accumulate(sorted.begin(), sorted.end(), std::uint64_t{0});
  stats.mean = static_cast<double>(stats.total) / static_cast<double>(n);
  stats.median = n % 2 == 1 ? static_cast<double>(sorted[n / 2])
                            : 0.5 * static_cast<double>(sorted[n / 2 - 1] + sorted[n / 2]);
  stats.min = sorted.front();
  stats.max = sorted.back();
  // Smallest most-frequent value.
  std::size_t best_run = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    if (j - i > best_run) {
      best_run = j - i;
      stats.mode = sorted[i];
    }
    i = j;
  }
  return stats;
}

std::size_t SplitAssignment::count(const SplitTag& tag) const {
  return static_cast<std::size_t>(std::count(tags.begin(), tags.end(), tag));
}

SplitAssignment split_pairs(std::size_t pair_count, const SplitMode& mode, std::uint64_t seed) {
  if (pair_count == 0) throw ArgumentError("cannot split an empty pair set");
  SplitAssignment out;
  out.seed = seed;
  out.mode = mode;
  out.tags.resize(pair_count);

  std::vector<std::size_t> order(pair_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(std::span<std::size_t>(order));

  if (mode.kind == SplitMode::Kind::Holdout) {
    if (!(mode.fraction > 0.0 && mode.fraction < 1.0))
      throw ArgumentError("holdout fraction must lie in (0, 1)");
    const bool train_is_minority = mode.fraction < 0.5;
    const double minority_fraction = train_is_minority ? mode.fraction : 1.0 - mode.fraction;
    const auto minority = static_cast<std::size_t>(
        std::floor(minority_fraction * static_cast<double>(pair_count) + 0.5));
    const SplitTag front = train_is_minority ? SplitTag::train() : SplitTag::test();
    const SplitTag back = train_is_minority ? SplitTag::test() : SplitTag::train();
    for (std::size_t r = 0; r < pair_count; ++r) out.tags[order[r]] = r < minority ? front : back;
  } else {
    if (mode.k < 2) throw ArgumentError("k-fold split needs k >= 2");
    if (static_cast<std::size_t>(mode.k) > pair_count)
      throw ArgumentError("k-fold split with k=" + std::to_string(mode.k) + " exceeds " +
                          std::to_string(pair_count) + " pairs");
    for (std::size_t r = 0; r < pair_count; ++r)
      out.tags[order[r]] = SplitTag::in_fold(static_cast<int>(r % static_cast<std::size_t>(mode.k)));
  }
  return out;
}

SplitAssignment split_pairs(const LinkDataset& pairs, const SplitMode& mode, std::uint64_t seed) {
  return split_pairs(pairs.size(), mode, seed);
}

}  // namespace vulnsib
