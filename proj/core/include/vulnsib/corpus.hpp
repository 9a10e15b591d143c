#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "vulnsib/links.hpp"

namespace vulnsib {

struct VulnRecord {
  std::string id;
  std::string description;
  std::set<std::string> group_ids;
  // True when the record existed at the training cutoff ("old").
  bool known = true;

  friend bool operator==(const VulnRecord&, const VulnRecord&) = default;
};

// Records sorted by id, ids unique.
class Corpus {
 public:
  Corpus() = default;
  // Sorts and validates; throws IntegrityError on duplicate or empty ids.
  Corpus(std::vector<VulnRecord> records, std::string source_tag);

  const std::vector<VulnRecord>& records() const noexcept { return records_; }
  const std::string& source_tag() const noexcept { return source_tag_; }
  std::size_t size() const noexcept { return records_.size(); }

  const VulnRecord* find(const std::string& id) const;
  const VulnRecord& at(const std::string& id) const;

  // Union of two corpora; ids must not collide.
  static Corpus merge(const Corpus& first, const Corpus& second);

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::vector<VulnRecord> records_;
  std::string source_tag_;
};

// Parses line-delimited JSON records {"id", "description", "cwes", "known"?}.
Corpus parse_corpus(std::istream& in, const std::string& source_tag, bool known_flag);
Corpus ingest_corpus(const std::filesystem::path& path, bool known_flag);

// Group id -> sorted member ids. Multi-membership is allowed.
class GroupCatalog {
 public:
  GroupCatalog() = default;
  // Throws IntegrityError if any group is empty.
  explicit GroupCatalog(std::map<std::string, std::vector<std::string>> groups);

  // Synthetic catalog with members "<prefix><group>-<k>", disjoint across groups.
  static GroupCatalog from_cardinalities(const std::vector<std::uint64_t>& cardinalities,
                                         const std::string& prefix = "G");

  const std::map<std::string, std::vector<std::string>>& groups() const noexcept {
    return groups_;
  }
  std::vector<std::string> group_ids() const;
  const std::vector<std::string>& members(const std::string& group_id) const;

  // Per-group member counts, in group id order.
  std::vector<std::uint64_t> cardinalities() const;
  std::uint64_t total_mass() const;
  std::size_t group_count() const noexcept { return groups_.size(); }

  // Groups containing `id` (sorted); empty when the id is not a member.
  const std::vector<std::string>& groups_of(const std::string& id) const;
  // All distinct member ids, sorted.
  std::vector<std::string> member_ids() const;
  bool share_group(const std::string& x, const std::string& y) const;
  std::vector<std::string> shared_groups(const std::string& x, const std::string& y) const;

 private:
  std::map<std::string, std::vector<std::string>> groups_;
  std::map<std::string, std::vector<std::string>> membership_;
};

GroupCatalog build_catalog(const Corpus& corpus, const std::set<std::string>& selected_groups);
// Every group referenced by any record.
std::set<std::string> all_group_ids(const Corpus& corpus);

struct CatalogStats {
  std::size_t groups = 0;
  std::uint64_t total = 0;
  double mean = 0.0;
  double median = 0.0;
  std::uint64_t mode = 0;
  std::uint64_t min = 0;
  std::uint64_t max = 0;
};

CatalogStats catalog_stats(const std::vector<std::uint64_t>& cardinalities);

struct SplitMode {
  enum class Kind : std::uint8_t { Holdout, KFold };
  Kind kind = Kind::Holdout;
  double fraction = 0.8;
  int k = 5;

  static SplitMode holdout(double train_fraction) { return {Kind::Holdout, train_fraction, 0}; }
  static SplitMode kfold(int folds) { return {Kind::KFold, 0.0, folds}; }
};

struct SplitAssignment {
  std::vector<SplitTag> tags;  // parallel to the pair list
  std::uint64_t seed = 0;
  SplitMode mode;

  std::size_t count(const SplitTag& tag) const;
};

// Seeded shuffle, then holdout or k-fold tagging. For holdout the smaller
// side is taken from the front of the shuffled order, so holdout(f) with
// train/test swapped equals holdout(1 - f) under the same seed.
SplitAssignment split_pairs(std::size_t pair_count, const SplitMode& mode, std::uint64_t seed);
SplitAssignment split_pairs(const LinkDataset& pairs, const SplitMode& mode, std::uint64_t seed);

}  // namespace vulnsib
