#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "vulnsib/corpus.hpp"
#include "vulnsib/matrix.hpp"

namespace vulnsib {

using IdSet = std::set<std::string>;

// Overlapping groups; every id of the input appears in at least one group.
struct VulnGroupSet {
  std::vector<IdSet> groups;

  friend bool operator==(const VulnGroupSet&, const VulnGroupSet&) = default;
};

// Greedy parent assignment. Positive pairs are visited in lexicographic id
// order; each joins the first parent (in creation order) already holding
// either endpoint whose children avoid every negative partner of both, or
// opens a new parent. Ids with no positive relation become singletons.
// Guarantees: positives share a group, negatives never do. The number of
// groups is not minimal.
VulnGroupSet assign_groups(const BinaryMatrix& relation);

// |a ∩ b| / |a ∪ b|; throws ArgumentError when both are empty.
double jaccard(const IdSet& a, const IdSet& b);

// Mean over generated groups of the best Jaccard score against any reference
// group restricted to the generated id universe. Reference groups with no ids
// in that universe are skipped.
double best_match_similarity(const VulnGroupSet& generated, const GroupCatalog& reference);

// JSON {"groups": [[ids...], ...]}.
std::string groups_to_json(const VulnGroupSet& groups);
VulnGroupSet groups_from_json(const std::string& text);

}  // namespace vulnsib
