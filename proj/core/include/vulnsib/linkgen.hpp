#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vulnsib/corpus.hpp"
#include "vulnsib/links.hpp"

namespace vulnsib {

// Intra-group pair count, sum of c(c-1)/2 over groups. Groups are counted
// independently, so a pair sharing two groups is counted twice.
std::uint64_t count_positive(std::span<const std::uint64_t> cardinalities);
std::uint64_t count_positive(const GroupCatalog& catalog);

// Unordered cross-group pair count, ((sum c)^2 - sum c^2) / 2, treating
// groups as disjoint.
std::uint64_t count_negative(std::span<const std::uint64_t> cardinalities);
std::uint64_t count_negative(const GroupCatalog& catalog);

// Every unordered intra-group pair exactly once, sorted by (a, b). Pairs
// sharing several groups list all of them as provenance.
std::vector<LinkPair> enumerate_positive(const GroupCatalog& catalog);

// Fraction of a group's members kept for negative sampling:
// ((total - c) / total)^p.
double sampling_fraction(std::uint64_t total, std::uint64_t cardinality, double p);
double sampling_fraction(const GroupCatalog& catalog, const std::string& group_id, double p);

// Members retained for one group: half-up rounding of fraction * c, never
// below one while the fraction is positive.
std::uint64_t retained_count(double fraction, std::uint64_t cardinality);

struct WeightedSampling {
  double p = 1.0;
  std::uint64_t seed = 0;
};

struct CliqueSampling {
  std::vector<std::vector<std::string>> cliques;
};

// For every unordered group pair a fresh uniform subset is drawn from each
// side; the cross product is canonicalized and positives are dropped.
// Sub-seeds depend on (seed, group pair) only.
std::vector<LinkPair> sample_negative_weighted(const GroupCatalog& catalog,
                                               const WeightedSampling& config);

// All cross-group pairs whose two groups lie in the same clique.
std::vector<LinkPair> sample_negative_clique(const GroupCatalog& catalog,
                                             const CliqueSampling& config);

}  // namespace vulnsib
