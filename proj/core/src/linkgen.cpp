#include "vulnsib/linkgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>

#include "vulnsib/error.hpp"
#include "vulnsib/rng.hpp"

namespace vulnsib {
namespace {

using PairKey = std::pair<std::string, std::string>;

// Accumulates canonical negatives, merging provenance of repeated pairs.
class NegativeCollector {
 public:
  explicit NegativeCollector(const GroupCatalog& catalog) : catalog_(catalog) {}

  void add(const std::string& x, const std::string& y, const std::string& gx,
           const std::string& gy) {
    if (x == y || catalog_.share_group(x, y)) return;
    PairKey key = x < y ? PairKey{x, y} : PairKey{y, x};
    auto& prov = pairs_[std::move(key)];
    prov.insert(gx);
    prov.insert(gy);
  }

  std::vector<LinkPair> take() {
    std::vector<LinkPair> out;
    out.reserve(pairs_.size());
    for (auto& [key, prov] : pairs_) {
      out.push_back(LinkPair{key.first, key.second, LinkLabel::Negative,
                             std::vector<std::string>(prov.begin(), prov.end())});
    }
    return out;
  }

 private:
  const GroupCatalog& catalog_;
  std::map<PairKey, std::set<std::string>> pairs_;
};

std::vector<std::string> draw_subset(const std::vector<std::string>& members, std::uint64_t k,
                                     Rng& rng) {
  std::vector<std::string> pool = members;
  const std::size_t take = std::min<std::size_t>(k, pool.size());
  for (std::size_t i = 0; i < take; ++i) {
    std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(take);
  return pool;
}

}  // namespace

std::uint64_t count_positive(std::span<const std::uint64_t> cardinalities) {
  std::uint64_t total = 0;
  for (auto c : cardinalities) total += c * (c > 0 ? c - 1 : 0) / 2;
  return total;
}

std::uint64_t count_positive(const GroupCatalog& catalog) {
  const auto c = catalog.cardinalities();
  return count_positive(c);
}

std::uint64_t count_negative(std::span<const std::uint64_t> cardinalities) {
  std::uint64_t sum = 0;
  std::uint64_t sum_sq = 0;
  for (auto c : cardinalities) {
    sum += c;
    sum_sq += c * c;
  }
  return (sum * sum - sum_sq) / 2;
}

std::uint64_t count_negative(const GroupCatalog& catalog) {
  const auto c = catalog.cardinalities();
  return count_negative(c);
}

std::vector<LinkPair> enumerate_positive(const GroupCatalog& catalog) {
  std::map<PairKey, std::vector<std::string>> pairs;
  for (const auto& [gid, members] : catalog.groups()) {
    // members are sorted, so (members[i], members[j]) with i < j is canonical
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        pairs[{members[i], members[j]}].push_back(gid);
      }
    }
  }
  std::vector<LinkPair> out;
  out.reserve(pairs.size());
  for (auto& [key, prov] : pairs)
    out.push_back(LinkPair{key.first, key.second, LinkLabel::Positive, std::move(prov)});
  return out;
}

double sampling_fraction(std::uint64_t total, std::uint64_t cardinality, double p) {
  if (total == 0) throw ArgumentError("sampling fraction needs a non-empty catalog");
  if (cardinality > total) throw ArgumentError("group cardinality exceeds catalog mass");
  if (!(p >= 0.0)) throw ArgumentError("sampling exponent p must be non-negative");
  const double base = static_cast<double>(total - cardinality) / static_cast<double>(total);
  return std::pow(base, p);
}

double sampling_fraction(const GroupCatalog& catalog, const std::string& group_id, double p) {
  return sampling_fraction(catalog.total_mass(), catalog.members(group_id).size(), p);
}

std::uint64_t retained_count(double fraction, std::uint64_t cardinality) {
  if (cardinality == 0 || fraction <= 0.0) return 0;
  const auto rounded =
      static_cast<std::uint64_t>(std::floor(fraction * static_cast<double>(cardinality) + 0.5));
  return std::clamp<std::uint64_t>(rounded, 1, cardinality);
}

std::vector<LinkPair> sample_negative_weighted(const GroupCatalog& catalog,
                                               const WeightedSampling& config) {
  if (catalog.group_count() < 2) throw ArgumentError("weighted sampling needs at least two groups");
  const std::uint64_t total = catalog.total_mass();
  std::map<std::string, std::uint64_t> keep;
  for (const auto& [gid, members] : catalog.groups())
    keep[gid] = retained_count(sampling_fraction(total, members.size(), config.p), members.size());

  NegativeCollector collector(catalog);
  const auto& groups = catalog.groups();
  for (auto gi = groups.begin(); gi != groups.end(); ++gi) {
    for (auto gj = std::next(gi); gj != groups.end(); ++gj) {
      Rng rng(derive_seed(config.seed, gi->first, gj->first));
      const auto left = draw_subset(gi->second, keep[gi->first], rng);
      const auto right = draw_subset(gj->second, keep[gj->first], rng);
      for (const auto& x : left)
        for (const auto& y : right) collector.add(x, y, gi->first, gj->first);
    }
  }
  return collector.take();
}

std::vector<LinkPair> sample_negative_clique(const GroupCatalog& catalog,
                                             const CliqueSampling& config) {
  std::map<std::string, std::size_t> clique_of;
  for (std::size_t c = 0; c < config.cliques.size(); ++c) {
    for (const auto& gid : config.cliques[c]) {
      if (!catalog.groups().contains(gid))
        throw ArgumentError("clique references unknown group: " + gid);
      if (!clique_of.emplace(gid, c).second)
        throw ArgumentError("group appears in more than one clique: " + gid);
    }
  }
  for (const auto& gid : catalog.group_ids()) {
    if (!clique_of.contains(gid)) throw ArgumentError("group is not in any clique: " + gid);
  }

  NegativeCollector collector(catalog);
  const auto& groups = catalog.groups();
  for (auto gi = groups.begin(); gi != groups.end(); ++gi) {
    for (auto gj = std::next(gi); gj != groups.end(); ++gj) {
      if (clique_of[gi->first] != clique_of[gj->first]) continue;
      for (const auto& x : gi->second)
        for (const auto& y : gj->second) collector.add(x, y, gi->first, gj->first);
    }
  }
  return collector.take();
}

}  // namespace vulnsib
