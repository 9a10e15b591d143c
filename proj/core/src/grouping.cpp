#include "vulnsib/grouping.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "vulnsib/error.hpp"

namespace vulnsib {

using nlohmann::json;

VulnGroupSet assign_groups(const BinaryMatrix& relation) {
  require_relation(relation);
  const auto& ids = relation.ids();
  require_unique_ids(ids);
  const std::size_t n = ids.size();

  // Visit nodes in id order so the result does not depend on matrix layout.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return ids[x] < ids[y]; });

  std::vector<std::vector<bool>> parents;  // membership bitmap per parent
  std::vector<std::vector<std::size_t>> parents_of(n);

  auto admissible = [&](const std::vector<bool>& children, std::size_t i, std::size_t j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (!children[k] || k == i || k == j) continue;
      if (relation(i, k) == 0 || relation(j, k) == 0) return false;
    }
    return true;
  };

  for (std::size_t oi = 0; oi < n; ++oi) {
    for (std::size_t oj = oi + 1; oj < n; ++oj) {
      const std::size_t i = order[oi];
      const std::size_t j = order[oj];
      if (relation(i, j) == 0) continue;

      std::vector<std::size_t> candidates = parents_of[i];
      candidates.insert(candidates.end(), parents_of[j].begin(), parents_of[j].end());
      std::sort(candidates.begin(), candidates.end());
      candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

      std::size_t chosen = parents.size();
      for (std::size_t p : candidates) {
        if (admissible(parents[p], i, j)) {
          chosen = p;
          break;
        }
      }
      if (chosen == parents.size()) parents.emplace_back(n, false);
      for (std::size_t node : {i, j}) {
        if (!parents[chosen][node]) {
          parents[chosen][node] = true;
          parents_of[node].push_back(chosen);
        }
      }
    }
  }

  VulnGroupSet out;
  std::set<IdSet> seen;
  for (const auto& children : parents) {
    IdSet group;
    for (std::size_t k = 0; k < n; ++k)
      if (children[k]) group.insert(ids[k]);
    if (seen.insert(group).second) out.groups.push_back(std::move(group));
  }
  for (std::size_t oi = 0; oi < n; ++oi) {
    const std::size_t i = order[oi];
    if (parents_of[i].empty()) out.groups.push_back(IdSet{ids[i]});
  }
  return out;
}

double jaccard(const IdSet& a, const IdSet& b) {
  if (a.empty() && b.empty()) throw ArgumentError("jaccard is undefined for two empty sets");
  std::size_t common = 0;
  for (const auto& x : a) common += b.count(x);
  const std::size_t uni = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

double best_match_similarity(const VulnGroupSet& generated, const GroupCatalog& reference) {
  if (generated.groups.empty()) throw ArgumentError("no generated groups to score");
  IdSet universe;
  for (const auto& g : generated.groups) universe.insert(g.begin(), g.end());

  std::vector<IdSet> restricted;
  for (const auto& [_, members] : reference.groups()) {
    IdSet r;
    for (const auto& m : members)
      if (universe.contains(m)) r.insert(m);
    if (!r.empty()) restricted.push_back(std::move(r));
  }
  if (restricted.empty()) throw ArgumentError("reference has no groups overlapping the generated ids");

  double total = 0.0;
  for (const auto& g : generated.groups) {
    double best = 0.0;
    for (const auto& r : restricted) best = std::max(best, jaccard(g, r));
    total += best;
  }
  return total / static_cast<double>(generated.groups.size());
}

std::string groups_to_json(const VulnGroupSet& groups) {
  json arr = json::array();
  for (const auto& g : groups.groups) arr.push_back(std::vector<std::string>(g.begin(), g.end()));
  return json{{"groups", std::move(arr)}}.dump();
}

VulnGroupSet groups_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    const json& groups = doc.at("groups");
    if (!groups.is_array()) throw ParseError("bad group file: \"groups\" must be an array");
    VulnGroupSet out;
    for (const auto& g : groups) {
      if (!g.is_array()) throw ParseError("bad group file: each group must be an array of ids");
      IdSet set;
      for (const auto& id : g) set.insert(id.get<std::string>());
      if (set.empty()) throw IntegrityError("group file contains an empty group");
      out.groups.push_back(std::move(set));
    }
    return out;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad group file: ") + e.what());
  }
}

}  // namespace vulnsib
