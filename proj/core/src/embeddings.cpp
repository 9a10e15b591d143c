#include "vulnsib/embeddings.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "vulnsib/error.hpp"
#include "vulnsib/rng.hpp"

namespace vulnsib {

using nlohmann::json;

EmbeddingTable::EmbeddingTable(int dim) : dim_(dim) {
  if (dim < 1) throw ArgumentError("embedding dim must be positive");
}

void EmbeddingTable::insert(const std::string& id, std::vector<double> vec) {
  if (static_cast<int>(vec.size()) != dim_)
    throw DimensionError("embedding for " + id + " has length " + std::to_string(vec.size()) +
                         ", expected " + std::to_string(dim_));
  for (double x : vec) {
    if (!std::isfinite(x)) throw IntegrityError("non-finite embedding component for " + id);
  }
  if (!vectors_.emplace(id, std::move(vec)).second)
    throw IntegrityError("duplicate embedding id: " + id);
}

std::span<const double> EmbeddingTable::at(const std::string& id) const {
  auto it = vectors_.find(id);
  if (it == vectors_.end()) throw IntegrityError("no embedding for " + id);
  return it->second;
}

EmbeddingTable read_embeddings(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_line()) throw ParseError(source + ": missing header line");
  int dim = 0;
  try {
    dim = json::parse(line).at("dim").get<int>();
  } catch (const std::exception& e) {
    throw ParseError(source, line_no, std::string("bad header: ") + e.what());
  }
  EmbeddingTable table(dim);
  while (next_line()) {
    std::string id;
    std::vector<double> vec;
    try {
      const json row = json::parse(line);
      id = row.at("id").get<std::string>();
      const auto& arr = row.at("vec");
      if (!arr.is_array()) throw ParseError(source, line_no, "\"vec\" must be an array");
      vec.reserve(arr.size());
      for (const auto& x : arr) {
        if (!x.is_number()) throw IntegrityError("non-finite embedding component for " + id);
        vec.push_back(x.get<double>());
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
    table.insert(id, std::move(vec));
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open embeddings " + path.string());
  return read_embeddings(in, path.string());
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  out << json{{"dim", table.dim()}}.dump() << '\n';
  for (const auto& [id, vec] : table.vectors()) out << json{{"id", id}, {"vec", vec}}.dump() << '\n';
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_embeddings(out, table);
}

EmbeddingTable synth_embeddings(const GroupCatalog& catalog, int dim, double spread,
                                std::uint64_t seed) {
  if (dim < 2) throw ArgumentError("synthetic embeddings need dim >= 2");
  if (!(spread > 0.0)) throw ArgumentError("synthetic embedding spread must be positive");

  std::map<std::string, std::vector<double>> centers;
  for (const auto& gid : catalog.group_ids()) {
    Rng rng(derive_seed(seed, "center", gid));
    std::vector<double> c(static_cast<std::size_t>(dim));
    for (;;) {
      double norm = 0.0;
      for (auto& x : c) {
        x = rng.normal();
        norm += x * x;
      }
      norm = std::sqrt(norm);
      if (norm < 1e-12) continue;
      for (auto& x : c) x /= norm;
      bool distinct = true;
      for (const auto& [_, other] : centers) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) d2 += (c[k] - other[k]) * (c[k] - other[k]);
        if (d2 < 1e-12) distinct = false;
      }
      if (distinct) break;
    }
    centers.emplace(gid, std::move(c));
  }

  const double sigma = spread / std::sqrt(static_cast<double>(dim));
  EmbeddingTable table(dim);
  for (const auto& id : catalog.member_ids()) {
    const auto& gids = catalog.groups_of(id);
    std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
    for (const auto& gid : gids) {
      const auto& c = centers.at(gid);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] += c[k];
    }
    const double inv = 1.0 / static_cast<double>(gids.size());
    Rng rng(derive_seed(seed, "member", id));
    for (auto& x : v) x = x * inv + sigma * rng.normal();
    table.insert(id, std::move(v));
  }
  return table;
}

}  // namespace vulnsib
