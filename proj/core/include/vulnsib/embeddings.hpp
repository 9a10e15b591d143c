#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vulnsib/corpus.hpp"

namespace vulnsib {

inline constexpr int kDefaultEmbeddingDim = 768;

// Fixed-width vectors keyed by vulnerability id. Immutable once built.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(int dim = kDefaultEmbeddingDim);

  // Throws DimensionError on a length mismatch, IntegrityError on a
  // duplicate id or a non-finite component.
  void insert(const std::string& id, std::vector<double> vec);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }
  bool contains(const std::string& id) const { return vectors_.contains(id); }
  std::span<const double> at(const std::string& id) const;
  const std::map<std::string, std::vector<double>>& vectors() const noexcept { return vectors_; }

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  int dim_;
  std::map<std::string, std::vector<double>> vectors_;
};

// Header line {"dim": D}, then one {"id", "vec"} object per line.
EmbeddingTable read_embeddings(std::istream& in, const std::string& source = "<stream>");
EmbeddingTable load_embeddings(const std::filesystem::path& path);
void write_embeddings(std::ostream& out, const EmbeddingTable& table);
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);

// Cluster-structured vectors for standalone runs: one seeded unit-norm
// center per group, members at their (averaged) center plus Gaussian noise
// with per-component deviation spread / sqrt(dim), so the expected noise
// norm is about `spread` regardless of dim.
EmbeddingTable synth_embeddings(const GroupCatalog& catalog, int dim, double spread,
                                std::uint64_t seed);

}  // namespace vulnsib
