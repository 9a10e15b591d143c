#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "vulnsib/error.hpp"

namespace vulnsib {

// Square matrix whose rows and columns are labelled by an ordered id list.
template <typename T>
class IdMatrix {
 public:
  IdMatrix() = default;
  explicit IdMatrix(std::vector<std::string> ids)
      : ids_(std::move(ids)), values_(ids_.size() * ids_.size(), T{}) {}
  IdMatrix(std::vector<std::string> ids, std::vector<T> row_major)
      : ids_(std::move(ids)), values_(std::move(row_major)) {
    if (values_.size() != ids_.size() * ids_.size())
      throw DimensionError("matrix has " + std::to_string(values_.size()) + " entries for " +
                           std::to_string(ids_.size()) + " ids");
  }

  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::vector<T>& values() const noexcept { return values_; }

  T& operator()(std::size_t i, std::size_t j) { return values_[i * ids_.size() + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return values_[i * ids_.size() + j]; }

  bool symmetric() const {
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j)
        if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
  }

  bool zero_diagonal() const {
    for (std::size_t i = 0; i < size(); ++i)
      if ((*this)(i, i) != T{}) return false;
    return true;
  }

  friend bool operator==(const IdMatrix&, const IdMatrix&) = default;

 private:
  std::vector<std::string> ids_;
  std::vector<T> values_;
};

// Entries in {0, 1}. Used for prediction matrices P and consensus matrices C.
using BinaryMatrix = IdMatrix<std::uint8_t>;
// Integer evidence tallies S.
using ScoreMatrix = IdMatrix<int>;

// Symmetric, zero diagonal, entries in {0, 1}; throws ArgumentError otherwise.
void require_relation(const BinaryMatrix& m);
// Ids non-empty and pairwise distinct; throws IntegrityError otherwise.
void require_unique_ids(const std::vector<std::string>& ids);

// JSON {"ids": [...], "matrix": [[...], ...]}.
std::string matrix_to_json(const BinaryMatrix& m);
std::string matrix_to_json(const ScoreMatrix& m);
BinaryMatrix binary_matrix_from_json(const std::string& text);
ScoreMatrix score_matrix_from_json(const std::string& text);
BinaryMatrix load_binary_matrix(const std::filesystem::path& path);
ScoreMatrix load_score_matrix(const std::filesystem::path& path);

}  // namespace vulnsib
