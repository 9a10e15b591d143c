#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vulnsib/matrix.hpp"

namespace vulnsib {

using nlohmann::json;

void require_relation(const BinaryMatrix& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m(i, i) != 0) throw ArgumentError("relation matrix has a nonzero diagonal at " + m.ids()[i]);
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (m(i, j) > 1) throw ArgumentError("relation matrix entries must be 0 or 1");
      if (m(i, j) != m(j, i))
        throw ArgumentError("relation matrix is not symmetric at (" + m.ids()[i] + ", " +
                            m.ids()[j] + ")");
    }
  }
}

void require_unique_ids(const std::vector<std::string>& ids) {
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (id.empty()) throw IntegrityError("empty id in matrix id list");
    if (!seen.insert(id).second) throw IntegrityError("duplicate id in matrix id list: " + id);
  }
}

namespace {

template <typename T>
std::string to_json(const IdMatrix<T>& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(static_cast<int>(m(i, j)));
    rows.push_back(std::move(row));
  }
  return json{{"ids", m.ids()}, {"matrix", std::move(rows)}}.dump();
}

template <typename T>
IdMatrix<T> from_json(const std::string& text, bool binary) {
  try {
    const json doc = json::parse(text);
    auto ids = doc.at("ids").get<std::vector<std::string>>();
    const auto& rows = doc.at("matrix");
    const std::size_t n = ids.size();
    if (!rows.is_array() || rows.size() != n)
      throw DimensionError("matrix must have one row per id");
    std::vector<T> values;
    values.reserve(n * n);
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != n) throw DimensionError("matrix rows must have one entry per id");
      for (const auto& x : row) {
        const int v = x.get<int>();
        if (binary && v != 0 && v != 1) throw ParseError("binary matrix entries must be 0 or 1");
        values.push_back(static_cast<T>(v));
      }
    }
    require_unique_ids(ids);
    return IdMatrix<T>(std::move(ids), std::move(values));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad matrix file: ") + e.what());
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string matrix_to_json(const BinaryMatrix& m) { return to_json(m); }
std::string matrix_to_json(const ScoreMatrix& m) { return to_json(m); }
BinaryMatrix binary_matrix_from_json(const std::string& text) {
  return from_json<std::uint8_t>(text, true);
}
ScoreMatrix score_matrix_from_json(const std::string& text) { return from_json<int>(text, false); }
BinaryMatrix load_binary_matrix(const std::filesystem::path& path) {
  return binary_matrix_from_json(slurp(path));
}
ScoreMatrix load_score_matrix(const std::filesystem::path& path) {
  return score_matrix_from_json(slurp(path));
}

}  // namespace vulnsib
