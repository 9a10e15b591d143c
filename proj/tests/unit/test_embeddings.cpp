#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "vulnsib/embeddings.hpp"
#include "vulnsib/error.hpp"

using namespace vulnsib;

namespace {

EmbeddingTable read(const std::string& text) {
  std::istringstream in(text);
  return read_embeddings(in, "test");
}

double dist(std::span<const double> x, std::span<const double> y) {
  double d = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) d += (x[k] - y[k]) * (x[k] - y[k]);
  return std::sqrt(d);
}

}  // namespace

TEST(Embeddings, LoadsRows) {
  const auto t = read("{\"dim\": 4}\n{\"id\": \"a\", \"vec\": [1, 2, 3, 4]}\n{\"id\": \"b\", \"vec\": [0, 0, 0, 0.5]}\n");
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.dim(), 4);
  EXPECT_EQ(t.at("a")[2], 3.0);
  EXPECT_EQ(t.at("b")[3], 0.5);
}

TEST(Embeddings, DimensionMismatchNamesTheId) {
  try {
    read("{\"dim\": 4}\n{\"id\": \"short\", \"vec\": [1, 2, 3]}\n");
    FAIL();
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("short"), std::string::npos);
  }
}

TEST(Embeddings, DuplicateAndNonFiniteRowsAreRejected) {
  EXPECT_THROW(read("{\"dim\": 1}\n{\"id\": \"a\", \"vec\": [1]}\n{\"id\": \"a\", \"vec\": [2]}\n"), IntegrityError);
  EXPECT_THROW(read("{\"dim\": 1}\n{\"id\": \"a\", \"vec\": [null]}\n"), IntegrityError);
  EmbeddingTable t(2);
  EXPECT_THROW(t.insert("x", {1.0, std::nan("")}), IntegrityError);
  EXPECT_THROW(t.insert("y", {1.0, INFINITY}), IntegrityError);
}

TEST(Embeddings, MissingHeaderIsAParseError) {
  EXPECT_THROW(read(""), ParseError);
  EXPECT_THROW(read("{\"id\": \"a\", \"vec\": [1]}\n"), ParseError);
}

TEST(Embeddings, WriteReadRoundTripsExactly) {
  const auto cat = GroupCatalog::from_cardinalities({5, 7, 3});
  const auto table = synth_embeddings(cat, 16, 0.3, 4);
  std::stringstream buf;
  write_embeddings(buf, table);
  EXPECT_EQ(read_embeddings(buf), table);
}

TEST(SynthEmbeddings, Deterministic) {
  const auto cat = GroupCatalog::from_cardinalities({5, 5});
  EXPECT_EQ(synth_embeddings(cat, 8, 0.1, 1), synth_embeddings(cat, 8, 0.1, 1));
  EXPECT_NE(synth_embeddings(cat, 8, 0.1, 1), synth_embeddings(cat, 8, 0.1, 2));
}

TEST(SynthEmbeddings, VanishingSpreadCollapsesGroup) {
  const auto cat = GroupCatalog::from_cardinalities({3, 2});
  const auto t = synth_embeddings(cat, 8, 1e-300, 9);
  const auto& g0 = cat.members(cat.group_ids()[0]);
  for (std::size_t i = 1; i < g0.size(); ++i) {
    const auto x = t.at(g0[0]);
    const auto y = t.at(g0[i]);
    EXPECT_TRUE(std::equal(x.begin(), x.end(), y.begin()));
  }
}

TEST(SynthEmbeddings, WithinGroupCloserThanBetween) {
  const auto cat = GroupCatalog::from_cardinalities({20, 20});
  const auto t = synth_embeddings(cat, 8, 0.1, 3);
  double within = 0.0, between = 0.0;
  int nw = 0, nb = 0;
  const auto ids = cat.member_ids();
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const double d = dist(t.at(ids[i]), t.at(ids[j]));
      if (cat.share_group(ids[i], ids[j])) within += d, ++nw;
      else between += d, ++nb;
    }
  EXPECT_LT(within / nw, between / nb);
}

TEST(SynthEmbeddings, NearestCenterRecoversMembership) {
  const auto cat = GroupCatalog::from_cardinalities({60, 60, 60, 60, 60});
  const int dim = 16;
  // Centers are the zero-noise limit of the generator.
  const auto centers_table = synth_embeddings(cat, dim, 1e-300, 21);
  std::map<std::string, std::vector<double>> centers;
  for (const auto& gid : cat.group_ids()) {
    const auto c = centers_table.at(cat.members(gid)[0]);
    centers[gid].assign(c.begin(), c.end());
  }
  double min_sep = 1e9;
  for (const auto& [g, c] : centers)
    for (const auto& [h, d] : centers)
      if (g < h) min_sep = std::min(min_sep, dist(c, d));
  const auto t = synth_embeddings(cat, dim, 0.2 * min_sep, 21);
  int correct = 0, total = 0;
  for (const auto& id : cat.member_ids()) {
    std::string best;
    double best_d = 1e18;
    for (const auto& [g, c] : centers) {
      const double d = dist(t.at(id), c);
      if (d < best_d) best_d = d, best = g;
    }
    correct += best == cat.groups_of(id)[0];
    ++total;
  }
  EXPECT_GE(static_cast<double>(correct) / total, 0.99);
}

TEST(SynthEmbeddings, MultiMemberUsesAverageCenter) {
  const GroupCatalog cat({{"A", {"x", "both"}}, {"B", {"y", "both"}}});
  const auto t = synth_embeddings(cat, 6, 1e-300, 2);
  for (int k = 0; k < 6; ++k) EXPECT_DOUBLE_EQ(t.at("both")[k], 0.5 * (t.at("x")[k] + t.at("y")[k]));
}

TEST(SynthEmbeddings, ArgumentChecks) {
  const auto cat = GroupCatalog::from_cardinalities({2});
  EXPECT_THROW(synth_embeddings(cat, 1, 0.1, 0), ArgumentError);
  EXPECT_THROW(synth_embeddings(cat, 4, 0.0, 0), ArgumentError);
}
