// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Usage: vulnsib_acceptance [A1 A2 ...]   (no arguments runs everything)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "gradcheck.hpp"
#include "pipeline.hpp"
#include "vulnsib/consensus.hpp"
#include "vulnsib/corpus.hpp"
#include "vulnsib/embeddings.hpp"
#include "vulnsib/evalharness.hpp"
#include "vulnsib/grouping.hpp"
#include "vulnsib/linkgen.hpp"
#include "vulnsib/siamese.hpp"

namespace fs = std::filesystem;
using namespace vulnsib;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string title;
  double budget_seconds;
  std::function<Outcome()> check;
};

std::string fmt(const char* pattern, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

BinaryMatrix matrix_of(const std::vector<std::string>& ids, const std::vector<std::vector<int>>& rows) {
  BinaryMatrix m(ids);
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = 0; j < ids.size(); ++j) m(i, j) = static_cast<std::uint8_t>(rows[i][j]);
  return m;
}

Outcome a1() {
  const std::vector<std::uint64_t> d2{216, 45, 76, 658, 12, 253, 1091, 183};
  const std::vector<std::uint64_t> d3{69, 44, 700, 203, 2789, 109, 270, 402};
  const auto n2 = count_negative(d2);
  const auto n3 = count_negative(d3);
  return {n2 == 2322906 && n3 == 6234292,
          "count_negative = " + std::to_string(n2) + " (Dataset 2), " + std::to_string(n3) + " (Dataset 3)"};
}

Outcome a2() {
  Rng rng(derive_seed(2, "A2"));
  int mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    const GroupCatalog cat = testing::random_disjoint_catalog(rng, 6, 8);
    const auto brute = testing::brute_force_counts(cat);
    const auto cards = cat.cardinalities();
    const std::uint64_t mass = cat.total_mass();
    const bool ok = count_positive(cards) == brute.positive && count_negative(cards) == brute.negative &&
                    count_positive(cards) + count_negative(cards) == mass * (mass - 1) / 2;
    mismatches += ok ? 0 : 1;
  }
  return {mismatches == 0, "200 random catalogs, " + std::to_string(mismatches) + " mismatches vs brute force"};
}

Outcome a3() {
  const double expected[] = {84.2, 70.9, 59.7, 50.2, 42.3, 35.6, 30.0, 25.2, 21.2, 17.9};
  double worst = 0.0;
  double min_small = 100.0;
  for (int p = 1; p <= 10; ++p) {
    const double pct = 100.0 * sampling_fraction(122305, 19340, p);
    worst = std::max(worst, std::abs(pct - expected[p - 1]));
    min_small = std::min(min_small, 100.0 * sampling_fraction(122305, 58, p));
  }
  return {worst <= 0.1 && min_small >= 99.5,
          "max |dev| " + fmt("%.3f", worst) + " pp on c=19340; c=58 minimum " + fmt("%.3f", min_small) + "%"};
}

Outcome a4() {
  const std::vector<std::string> ids{"A", "B", "C", "D", "E"};
  const auto p = matrix_of(ids, {{0, 1, 1, 1, 1}, {1, 0, 1, 1, 0}, {1, 1, 0, 1, 0}, {1, 1, 1, 0, 0}, {1, 0, 0, 0, 0}});
  const std::vector<std::vector<int>> s_expected{
      {0, 2, 2, 2, -2}, {3, 0, 3, 3, -1}, {3, 3, 0, 3, -1}, {3, 3, 3, 0, -1}, {1, 1, 1, 1, 0}};
  const auto c_expected = matrix_of(ids, {{0, 1, 1, 1, 0}, {1, 0, 1, 1, 0}, {1, 1, 0, 1, 0}, {1, 1, 1, 0, 0}, {0, 0, 0, 0, 0}});
  const ScoreMatrix s = score_matrix(p);
  int s_bad = 0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) s_bad += s(i, j) == s_expected[i][j] ? 0 : 1;
  const bool c_ok = consensus_matrix(s) == c_expected;
  return {s_bad == 0 && c_ok, std::to_string(s_bad) + " S entries differ; C " + (c_ok ? "matches" : "differs")};
}

Outcome a5() {
  Rng rng(derive_seed(5, "A5"));
  int fixed_bad = 0;
  for (int t = 0; t < 500; ++t) {
    const auto p = testing::random_clique_union(rng, 1 + rng.below(12), 1 + rng.below(6));
    fixed_bad += apply_consensus(p) == p ? 0 : 1;
  }
  std::vector<std::size_t> star_bad_n;
  for (std::size_t n = 4; n <= 8; ++n) {
    bool ok = true;
    for (std::size_t attach = 0; attach + 1 < n; ++attach) {
      std::vector<std::string> ids;
      for (std::size_t i = 0; i < n; ++i) ids.push_back("v" + std::to_string(i));
      BinaryMatrix p(ids);
      for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = 0; j + 1 < n; ++j) p(i, j) = i != j;
      const BinaryMatrix clique = p;
      p(attach, n - 1) = 1;
      p(n - 1, attach) = 1;
      ok &= apply_consensus(p) == clique;
    }
    if (!ok) star_bad_n.push_back(n);
  }
  std::string bad = star_bad_n.empty() ? "none" : "";
  for (auto n : star_bad_n) bad += (bad.empty() ? "n=" : ", n=") + std::to_string(n);
  return {fixed_bad == 0 && star_bad_n.empty(),
          "fixed point: " + std::to_string(fixed_bad) + "/500 violations; star pruning fails at: " + bad};
}

bool grouping_contract(const BinaryMatrix& rel, const VulnGroupSet& out) {
  const auto& ids = rel.ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    bool related = false;
    for (std::size_t j = 0; j < ids.size(); ++j) {
      if (i == j) continue;
      related |= rel(i, j) == 1;
      bool together = false;
      for (const auto& g : out.groups) together |= g.contains(ids[i]) && g.contains(ids[j]);
      if (together != (rel(i, j) == 1)) return false;  // clauses (a) and (b)
    }
    if (!related) {  // clause (c)
      int holding = 0;
      bool singleton = false;
      for (const auto& g : out.groups)
        if (g.contains(ids[i])) {
          ++holding;
          singleton = g.size() == 1;
        }
      if (holding != 1 || !singleton) return false;
    }
  }
  return true;
}

Outcome a6() {
  Rng rng(derive_seed(6, "A6"));
  int bad = 0;
  for (int t = 0; t < 500; ++t) {
    const auto rel = testing::random_relation(rng, rng.below(11), rng.uniform());
    bad += grouping_contract(rel, assign_groups(rel)) ? 0 : 1;
  }
  const auto middle = assign_groups(matrix_of({"A", "B", "C"}, {{0, 0, 1}, {0, 0, 1}, {1, 1, 0}}));
  const std::set<IdSet> got(middle.groups.begin(), middle.groups.end());
  const bool middle_ok = got == std::set<IdSet>{{"A", "C"}, {"B", "C"}};
  return {bad == 0 && middle_ok, std::to_string(bad) + "/500 contract violations; A-C, B-C case gives " +
                                     (middle_ok ? "{A,C},{B,C}" : "something else")};
}

Outcome a7() {
  Rng rng(derive_seed(7, "A7"));
  TrainConfig full;
  full.seed = 7;
  const SiameseModel big = init_model(kDefaultEmbeddingDim, full);
  int asym = 0;
  std::vector<double> x(kDefaultEmbeddingDim);
  std::vector<double> y(kDefaultEmbeddingDim);
  for (int t = 0; t < 1000; ++t) {
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal();
    asym += forward(big, x, y) == forward(big, y, x) ? 0 : 1;
  }
  SiameseModel small = init_model(8, testing::scaled_down_config(7));
  testing::jitter_biases(small, rng, 0.05);
  auto batch = testing::random_batch(rng, 8, 6);
  const auto plain = testing::gradient_check(small, batch, 1e-5);
  batch.dropout_mask = Eigen::MatrixXd::Constant(small.encoder.back().outputs(), 6, 1.0 / 0.9);
  for (Eigen::Index i = 0; i < batch.dropout_mask.size(); i += 3) batch.dropout_mask.data()[i] = 0.0;
  const auto masked = testing::gradient_check(small, batch, 1e-5);
  const double worst = std::max(plain.max_relative_error, masked.max_relative_error);
  return {asym == 0 && worst < 1e-4, std::to_string(asym) + "/1000 asymmetric pairs (768-d, full widths); " +
                                         std::to_string(plain.checked) + " parameters, max relative error " +
                                         fmt("%.2e", worst)};
}

Outcome a8() {
  const GroupCatalog catalog = GroupCatalog::from_cardinalities({40, 40});
  const EmbeddingTable embeddings = synth_embeddings(catalog, 32, 0.1, 8);
  std::vector<LinkPair> pairs = enumerate_positive(catalog);
  const auto negatives = sample_negative_weighted(catalog, {0.0, 8});
  pairs.insert(pairs.end(), negatives.begin(), negatives.end());
  const SplitAssignment split = split_pairs(pairs.size(), SplitMode::holdout(0.8), 8);
  std::vector<LinkPair> train_pairs;
  std::vector<LinkPair> test_pairs;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    (split.tags[i] == SplitTag::train() ? train_pairs : test_pairs).push_back(pairs[i]);

  std::vector<VulnRecord> records;
  for (const auto& id : catalog.member_ids()) records.push_back({id, "synthetic", {catalog.groups_of(id).front()}, true});
  const Corpus corpus(records, "synthetic");

  TrainConfig cfg;  // 512-256-128-64 / 128-64-32-16, dropout 0.1, L2 0.1, 100 epochs, batch 32
  cfg.learning_rate = 1e-4;
  cfg.seed = 8;
  const auto first = train(init_model(32, cfg), train_pairs, embeddings, cfg);
  const auto second = train(init_model(32, cfg), train_pairs, embeddings, cfg);
  std::ostringstream a;
  std::ostringstream b;
  write_model(a, first.model);
  write_model(b, second.model);
  const bool deterministic = a.str() == b.str();

  const EvalReport report =
      evaluate_regime(first.model, embeddings, corpus, catalog, train_pairs, test_pairs, Regime::OldOld, 0.5);
  const double acc = report.overall.accuracy;
  return {acc >= 0.95 && deterministic,
          "held-out old-old accuracy " + fmt("%.4f", acc) + " on " + std::to_string(report.overall.confusion.total()) +
              " pairs (lr 1e-4); repeat run " + (deterministic ? "bit-identical" : "DIFFERS")};
}

Outcome a9() {
  std::string detail;
  bool pass = true;
  for (std::uint64_t groups = 2; groups <= 4; ++groups) {
    const GroupCatalog catalog = GroupCatalog::from_cardinalities(std::vector<std::uint64_t>(groups, 10));
    GenExperimentConfig cfg;
    cfg.n_trials = 100;
    cfg.seed = derive_seed(9, groups);
    const auto r = generation_experiment(catalog, planted_partition_oracle(catalog, 0.05), cfg);
    pass &= r.consensus_avg >= r.direct_avg && r.consensus_avg >= 0.85;
    detail += (detail.empty() ? "" : "; ") + std::to_string(groups) + " groups: direct " + fmt("%.4f", r.direct_avg) +
              " -> consensus " + fmt("%.4f", r.consensus_avg);
  }
  return {pass, detail};
}

Outcome a10() {
  const fs::path dir = fs::temp_directory_path() / "vulnsib_acceptance_a10";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream known(dir / "corpus.jsonl");
    std::ofstream fresh(dir / "new.jsonl");
    for (const char* g : {"CWE-20", "CWE-79", "CWE-89"})
      for (int k = 0; k < 12; ++k)
        (k < 9 ? known : fresh) << json{{"id", std::string(g) + "-" + std::to_string(k)}, {"description", "synthetic"},
                                        {"cwes", {g}}}.dump()
                                << '\n';
    std::ofstream(dir / "config.json")
        << json{{"seed", 10},
                {"paths", {{"corpus", "corpus.jsonl"}, {"new_corpus", "new.jsonl"}}},
                {"synth", {{"dim", 16}, {"spread", 0.1}}},
                {"sampling", {{"p", 1.0}}},
                {"training", {{"epochs", 5}, {"learning_rate", 1e-3}, {"encoder_widths", {32, 16}}, {"predictor_widths", {16, 8}}}},
                {"genexp", {{"n_trials", 5}}}}
               .dump(2);
  }
  const std::string config = (dir / "config.json").string();
  const std::vector<std::string> commands{"ingest",    "synth", "sample",   "train",  "predict",
                                          "consensus", "group", "evaluate", "genexp", "report"};
  auto run_all = [&](std::string& failure) {
    std::map<std::string, std::string> artifacts;
    for (const auto& c : commands) {
      std::ostringstream out;
      std::ostringstream err;
      const char* argv[] = {"vulnsib", c.c_str(), "--config", config.c_str()};
      if (cli::run(4, argv, out, err) != 0) failure = c + ": " + err.str();
    }
    for (const auto& entry : fs::directory_iterator(dir / "out")) {
      std::ifstream in(entry.path(), std::ios::binary);
      artifacts[entry.path().filename().string()] = {std::istreambuf_iterator<char>(in), {}};
    }
    return artifacts;
  };
  std::string failure;
  const auto first = run_all(failure);
  const auto second = run_all(failure);
  fs::remove_all(dir);
  if (!failure.empty()) return {false, "command failed: " + failure};
  std::size_t differing = 0;
  for (const auto& [name, content] : first) differing += second.contains(name) && second.at(name) == content ? 0 : 1;
  return {differing == 0 && first.size() == second.size(),
          std::to_string(commands.size()) + " commands, " + std::to_string(first.size()) + " artifacts, " +
              std::to_string(differing) + " differ on re-run"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"A1", "link-count anchors", 1, a1},
      {"A2", "counting oracle", 5, a2},
      {"A3", "sampling fraction anchors", 1, a3},
      {"A4", "consensus worked example", 1, a4},
      {"A5", "consensus properties", 10, a5},
      {"A6", "grouping contract", 10, a6},
      {"A7", "siamese symmetry and gradients", 30, a7},
      {"A8", "end-to-end synthetic training", 120, a8},
      {"A9", "consensus improves generation", 60, a9},
      {"A10", "pipeline reproducibility", 60, a10},
  };
  const std::set<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%-3s %s  %s: %s [%.2f s, budget %.0f s%s]\n", c.id.c_str(), pass ? "PASS" : "FAIL", c.title.c_str(),
                o.detail.c_str(), secs, c.budget_seconds, in_time ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
