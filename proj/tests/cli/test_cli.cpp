#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "pipeline.hpp"
#include "vulnsib/linkgen.hpp"
#include "vulnsib/links.hpp"
#include "vulnsib/matrix.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("vulnsib_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

  fs::path write_json(const std::string& name, const json& doc) { return write(name, doc.dump(2)); }

  // Records "<group>-<k>" with the given known flag.
  void write_corpus(const std::string& name, const std::map<std::string, int>& groups, int offset = 0) {
    std::ostringstream out;
    for (const auto& [gid, n] : groups)
      for (int k = 0; k < n; ++k)
        out << json{{"id", gid + "-" + std::to_string(k + offset)}, {"description", "text"}, {"cwes", {gid}}}.dump()
            << '\n';
    write(name, out.str());
  }

  int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"vulnsib"};
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return vulnsib::cli::run(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  json read_json(const std::string& name) const {
    std::ifstream in(dir_ / name);
    return json::parse(in);
  }

  std::string bytes(const fs::path& p) const {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

}  // namespace

TEST_F(CliTest, ConsensusOnFiveByFiveMatrix) {
  write_json("p.json", {{"ids", {"A", "B", "C", "D", "E"}},
                        {"matrix", {{0, 1, 1, 1, 1}, {1, 0, 1, 1, 0}, {1, 1, 0, 1, 0}, {1, 1, 1, 0, 0}, {1, 0, 0, 0, 0}}}});
  const auto cfg = write_json("c.json", {{"paths", {{"prediction", "p.json"}}}});
  ASSERT_EQ(run({"consensus", "--config", cfg.string()}), 0) << err_.str();
  const json s = read_json("out/scores.json");
  EXPECT_EQ(s.at("matrix"), json({{0, 2, 2, 2, -2}, {3, 0, 3, 3, -1}, {3, 3, 0, 3, -1}, {3, 3, 3, 0, -1}, {1, 1, 1, 1, 0}}));
  const json c = read_json("out/consensus.json");
  EXPECT_EQ(c.at("matrix"), json({{0, 1, 1, 1, 0}, {1, 0, 1, 1, 0}, {1, 1, 0, 1, 0}, {1, 1, 1, 0, 0}, {0, 0, 0, 0, 0}}));
  EXPECT_EQ(c.at("config").at("paths").at("prediction"), "p.json");

  ASSERT_EQ(run({"group", "--config", cfg.string()}), 0) << err_.str();
  EXPECT_EQ(read_json("out/groups.json").at("groups"), json({{"A", "B", "C", "D"}, {"E"}}));
}

TEST_F(CliTest, SampleWithZeroExponentEmitsEveryExternalPair) {
  write_corpus("corpus.jsonl", {{"G1", 3}, {"G2", 4}});
  const auto cfg = write_json("c.json", {{"seed", 3}, {"paths", {{"corpus", "corpus.jsonl"}}}, {"sampling", {{"p", 0.5}}}});
  ASSERT_EQ(run({"sample", "--config", cfg.string(), "--p", "0"}), 0) << err_.str();
  const auto links = vulnsib::read_links(dir_ / "out" / "links.jsonl");
  EXPECT_EQ(links.count(vulnsib::LinkLabel::Negative), 12u);
  EXPECT_EQ(links.count(vulnsib::LinkLabel::Positive), 3u + 6u);
  const json report = read_json("out/sample.json");
  EXPECT_EQ(report.at("count_negative"), 12);
  EXPECT_EQ(report.at("count_positive"), 9);
  EXPECT_EQ(report.at("config").at("sampling").at("p"), 0.0);
  EXPECT_EQ(read_json("out/links.config.json").at("config").at("seed"), 3);
}

TEST_F(CliTest, IngestReportsLargeCatalogStatistics) {
  std::vector<int> c(220);
  for (std::size_t i = 0; i < 80; ++i) c[i] = 2;
  for (std::size_t i = 80; i < 110; ++i) c[i] = 40;
  c[109] = 58;
  c[110] = 58;
  c[219] = 19340;
  const int partial = std::accumulate(c.begin(), c.end(), 0);
  const int ramp = 107 * 108 / 2;
  for (std::size_t i = 111; i < 219; ++i) c[i] = (122305 - partial - ramp) / 108 + static_cast<int>(i - 111);
  c[218] += (122305 - partial - ramp) % 108;
  std::map<std::string, int> groups;
  for (std::size_t g = 0; g < c.size(); ++g) {
    const std::string index = std::to_string(g);
    groups["CWE-" + std::string(3 - index.size(), '0') + index] = c[g];
  }
  write_corpus("corpus.jsonl", groups);
  const auto cfg = write_json("c.json", {{"paths", {{"corpus", "corpus.jsonl"}}}});
  ASSERT_EQ(run({"ingest", "--config", cfg.string()}), 0) << err_.str();
  const json stats = read_json("out/ingest.json").at("stats");
  EXPECT_EQ(stats.at("total"), 122305);
  EXPECT_NEAR(stats.at("mean").get<double>(), 555.93, 0.005);
  EXPECT_EQ(stats.at("median"), 58.0);
  EXPECT_EQ(stats.at("max"), 19340);
  EXPECT_NE(out_.str().find("median 58"), std::string::npos);
}

TEST_F(CliTest, SeededPipelineIsByteReproducible) {
  write_corpus("corpus.jsonl", {{"G1", 8}, {"G2", 8}});
  write_corpus("new.jsonl", {{"G1", 3}, {"G2", 3}}, 100);
  const auto cfg = write_json(
      "c.json", {{"seed", 11},
                 {"paths", {{"corpus", "corpus.jsonl"}, {"new_corpus", "new.jsonl"}}},
                 {"synth", {{"dim", 8}, {"spread", 0.1}}},
                 {"sampling", {{"p", 1.0}}},
                 {"training",
                  {{"epochs", 5}, {"learning_rate", 1e-3}, {"encoder_widths", {16, 8}}, {"predictor_widths", {8, 4}}}},
                 {"genexp", {{"n_trials", 3}}}});
  const std::vector<std::string> commands{"synth",   "sample",   "train",  "predict",  "consensus",
                                          "group",   "evaluate", "genexp", "report"};
  auto run_all = [&] {
    for (const auto& c : commands) EXPECT_EQ(run({c, "--config", cfg.string()}), 0) << c << ": " << err_.str();
    std::map<std::string, std::string> artifacts;
    for (const auto& entry : fs::directory_iterator(dir_ / "out"))
      artifacts[entry.path().filename().string()] = bytes(entry.path());
    return artifacts;
  };
  const auto first = run_all();
  const auto second = run_all();
  EXPECT_EQ(first.size(), 14u);
  for (const auto& [name, content] : first) {
    ASSERT_TRUE(second.contains(name)) << name;
    EXPECT_EQ(content, second.at(name)) << name;
  }

  ASSERT_EQ(run({"sample", "--config", cfg.string(), "--seed", "12"}), 0);
  EXPECT_NE(bytes(dir_ / "out" / "links.jsonl"), first.at("links.jsonl"));
}

TEST_F(CliTest, ErrorsNameTheProblem) {
  write_corpus("corpus.jsonl", {{"G1", 3}});
  EXPECT_NE(run({"frobnicate", "--config", "x.json"}), 0);
  EXPECT_NE(run({"sample"}), 0);

  const auto typo = write_json("typo.json", {{"paths", {{"corpus", "corpus.jsonl"}}}, {"sampling", {{"q", 1}}}});
  EXPECT_EQ(run({"sample", "--config", typo.string()}), 1);
  EXPECT_NE(err_.str().find("sampling.q"), std::string::npos) << err_.str();

  const auto bad_type = write_json("t.json", {{"paths", {{"corpus", "corpus.jsonl"}}}, {"training", {{"epochs", "ten"}}}});
  write(("links.jsonl"), "");
  EXPECT_EQ(run({"train", "--config", bad_type.string()}), 1);

  const auto missing = write_json("m.json", {{"paths", {{"corpus", "absent.jsonl"}}}});
  EXPECT_EQ(run({"ingest", "--config", missing.string()}), 1);
  EXPECT_NE(err_.str().find("ingest"), std::string::npos);

  const auto ok = write_json("ok.json", {{"paths", {{"corpus", "corpus.jsonl"}}}});
  EXPECT_EQ(run({"ingest", "--config", ok.string(), "--threshold", "1.5"}), 0);
  EXPECT_EQ(run({"predict", "--config", ok.string(), "--threshold", "1.5"}), 1);
  EXPECT_NE(err_.str().find("threshold"), std::string::npos) << err_.str();

  const auto strat = write_json("s.json", {{"paths", {{"corpus", "corpus.jsonl"}}}, {"sampling", {{"strategy", "magic"}}}});
  EXPECT_EQ(run({"sample", "--config", strat.string()}), 1);
  EXPECT_NE(err_.str().find("sampling.strategy"), std::string::npos);
}

TEST_F(CliTest, CliqueStrategyAndOutOverride) {
  write_corpus("corpus.jsonl", {{"G1", 2}, {"G2", 2}, {"G3", 2}});
  const auto cfg = write_json("c.json", {{"paths", {{"corpus", "corpus.jsonl"}}},
                                         {"sampling", {{"strategy", "clique"}, {"cliques", {{"G1", "G2"}, {"G3"}}}}}});
  const fs::path elsewhere = dir_ / "elsewhere";
  ASSERT_EQ(run({"sample", "--config", cfg.string(), "--out", elsewhere.string()}), 0) << err_.str();
  const auto links = vulnsib::read_links(elsewhere / "links.jsonl");
  EXPECT_EQ(links.count(vulnsib::LinkLabel::Negative), 4u);
  for (const auto& p : links.pairs) EXPECT_FALSE(p.a.starts_with("G3") != p.b.starts_with("G3")) << p.a << " " << p.b;
}
