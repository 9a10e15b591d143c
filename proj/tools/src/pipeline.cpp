#include "pipeline.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "vulnsib/consensus.hpp"
#include "vulnsib/corpus.hpp"
#include "vulnsib/embeddings.hpp"
#include "vulnsib/error.hpp"
#include "vulnsib/evalharness.hpp"
#include "vulnsib/grouping.hpp"
#include "vulnsib/linkgen.hpp"
#include "vulnsib/links.hpp"
#include "vulnsib/rng.hpp"
#include "vulnsib/siamese.hpp"

namespace vulnsib::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::map<std::string, std::set<std::string>> kSections{
    {"", {"seed", "threshold", "paths", "groups", "sampling", "synth", "training", "evaluate", "genexp",
          "report"}},
    {"paths", {"corpus", "new_corpus", "embeddings", "links", "model", "prediction", "relation", "out"}},
    {"sampling", {"strategy", "p", "cliques", "seed", "split"}},
    {"sampling.split", {"mode", "train_fraction", "folds"}},
    {"synth", {"dim", "spread", "seed"}},
    {"training",
     {"epochs", "batch_size", "learning_rate", "dropout", "l2", "encoder_widths", "predictor_widths", "seed",
      "fold"}},
    {"evaluate", {"regimes"}},
    {"genexp", {"n_trials", "max_per_group", "groups", "per_group", "seed", "oracle", "flip_noise"}},
    {"report", {"inputs"}},
};

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw ArgumentError("config field '" + field + "': " + why);
}

void validate_keys(const json& node, const std::string& section) {
  if (!node.is_object()) bad_field(section.empty() ? "<root>" : section, "must be an object");
  const auto& allowed = kSections.at(section);
  for (const auto& [key, value] : node.items()) {
    const std::string field = section.empty() ? key : section + "." + key;
    if (!allowed.contains(key)) bad_field(field, "unknown field");
    if (kSections.contains(field)) validate_keys(value, field);
  }
}

json& ensure_object(json& doc, const std::string& key) {
  if (!doc.contains(key)) doc[key] = json::object();
  return doc[key];
}

void write_json(const fs::path& path, const json& doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// Line-oriented artifacts keep their own format; the config rides alongside.
fs::path sidecar(const fs::path& artifact) {
  fs::path p = artifact;
  p.replace_extension(".config.json");
  return p;
}

Corpus load_corpus(const PipelineConfig& cfg) {
  Corpus known = ingest_corpus(cfg.path("corpus"), true);
  if (!cfg.has_path("new_corpus")) return known;
  return Corpus::merge(known, ingest_corpus(cfg.path("new_corpus"), false));
}

GroupCatalog selected_catalog(const Corpus& corpus, const PipelineConfig& cfg) {
  const auto chosen = cfg.texts("groups");
  std::set<std::string> groups(chosen.begin(), chosen.end());
  if (groups.empty()) groups = all_group_ids(corpus);
  return build_catalog(corpus, groups);
}

// Training pairs: the complement of the held-out fold when training.fold is
// set, otherwise the pairs tagged "train" (all pairs when untagged).
std::vector<bool> training_mask(const LinkDataset& links, const PipelineConfig& cfg) {
  std::vector<bool> mask(links.size(), true);
  if (links.tags.empty()) return mask;
  const json* fold = cfg.find("training.fold");
  for (std::size_t i = 0; i < links.size(); ++i) {
    const SplitTag& tag = links.tags[i];
    if (fold != nullptr) {
      const auto k = static_cast<int>(cfg.integer("training.fold", 0));
      mask[i] = tag.kind == SplitTag::Kind::Fold && tag.fold != k;
    } else {
      mask[i] = tag.kind == SplitTag::Kind::Train;
    }
  }
  return mask;
}

TrainConfig training_config(const PipelineConfig& cfg) {
  TrainConfig t;
  t.epochs = static_cast<int>(cfg.integer("training.epochs", t.epochs));
  t.batch_size = static_cast<int>(cfg.integer("training.batch_size", t.batch_size));
  t.learning_rate = cfg.real("training.learning_rate", t.learning_rate);
  t.dropout = cfg.real("training.dropout", t.dropout);
  t.l2_predictor = cfg.real("training.l2", t.l2_predictor);
  t.encoder_widths = cfg.integers("training.encoder_widths", t.encoder_widths);
  t.predictor_widths = cfg.integers("training.predictor_widths", t.predictor_widths);
  t.seed = cfg.stage_seed("training");
  if (t.epochs < 1) bad_field("training.epochs", "must be at least 1");
  if (t.batch_size < 1) bad_field("training.batch_size", "must be at least 1");
  if (!(t.learning_rate >= 0.0)) bad_field("training.learning_rate", "must be non-negative");
  if (!(t.dropout >= 0.0 && t.dropout < 1.0)) bad_field("training.dropout", "must lie in [0, 1)");
  if (!(t.l2_predictor >= 0.0)) bad_field("training.l2", "must be non-negative");
  return t;
}

json stats_json(const CatalogStats& s) {
  return {{"groups", s.groups}, {"total", s.total}, {"mean", s.mean}, {"median", s.median},
          {"mode", s.mode},     {"min", s.min},     {"max", s.max}};
}

void cmd_ingest(const PipelineConfig& cfg, std::ostream& log) {
  const Corpus corpus = load_corpus(cfg);
  const GroupCatalog catalog = selected_catalog(corpus, cfg);
  std::size_t known = 0;
  for (const auto& r : corpus.records()) known += r.known ? 1 : 0;
  json cards = json::object();
  for (const auto& [gid, members] : catalog.groups()) cards[gid] = members.size();
  const CatalogStats stats = catalog_stats(catalog.cardinalities());
  const fs::path out = cfg.out_dir() / "ingest.json";
  write_json(out, {{"config", cfg.doc()},
                   {"records", corpus.size()},
                   {"known", known},
                   {"unknown", corpus.size() - known},
                   {"cardinalities", cards},
                   {"stats", stats_json(stats)}});
  log << "ingest: " << corpus.size() << " records, " << stats.groups << " groups, mean " << stats.mean
      << ", median " << stats.median << ", max " << stats.max << " -> " << out.string() << '\n';
}

void cmd_synth(const PipelineConfig& cfg, std::ostream& log) {
  const GroupCatalog catalog = selected_catalog(load_corpus(cfg), cfg);
  const auto dim = cfg.integer("synth.dim", kDefaultEmbeddingDim);
  const double spread = cfg.real("synth.spread", 0.1);
  if (dim < 2) bad_field("synth.dim", "must be at least 2");
  if (!(spread > 0.0)) bad_field("synth.spread", "must be positive");
  const EmbeddingTable table = synth_embeddings(catalog, static_cast<int>(dim), spread, cfg.stage_seed("synth"));
  const fs::path out = cfg.out_dir() / "embeddings.jsonl";
  fs::create_directories(out.parent_path());
  save_embeddings(out, table);
  write_json(sidecar(out), {{"config", cfg.doc()}});
  log << "synth: " << table.size() << " vectors of dim " << dim << " -> " << out.string() << '\n';
}

void cmd_sample(const PipelineConfig& cfg, std::ostream& log) {
  const Corpus corpus = load_corpus(cfg);
  const GroupCatalog catalog = selected_catalog(corpus, cfg);
  const std::uint64_t seed = cfg.stage_seed("sampling");

  std::vector<LinkPair> pairs = enumerate_positive(catalog);
  const std::size_t positives = pairs.size();
  const std::string strategy = cfg.text("sampling.strategy", "weighted");
  const double p = cfg.real("sampling.p", 1.0);
  std::vector<LinkPair> negatives;
  if (strategy == "weighted") {
    if (!(p >= 0.0)) bad_field("sampling.p", "must be non-negative");
    negatives = sample_negative_weighted(catalog, {p, seed});
  } else if (strategy == "clique") {
    const json* cliques = cfg.find("sampling.cliques");
    if (cliques == nullptr || !cliques->is_array()) bad_field("sampling.cliques", "required list of group lists");
    CliqueSampling cs;
    try {
      cs.cliques = cliques->get<std::vector<std::vector<std::string>>>();
    } catch (const json::exception&) {
      bad_field("sampling.cliques", "must be a list of lists of group ids");
    }
    negatives = sample_negative_clique(catalog, cs);
  } else {
    bad_field("sampling.strategy", "expected \"weighted\" or \"clique\", got \"" + strategy + "\"");
  }
  pairs.insert(pairs.end(), negatives.begin(), negatives.end());

  // Only pairs of two known records take part in the split; any pair that
  // touches a new record is held out for testing.
  std::vector<std::size_t> old_old;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (corpus.at(pairs[i].a).known && corpus.at(pairs[i].b).known) old_old.push_back(i);

  const std::string mode = cfg.text("sampling.split.mode", "holdout");
  SplitMode split;
  if (mode == "holdout") split = SplitMode::holdout(cfg.real("sampling.split.train_fraction", 0.8));
  else if (mode == "kfold") split = SplitMode::kfold(static_cast<int>(cfg.integer("sampling.split.folds", 5)));
  else bad_field("sampling.split.mode", "expected \"holdout\" or \"kfold\", got \"" + mode + "\"");

  LinkDataset links;
  links.pairs = std::move(pairs);
  links.tags.assign(links.pairs.size(), SplitTag::test());
  json split_counts = json::object();
  if (!old_old.empty()) {
    const SplitAssignment assigned = split_pairs(old_old.size(), split, derive_seed(seed, "split"));
    for (std::size_t r = 0; r < old_old.size(); ++r) links.tags[old_old[r]] = assigned.tags[r];
  }
  for (const auto& tag : links.tags) {
    const std::string name = tag.to_string();
    split_counts[name] = split_counts.value(name, 0) + 1;
  }

  const fs::path out = cfg.out_dir() / "links.jsonl";
  fs::create_directories(out.parent_path());
  write_links(out, links);
  write_json(sidecar(out), {{"config", cfg.doc()}});
  write_json(cfg.out_dir() / "sample.json",
             {{"config", cfg.doc()},
              {"count_positive", count_positive(catalog)},
              {"count_negative", count_negative(catalog)},
              {"emitted", {{"positive", positives}, {"negative", negatives.size()}}},
              {"split", split_counts}});
  log << "sample: " << positives << " positive, " << negatives.size() << " negative links (population "
      << count_positive(catalog) << " / " << count_negative(catalog) << ") -> " << out.string() << '\n';
}

void cmd_train(const PipelineConfig& cfg, std::ostream& log) {
  const LinkDataset links = read_links(cfg.path("links", "links.jsonl"));
  const EmbeddingTable embeddings = load_embeddings(cfg.path("embeddings", "embeddings.jsonl"));
  const TrainConfig tc = training_config(cfg);
  const auto mask = training_mask(links, cfg);
  std::vector<LinkPair> chosen;
  for (std::size_t i = 0; i < links.size(); ++i)
    if (mask[i]) chosen.push_back(links.pairs[i]);
  if (chosen.empty()) throw ArgumentError("train: no training pairs in the link file");

  const TrainResult result = train(init_model(embeddings.dim(), tc), chosen, embeddings, tc);

  std::ostringstream model_text;
  write_model(model_text, result.model);
  json model_doc = json::parse(model_text.str());
  model_doc["config"] = cfg.doc();
  const fs::path out = cfg.out_dir() / "model.json";
  write_json(out, model_doc);

  json history = json::array();
  for (std::size_t e = 0; e < result.history.size(); ++e)
    history.push_back({{"epoch", e + 1}, {"loss", result.history[e].loss}, {"accuracy", result.history[e].accuracy}});
  write_json(cfg.out_dir() / "history.json",
             {{"config", cfg.doc()}, {"train_pairs", chosen.size()}, {"history", history}});
  log << "train: " << chosen.size() << " pairs, " << tc.epochs << " epochs, final loss "
      << result.history.back().loss << ", accuracy " << result.history.back().accuracy << " -> "
      << out.string() << '\n';
}

void cmd_predict(const PipelineConfig& cfg, std::ostream& log) {
  const double threshold = cfg.threshold();
  const GroupCatalog catalog = selected_catalog(load_corpus(cfg), cfg);
  const SiameseModel model = load_model(cfg.path("model", "model.json"));
  const EmbeddingTable embeddings = load_embeddings(cfg.path("embeddings", "embeddings.jsonl"));
  const BinaryMatrix p = predict_matrix(model, catalog.member_ids(), embeddings, threshold);
  json doc = json::parse(matrix_to_json(p));
  doc["config"] = cfg.doc();
  const fs::path out = cfg.out_dir() / "prediction.json";
  write_json(out, doc);
  log << "predict: " << p.size() << " x " << p.size() << " matrix -> " << out.string() << '\n';
}

void cmd_consensus(const PipelineConfig& cfg, std::ostream& log) {
  const BinaryMatrix p = load_binary_matrix(cfg.path("prediction", "prediction.json"));
  const ScoreMatrix s = score_matrix(p);
  const BinaryMatrix c = consensus_matrix(s);
  json s_doc = json::parse(matrix_to_json(s));
  json c_doc = json::parse(matrix_to_json(c));
  s_doc["config"] = cfg.doc();
  c_doc["config"] = cfg.doc();
  write_json(cfg.out_dir() / "scores.json", s_doc);
  write_json(cfg.out_dir() / "consensus.json", c_doc);
  std::size_t removed = 0;
  std::size_t added = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      removed += p(i, j) == 1 && c(i, j) == 0 ? 1 : 0;
      added += p(i, j) == 0 && c(i, j) == 1 ? 1 : 0;
    }
  log << "consensus: " << removed << " links removed, " << added << " added -> "
      << (cfg.out_dir() / "consensus.json").string() << '\n';
}

void cmd_group(const PipelineConfig& cfg, std::ostream& log) {
  const BinaryMatrix relation = load_binary_matrix(cfg.path("relation", "consensus.json"));
  const VulnGroupSet groups = assign_groups(relation);
  json doc = json::parse(groups_to_json(groups));
  doc["config"] = cfg.doc();
  const fs::path out = cfg.out_dir() / "groups.json";
  write_json(out, doc);
  log << "group: " << relation.size() << " ids in " << groups.groups.size() << " groups -> " << out.string()
      << '\n';
}

void cmd_evaluate(const PipelineConfig& cfg, std::ostream& log) {
  const double threshold = cfg.threshold();
  const Corpus corpus = load_corpus(cfg);
  const GroupCatalog catalog = selected_catalog(corpus, cfg);
  const SiameseModel model = load_model(cfg.path("model", "model.json"));
  const EmbeddingTable embeddings = load_embeddings(cfg.path("embeddings", "embeddings.jsonl"));
  const LinkDataset links = read_links(cfg.path("links", "links.jsonl"));
  const auto mask = training_mask(links, cfg);
  std::vector<LinkPair> training;
  std::vector<LinkPair> candidates;
  for (std::size_t i = 0; i < links.size(); ++i) (mask[i] ? training : candidates).push_back(links.pairs[i]);

  const bool explicit_regimes = cfg.find("evaluate.regimes") != nullptr;
  std::vector<std::string> regimes = cfg.texts("evaluate.regimes");
  if (!explicit_regimes) regimes = {"old-old", "old-new", "new-new"};

  json reports = json::array();
  json skipped = json::array();
  for (const auto& name : regimes) {
    Regime regime;
    try {
      regime = parse_regime(name);
    } catch (const ArgumentError&) {
      bad_field("evaluate.regimes", "unknown regime \"" + name + "\"");
    }
    if (filter_regime(candidates, corpus, regime, training).empty()) {
      if (explicit_regimes) throw ArgumentError("evaluate: no pairs to evaluate for regime " + name);
      skipped.push_back(name);
      log << "evaluate: " << name << " skipped (no pairs)\n";
      continue;
    }
    const EvalReport r =
        evaluate_regime(model, embeddings, corpus, catalog, training, candidates, regime, threshold);
    reports.push_back(json::parse(report_to_json(r)));
    log << "evaluate: " << name << " " << r.overall.confusion.total() << " pairs, accuracy "
        << r.overall.accuracy << ", f1 " << r.overall.f1 << '\n';
  }
  if (reports.empty()) throw ArgumentError("evaluate: no regime has pairs to evaluate");
  write_json(cfg.out_dir() / "evaluation.json", {{"config", cfg.doc()}, {"reports", reports}, {"skipped", skipped}});
}

void cmd_genexp(const PipelineConfig& cfg, std::ostream& log) {
  const GroupCatalog catalog = selected_catalog(load_corpus(cfg), cfg);
  GenExperimentConfig gc;
  gc.n_trials = static_cast<int>(cfg.integer("genexp.n_trials", gc.n_trials));
  gc.max_per_group = static_cast<int>(cfg.integer("genexp.max_per_group", gc.max_per_group));
  gc.group_selection = cfg.texts("genexp.groups");
  gc.seed = cfg.stage_seed("genexp");
  if (const json* per = cfg.find("genexp.per_group")) {
    if (!per->is_object()) bad_field("genexp.per_group", "must map group ids to counts");
    for (const auto& [gid, n] : per->items()) {
      if (!n.is_number_integer()) bad_field("genexp.per_group." + gid, "must be an integer");
      gc.per_group_counts[gid] = n.get<int>();
    }
  }

  const std::string oracle_kind = cfg.text("genexp.oracle", "model");
  std::optional<SiameseModel> model;
  std::optional<EmbeddingTable> embeddings;
  MatrixOracle oracle;
  if (oracle_kind == "model") {
    model = load_model(cfg.path("model", "model.json"));
    embeddings = load_embeddings(cfg.path("embeddings", "embeddings.jsonl"));
    oracle = model_oracle(*model, *embeddings, cfg.threshold());
  } else if (oracle_kind == "planted") {
    oracle = planted_partition_oracle(catalog, cfg.real("genexp.flip_noise", 0.0));
  } else {
    bad_field("genexp.oracle", "expected \"model\" or \"planted\", got \"" + oracle_kind + "\"");
  }
  const GenExperimentResult result = generation_experiment(catalog, oracle, gc);
  json doc = json::parse(report_to_json(result));
  doc["config"] = cfg.doc();
  const fs::path out = cfg.out_dir() / "genexp.json";
  write_json(out, doc);
  log << "genexp: " << gc.n_trials << " trials, direct " << result.direct_avg << ", consensus "
      << result.consensus_avg << " -> " << out.string() << '\n';
}

void cmd_report(const PipelineConfig& cfg, std::ostream& log) {
  std::vector<fs::path> inputs;
  if (cfg.find("report.inputs") != nullptr) {
    for (const auto& name : cfg.texts("report.inputs")) inputs.push_back(cfg.out_dir() / name);
  } else {
    for (const char* name : {"evaluation.json", "genexp.json"})
      if (fs::exists(cfg.out_dir() / name)) inputs.push_back(cfg.out_dir() / name);
  }
  if (inputs.empty()) throw ArgumentError("report: no report inputs found in " + cfg.out_dir().string());
  json items = json::array();
  for (const auto& path : inputs) {
    const json doc = read_json(path);
    if (doc.is_object() && doc.contains("reports")) {
      for (const auto& r : doc.at("reports")) items.push_back(r);
    } else {
      items.push_back(doc);
    }
  }
  const fs::path out = cfg.out_dir() / "report.md";
  write_text(out, report_markdown(items.dump()));
  log << "report: " << items.size() << " entries -> " << out.string() << '\n';
}

}  // namespace

PipelineConfig::PipelineConfig(json doc, fs::path base_dir) : doc_(std::move(doc)), base_dir_(std::move(base_dir)) {
  validate_keys(doc_, "");
}

PipelineConfig PipelineConfig::load(const fs::path& path, const Overrides& overrides) {
  json doc = read_json(path);
  if (!doc.is_object()) bad_field("<root>", "must be an object");
  if (overrides.seed) doc["seed"] = *overrides.seed;
  if (overrides.threshold) doc["threshold"] = *overrides.threshold;
  if (overrides.p) ensure_object(doc, "sampling")["p"] = *overrides.p;
  if (overrides.out) ensure_object(doc, "paths")["out"] = fs::absolute(*overrides.out).lexically_normal().string();
  return PipelineConfig(std::move(doc), path.has_parent_path() ? path.parent_path() : fs::path("."));
}

const json* PipelineConfig::find(const std::string& field) const {
  const json* node = &doc_;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = field.find('.', start);
    const std::string key = field.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(key)) return nullptr;
    node = &node->at(key);
    if (dot == std::string::npos) return node;
    start = dot + 1;
  }
}

double PipelineConfig::real(const std::string& field, double fallback) const {
  const json* v = find(field);
  if (v == nullptr) return fallback;
  if (!v->is_number()) bad_field(field, "must be a number");
  return v->get<double>();
}

std::int64_t PipelineConfig::integer(const std::string& field, std::int64_t fallback) const {
  const json* v = find(field);
  if (v == nullptr) return fallback;
  if (!v->is_number_integer()) bad_field(field, "must be an integer");
  return v->get<std::int64_t>();
}

std::string PipelineConfig::text(const std::string& field, const std::string& fallback) const {
  const json* v = find(field);
  if (v == nullptr) return fallback;
  if (!v->is_string()) bad_field(field, "must be a string");
  return v->get<std::string>();
}

std::vector<std::string> PipelineConfig::texts(const std::string& field) const {
  const json* v = find(field);
  if (v == nullptr) return {};
  if (!v->is_array()) bad_field(field, "must be a list of strings");
  std::vector<std::string> out;
  for (const auto& x : *v) {
    if (!x.is_string()) bad_field(field, "must be a list of strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

std::vector<int> PipelineConfig::integers(const std::string& field, const std::vector<int>& fallback) const {
  const json* v = find(field);
  if (v == nullptr) return fallback;
  if (!v->is_array()) bad_field(field, "must be a list of integers");
  std::vector<int> out;
  for (const auto& x : *v) {
    if (!x.is_number_integer() || x.get<std::int64_t>() < 1) bad_field(field, "must be a list of positive integers");
    out.push_back(x.get<int>());
  }
  return out;
}

std::uint64_t PipelineConfig::seed() const {
  const json* v = find("seed");
  if (v == nullptr) return 0;
  if (!v->is_number_unsigned()) bad_field("seed", "must be a non-negative integer");
  return v->get<std::uint64_t>();
}

std::uint64_t PipelineConfig::stage_seed(const std::string& section) const {
  const std::string field = section + ".seed";
  if (const json* v = find(field)) {
    if (!v->is_number_unsigned()) bad_field(field, "must be a non-negative integer");
    return v->get<std::uint64_t>();
  }
  return derive_seed(seed(), section);
}

double PipelineConfig::threshold() const {
  const double t = real("threshold", 0.5);
  if (!(t > 0.0 && t < 1.0)) bad_field("threshold", "must lie in (0, 1)");
  return t;
}

bool PipelineConfig::has_path(const std::string& key) const { return find("paths." + key) != nullptr; }

fs::path PipelineConfig::out_dir() const {
  if (!has_path("out")) return base_dir_ / "out";
  return path("out");
}

fs::path PipelineConfig::path(const std::string& key, const std::string& fallback) const {
  const std::string field = "paths." + key;
  if (!has_path(key)) {
    if (fallback.empty()) bad_field(field, "required");
    return out_dir() / fallback;
  }
  const fs::path p = text(field, "");
  if (p.empty()) bad_field(field, "must not be empty");
  return p.is_absolute() ? p : base_dir_ / p;
}

void run_command(const std::string& command, const PipelineConfig& config, std::ostream& log) {
  if (command == "ingest") cmd_ingest(config, log);
  else if (command == "synth") cmd_synth(config, log);
  else if (command == "sample") cmd_sample(config, log);
  else if (command == "train") cmd_train(config, log);
  else if (command == "predict") cmd_predict(config, log);
  else if (command == "consensus") cmd_consensus(config, log);
  else if (command == "group") cmd_group(config, log);
  else if (command == "evaluate") cmd_evaluate(config, log);
  else if (command == "genexp") cmd_genexp(config, log);
  else if (command == "report") cmd_report(config, log);
  else throw ArgumentError("unknown command '" + command + "'");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const std::map<std::string, std::string> help{
      {"ingest", "Validate corpora and report group cardinality statistics"},
      {"synth", "Write cluster-structured synthetic embeddings for the catalog"},
      {"sample", "Enumerate positive links, sample negatives, tag the split"},
      {"train", "Train the siamese model on the training links"},
      {"predict", "Threshold model scores into a prediction matrix"},
      {"consensus", "Score and reconcile a prediction matrix"},
      {"group", "Assign overlapping groups from a relation matrix"},
      {"evaluate", "Score held-out links per regime"},
      {"genexp", "Group generation experiment, direct vs consensus"},
      {"report", "Render JSON reports as markdown tables"},
  };
  CLI::App app{"Vulnerability sibling prediction pipeline", "vulnsib"};
  app.require_subcommand(1, 1);
  std::string config_path;
  Overrides overrides;
  for (const auto& name : kCommands) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config_path, "Pipeline config (JSON)")->required();
    sub->add_option("--seed", overrides.seed, "Override the top-level seed");
    sub->add_option("--threshold", overrides.threshold, "Override the decision threshold");
    sub->add_option("--p", overrides.p, "Override the sampling exponent");
    sub->add_option("--out", overrides.out, "Override the output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "vulnsib: " << e.what() << '\n';
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const PipelineConfig config = PipelineConfig::load(config_path, overrides);
    run_command(command, config, out);
  } catch (const std::exception& e) {
    err << "vulnsib " << command << ": error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace vulnsib::cli
