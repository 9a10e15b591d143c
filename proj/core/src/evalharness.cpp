#include "vulnsib/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vulnsib/consensus.hpp"
#include "vulnsib/error.hpp"

namespace vulnsib {

using nlohmann::json;

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> maybe_pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() < 2) return std::nullopt;
  try {
    return pearson(xs, ys);
  } catch (const ArgumentError&) {
    return std::nullopt;
  }
}

json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json metrics_json(const Metrics& m) {
  return {{"confusion", {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"tn", m.confusion.tn}, {"fn", m.confusion.fn}}},
          {"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"degenerate",
           {{"precision", m.precision_degenerate}, {"recall", m.recall_degenerate}, {"f1", m.f1_degenerate}}}};
}

std::string pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * x);
  return buf;
}

std::string fixed(const json& x) {
  if (x.is_null()) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x.get<double>());
  return buf;
}

void render_evaluation(std::ostringstream& md, const std::vector<json>& reports) {
  md << "| Regime | Pairs | Acc % | Pre % | Rec % | F1 % | EW Acc % | EW F1 % | r(size, Acc) | r(size, F1) |\n";
  md << "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : reports) {
    md << "| " << r.at("regime").get<std::string>() << " | " << r.at("pairs").get<std::size_t>() << " | "
       << pct(r.at("accuracy")) << " | " << pct(r.at("precision")) << " | " << pct(r.at("recall")) << " | "
       << pct(r.at("f1")) << " | " << pct(r.at("equal_weight_accuracy")) << " | "
       << pct(r.at("equal_weight_f1")) << " | " << fixed(r.at("correlations").at("size_accuracy")) << " | "
       << fixed(r.at("correlations").at("size_f1")) << " |\n";
  }
  for (const auto& r : reports) {
    md << "\n### Per-group results (" << r.at("regime").get<std::string>() << ")\n\n";
    md << "| Group | Size | Pairs | Acc % | F1 % |\n|---|---|---|---|---|\n";
    for (const auto& [gid, g] : r.at("per_group").items()) {
      md << "| " << gid << " | " << g.at("size").get<std::size_t>() << " | " << g.at("pairs").get<std::size_t>()
         << " | " << pct(g.at("accuracy")) << " | "
         << (g.at("f1_degenerate").get<bool>() ? std::string("n/a") : pct(g.at("f1"))) << " |\n";
    }
  }
}

void render_generation(std::ostringstream& md, const std::vector<json>& reports) {
  md << "| Groups | Trials | Direct | Consensus |\n|---|---|---|---|\n";
  for (const auto& r : reports) {
    std::string names;
    for (const auto& g : r.at("groups")) names += (names.empty() ? "" : ", ") + g.get<std::string>();
    md << "| " << names << " | " << r.at("trials").size() << " | " << pct(r.at("direct_avg")) << " | "
       << pct(r.at("consensus_avg")) << " |\n";
  }
}

}  // namespace

Metrics metrics(std::span<const std::uint8_t> preds, std::span<const std::uint8_t> labels) {
  if (preds.size() != labels.size())
    throw DimensionError("metrics: " + std::to_string(preds.size()) + " predictions for " +
                        std::to_string(labels.size()) + " labels");
  if (preds.empty()) throw ArgumentError("metrics: no predictions");
  Metrics m;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] != 0;
    const bool y = labels[i] != 0;
    if (p && y) ++m.confusion.tp;
    else if (p && !y) ++m.confusion.fp;
    else if (!p && !y) ++m.confusion.tn;
    else ++m.confusion.fn;
  }
  const auto& c = m.confusion;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.precision_degenerate = c.tp + c.fp == 0;
  m.recall_degenerate = c.tp + c.fn == 0;
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.f1_degenerate = m.precision_degenerate || m.recall_degenerate || m.precision + m.recall == 0.0;
  m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

PerGroupReport per_group_metrics(const GroupCatalog& catalog, const std::vector<LinkPair>& pairs,
                                 std::span<const std::uint8_t> preds,
                                 std::span<const std::uint8_t> labels) {
  if (preds.size() != pairs.size() || labels.size() != pairs.size())
    throw ArgumentError("per-group metrics: pairs, predictions and labels differ in length");

  std::map<std::string, std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>>> buckets;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    std::vector<std::string> groups;
    if (labels[i] != 0) {
      groups = catalog.shared_groups(p.a, p.b);
    } else {
      std::set<std::string> both(catalog.groups_of(p.a).begin(), catalog.groups_of(p.a).end());
      both.insert(catalog.groups_of(p.b).begin(), catalog.groups_of(p.b).end());
      groups.assign(both.begin(), both.end());
    }
    if (groups.empty())
      throw ArgumentError("pair (" + p.a + ", " + p.b + ") cannot be attributed to any group");
    for (const auto& g : groups) {
      auto& [bp, bl] = buckets[g];
      bp.push_back(preds[i]);
      bl.push_back(labels[i]);
    }
  }

  PerGroupReport report;
  for (const auto& gid : catalog.group_ids()) {
    auto it = buckets.find(gid);
    if (it == buckets.end()) {
      report.excluded.push_back(gid);
      continue;
    }
    const auto& [bp, bl] = it->second;
    report.groups[gid] = GroupMetrics{catalog.members(gid).size(), bp.size(), metrics(bp, bl)};
  }
  if (!report.groups.empty()) {
    double acc = 0.0;
    double f1 = 0.0;
    for (const auto& [_, g] : report.groups) {
      acc += g.metrics.accuracy;
      f1 += g.metrics.f1;
    }
    report.equal_weight_accuracy = acc / static_cast<double>(report.groups.size());
    report.equal_weight_f1 = f1 / static_cast<double>(report.groups.size());
  }
  return report;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ArgumentError("pearson: lists differ in length");
  if (xs.size() < 2) throw ArgumentError("pearson: need at least two points");
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ArgumentError("pearson: correlation undefined for constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::OldOld:
      return "old-old";
    case Regime::OldNew:
      return "old-new";
    case Regime::NewNew:
      return "new-new";
  }
  return {};
}

Regime parse_regime(const std::string& text) {
  if (text == "old-old") return Regime::OldOld;
  if (text == "old-new") return Regime::OldNew;
  if (text == "new-new") return Regime::NewNew;
  throw ArgumentError("unknown regime '" + text + "' (expected old-old, old-new or new-new)");
}

Regime regime_of(const Corpus& corpus, const LinkPair& pair) {
  const int known = static_cast<int>(corpus.at(pair.a).known) + static_cast<int>(corpus.at(pair.b).known);
  return known == 2 ? Regime::OldOld : known == 1 ? Regime::OldNew : Regime::NewNew;
}

std::vector<LinkPair> filter_regime(const std::vector<LinkPair>& candidates, const Corpus& corpus,
                                    Regime regime, const std::vector<LinkPair>& training) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& p : training) seen.emplace(p.a, p.b);
  std::vector<LinkPair> out;
  for (const auto& p : candidates) {
    if (regime_of(corpus, p) != regime) continue;
    if (seen.contains({p.a, p.b})) continue;
    out.push_back(p);
  }
  return out;
}

EvalReport evaluate_regime(const PairScorer& scorer, const Corpus& corpus,
                           const GroupCatalog& catalog, const std::vector<LinkPair>& training,
                           const std::vector<LinkPair>& candidates, Regime regime,
                           double threshold) {
  const auto pairs = filter_regime(candidates, corpus, regime, training);
  if (pairs.empty()) throw ArgumentError("no pairs to evaluate for regime " + to_string(regime));

  std::vector<std::uint8_t> preds;
  std::vector<std::uint8_t> labels;
  preds.reserve(pairs.size());
  labels.reserve(pairs.size());
  for (const auto& p : pairs) {
    preds.push_back(scorer(p.a, p.b) >= threshold ? 1 : 0);
    labels.push_back(p.positive() ? 1 : 0);
  }

  EvalReport report;
  report.regime = regime;
  report.overall = metrics(preds, labels);
  report.per_group = per_group_metrics(catalog, pairs, preds, labels);

  std::vector<double> sizes;
  std::vector<double> accs;
  std::vector<double> f1s;
  for (const auto& [_, g] : report.per_group.groups) {
    sizes.push_back(static_cast<double>(g.size));
    accs.push_back(g.metrics.accuracy);
    f1s.push_back(g.metrics.f1);
  }
  report.size_accuracy_correlation = maybe_pearson(sizes, accs);
  report.size_f1_correlation = maybe_pearson(sizes, f1s);
  return report;
}

EvalReport evaluate_regime(const SiameseModel& model, const EmbeddingTable& embeddings,
                           const Corpus& corpus, const GroupCatalog& catalog,
                           const std::vector<LinkPair>& training,
                           const std::vector<LinkPair>& candidates, Regime regime,
                           double threshold) {
  if (embeddings.dim() != model.input_dim)
    throw DimensionError("embedding dim " + std::to_string(embeddings.dim()) +
                         " does not match model input_dim " + std::to_string(model.input_dim));
  auto scorer = [&](const std::string& a, const std::string& b) {
    return forward(model, embeddings.at(a), embeddings.at(b));
  };
  return evaluate_regime(scorer, corpus, catalog, training, candidates, regime, threshold);
}

MatrixOracle model_oracle(const SiameseModel& model, const EmbeddingTable& embeddings,
                          double threshold) {
  if (embeddings.dim() != model.input_dim)
    throw DimensionError("embedding dim " + std::to_string(embeddings.dim()) +
                         " does not match model input_dim " + std::to_string(model.input_dim));
  return [&model, &embeddings, threshold](const std::vector<std::string>& ids, Rng&) {
    return predict_matrix(model, ids, embeddings, threshold);
  };
}

MatrixOracle planted_partition_oracle(const GroupCatalog& catalog, double flip_noise) {
  if (!(flip_noise >= 0.0 && flip_noise <= 1.0)) throw ArgumentError("flip noise must lie in [0, 1]");
  return [&catalog, flip_noise](const std::vector<std::string>& ids, Rng& rng) {
    BinaryMatrix p(ids);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        std::uint8_t v = catalog.share_group(ids[i], ids[j]) ? 1 : 0;
        if (flip_noise > 0.0 && rng.bernoulli(flip_noise)) v ^= 1;
        p(i, j) = v;
        p(j, i) = v;
      }
    }
    return p;
  };
}

GenExperimentResult generation_experiment(const GroupCatalog& catalog, const MatrixOracle& oracle,
                                          const GenExperimentConfig& config) {
  if (config.n_trials < 1) throw ArgumentError("generation experiment needs at least one trial");
  if (config.max_per_group < 1) throw ArgumentError("max_per_group must be at least 1");

  std::set<std::string> selected(config.group_selection.begin(), config.group_selection.end());
  if (selected.empty()) {
    const auto all = catalog.group_ids();
    selected.insert(all.begin(), all.end());
  }
  for (const auto& [gid, count] : config.per_group_counts) {
    if (!selected.contains(gid)) throw ArgumentError("per-group count given for unselected group " + gid);
    if (count < 1) throw ArgumentError("per-group count for " + gid + " must be at least 1");
  }
  std::map<std::string, std::vector<std::string>> reference_groups;
  for (const auto& gid : selected) reference_groups[gid] = catalog.members(gid);
  const GroupCatalog reference(reference_groups);

  GenExperimentResult result;
  result.groups.assign(selected.begin(), selected.end());
  double direct_sum = 0.0;
  double consensus_sum = 0.0;
  for (int t = 0; t < config.n_trials; ++t) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(t)));
    std::set<std::string> chosen;
    for (const auto& gid : result.groups) {
      std::vector<std::string> pool = reference.members(gid);
      const auto count = config.per_group_counts.find(gid);
      const int limit = count == config.per_group_counts.end() ? config.max_per_group : count->second;
      const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(limit), pool.size());
      for (std::size_t i = 0; i < take; ++i) {
        std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
        chosen.insert(pool[i]);
      }
    }
    GenTrial trial;
    trial.ids.assign(chosen.begin(), chosen.end());

    const BinaryMatrix prediction = oracle(trial.ids, rng);
    if (prediction.ids() != trial.ids) throw ArgumentError("matrix oracle returned a different id list");
    const VulnGroupSet direct = assign_groups(prediction);
    const VulnGroupSet agreed = assign_groups(apply_consensus(prediction));
    trial.direct = best_match_similarity(direct, reference);
    trial.consensus = best_match_similarity(agreed, reference);
    trial.direct_groups = direct.groups.size();
    trial.consensus_groups = agreed.groups.size();
    direct_sum += trial.direct;
    consensus_sum += trial.consensus;
    result.trials.push_back(std::move(trial));
  }
  result.direct_avg = direct_sum / static_cast<double>(config.n_trials);
  result.consensus_avg = consensus_sum / static_cast<double>(config.n_trials);
  return result;
}

std::string report_to_json(const EvalReport& report) {
  json per_group = json::object();
  for (const auto& [gid, g] : report.per_group.groups) {
    per_group[gid] = {{"size", g.size},
                      {"pairs", g.pairs},
                      {"accuracy", g.metrics.accuracy},
                      {"f1", g.metrics.f1},
                      {"f1_degenerate", g.metrics.f1_degenerate}};
  }
  json doc = metrics_json(report.overall);
  doc["kind"] = "evaluation";
  doc["regime"] = to_string(report.regime);
  doc["pairs"] = report.overall.confusion.total();
  doc["per_group"] = std::move(per_group);
  doc["excluded_groups"] = report.per_group.excluded;
  doc["equal_weight_accuracy"] = report.per_group.equal_weight_accuracy;
  doc["equal_weight_f1"] = report.per_group.equal_weight_f1;
  doc["correlations"] = {{"size_accuracy", optional_json(report.size_accuracy_correlation)},
                         {"size_f1", optional_json(report.size_f1_correlation)}};
  return doc.dump();
}

std::string report_to_json(const GenExperimentResult& result) {
  json trials = json::array();
  for (const auto& t : result.trials) {
    trials.push_back({{"ids", t.ids},
                      {"direct", t.direct},
                      {"consensus", t.consensus},
                      {"direct_groups", t.direct_groups},
                      {"consensus_groups", t.consensus_groups}});
  }
  return json{{"kind", "generation"},
              {"groups", result.groups},
              {"direct_avg", result.direct_avg},
              {"consensus_avg", result.consensus_avg},
              {"trials", std::move(trials)}}
      .dump();
}

std::string report_markdown(const std::string& report_json) {
  json doc;
  try {
    doc = json::parse(report_json);
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad report: ") + e.what());
  }
  std::vector<json> items;
  if (doc.is_array()) {
    items.assign(doc.begin(), doc.end());
  } else if (doc.contains("reports")) {
    items.assign(doc.at("reports").begin(), doc.at("reports").end());
  } else {
    items.push_back(doc);
  }
  std::vector<json> evaluations;
  std::vector<json> generations;
  for (auto& item : items) {
    const std::string kind = item.value("kind", "");
    if (kind == "evaluation") evaluations.push_back(item);
    else if (kind == "generation") generations.push_back(item);
    else throw ParseError("report entry has unknown kind '" + kind + "'");
  }
  std::ostringstream md;
  try {
    if (!evaluations.empty()) {
      md << "## Sibling prediction\n\n";
      render_evaluation(md, evaluations);
    }
    if (!generations.empty()) {
      if (!evaluations.empty()) md << '\n';
      md << "## Group generation (mean best-match Jaccard %)\n\n";
      render_generation(md, generations);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("report is missing fields: ") + e.what());
  }
  return md.str();
}

}  // namespace vulnsib
