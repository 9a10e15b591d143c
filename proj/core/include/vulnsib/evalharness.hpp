#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vulnsib/corpus.hpp"
#include "vulnsib/embeddings.hpp"
#include "vulnsib/grouping.hpp"
#include "vulnsib/links.hpp"
#include "vulnsib/matrix.hpp"
#include "vulnsib/rng.hpp"
#include "vulnsib/siamese.hpp"

namespace vulnsib {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

// Rates are 0 when their denominator is 0; the matching flag is then set.
struct Metrics {
  Confusion confusion;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_degenerate = false;
  bool recall_degenerate = false;
  bool f1_degenerate = false;
};

Metrics metrics(std::span<const std::uint8_t> preds, std::span<const std::uint8_t> labels);

struct GroupMetrics {
  std::size_t size = 0;   // group cardinality in the catalog
  std::size_t pairs = 0;  // evaluated pairs attributed to the group
  Metrics metrics;
};

struct PerGroupReport {
  std::map<std::string, GroupMetrics> groups;
  std::vector<std::string> excluded;  // catalog groups with no attributed pair
  double equal_weight_accuracy = 0.0;
  double equal_weight_f1 = 0.0;
};

// Positive pairs count toward every group both endpoints share; negative
// pairs toward every group of either endpoint.
PerGroupReport per_group_metrics(const GroupCatalog& catalog, const std::vector<LinkPair>& pairs,
                                 std::span<const std::uint8_t> preds,
                                 std::span<const std::uint8_t> labels);

// Sample Pearson correlation; throws ArgumentError on constant input.
double pearson(std::span<const double> xs, std::span<const double> ys);

enum class Regime : std::uint8_t { OldOld, OldNew, NewNew };

std::string to_string(Regime regime);
Regime parse_regime(const std::string& text);
// Throws IntegrityError when an endpoint is missing from the corpus.
Regime regime_of(const Corpus& corpus, const LinkPair& pair);

// Candidates whose endpoints match the regime and which never occur in
// `training` (under either label).
std::vector<LinkPair> filter_regime(const std::vector<LinkPair>& candidates, const Corpus& corpus,
                                    Regime regime, const std::vector<LinkPair>& training);

struct EvalReport {
  Regime regime = Regime::OldOld;
  Metrics overall;
  PerGroupReport per_group;
  std::optional<double> size_accuracy_correlation;
  std::optional<double> size_f1_correlation;
};

using PairScorer = std::function<double(const std::string&, const std::string&)>;

EvalReport evaluate_regime(const PairScorer& scorer, const Corpus& corpus,
                           const GroupCatalog& catalog, const std::vector<LinkPair>& training,
                           const std::vector<LinkPair>& candidates, Regime regime,
                           double threshold);
EvalReport evaluate_regime(const SiameseModel& model, const EmbeddingTable& embeddings,
                           const Corpus& corpus, const GroupCatalog& catalog,
                           const std::vector<LinkPair>& training,
                           const std::vector<LinkPair>& candidates, Regime regime,
                           double threshold);

struct GenExperimentConfig {
  int n_trials = 100;
  int max_per_group = 10;
  std::vector<std::string> group_selection;  // empty selects every catalog group
  // Per-group sample sizes overriding max_per_group for the listed groups.
  std::map<std::string, int> per_group_counts;
  std::uint64_t seed = 0;
};

// Produces a prediction matrix over the given ids. The Rng is the trial's
// own stream, for oracles that inject noise.
using MatrixOracle = std::function<BinaryMatrix(const std::vector<std::string>& ids, Rng& rng)>;

MatrixOracle model_oracle(const SiameseModel& model, const EmbeddingTable& embeddings,
                          double threshold);
// Ground-truth co-membership with each off-diagonal pair flipped with
// probability flip_noise.
MatrixOracle planted_partition_oracle(const GroupCatalog& catalog, double flip_noise);

struct GenTrial {
  std::vector<std::string> ids;
  double direct = 0.0;
  double consensus = 0.0;
  std::size_t direct_groups = 0;
  std::size_t consensus_groups = 0;
};

struct GenExperimentResult {
  std::vector<std::string> groups;
  double direct_avg = 0.0;
  double consensus_avg = 0.0;
  std::vector<GenTrial> trials;
};

GenExperimentResult generation_experiment(const GroupCatalog& catalog, const MatrixOracle& oracle,
                                          const GenExperimentConfig& config);

std::string report_to_json(const EvalReport& report);
std::string report_to_json(const GenExperimentResult& result);
// Renders an evaluation or generation report (or a list of them) as markdown.
std::string report_markdown(const std::string& report_json);

}  // namespace vulnsib
