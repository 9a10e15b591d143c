#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vulnsib/embeddings.hpp"
#include "vulnsib/links.hpp"
#include "vulnsib/matrix.hpp"
#include "vulnsib/rng.hpp"

namespace vulnsib {

// Fully connected layer: y = weight * x + bias, weight is out x in.
struct Dense {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  Eigen::Index inputs() const noexcept { return weight.cols(); }
  Eigen::Index outputs() const noexcept { return weight.rows(); }
};

struct TrainConfig {
  std::vector<int> encoder_widths{512, 256, 128, 64};
  std::vector<int> predictor_widths{128, 64, 32, 16};
  double dropout = 0.1;
  double l2_predictor = 0.1;

  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 5e-7;
  std::uint64_t seed = 0;

  // Adaptive-moment optimizer constants.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

// Shared-weight encoder stack, average pooling, predictor stack ending in a
// single sigmoid unit. The same encoder parameters are applied to both inputs.
struct SiameseModel {
  int input_dim = 0;
  std::vector<Dense> encoder;
  // Hidden predictor layers followed by the 1-unit output layer.
  std::vector<Dense> predictor;
  double dropout = 0.1;
  double l2_predictor = 0.1;
  std::uint64_t seed = 0;

  std::vector<int> encoder_widths() const;
  std::vector<int> predictor_widths() const;  // hidden widths, output unit excluded
  std::size_t parameter_count() const;
  bool all_finite() const;
};

inline constexpr double kScoreClamp = 1e-12;

// Fan-scaled uniform weights (limit sqrt(6 / (fan_in + fan_out))), zero biases.
SiameseModel init_model(int input_dim, const TrainConfig& config);

// Encoder output (after the last rectifier) for one vector.
Eigen::VectorXd encode(const SiameseModel& model, std::span<const double> x);
// Predictor applied to an already pooled encoding; returns the sigmoid score.
double predict_pooled(const SiameseModel& model, const Eigen::VectorXd& pooled);

// Inference-mode score in (0, 1). forward(a, b) == forward(b, a) bit-for-bit.
double forward(const SiameseModel& model, std::span<const double> a, std::span<const double> b);
// Training-mode score: inverted dropout on the pooled encoding.
double forward_train(const SiameseModel& model, std::span<const double> a,
                     std::span<const double> b, Rng& dropout_rng);

// Binary cross-entropy on the clamped score.
double data_loss(double score, double label);
double l2_penalty(const SiameseModel& model);
// data_loss + l2_predictor * sum of squared predictor weights.
double loss(double score, double label, const SiameseModel& model);

struct Gradients {
  std::vector<Dense> encoder;
  std::vector<Dense> predictor;

  static Gradients zeros_like(const SiameseModel& model);
};

// A mini-batch of pairs as columns: left/right are input_dim x B.
struct PairBatch {
  Eigen::MatrixXd left;
  Eigen::MatrixXd right;
  Eigen::VectorXd labels;
  // Optional dropout multipliers on the pooled encoding (encoder_out x B);
  // empty means no dropout.
  Eigen::MatrixXd dropout_mask;
};

// Mean data loss over the batch plus the L2 term. When `grad` is non-null it
// receives the analytic gradient of that objective.
double batch_objective(const SiameseModel& model, const PairBatch& batch, Gradients* grad);

struct EpochStats {
  double loss = 0.0;      // inference-mode objective over the training links
  double accuracy = 0.0;  // inference-mode accuracy at threshold 0.5
};

struct TrainResult {
  SiameseModel model;
  std::vector<EpochStats> history;
};

// Adaptive-moment mini-batch training with per-epoch reshuffling. Fully
// determined by (model, links, embeddings, config).
TrainResult train(SiameseModel model, const std::vector<LinkPair>& links,
                  const EmbeddingTable& embeddings, const TrainConfig& config);

// P_ij = 1 iff forward(e_i, e_j) >= threshold (i != j), zero diagonal.
BinaryMatrix predict_matrix(const SiameseModel& model, const std::vector<std::string>& ids,
                            const EmbeddingTable& embeddings, double threshold);

void write_model(std::ostream& out, const SiameseModel& model);
SiameseModel read_model(std::istream& in, const std::string& source = "<stream>");
void save_model(const std::filesystem::path& path, const SiameseModel& model);
SiameseModel load_model(const std::filesystem::path& path);

}  // namespace vulnsib
