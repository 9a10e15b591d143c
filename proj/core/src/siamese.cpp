#include "vulnsib/siamese.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "vulnsib/error.hpp"

namespace vulnsib {

using nlohmann::json;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> x) {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

void check_input(const SiameseModel& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.input_dim)
    throw DimensionError("input vector has length " + std::to_string(x.size()) +
                         ", model expects " + std::to_string(model.input_dim));
}

Dense make_layer(int inputs, int outputs, Rng& rng) {
  Dense layer{Eigen::MatrixXd(outputs, inputs), Eigen::VectorXd::Zero(outputs)};
  const double limit = std::sqrt(6.0 / static_cast<double>(inputs + outputs));
  for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      layer.weight(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
  return layer;
}

Dense zeros_like(const Dense& d) {
  return Dense{Eigen::MatrixXd::Zero(d.weight.rows(), d.weight.cols()),
               Eigen::VectorXd::Zero(d.bias.size())};
}

// Activations retained for the backward pass.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> enc_in;   // input to each encoder layer
  std::vector<Eigen::MatrixXd> enc_pre;  // pre-activation of each encoder layer
  std::vector<Eigen::MatrixXd> pred_in;
  std::vector<Eigen::MatrixXd> pred_pre;
  Eigen::RowVectorXd scores;
};

void forward_batch(const SiameseModel& model, const PairBatch& batch, ForwardCache& cache) {
  const Eigen::Index n = batch.left.cols();
  Eigen::MatrixXd h(batch.left.rows(), 2 * n);
  h << batch.left, batch.right;

  cache.enc_in.clear();
  cache.enc_pre.clear();
  for (const auto& layer : model.encoder) {
    cache.enc_in.push_back(h);
    Eigen::MatrixXd z = (layer.weight * h).colwise() + layer.bias;
    h = z.cwiseMax(0.0);
    cache.enc_pre.push_back(std::move(z));
  }

  Eigen::MatrixXd pooled = 0.5 * (h.leftCols(n) + h.rightCols(n));
  if (batch.dropout_mask.size() > 0) pooled = pooled.cwiseProduct(batch.dropout_mask);

  cache.pred_in.clear();
  cache.pred_pre.clear();
  Eigen::MatrixXd x = std::move(pooled);
  for (std::size_t m = 0; m < model.predictor.size(); ++m) {
    const auto& layer = model.predictor[m];
    cache.pred_in.push_back(x);
    Eigen::MatrixXd z = (layer.weight * x).colwise() + layer.bias;
    x = m + 1 < model.predictor.size() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
    cache.pred_pre.push_back(std::move(z));
  }
  cache.scores = x.row(0).unaryExpr([](double z) { return sigmoid(z); });
}

Eigen::MatrixXd relu_grad(const Eigen::MatrixXd& pre) {
  return (pre.array() > 0.0).cast<double>().matrix();
}

PairBatch gather(const std::vector<const LinkPair*>& links, std::span<const std::size_t> index,
                 const EmbeddingTable& embeddings) {
  const auto dim = static_cast<Eigen::Index>(embeddings.dim());
  const auto n = static_cast<Eigen::Index>(index.size());
  PairBatch batch{Eigen::MatrixXd(dim, n), Eigen::MatrixXd(dim, n), Eigen::VectorXd(n), {}};
  for (Eigen::Index c = 0; c < n; ++c) {
    const LinkPair& p = *links[index[static_cast<std::size_t>(c)]];
    batch.left.col(c) = as_vector(embeddings.at(p.a));
    batch.right.col(c) = as_vector(embeddings.at(p.b));
    batch.labels(c) = p.positive() ? 1.0 : 0.0;
  }
  return batch;
}

struct AdamState {
  Gradients m;
  Gradients v;
  long step = 0;
};

void adam_update(Dense& param, Dense& m, Dense& v, const Dense& g, const TrainConfig& cfg,
                 double correction1, double correction2) {
  m.weight = cfg.beta1 * m.weight + (1.0 - cfg.beta1) * g.weight;
  v.weight = cfg.beta2 * v.weight + (1.0 - cfg.beta2) * g.weight.cwiseAbs2();
  m.bias = cfg.beta1 * m.bias + (1.0 - cfg.beta1) * g.bias;
  v.bias = cfg.beta2 * v.bias + (1.0 - cfg.beta2) * g.bias.cwiseAbs2();
  param.weight.array() -= cfg.learning_rate * (m.weight.array() / correction1) /
                          ((v.weight.array() / correction2).sqrt() + cfg.adam_epsilon);
  param.bias.array() -= cfg.learning_rate * (m.bias.array() / correction1) /
                        ((v.bias.array() / correction2).sqrt() + cfg.adam_epsilon);
}

json layer_rows(const Eigen::MatrixXd& w) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < w.cols(); ++c) row.push_back(w(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<int> SiameseModel::encoder_widths() const {
  std::vector<int> w;
  for (const auto& layer : encoder) w.push_back(static_cast<int>(layer.outputs()));
  return w;
}

std::vector<int> SiameseModel::predictor_widths() const {
  std::vector<int> w;
  for (std::size_t m = 0; m + 1 < predictor.size(); ++m)
    w.push_back(static_cast<int>(predictor[m].outputs()));
  return w;
}

std::size_t SiameseModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto* stack : {&encoder, &predictor})
    for (const auto& layer : *stack) n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  return n;
}

bool SiameseModel::all_finite() const {
  for (const auto* stack : {&encoder, &predictor})
    for (const auto& layer : *stack)
      if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  return true;
}

SiameseModel init_model(int input_dim, const TrainConfig& config) {
  if (input_dim < 1) throw ArgumentError("input_dim must be at least 1");
  if (config.encoder_widths.empty()) throw ArgumentError("encoder needs at least one layer");
  for (const auto* widths : {&config.encoder_widths, &config.predictor_widths})
    for (int w : *widths)
      if (w < 1) throw ArgumentError("layer widths must be positive");
  if (!(config.dropout >= 0.0 && config.dropout < 1.0)) throw ArgumentError("dropout must lie in [0, 1)");
  if (!(config.l2_predictor >= 0.0)) throw ArgumentError("l2 coefficient must be non-negative");

  SiameseModel model;
  model.input_dim = input_dim;
  model.dropout = config.dropout;
  model.l2_predictor = config.l2_predictor;
  model.seed = config.seed;

  Rng rng(derive_seed(config.seed, "init"));
  int fan_in = input_dim;
  for (int w : config.encoder_widths) {
    model.encoder.push_back(make_layer(fan_in, w, rng));
    fan_in = w;
  }
  for (int w : config.predictor_widths) {
    model.predictor.push_back(make_layer(fan_in, w, rng));
    fan_in = w;
  }
  model.predictor.push_back(make_layer(fan_in, 1, rng));
  return model;
}

Eigen::VectorXd encode(const SiameseModel& model, std::span<const double> x) {
  check_input(model, x);
  Eigen::VectorXd h = as_vector(x);
  for (const auto& layer : model.encoder) h = (layer.weight * h + layer.bias).cwiseMax(0.0);
  return h;
}

double predict_pooled(const SiameseModel& model, const Eigen::VectorXd& pooled) {
  Eigen::VectorXd x = pooled;
  for (std::size_t m = 0; m + 1 < model.predictor.size(); ++m) {
    const auto& layer = model.predictor[m];
    x = (layer.weight * x + layer.bias).cwiseMax(0.0);
  }
  const auto& out = model.predictor.back();
  return sigmoid(out.weight.row(0).dot(x) + out.bias(0));
}

double forward(const SiameseModel& model, std::span<const double> a, std::span<const double> b) {
  const Eigen::VectorXd ea = encode(model, a);
  const Eigen::VectorXd eb = encode(model, b);
  return predict_pooled(model, 0.5 * (ea + eb));
}

double forward_train(const SiameseModel& model, std::span<const double> a,
                     std::span<const double> b, Rng& dropout_rng) {
  const Eigen::VectorXd ea = encode(model, a);
  const Eigen::VectorXd eb = encode(model, b);
  Eigen::VectorXd pooled = 0.5 * (ea + eb);
  if (model.dropout > 0.0) {
    const double keep = 1.0 - model.dropout;
    for (Eigen::Index k = 0; k < pooled.size(); ++k)
      pooled(k) = dropout_rng.bernoulli(keep) ? pooled(k) / keep : 0.0;
  }
  return predict_pooled(model, pooled);
}

double data_loss(double score, double label) {
  const double s = std::clamp(score, kScoreClamp, 1.0 - kScoreClamp);
  return -(label * std::log(s) + (1.0 - label) * std::log(1.0 - s));
}

double l2_penalty(const SiameseModel& model) {
  double sum = 0.0;
  for (const auto& layer : model.predictor) sum += layer.weight.squaredNorm();
  return model.l2_predictor * sum;
}

double loss(double score, double label, const SiameseModel& model) {
  return data_loss(score, label) + l2_penalty(model);
}

Gradients Gradients::zeros_like(const SiameseModel& model) {
  Gradients g;
  for (const auto& layer : model.encoder) g.encoder.push_back(vulnsib::zeros_like(layer));
  for (const auto& layer : model.predictor) g.predictor.push_back(vulnsib::zeros_like(layer));
  return g;
}

double batch_objective(const SiameseModel& model, const PairBatch& batch, Gradients* grad) {
  const Eigen::Index n = batch.left.cols();
  if (n == 0) throw ArgumentError("empty batch");
  if (batch.left.rows() != model.input_dim || batch.right.rows() != model.input_dim ||
      batch.right.cols() != n || batch.labels.size() != n)
    throw DimensionError("batch shape does not match the model");

  ForwardCache cache;
  forward_batch(model, batch, cache);

  double total = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) total += data_loss(cache.scores(c), batch.labels(c));
  const double objective = total / static_cast<double>(n) + l2_penalty(model);
  if (grad == nullptr) return objective;

  *grad = Gradients::zeros_like(model);

  // d objective / d output logit; zero where the score sits on the clamp.
  Eigen::MatrixXd dz(1, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const double s = cache.scores(c);
    const bool clamped = s <= kScoreClamp || s >= 1.0 - kScoreClamp;
    dz(0, c) = clamped ? 0.0 : (s - batch.labels(c)) / static_cast<double>(n);
  }

  Eigen::MatrixXd d_input;
  for (std::size_t m = model.predictor.size(); m-- > 0;) {
    const auto& layer = model.predictor[m];
    auto& g = grad->predictor[m];
    g.weight = dz * cache.pred_in[m].transpose() + 2.0 * model.l2_predictor * layer.weight;
    g.bias = dz.rowwise().sum();
    d_input = layer.weight.transpose() * dz;
    if (m > 0) dz = d_input.cwiseProduct(relu_grad(cache.pred_pre[m - 1]));
  }

  Eigen::MatrixXd d_pooled = std::move(d_input);
  if (batch.dropout_mask.size() > 0) d_pooled = d_pooled.cwiseProduct(batch.dropout_mask);

  Eigen::MatrixXd d_out(d_pooled.rows(), 2 * n);
  d_out << 0.5 * d_pooled, 0.5 * d_pooled;
  dz = d_out.cwiseProduct(relu_grad(cache.enc_pre.back()));
  for (std::size_t l = model.encoder.size(); l-- > 0;) {
    auto& g = grad->encoder[l];
    g.weight = dz * cache.enc_in[l].transpose();
    g.bias = dz.rowwise().sum();
    if (l > 0)
      dz = (model.encoder[l].weight.transpose() * dz).cwiseProduct(relu_grad(cache.enc_pre[l - 1]));
  }
  return objective;
}

TrainResult train(SiameseModel model, const std::vector<LinkPair>& links,
                  const EmbeddingTable& embeddings, const TrainConfig& config) {
  if (config.epochs < 1) throw ArgumentError("epochs must be at least 1");
  if (config.batch_size < 1) throw ArgumentError("batch_size must be at least 1");
  if (!(config.learning_rate >= 0.0)) throw ArgumentError("learning_rate must be non-negative");
  if (embeddings.dim() != model.input_dim)
    throw DimensionError("embedding dim " + std::to_string(embeddings.dim()) +
                         " does not match model input_dim " + std::to_string(model.input_dim));

  std::vector<const LinkPair*> pool;
  bool has_pos = false;
  bool has_neg = false;
  for (const auto& p : links) {
    for (const auto* id : {&p.a, &p.b})
      if (!embeddings.contains(*id)) throw IntegrityError("no embedding for " + *id);
    (p.positive() ? has_pos : has_neg) = true;
    pool.push_back(&p);
  }
  if (!has_pos || !has_neg)
    throw ArgumentError("training needs at least one positive and one negative link");

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
  Rng dropout_rng(derive_seed(config.seed, "dropout"));

  // Fixed evaluation batches over the whole training set, built once.
  std::vector<PairBatch> eval_batches;
  constexpr std::size_t kEvalChunk = 512;
  for (std::size_t start = 0; start < order.size(); start += kEvalChunk) {
    const std::size_t len = std::min(kEvalChunk, order.size() - start);
    eval_batches.push_back(gather(pool, std::span(order).subspan(start, len), embeddings));
  }

  AdamState adam{Gradients::zeros_like(model), Gradients::zeros_like(model), 0};
  Gradients grad;
  TrainResult result;
  const double keep = 1.0 - model.dropout;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t len = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), order.size() - start);
      PairBatch batch = gather(pool, std::span(order).subspan(start, len), embeddings);
      if (model.dropout > 0.0) {
        const auto width = model.encoder.back().outputs();
        batch.dropout_mask.resize(width, static_cast<Eigen::Index>(len));
        for (Eigen::Index c = 0; c < batch.dropout_mask.cols(); ++c)
          for (Eigen::Index r = 0; r < width; ++r)
            batch.dropout_mask(r, c) = dropout_rng.bernoulli(keep) ? 1.0 / keep : 0.0;
      }
      batch_objective(model, batch, &grad);

      ++adam.step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(adam.step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(adam.step));
      for (std::size_t l = 0; l < model.encoder.size(); ++l)
        adam_update(model.encoder[l], adam.m.encoder[l], adam.v.encoder[l], grad.encoder[l], config, c1, c2);
      for (std::size_t m = 0; m < model.predictor.size(); ++m)
        adam_update(model.predictor[m], adam.m.predictor[m], adam.v.predictor[m], grad.predictor[m], config, c1, c2);
    }

    EpochStats stats;
    double loss_sum = 0.0;
    std::size_t correct = 0;
    ForwardCache cache;
    for (const auto& batch : eval_batches) {
      forward_batch(model, batch, cache);
      for (Eigen::Index c = 0; c < batch.labels.size(); ++c) {
        loss_sum += data_loss(cache.scores(c), batch.labels(c));
        const bool predicted = cache.scores(c) >= 0.5;
        if (predicted == (batch.labels(c) > 0.5)) ++correct;
      }
    }
    const auto n = static_cast<double>(pool.size());
    stats.loss = loss_sum / n + l2_penalty(model);
    stats.accuracy = static_cast<double>(correct) / n;
    result.history.push_back(stats);
  }
  result.model = std::move(model);
  return result;
}

BinaryMatrix predict_matrix(const SiameseModel& model, const std::vector<std::string>& ids,
                            const EmbeddingTable& embeddings, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ArgumentError("threshold must lie in (0, 1)");
  require_unique_ids(ids);
  if (embeddings.dim() != model.input_dim)
    throw DimensionError("embedding dim " + std::to_string(embeddings.dim()) +
                         " does not match model input_dim " + std::to_string(model.input_dim));
  std::vector<Eigen::VectorXd> encoded;
  encoded.reserve(ids.size());
  for (const auto& id : ids) encoded.push_back(encode(model, embeddings.at(id)));

  BinaryMatrix p(ids);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const double score = predict_pooled(model, 0.5 * (encoded[i] + encoded[j]));
      const std::uint8_t related = score >= threshold ? 1 : 0;
      p(i, j) = related;
      p(j, i) = related;
    }
  }
  return p;
}

void write_model(std::ostream& out, const SiameseModel& model) {
  json weights = json::array();
  json biases = json::array();
  for (const auto* stack : {&model.encoder, &model.predictor}) {
    for (const auto& layer : *stack) {
      weights.push_back(layer_rows(layer.weight));
      biases.push_back(std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size()));
    }
  }
  const json doc = {{"input_dim", model.input_dim},
                    {"encoder_widths", model.encoder_widths()},
                    {"predictor_widths", model.predictor_widths()},
                    {"weights", std::move(weights)},
                    {"biases", std::move(biases)},
                    {"dropout", model.dropout},
                    {"l2", model.l2_predictor},
                    {"seed", model.seed}};
  out << doc.dump() << '\n';
}

SiameseModel read_model(std::istream& in, const std::string& source) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const std::exception& e) {
    throw ParseError(source + ": " + e.what());
  }
  try {
    SiameseModel model;
    model.input_dim = doc.at("input_dim").get<int>();
    model.dropout = doc.at("dropout").get<double>();
    model.l2_predictor = doc.at("l2").get<double>();
    model.seed = doc.at("seed").get<std::uint64_t>();
    const auto enc = doc.at("encoder_widths").get<std::vector<int>>();
    const auto pred = doc.at("predictor_widths").get<std::vector<int>>();
    const auto& weights = doc.at("weights");
    const auto& biases = doc.at("biases");
    if (model.input_dim < 1 || enc.empty()) throw DimensionError("model needs input_dim >= 1 and an encoder");
    const std::size_t layers = enc.size() + pred.size() + 1;
    if (!weights.is_array() || !biases.is_array() || weights.size() != layers || biases.size() != layers)
      throw DimensionError("model has " + std::to_string(weights.size()) + " weight layers, expected " +
                           std::to_string(layers));

    std::vector<int> outs = enc;
    outs.insert(outs.end(), pred.begin(), pred.end());
    outs.push_back(1);
    int fan_in = model.input_dim;
    for (std::size_t l = 0; l < layers; ++l) {
      const int fan_out = outs[l];
      const auto& rows = weights[l];
      const auto& bias = biases[l];
      if (!rows.is_array() || static_cast<int>(rows.size()) != fan_out || !bias.is_array() ||
          static_cast<int>(bias.size()) != fan_out)
        throw DimensionError("layer " + std::to_string(l) + " has the wrong number of units");
      Dense layer{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd(fan_out)};
      for (int r = 0; r < fan_out; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != fan_in)
          throw DimensionError("layer " + std::to_string(l) + " row " + std::to_string(r) +
                               " has the wrong fan-in");
        for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        layer.bias(r) = bias[static_cast<std::size_t>(r)].get<double>();
      }
      (l < enc.size() ? model.encoder : model.predictor).push_back(std::move(layer));
      fan_in = fan_out;
    }
    if (!model.all_finite()) throw IntegrityError("model contains non-finite parameters");
    return model;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(source + ": " + e.what());
  }
}

void save_model(const std::filesystem::path& path, const SiameseModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_model(out, model);
}

SiameseModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model " + path.string());
  return read_model(in, path.string());
}

}  // namespace vulnsib
