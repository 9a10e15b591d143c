#include "vulnsib/consensus.hpp"

namespace vulnsib {

int trust(int s, int r) {
  if ((s != 0 && s != 1) || (r != 0 && r != 1)) throw ArgumentError("trust takes binary arguments");
  if (s == 0) return 0;
  return r == 1 ? 1 : -1;
}

ScoreMatrix score_matrix(const BinaryMatrix& prediction) {
  require_relation(prediction);
  const std::size_t n = prediction.size();
  ScoreMatrix s(prediction.ids());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      int total = prediction(i, j);
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        total += trust(prediction(i, k), prediction(k, j));
      }
      s(i, j) = total;
    }
  }
  return s;
}

BinaryMatrix consensus_matrix(const ScoreMatrix& scores) {
  const std::size_t n = scores.size();
  BinaryMatrix c(scores.ids());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && scores(i, j) + scores(j, i) > 0) c(i, j) = 1;
    }
  }
  return c;
}

BinaryMatrix apply_consensus(const BinaryMatrix& prediction) {
  return consensus_matrix(score_matrix(prediction));
}

}  // namespace vulnsib
