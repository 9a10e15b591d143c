#pragma once

#include "vulnsib/matrix.hpp"

namespace vulnsib {

// Opinion of an intermediary k on a suspected link, given s = P(i,k)
// (is k a sibling of the asker) and r = P(k,j) (does k relate to the suspect).
// 0 when s = 0, +1 when s = r = 1, -1 when s = 1 and r = 0.
int trust(int s, int r);

// S(i,j) = P(i,j) + sum over k not in {i, j} of trust(P(i,k), P(k,j)).
// Diagonal is zero; S is generally not symmetric.
ScoreMatrix score_matrix(const BinaryMatrix& prediction);

// C(i,j) = 1 iff S(i,j) + S(j,i) > 0. Symmetric with a zero diagonal.
BinaryMatrix consensus_matrix(const ScoreMatrix& scores);

// score_matrix followed by consensus_matrix.
BinaryMatrix apply_consensus(const BinaryMatrix& prediction);

}  // namespace vulnsib
