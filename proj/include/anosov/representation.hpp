#pragma once

#include <vector>

#include "anosov/matrixops.hpp"
#include "anosov/words.hpp"

namespace anosov::matrixops {

// A representation of a free (or user-declared ping-pong) group: one matrix
// per generator; inverses are precomputed so letters map directly.
class Representation {
 public:
  Representation(words::GeneratorSet gs, std::vector<UnimodularMatrix> generators);

  const words::GeneratorSet& generators() const { return gs_; }
  int dim() const { return letter_matrix_.front().dim(); }

  const UnimodularMatrix& letter_matrix(words::Letter l) const;
  UnimodularMatrix evaluate(const words::Word& w) const;

 private:
  words::GeneratorSet gs_;
  std::vector<UnimodularMatrix> letter_matrix_;  // slot 2i: generator, 2i+1: inverse
};

// log S(rho(w)) evaluated through the paired forward/inverse products, so
// every component stays accurate however large the spread grows; rescaled
// internally, safe for words far beyond the plain-double condition limit.
Eigen::VectorXd word_log_singular_values(const Representation& rho, const words::Word& w);

// Flag of a word's matrix. Short in-range words go through the dense SVD;
// once the product's conditioning would poison a piece, that piece is taken
// from a QR-propagated frame instead, whose error is damped by the same gaps
// that break the dense path. Pieces no route can resolve raise GapError.
Flag word_flag(const Representation& rho, const words::Word& w, const Signature& P,
               double gap_tol = kDefaultGapTolerance);

}  // namespace anosov::matrixops
