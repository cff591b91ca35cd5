#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "anosov/signature.hpp"

namespace anosov::matrixops {

inline constexpr double kDefaultGapTolerance = 1e-6;
inline constexpr int kMaxDimension = 12;

// Relative singular/eigen gap below tolerance; callers that sample group
// elements catch this and skip the element.
struct GapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Point of the closed positive Weyl chamber: components non-increasing and
// summing to zero.
class WeylVector {
 public:
  WeylVector() = default;
  explicit WeylVector(Eigen::VectorXd a);  // validates, throws std::invalid_argument

  // sorts descending and recenters to zero sum (for estimator output)
  static WeylVector sorted_from(Eigen::VectorXd a);

  const Eigen::VectorXd& values() const { return a_; }
  int dim() const { return static_cast<int>(a_.size()); }
  double operator[](int i) const { return a_[i]; }  // 0-based

 private:
  Eigen::VectorXd a_;
};

// Element of SL(d,R). Positive-determinant input is normalized by
// det^(-1/d); nonpositive determinant is rejected.
class UnimodularMatrix {
 public:
  static UnimodularMatrix from_entries(const Eigen::MatrixXd& m);
  static UnimodularMatrix identity(int d);

  const Eigen::MatrixXd& mat() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  bool was_normalized() const { return normalized_; }

  UnimodularMatrix inverse() const;
  friend UnimodularMatrix operator*(const UnimodularMatrix& a, const UnimodularMatrix& b);

 private:
  Eigen::MatrixXd m_;
  bool normalized_ = false;
};

struct Subspace {
  Eigen::MatrixXd basis;  // d x p, orthonormal columns
  int ambient_dim() const { return static_cast<int>(basis.rows()); }
  int dim() const { return static_cast<int>(basis.cols()); }
};

// Rank-revealing orthonormalization of the column span.
Subspace orthonormalize(const Eigen::MatrixXd& span_cols);
Eigen::MatrixXd projector(const Subspace& s);
double orthonormality_residual(const Subspace& s);

struct Flag {
  Signature sig;
  std::vector<Subspace> pieces;  // dims p_1 < ... < p_M
};

// max over pieces of || (I - Pi_{k+1}) Pi_k ||_F; zero iff nested
double nesting_residual(const Flag& f);

struct Splitting {
  Signature sig;
  std::vector<Subspace> blocks;  // M+1 blocks, dims p_k - p_{k-1}
};

// smallest singular value of the stacked block bases (direct-sum certificate)
double splitting_min_singular_value(const Splitting& s);

// Deterministic full SVD: within Eigen's Jacobi SVD the left singular
// vectors' signs are fixed by making each column's largest-magnitude entry
// positive, so identical input bits give identical factors.
struct Svd {
  Eigen::MatrixXd U;
  Eigen::VectorXd s;
  Eigen::MatrixXd V;
};
Svd deterministic_svd(const Eigen::MatrixXd& m);

// log singular values of an arbitrary invertible matrix (no det constraint)
Eigen::VectorXd log_singular_values_raw(const Eigen::MatrixXd& m);

WeylVector log_singular_values(const UnimodularMatrix& g);

// log singular values of a badly conditioned product, given the product and
// the product of inverses: the top half comes from each side, so no value is
// contaminated by the full condition number. The middle value (odd d) is
// recovered from the zero-sum constraint. The offsets restore factors that
// were divided out to keep the stored products representable.
Eigen::VectorXd stable_log_singular_values(const Eigen::MatrixXd& prod,
                                           const Eigen::MatrixXd& prod_inv,
                                           double log_scale = 0.0,
                                           double log_scale_inv = 0.0);

// span of the p leading left singular vectors; requires relative gap
// (s_p - s_{p+1})/s_p >= gap_tol
Subspace xi_p(const UnimodularMatrix& g, int p, double gap_tol = kDefaultGapTolerance);

Flag flag_of(const UnimodularMatrix& g, const Signature& P,
             double gap_tol = kDefaultGapTolerance);

// flag_of(g^-1, P*) with P* = {d-p}
Flag dual_flag_of(const UnimodularMatrix& g, const Signature& P,
                  double gap_tol = kDefaultGapTolerance);

// sorted logs of the eigenvalue moduli (zero-sum)
WeylVector eigen_moduli(const UnimodularMatrix& g);

// max_i |eigen_moduli_i - (1/n) log s_i(g^n)|, the finite-horizon check of
// the spectral limit
double eigen_moduli_power_deviation(const UnimodularMatrix& g, int n);

// Blocks spanned by the invariant subspaces whose eigenvalue moduli fall in
// the windows cut by P; requires relative modulus gaps at every p in P.
Splitting eigen_splitting(const UnimodularMatrix& g, const Signature& P,
                          double gap_tol = kDefaultGapTolerance);

// || (I - B B^T) g B ||_F, zero iff span(B) is g-invariant
double invariance_residual(const UnimodularMatrix& g, const Subspace& b);

double grassmann_distance(const Subspace& x, const Subspace& y);
double flag_distance(const Flag& x, const Flag& y);        // max over pieces
double splitting_distance(const Splitting& x, const Splitting& y);

Subspace apply(const UnimodularMatrix& g, const Subspace& s);
Flag apply(const UnimodularMatrix& g, const Flag& f);

// log volume distortion of g on each flag piece
std::vector<double> log_volume_distortions(const UnimodularMatrix& g, const Flag& t);

// Iwasawa cocycle at a full flag: the vector a with partial sums
// sum_{j<=i} a_j = log |det restriction of g to the i-th piece|.
Eigen::VectorXd iwasawa_cocycle(const UnimodularMatrix& g, const Flag& t);

}  // namespace anosov::matrixops
