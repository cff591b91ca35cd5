#pragma once

#include <vector>

#include "anosov/matrixops.hpp"

namespace anosov::flagcoords {

using matrixops::Flag;
using matrixops::Splitting;
using matrixops::Subspace;
using matrixops::UnimodularMatrix;

// A splitting V_1,...,V_{M+1} together with the dual flag y it is compatible
// with: the tail sums (+)_{j>=i} V_j reproduce the pieces of y.
struct CompatibleSplitting {
  Flag base_dual;   // lives in the dual flag space, signature P*
  Splitting blocks; // signature P, blocks of dims p_i - p_{i-1}
};

// max over i of the projector residual between (+)_{j>=i} V_j and the
// matching piece of the base flag
double compatibility_residual(const CompatibleSplitting& v);

// V_i = y_{>=i} intersect (y_{>i})^perp: pairwise orthogonal blocks
CompatibleSplitting perp_splitting(const Flag& y_dual);

// Right-singular-vector blocks of g, compatible (exactly, same SVD) with the
// dual flag of g. This is the chart base at xi*(g) used by the covering
// argument; g maps it block-by-block onto the left-singular blocks.
CompatibleSplitting canonical_splitting(const UnimodularMatrix& g, const Signature& P,
                                        double gap_tol = matrixops::kDefaultGapTolerance);

// blocks orthonormalized images g(V_i), base flag pushed through g
CompatibleSplitting pushforward(const UnimodularMatrix& g, const CompatibleSplitting& v);
CompatibleSplitting pullback(const UnimodularMatrix& g, const CompatibleSplitting& v);

// Element of Nil(V): block maps f_{ij}: V_i -> V_j for i < j, stored in the
// blocks' orthonormal bases, lexicographic in (i,j). Total dimension #S(P).
struct NilCoords {
  Signature sig;
  std::vector<Eigen::MatrixXd> blocks;  // dim(V_j) x dim(V_i), (i,j) lex

  static NilCoords zero(const Signature& sig);
  int total_dim() const;
  Eigen::VectorXd pack() const;  // column-major per block; HS-orthonormal coords
  static NilCoords unpack(const Signature& sig, const Eigen::VectorXd& x);
  double hs_norm() const;
};

// number of (i,j) block slots, = M(M+1)/2
int nil_block_count(const Signature& sig);

// the affine chart: piece of index k is (id + f)(V_1 (+) ... (+) V_k)
Flag phi_v(const CompatibleSplitting& v, const NilCoords& f);

// inverse chart; throws matrixops::NumericalError when the flag is not
// transverse to the base (smallest principal angle below min_angle)
NilCoords phi_v_inverse(const CompatibleSplitting& v, const Flag& x,
                        double min_angle = 1e-4);

// The linear action f -> g f g^-1 from Nil(V) to Nil(gV), as a matrix in the
// packed coordinates. domain() keeps V, codomain() the pushed splitting.
struct ConjugationOperator {
  CompatibleSplitting domain;
  CompatibleSplitting codomain;
  Eigen::MatrixXd op;  // total_dim x total_dim, block diagonal over (i,j)

  NilCoords apply(const NilCoords& f) const;
};

// codomain defaults to pushforward(g, v); pass it explicitly to thread a
// chain of splittings through a product
ConjugationOperator conjugation_map(const UnimodularMatrix& g, const CompatibleSplitting& v);
ConjugationOperator conjugation_map(const UnimodularMatrix& g, const CompatibleSplitting& v,
                                    const CompatibleSplitting& codomain);

// singular values of the conjugation operator on the canonical chart,
// descending; equals the multiset {s_b/s_a : a in an earlier block than b}
std::vector<double> ellipsoid_axes(const UnimodularMatrix& g, const Signature& P,
                                   double gap_tol = matrixops::kDefaultGapTolerance);

// the cross-block singular value ratio multiset, descending
std::vector<double> cross_block_ratios(const UnimodularMatrix& g, const Signature& P);

}  // namespace anosov::flagcoords
