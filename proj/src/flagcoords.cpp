#include "anosov/flagcoords.hpp"

#include <algorithm>
#include <cmath>

namespace anosov::flagcoords {

using matrixops::deterministic_svd;
using matrixops::NumericalError;
using matrixops::orthonormalize;
using matrixops::projector;
using matrixops::Svd;

namespace {

int block_dim(const Signature& sig, int i) { return sig.p(i) - sig.p(i - 1); }

// stacked orthonormal basis of (+)_{j>=i} V_j
Eigen::MatrixXd tail_span(const Splitting& s, int i) {
  const int d = s.sig.d();
  const int cols = d - s.sig.p(i - 1);
  Eigen::MatrixXd out(d, cols);
  int c = 0;
  for (int j = i; j <= s.sig.count() + 1; ++j) {
    out.middleCols(c, s.blocks[j - 1].dim()) = s.blocks[j - 1].basis;
    c += s.blocks[j - 1].dim();
  }
  return out;
}

// piece of the dual flag with dimension d - p_{i-1} (i >= 2)
const Subspace& dual_piece_for_tail(const CompatibleSplitting& v, int i) {
  const int m = v.blocks.sig.count();
  return v.base_dual.pieces[m + 1 - i];
}

}  // namespace

double compatibility_residual(const CompatibleSplitting& v) {
  const int m = v.blocks.sig.count();
  double worst = 0.0;
  for (int i = 2; i <= m + 1; ++i) {
    const Subspace tail = orthonormalize(tail_span(v.blocks, i));
    worst = std::max(worst, (projector(tail) - projector(dual_piece_for_tail(v, i))).norm());
  }
  return worst;
}

CompatibleSplitting perp_splitting(const Flag& y_dual) {
  const Signature P = y_dual.sig.dual();
  const int d = P.d();
  const int m = P.count();
  CompatibleSplitting out{y_dual, Splitting{P, {}}};
  for (int i = 1; i <= m + 1; ++i) {
    const Eigen::MatrixXd cur = (i == 1) ? Eigen::MatrixXd::Identity(d, d)
                                         : y_dual.pieces[m - i + 1].basis;
    Eigen::MatrixXd w;
    if (i == m + 1) {
      w = cur;
    } else {
      const Eigen::MatrixXd& tail = y_dual.pieces[m - i].basis;
      w = cur - tail * (tail.transpose() * cur);
    }
    const Svd svd = deterministic_svd(w);
    const int want = block_dim(P, i);
    if (svd.s[want - 1] < 1e-8)
      throw NumericalError("perp_splitting: degenerate flag");
    out.blocks.blocks.push_back(Subspace{svd.U.leftCols(want)});
  }
  return out;
}

CompatibleSplitting canonical_splitting(const UnimodularMatrix& g, const Signature& P,
                                        double gap_tol) {
  if (P.d() != g.dim())
    throw std::invalid_argument("canonical_splitting: signature dimension mismatch");
  const Svd svd = deterministic_svd(g.mat());
  const int d = P.d();
  const int m = P.count();
  for (int p : P.values()) {
    if ((svd.s[p - 1] - svd.s[p]) / svd.s[p - 1] < gap_tol)
      throw matrixops::GapError("canonical_splitting: gap at p=" + std::to_string(p) +
                                " below tolerance");
  }
  CompatibleSplitting out{Flag{P.dual(), {}}, Splitting{P, {}}};
  // base: trailing right-singular spans, nested by construction
  for (int k = m; k >= 1; --k)
    out.base_dual.pieces.push_back(Subspace{svd.V.rightCols(d - P.p(k))});
  for (int i = 1; i <= m + 1; ++i)
    out.blocks.blocks.push_back(Subspace{svd.V.middleCols(P.p(i - 1), block_dim(P, i))});
  return out;
}

CompatibleSplitting pushforward(const UnimodularMatrix& g, const CompatibleSplitting& v) {
  CompatibleSplitting out{matrixops::apply(g, v.base_dual), Splitting{v.blocks.sig, {}}};
  for (const auto& b : v.blocks.blocks)
    out.blocks.blocks.push_back(matrixops::apply(g, b));
  return out;
}

CompatibleSplitting pullback(const UnimodularMatrix& g, const CompatibleSplitting& v) {
  return pushforward(g.inverse(), v);
}

NilCoords NilCoords::zero(const Signature& sig) {
  NilCoords f{sig, {}};
  for (int i = 1; i <= sig.count() + 1; ++i)
    for (int j = i + 1; j <= sig.count() + 1; ++j)
      f.blocks.push_back(Eigen::MatrixXd::Zero(block_dim(sig, j), block_dim(sig, i)));
  return f;
}

int NilCoords::total_dim() const {
  int acc = 0;
  for (const auto& b : blocks) acc += static_cast<int>(b.size());
  return acc;
}

Eigen::VectorXd NilCoords::pack() const {
  Eigen::VectorXd x(total_dim());
  int off = 0;
  for (const auto& b : blocks) {
    x.segment(off, b.size()) = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
    off += static_cast<int>(b.size());
  }
  return x;
}

NilCoords NilCoords::unpack(const Signature& sig, const Eigen::VectorXd& x) {
  NilCoords f = zero(sig);
  int off = 0;
  for (auto& b : f.blocks) {
    b = Eigen::Map<const Eigen::MatrixXd>(x.data() + off, b.rows(), b.cols());
    off += static_cast<int>(b.size());
  }
  if (off != x.size()) throw std::invalid_argument("NilCoords::unpack: size mismatch");
  return f;
}

double NilCoords::hs_norm() const { return pack().norm(); }

int nil_block_count(const Signature& sig) {
  const int m1 = sig.count() + 1;
  return m1 * (m1 - 1) / 2;
}

namespace {

// d x d matrix of f in the stacked-basis coordinates: strictly lower block
// triangular with block (j,i) = f_{ij}
Eigen::MatrixXd nil_matrix(const Signature& sig, const NilCoords& f) {
  const int d = sig.d();
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(d, d);
  int slot = 0;
  for (int i = 1; i <= sig.count() + 1; ++i)
    for (int j = i + 1; j <= sig.count() + 1; ++j) {
      n.block(sig.p(j - 1), sig.p(i - 1), block_dim(sig, j), block_dim(sig, i)) =
          f.blocks[slot];
      ++slot;
    }
  return n;
}

Eigen::MatrixXd stacked_basis(const Splitting& s) { return tail_span(s, 1); }

}  // namespace

Flag phi_v(const CompatibleSplitting& v, const NilCoords& f) {
  const Signature& P = v.blocks.sig;
  if (!(f.sig == P)) throw std::invalid_argument("phi_v: signature mismatch");
  const Eigen::MatrixXd t = stacked_basis(v.blocks);
  const Eigen::MatrixXd x = t * (Eigen::MatrixXd::Identity(P.d(), P.d()) + nil_matrix(P, f));
  Flag out{P, {}};
  for (int k = 1; k <= P.count(); ++k)
    out.pieces.push_back(orthonormalize(x.leftCols(P.p(k))));
  return out;
}

NilCoords phi_v_inverse(const CompatibleSplitting& v, const Flag& x, double min_angle) {
  const Signature& P = v.blocks.sig;
  if (!(x.sig == P)) throw std::invalid_argument("phi_v_inverse: signature mismatch");
  const int d = P.d();
  const int m = P.count();
  const double cos_limit = std::cos(min_angle);

  const Eigen::MatrixXd t = stacked_basis(v.blocks);
  const Eigen::PartialPivLU<Eigen::MatrixXd> t_lu(t);

  Eigen::MatrixXd ipf = Eigen::MatrixXd::Identity(d, d);  // becomes id + nil_matrix
  for (int k = 1; k <= m; ++k) {
    // transversality of the k-th piece against the opposite tail of the base
    const Eigen::MatrixXd tail = orthonormalize(tail_span(v.blocks, k + 1)).basis;
    Eigen::JacobiSVD<Eigen::MatrixXd> angles(x.pieces[k - 1].basis.transpose() * tail);
    if (angles.singularValues()[0] > cos_limit)
      throw NumericalError("phi_v_inverse: flag not transverse to the base (piece " +
                           std::to_string(k) + ")");
    const int pk = P.p(k);
    const Eigen::MatrixXd y = t_lu.solve(x.pieces[k - 1].basis);  // d x pk
    const Eigen::MatrixXd top = y.topRows(pk);
    const Eigen::PartialPivLU<Eigen::MatrixXd> top_lu(top.transpose());
    const Eigen::MatrixXd z = top_lu.solve(y.transpose()).transpose();  // y * top^-1
    ipf.middleCols(P.p(k - 1), pk - P.p(k - 1)) =
        z.middleCols(P.p(k - 1), pk - P.p(k - 1));
  }

  NilCoords f = NilCoords::zero(P);
  int slot = 0;
  for (int i = 1; i <= m + 1; ++i)
    for (int j = i + 1; j <= m + 1; ++j) {
      f.blocks[slot] =
          ipf.block(P.p(j - 1), P.p(i - 1), block_dim(P, j), block_dim(P, i));
      ++slot;
    }
  return f;
}

NilCoords ConjugationOperator::apply(const NilCoords& f) const {
  return NilCoords::unpack(f.sig, op * f.pack());
}

ConjugationOperator conjugation_map(const UnimodularMatrix& g, const CompatibleSplitting& v) {
  return conjugation_map(g, v, pushforward(g, v));
}

ConjugationOperator conjugation_map(const UnimodularMatrix& g, const CompatibleSplitting& v,
                                    const CompatibleSplitting& codomain) {
  const Signature& P = v.blocks.sig;
  const int m1 = P.count() + 1;

  // per-block matrix of g: V_i -> (gV)_i in the two orthonormal bases
  std::vector<Eigen::MatrixXd> gi(m1), gi_inv(m1);
  for (int i = 0; i < m1; ++i) {
    const Eigen::MatrixXd img = g.mat() * v.blocks.blocks[i].basis;
    const Eigen::MatrixXd& c = codomain.blocks.blocks[i].basis;
    gi[i] = c.transpose() * img;
    if ((img - c * gi[i]).norm() > 1e-8 * img.norm())
      throw NumericalError("conjugation_map: codomain block does not match g(V_i)");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(gi[i]);
    const auto& s = svd.singularValues();
    if (s[s.size() - 1] < 1e-12 * s[0])
      throw NumericalError("conjugation_map: near-singular block restriction");
    gi_inv[i] = gi[i].inverse();
  }

  ConjugationOperator out{v, codomain, {}};
  NilCoords probe = NilCoords::zero(P);
  const int n = probe.total_dim();
  out.op = Eigen::MatrixXd::Zero(n, n);
  int off = 0;
  for (int i = 1; i <= m1; ++i)
    for (int j = i + 1; j <= m1; ++j) {
      // vec(G_j f G_i^-1) = (G_i^-T kron G_j) vec f
      const Eigen::MatrixXd& a = gi[j - 1];
      const Eigen::MatrixXd b = gi_inv[i - 1].transpose();
      const int ra = static_cast<int>(a.rows()), rb = static_cast<int>(b.rows());
      for (int bc = 0; bc < rb; ++bc)
        for (int br = 0; br < rb; ++br)
          out.op.block(off + br * ra, off + bc * ra, ra, ra) = b(br, bc) * a;
      off += ra * rb;
    }
  return out;
}

std::vector<double> ellipsoid_axes(const UnimodularMatrix& g, const Signature& P,
                                   double gap_tol) {
  const CompatibleSplitting v = canonical_splitting(g, P, gap_tol);
  const ConjugationOperator op = conjugation_map(g, v);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(op.op);
  std::vector<double> axes(svd.singularValues().data(),
                           svd.singularValues().data() + svd.singularValues().size());
  return axes;  // Jacobi SVD returns descending order
}

std::vector<double> cross_block_ratios(const UnimodularMatrix& g, const Signature& P) {
  const Svd svd = deterministic_svd(g.mat());
  std::vector<double> out;
  for (int i = 1; i <= P.count() + 1; ++i)
    for (int j = i + 1; j <= P.count() + 1; ++j)
      for (int a = P.p(i - 1); a < P.p(i); ++a)
        for (int b = P.p(j - 1); b < P.p(j); ++b)
          out.push_back(svd.s[b] / svd.s[a]);
  std::sort(out.begin(), out.end(), std::greater<double>());
  return out;
}

}  // namespace anosov::flagcoords
