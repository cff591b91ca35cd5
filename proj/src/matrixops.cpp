#include "anosov/matrixops.hpp"

#include <lapacke.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace anosov::matrixops {

namespace {

constexpr double kSumTolerance = 1e-9;
constexpr double kDetTolerance = 1e-8;

void require_finite(const Eigen::MatrixXd& m, const char* who) {
  if (!m.allFinite()) throw NumericalError(std::string(who) + ": non-finite entries");
}

double relative_gap(const Eigen::VectorXd& s, int p) {
  // s descending, p in [1, d-1]; gap at p is (s_p - s_{p+1}) / s_p
  const double hi = s[p - 1], lo = s[p];
  if (hi <= 0.0) return 0.0;
  return (hi - lo) / hi;
}

}  // namespace

WeylVector::WeylVector(Eigen::VectorXd a) : a_(std::move(a)) {
  if (a_.size() < 1) throw std::invalid_argument("WeylVector: empty");
  for (int i = 0; i + 1 < a_.size(); ++i)
    if (a_[i] < a_[i + 1] - 1e-12)
      throw std::invalid_argument("WeylVector: components not non-increasing");
  const double span = std::max(1.0, a_.cwiseAbs().maxCoeff());
  if (std::abs(a_.sum()) > kSumTolerance * span)
    throw std::invalid_argument("WeylVector: components do not sum to zero");
}

WeylVector WeylVector::sorted_from(Eigen::VectorXd a) {
  std::sort(a.data(), a.data() + a.size(), std::greater<double>());
  a.array() -= a.mean();
  WeylVector w;
  w.a_ = std::move(a);
  return w;
}

UnimodularMatrix UnimodularMatrix::from_entries(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() < 2)
    throw std::invalid_argument("UnimodularMatrix: need a square matrix, d >= 2");
  if (m.rows() > kMaxDimension)
    throw std::invalid_argument("UnimodularMatrix: d exceeds the supported cap");
  require_finite(m, "UnimodularMatrix");
  const double det = m.determinant();
  if (!(det > 0.0))
    throw std::invalid_argument("UnimodularMatrix: determinant must be positive, got " +
                                std::to_string(det));
  UnimodularMatrix g;
  if (std::abs(det - 1.0) > kDetTolerance) {
    g.m_ = m * std::pow(det, -1.0 / m.rows());
    g.normalized_ = true;
  } else {
    g.m_ = m;
  }
  return g;
}

UnimodularMatrix UnimodularMatrix::identity(int d) {
  UnimodularMatrix g;
  g.m_ = Eigen::MatrixXd::Identity(d, d);
  return g;
}

UnimodularMatrix UnimodularMatrix::inverse() const {
  UnimodularMatrix g;
  g.m_ = m_.inverse();
  return g;
}

UnimodularMatrix operator*(const UnimodularMatrix& a, const UnimodularMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("operator*: dimension mismatch");
  UnimodularMatrix g;
  g.m_ = a.m_ * b.m_;
  return g;
}

Subspace orthonormalize(const Eigen::MatrixXd& span_cols) {
  const Svd s = deterministic_svd(span_cols);
  const int p = static_cast<int>(span_cols.cols());
  if (p > 0 && s.s[p - 1] < 1e-10 * std::max(1.0, s.s[0]))
    throw NumericalError("orthonormalize: rank-deficient span");
  return Subspace{s.U.leftCols(p)};
}

Eigen::MatrixXd projector(const Subspace& s) { return s.basis * s.basis.transpose(); }

double orthonormality_residual(const Subspace& s) {
  const int p = s.dim();
  return (s.basis.transpose() * s.basis - Eigen::MatrixXd::Identity(p, p)).norm();
}

double nesting_residual(const Flag& f) {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < f.pieces.size(); ++k) {
    const Eigen::MatrixXd pk = projector(f.pieces[k]);
    const Eigen::MatrixXd pk1 = projector(f.pieces[k + 1]);
    worst = std::max(worst, ((Eigen::MatrixXd::Identity(pk.rows(), pk.cols()) - pk1) * pk).norm());
  }
  return worst;
}

double splitting_min_singular_value(const Splitting& s) {
  const int d = s.sig.d();
  Eigen::MatrixXd stacked(d, d);
  int col = 0;
  for (const auto& b : s.blocks) {
    stacked.middleCols(col, b.dim()) = b.basis;
    col += b.dim();
  }
  if (col != d) throw std::invalid_argument("splitting_min_singular_value: dims do not sum to d");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  return svd.singularValues()[d - 1];
}

Svd deterministic_svd(const Eigen::MatrixXd& m) {
  require_finite(m, "svd");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Svd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  for (int j = 0; j < out.U.cols(); ++j) {
    int imax = 0;
    for (int i = 1; i < out.U.rows(); ++i)
      if (std::abs(out.U(i, j)) > std::abs(out.U(imax, j))) imax = i;
    if (out.U(imax, j) < 0.0) {
      out.U.col(j) *= -1.0;
      if (j < out.V.cols()) out.V.col(j) *= -1.0;
    }
  }
  return out;
}

Eigen::VectorXd log_singular_values_raw(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd s = svd.singularValues();
  if (s[s.size() - 1] <= 0.0) throw NumericalError("log_singular_values: singular matrix");
  return s.array().log();
}

WeylVector log_singular_values(const UnimodularMatrix& g) {
  Eigen::VectorXd a = log_singular_values_raw(g.mat());
  a.array() -= a.mean();  // exact zero-sum despite rounding in the SVD
  WeylVector w = WeylVector::sorted_from(std::move(a));
  return w;
}

Eigen::VectorXd stable_log_singular_values(const Eigen::MatrixXd& prod,
                                           const Eigen::MatrixXd& prod_inv,
                                           double log_scale, double log_scale_inv) {
  const int d = static_cast<int>(prod.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> sp(prod);
  Eigen::JacobiSVD<Eigen::MatrixXd> si(prod_inv);
  const Eigen::VectorXd& s = sp.singularValues();
  const Eigen::VectorXd& t = si.singularValues();
  Eigen::VectorXd out(d);
  const int half = d / 2;
  for (int i = 0; i < half; ++i) {
    out[i] = std::log(s[i]) + log_scale;                     // s_i(prod)
    out[d - 1 - i] = -(std::log(t[i]) + log_scale_inv);      // 1 / s_i(prod^(-1))
  }
  if (d % 2 == 1) {
    double rest = 0.0;
    for (int i = 0; i < d; ++i)
      if (i != half) rest += out[i];
    out[half] = -rest;
  }
  return out;
}

Subspace xi_p(const UnimodularMatrix& g, int p, double gap_tol) {
  const int d = g.dim();
  if (p < 1 || p > d - 1) throw std::invalid_argument("xi_p: p must be in [1, d-1]");
  const Svd s = deterministic_svd(g.mat());
  if (relative_gap(s.s, p) < gap_tol)
    throw GapError("xi_p: singular gap at p=" + std::to_string(p) + " below tolerance");
  return Subspace{s.U.leftCols(p)};
}

Flag flag_of(const UnimodularMatrix& g, const Signature& P, double gap_tol) {
  if (P.d() != g.dim()) throw std::invalid_argument("flag_of: signature dimension mismatch");
  const Svd s = deterministic_svd(g.mat());
  Flag f{P, {}};
  for (int p : P.values()) {
    if (relative_gap(s.s, p) < gap_tol)
      throw GapError("flag_of: singular gap at p=" + std::to_string(p) + " below tolerance");
    f.pieces.push_back(Subspace{s.U.leftCols(p)});
  }
  return f;
}

Flag dual_flag_of(const UnimodularMatrix& g, const Signature& P, double gap_tol) {
  return flag_of(g.inverse(), P.dual(), gap_tol);
}

WeylVector eigen_moduli(const UnimodularMatrix& g) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(g.mat(), /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericalError("eigen_moduli: eigensolver failed");
  Eigen::VectorXd logs = es.eigenvalues().array().abs().log();
  return WeylVector::sorted_from(std::move(logs));
}

double eigen_moduli_power_deviation(const UnimodularMatrix& g, int n) {
  if (n < 1) throw std::invalid_argument("eigen_moduli_power_deviation: n >= 1");
  const WeylVector moduli = eigen_moduli(g);
  const int d = g.dim();
  // track the power and the inverse power, rescaled to stay representable;
  // the top half of each spectrum is accurate, which covers all of log S(g^n)
  Eigen::MatrixXd a = g.mat();
  const Eigen::MatrixXd g_inv = g.inverse().mat();
  Eigen::MatrixXd b = g_inv;
  double log_scale_a = 0.0, log_scale_b = 0.0;
  for (int k = 1; k < n; ++k) {
    a = a * g.mat();
    b = g_inv * b;
    const double ca = a.cwiseAbs().maxCoeff();
    a /= ca;
    log_scale_a += std::log(ca);
    const double cb = b.cwiseAbs().maxCoeff();
    b /= cb;
    log_scale_b += std::log(cb);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> sa(a);
  Eigen::JacobiSVD<Eigen::MatrixXd> sb(b);
  Eigen::VectorXd logs(d);
  const int half = d / 2;
  for (int i = 0; i < half; ++i) {
    logs[i] = std::log(sa.singularValues()[i]) + log_scale_a;
    logs[d - 1 - i] = -(std::log(sb.singularValues()[i]) + log_scale_b);
  }
  if (d % 2 == 1) {
    double rest = 0.0;
    for (int i = 0; i < d; ++i)
      if (i != half) rest += logs[i];
    logs[half] = -rest;
  }
  double dev = 0.0;
  for (int i = 0; i < d; ++i) dev = std::max(dev, std::abs(moduli[i] - logs[i] / n));
  return dev;
}

Splitting eigen_splitting(const UnimodularMatrix& g, const Signature& P, double gap_tol) {
  const int d = g.dim();
  if (P.d() != d) throw std::invalid_argument("eigen_splitting: signature dimension mismatch");
  Eigen::RealSchur<Eigen::MatrixXd> schur(g.mat());
  if (schur.info() != Eigen::Success) throw NumericalError("eigen_splitting: Schur failed");
  const Eigen::MatrixXd& T = schur.matrixT();
  const Eigen::MatrixXd& Q = schur.matrixU();

  // modulus of the eigenvalue at each diagonal position (2x2 blocks are
  // conjugate pairs, both entries get the pair's modulus)
  Eigen::VectorXd modulus(d);
  for (int i = 0; i < d;) {
    if (i + 1 < d && T(i + 1, i) != 0.0) {
      const double det = T(i, i) * T(i + 1, i + 1) - T(i, i + 1) * T(i + 1, i);
      const double m = std::sqrt(std::abs(det));
      modulus[i] = modulus[i + 1] = m;
      i += 2;
    } else {
      modulus[i] = std::abs(T(i, i));
      i += 1;
    }
  }

  Eigen::VectorXd sorted = modulus;
  std::sort(sorted.data(), sorted.data() + d, std::greater<double>());
  for (int p : P.values()) {
    if (sorted[p - 1] <= 0.0 || (sorted[p - 1] - sorted[p]) / sorted[p - 1] < gap_tol)
      throw GapError("eigen_splitting: modulus gap at p=" + std::to_string(p) +
                     " below tolerance");
  }

  const int M = P.count();
  Splitting out{P, {}};
  for (int k = 1; k <= M + 1; ++k) {
    // window (t_lo, t_hi] for block k, cut at geometric midpoints of the gaps
    const double t_hi = (k == 1) ? std::numeric_limits<double>::infinity()
                                 : std::sqrt(sorted[P.p(k - 1) - 1] * sorted[P.p(k - 1)]);
    const double t_lo = (k == M + 1) ? 0.0 : std::sqrt(sorted[P.p(k) - 1] * sorted[P.p(k)]);
    std::vector<lapack_logical> select(d, 0);
    int chosen = 0;
    for (int i = 0; i < d; ++i)
      if (modulus[i] > t_lo && modulus[i] <= t_hi) {
        select[i] = 1;
        ++chosen;
      }
    const int want = P.p(k) - P.p(k - 1);
    if (chosen != want)
      throw NumericalError("eigen_splitting: modulus window selected " + std::to_string(chosen) +
                           " of " + std::to_string(want) + " eigenvalues");
    Eigen::MatrixXd t = T, q = Q;
    std::vector<double> wr(d), wi(d);
    lapack_int m_out = 0;
    double cond_s = 0.0, cond_sep = 0.0;
    const lapack_int info = LAPACKE_dtrsen(LAPACK_COL_MAJOR, 'B', 'V', select.data(), d,
                                           t.data(), d, q.data(), d, wr.data(), wi.data(),
                                           &m_out, &cond_s, &cond_sep);
    if (info != 0) throw NumericalError("eigen_splitting: dtrsen failed");
    out.blocks.push_back(Subspace{q.leftCols(want)});
  }
  // modulus gaps do not preclude nearly parallel eigenvectors; enforce the
  // direct-sum certificate
  if (splitting_min_singular_value(out) <= 1e-8)
    throw NumericalError("eigen_splitting: blocks nearly dependent");
  return out;
}

double invariance_residual(const UnimodularMatrix& g, const Subspace& b) {
  const Eigen::MatrixXd gb = g.mat() * b.basis;
  return (gb - b.basis * (b.basis.transpose() * gb)).norm();
}

double grassmann_distance(const Subspace& x, const Subspace& y) {
  if (x.dim() != y.dim() || x.ambient_dim() != y.ambient_dim())
    throw std::invalid_argument("grassmann_distance: dimension mismatch");
  return (projector(x) - projector(y)).norm();
}

double flag_distance(const Flag& x, const Flag& y) {
  if (!(x.sig == y.sig)) throw std::invalid_argument("flag_distance: signature mismatch");
  double worst = 0.0;
  for (std::size_t k = 0; k < x.pieces.size(); ++k)
    worst = std::max(worst, grassmann_distance(x.pieces[k], y.pieces[k]));
  return worst;
}

double splitting_distance(const Splitting& x, const Splitting& y) {
  if (!(x.sig == y.sig)) throw std::invalid_argument("splitting_distance: signature mismatch");
  double worst = 0.0;
  for (std::size_t k = 0; k < x.blocks.size(); ++k)
    worst = std::max(worst, grassmann_distance(x.blocks[k], y.blocks[k]));
  return worst;
}

Subspace apply(const UnimodularMatrix& g, const Subspace& s) {
  return orthonormalize(g.mat() * s.basis);
}

Flag apply(const UnimodularMatrix& g, const Flag& f) {
  Flag out{f.sig, {}};
  out.pieces.reserve(f.pieces.size());
  for (const auto& piece : f.pieces) out.pieces.push_back(apply(g, piece));
  return out;
}

std::vector<double> log_volume_distortions(const UnimodularMatrix& g, const Flag& t) {
  std::vector<double> out;
  out.reserve(t.pieces.size());
  for (const auto& piece : t.pieces) {
    // |det(g restricted to the piece)| = prod |r_ii| of the QR of g*B
    const Eigen::MatrixXd gb = g.mat() * piece.basis;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gb);
    double acc = 0.0;
    for (int i = 0; i < piece.dim(); ++i) {
      const double r = std::abs(qr.matrixQR()(i, i));
      if (r <= 0.0 || !std::isfinite(r))
        throw NumericalError("log_volume_distortions: rank-deficient restriction");
      acc += std::log(r);
    }
    out.push_back(acc);
  }
  return out;
}

Eigen::VectorXd iwasawa_cocycle(const UnimodularMatrix& g, const Flag& t) {
  const int d = g.dim();
  if (!t.sig.full())
    throw std::invalid_argument("iwasawa_cocycle: full flag required");
  const std::vector<double> c = log_volume_distortions(g, t);
  Eigen::VectorXd a(d);
  double prev = 0.0;
  for (int i = 0; i < d - 1; ++i) {
    a[i] = c[i] - prev;
    prev = c[i];
  }
  a[d - 1] = -prev;  // det g = 1
  return a;
}

}  // namespace anosov::matrixops
