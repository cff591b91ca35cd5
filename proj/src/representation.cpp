#include "anosov/representation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "anosov/rng.hpp"

namespace anosov::matrixops {

Representation::Representation(words::GeneratorSet gs,
                               std::vector<UnimodularMatrix> generators)
    : gs_(std::move(gs)) {
  if (static_cast<int>(generators.size()) != gs_.rank())
    throw std::invalid_argument("Representation: need one matrix per generator");
  const int d = generators.front().dim();
  letter_matrix_.reserve(2 * generators.size());
  for (const auto& g : generators) {
    if (g.dim() != d) throw std::invalid_argument("Representation: mixed matrix dimensions");
    letter_matrix_.push_back(g);
    letter_matrix_.push_back(g.inverse());
  }
}

const UnimodularMatrix& Representation::letter_matrix(words::Letter l) const {
  if (l >= letter_matrix_.size()) throw std::out_of_range("letter_matrix: letter out of range");
  return letter_matrix_[l];
}

UnimodularMatrix Representation::evaluate(const words::Word& w) const {
  UnimodularMatrix acc = UnimodularMatrix::identity(dim());
  for (words::Letter l : w.letters()) acc = acc * letter_matrix(l);
  return acc;
}

namespace {

struct ScaledProducts {
  Eigen::MatrixXd prod;      // rho(w) / exp(log_scale)
  Eigen::MatrixXd prod_inv;  // rho(w)^-1 / exp(log_scale_inv)
  double log_scale = 0.0;
  double log_scale_inv = 0.0;
};

ScaledProducts scaled_products(const Representation& rho, const words::Word& w) {
  const int d = rho.dim();
  ScaledProducts out{Eigen::MatrixXd::Identity(d, d), Eigen::MatrixXd::Identity(d, d), 0.0,
                     0.0};
  for (words::Letter l : w.letters()) {
    out.prod = out.prod * rho.letter_matrix(l).mat();
    out.prod_inv = rho.letter_matrix(words::inverse_letter(l)).mat() * out.prod_inv;
    const double ca = out.prod.cwiseAbs().maxCoeff();
    out.prod /= ca;
    out.log_scale += std::log(ca);
    const double cb = out.prod_inv.cwiseAbs().maxCoeff();
    out.prod_inv /= cb;
    out.log_scale_inv += std::log(cb);
  }
  return out;
}

Eigen::VectorXd logs_from_products(const ScaledProducts& sp, int d) {
  return stable_log_singular_values(sp.prod, sp.prod_inv, sp.log_scale, sp.log_scale_inv);
}

// orthonormal frame with positive-diagonal QR, deterministic
Eigen::MatrixXd positive_qr(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ();
  for (int i = 0; i < m.cols(); ++i)
    if (qr.matrixQR()(i, i) < 0.0) q.col(i) *= -1.0;
  return q;
}

// fixed generic start frame; any fixed rotation works as long as it is not
// aligned with the words' singular frames
Eigen::MatrixXd generic_frame(int d) {
  Rng rng(0x5eedf1a6u + static_cast<std::uint64_t>(d));
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rng.next_gaussian();
  return positive_qr(m);
}

}  // namespace

Eigen::VectorXd word_log_singular_values(const Representation& rho, const words::Word& w) {
  return logs_from_products(scaled_products(rho, w), rho.dim());
}

Flag word_flag(const Representation& rho, const words::Word& w, const Signature& P,
               double gap_tol) {
  const int d = rho.dim();
  if (P.d() != d) throw std::invalid_argument("word_flag: signature dimension mismatch");
  const ScaledProducts sp = scaled_products(rho, w);
  const Eigen::VectorXd logs = logs_from_products(sp, d);

  // relative gaps 1 - s_{p+1}/s_p from the stable spectrum
  std::vector<double> rel_gap(d - 1);
  for (int p = 1; p <= d - 1; ++p) rel_gap[p - 1] = 1.0 - std::exp(logs[p] - logs[p - 1]);
  for (int p : P.values())
    if (rel_gap[p - 1] < gap_tol)
      throw GapError("word_flag: singular gap at p=" + std::to_string(p) +
                     " below tolerance");

  constexpr double kResolve = 1e-6;
  const double eps = std::numeric_limits<double>::epsilon();

  // dense route: valid while the spread above p stays within double precision
  Svd dense;
  bool have_dense = false;
  // propagated route: leading columns of orth(rho(w) * F0), error exp(-zeta_{p,p+1})
  Eigen::MatrixXd frame;
  bool have_frame = false;

  Flag out{P, {}};
  for (int p : P.values()) {
    const double dense_err = eps * std::exp(logs[0] - logs[p - 1]) / rel_gap[p - 1];
    const double frame_err = std::exp(logs[p] - logs[p - 1]);
    if (dense_err <= kResolve) {
      if (!have_dense) {
        dense = deterministic_svd(sp.prod);
        have_dense = true;
      }
      out.pieces.push_back(Subspace{dense.U.leftCols(p)});
    } else if (frame_err <= kResolve) {
      if (!have_frame) {
        frame = generic_frame(d);
        for (auto it = w.letters().rbegin(); it != w.letters().rend(); ++it)
          frame = positive_qr(rho.letter_matrix(*it).mat() * frame);
        have_frame = true;
      }
      out.pieces.push_back(Subspace{frame.leftCols(p)});
    } else {
      throw GapError("word_flag: piece p=" + std::to_string(p) +
                     " numerically unresolvable at this depth");
    }
  }
  return out;
}

}  // namespace anosov::matrixops
