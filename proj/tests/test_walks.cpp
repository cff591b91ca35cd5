#include "doctest.h"

#include <cmath>

#include "anosov/walks.hpp"

using namespace anosov;
using namespace anosov::walks;
using matrixops::Representation;
using matrixops::UnimodularMatrix;
using words::GeneratorSet;
using words::Word;

namespace {

UnimodularMatrix diag3(double a, double b, double c) {
  Eigen::Vector3d v(a, b, c);
  return UnimodularMatrix::from_entries(Eigen::MatrixXd(v.asDiagonal()));
}

Representation diag_pair_rep() {
  GeneratorSet gs(2);
  return Representation(gs, {diag3(2.0, 1.0, 0.5), diag3(1.5, 1.0, 1.0 / 1.5)});
}

}  // namespace

TEST_CASE("convolution: SRW return probability and dirac composition") {
  GeneratorSet gs(2);
  const WalkMeasure mu = WalkMeasure::uniform_on_generators(gs);
  const WalkMeasure mu2 = convolve(mu, mu);
  const auto it = mu2.atoms().find(Word::identity(gs));
  REQUIRE(it != mu2.atoms().end());
  CHECK(it->second == 0.25);  // four cancelling paths of 1/16, exact in binary

  const Word w = words::parse_word(gs, "ab");
  const Word v = words::parse_word(gs, "b'a");
  const WalkMeasure composed = convolve(WalkMeasure::dirac(gs, w), WalkMeasure::dirac(gs, v));
  REQUIRE(composed.support_size() == 1);
  CHECK(composed.atoms().begin()->first == words::multiply(w, v));
  CHECK(composed.atoms().begin()->second == 1.0);

  // probability conservation through three convolutions
  const WalkMeasure mu3 = convolve(mu2, mu);
  double total = 0.0;
  for (const auto& [word, p] : mu3.atoms()) total += p;
  CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("convolution respects the support cap") {
  GeneratorSet gs(2);
  const WalkMeasure mu = WalkMeasure::uniform_on_generators(gs);
  CHECK_THROWS_AS(convolve(convolve(mu, mu), mu, 10), SupportCapExceeded);
}

TEST_CASE("entropy: exact values and the SRW sequence") {
  GeneratorSet gs(2);
  const WalkMeasure mu = WalkMeasure::uniform_on_generators(gs);
  CHECK(mu.entropy() == std::log(4.0));  // exact with tree summation
  CHECK(WalkMeasure::dirac(gs, words::parse_word(gs, "ab")).entropy() == 0.0);

  const EntropySequence seq = entropy_rate(mu, 8);
  REQUIRE(seq.n_complete == 8);
  CHECK(!seq.truncated);
  CHECK(seq.h_over_n[0] == std::log(4.0));
  // sandwiched between the boundary entropy and the first term
  CHECK(seq.h_over_n[7] >= 0.5 * std::log(3.0));
  CHECK(seq.h_over_n[7] <= std::log(4.0));
  // observed non-increasing after n = 1
  for (int n = 1; n < 8; ++n) CHECK(seq.h_over_n[n] <= seq.h_over_n[n - 1] + 1e-12);

  const EntropySequence dirac_seq =
      entropy_rate(WalkMeasure::dirac(gs, words::parse_word(gs, "a")), 6);
  for (double h : dirac_seq.h_over_n) CHECK(h == 0.0);
}

TEST_CASE("entropy subadditivity holds exactly for computed convolutions") {
  GeneratorSet gs(2);
  const WalkMeasure mu = WalkMeasure::uniform_on_generators(gs);
  std::vector<double> big_h;  // H(mu^{*n}) for n = 1..10
  WalkMeasure power = mu;
  big_h.push_back(power.entropy());
  for (int n = 2; n <= 10; ++n) {
    power = convolve(power, mu);
    big_h.push_back(power.entropy());
  }
  for (int n = 1; n <= 9; ++n)
    for (int m = 1; n + m <= 10; ++m)
      CHECK(big_h[n + m - 1] <= big_h[n - 1] + big_h[m - 1] + 1e-10);
}

TEST_CASE("entropy_rate reports truncation at the cap") {
  GeneratorSet gs(2);
  const WalkMeasure mu = WalkMeasure::uniform_on_generators(gs);
  const EntropySequence seq = entropy_rate(mu, 10, 100);
  CHECK(seq.truncated);
  CHECK(seq.n_complete < 10);
  CHECK(seq.n_complete >= 2);
}

TEST_CASE("plug-in entropy estimate approximates the exact value") {
  GeneratorSet gs(2);
  const WalkMeasure mu = WalkMeasure::uniform_on_generators(gs);
  const WalkMeasure mu2 = convolve(mu, mu);
  const double exact = mu2.entropy();
  const double plugin = entropy_plugin_mc(mu, 2, 40000, 9);
  CHECK(std::abs(plugin - exact) <= 0.05);
}

TEST_CASE("exponents: dirac on a diagonal matrix is exact at any horizon") {
  GeneratorSet gs(1);
  const Representation rho(gs, {diag3(4, 1, 0.25)});
  const WalkMeasure mu = WalkMeasure::dirac(gs, words::parse_word(gs, "a"));
  for (int horizon : {1, 5, 64}) {
    const WalkStats stats = lyapunov_exponents_mc(mu, rho, horizon, 3, 42);
    CHECK(std::abs(stats.lambda[0] - std::log(4.0)) <= 1e-12);
    CHECK(std::abs(stats.lambda[1]) <= 1e-12);
    CHECK(std::abs(stats.lambda[2] + std::log(4.0)) <= 1e-12);
    CHECK(stats.std_error.maxCoeff() <= 1e-15);
  }
}

TEST_CASE("exponents: dirac walk converges to the eigenvalue moduli") {
  GeneratorSet gs(1);
  Rng rng(71);
  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXd a(3);
    a << rng.next_in(0.8, 1.5), rng.next_in(-0.3, 0.3), 0.0;
    a[2] = -a[0] - a[1];
    Eigen::MatrixXd basis(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) basis(i, j) = rng.next_gaussian() + (i == j ? 3.0 : 0.0);
    Eigen::MatrixXd m = basis * a.array().exp().matrix().asDiagonal() * basis.inverse();
    if (m.determinant() <= 0) continue;
    const UnimodularMatrix g = UnimodularMatrix::from_entries(m);
    const Representation rho(gs, {g});
    const WalkMeasure mu = WalkMeasure::dirac(gs, words::parse_word(gs, "a"));
    const WalkStats stats = lyapunov_exponents_mc(mu, rho, 64, 1, 1);
    const matrixops::WeylVector moduli = matrixops::eigen_moduli(g);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(stats.lambda[i] - moduli[i]) <= 0.05);
  }
}

TEST_CASE("exponents: commuting diagonal generators hit the closed form") {
  const Representation rho = diag_pair_rep();
  const GeneratorSet& gs = rho.generators();
  const WalkMeasure mu = WalkMeasure::from_table(
      gs, {{words::parse_word(gs, "a"), 0.5}, {words::parse_word(gs, "b"), 0.5}});
  const WalkStats stats = lyapunov_exponents_mc(mu, rho, 64, 400, 7);
  Eigen::Vector3d expected(0.5 * (std::log(2.0) + std::log(1.5)), 0.0,
                           -0.5 * (std::log(2.0) + std::log(1.5)));
  for (int i = 0; i < 3; ++i) CHECK(std::abs(stats.lambda[i] - expected[i]) <= 0.01);
  // sorted, zero sum
  for (int i = 0; i + 1 < 3; ++i) CHECK(stats.lambda[i] >= stats.lambda[i + 1]);
  CHECK(std::abs(stats.lambda.values().sum()) <= 1e-8 * 64);
}

TEST_CASE("exponents: seeded runs are bit-reproducible and thread-invariant") {
  const Representation rho = diag_pair_rep();
  const WalkMeasure mu = WalkMeasure::uniform_on_generators(rho.generators());
  const WalkStats a = lyapunov_exponents_mc(mu, rho, 32, 64, 2024, 1);
  const WalkStats b = lyapunov_exponents_mc(mu, rho, 32, 64, 2024, 1);
  const WalkStats c = lyapunov_exponents_mc(mu, rho, 32, 64, 2024, 4);
  for (int i = 0; i < 3; ++i) {
    CHECK(a.lambda[i] == b.lambda[i]);
    CHECK(a.lambda[i] == c.lambda[i]);
    CHECK(a.std_error[i] == c.std_error[i]);
  }
  const WalkStats other = lyapunov_exponents_mc(mu, rho, 32, 64, 2025, 1);
  CHECK(a.lambda[0] != other.lambda[0]);  // the seed matters
}

TEST_CASE("exponents of a symmetric walk match its inverse walk") {
  const Representation rho = diag_pair_rep();
  const WalkMeasure mu = WalkMeasure::uniform_on_generators(rho.generators());
  const WalkMeasure inv = mu.inverse();
  // symmetric measure: the inverse walk is the same measure
  CHECK(mu.atoms().size() == inv.atoms().size());
  const WalkStats a = lyapunov_exponents_mc(mu, rho, 48, 300, 5);
  const WalkStats b = lyapunov_exponents_mc(inv, rho, 48, 300, 6);
  for (int i = 0; i < 3; ++i) {
    const double tol = 4.0 * (a.std_error[i] + b.std_error[i]) + 1e-9;
    CHECK(std::abs(a.lambda[i] - b.lambda[i]) <= tol);
  }
}

TEST_CASE("inequality report: dirac walks pass trivially") {
  const Signature p12(3, {1, 2});
  Eigen::Vector3d lam(1.2, 0.1, -1.3);
  const matrixops::WeylVector lambda{Eigen::VectorXd(lam)};
  const InequalityReport rep = inequality_report(0.0, 4, lambda, p12, std::nullopt);
  CHECK(rep.all_pass());
  REQUIRE(rep.lines.size() == 3);  // two per-p lines + main lemma
  for (const auto& line : rep.lines) CHECK(line.status == "PASS");

  // a loose entropy bound flips lines to INCONCLUSIVE, never a hard failure
  const InequalityReport loose = inequality_report(100.0, 2, lambda, p12, std::nullopt);
  CHECK(!loose.all_pass());
  for (const auto& line : loose.lines) CHECK(line.status == "INCONCLUSIVE");

  // fundamental line appears when a growth value is supplied
  const InequalityReport with_psi = inequality_report(0.5, 4, lambda, p12, 0.9);
  CHECK(with_psi.lines.size() == 4);
  CHECK(with_psi.lines[0].name == "fundamental-inequality");
  CHECK(with_psi.lines[0].status == "PASS");
}

TEST_CASE("first moment and measure validation") {
  GeneratorSet gs(2);
  const WalkMeasure mu = WalkMeasure::uniform_on_generators(gs);
  CHECK(mu.first_moment() == doctest::Approx(1.0));
  CHECK_THROWS_AS(WalkMeasure::from_table(gs, {{words::parse_word(gs, "a"), 0.5}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(WalkMeasure::from_table(gs, {{words::parse_word(gs, "a"), -1.0},
                                               {words::parse_word(gs, "b"), 2.0}}),
                  std::invalid_argument);
}
