// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL line each. Exit status 0 only if all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "anosov/dimensions.hpp"
#include "anosov/experiment.hpp"
#include "anosov/flagcoords.hpp"
#include "anosov/functionals.hpp"
#include "anosov/walks.hpp"

using namespace anosov;
using matrixops::Representation;
using matrixops::UnimodularMatrix;
using matrixops::WeylVector;

namespace {

int g_failures = 0;
using clock_type = std::chrono::steady_clock;

struct Timer {
  clock_type::time_point start = clock_type::now();
  double seconds() const {
    return std::chrono::duration<double>(clock_type::now() - start).count();
  }
};

void report(int id, const char* name, bool pass, const std::string& detail, double secs) {
  std::printf("[%s] criterion %2d: %-28s %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, name,
              detail.c_str(), secs);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

WeylVector random_chamber_point(int d, Rng& rng) {
  Eigen::VectorXd a(d);
  double acc = 0.0;
  for (int i = d - 1; i >= 0; --i) {
    a[i] = acc;
    acc += rng.next_in(0.1, 2.0);
  }
  return WeylVector::sorted_from(a);
}

Eigen::MatrixXd random_rotation(int d, Rng& rng) {
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rng.next_gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

UnimodularMatrix random_gapped_matrix(int d, Rng& rng) {
  Eigen::VectorXd a(d);
  double acc = 0.0;
  for (int i = d - 1; i >= 0; --i) {
    a[i] = acc;
    acc += rng.next_in(0.4, 1.8);
  }
  a.array() -= a.mean();
  const Eigen::MatrixXd core = a.array().exp().matrix().asDiagonal();
  return UnimodularMatrix::from_entries(random_rotation(d, rng) * core *
                                        random_rotation(d, rng));
}

std::string config_path(const char* name) {
  return std::string(ANOSOV_CONFIG_DIR) + "/" + name;
}

void criterion_1_duality() {
  Timer timer;
  Rng rng(101);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int d = 3 + t % 3;
    const WeylVector a = random_chamber_point(d, rng);
    for (const Signature& sig : all_signatures(d)) {
      const functionals::DualityReport rep = functionals::duality_check(a, sig, 24);
      if (!rep.roots_positive) continue;  // cannot happen for these samples
      worst = std::max({worst, rep.max_err_l_of_f, rep.max_err_f_of_l});
    }
  }
  const double secs = timer.seconds();
  report(1, "duality round trips", worst <= 1e-9 && secs < 10.0,
         fmt("max |round trip - budget| = %.2e", worst), secs);
}

void criterion_2_oracle() {
  Timer timer;
  Rng rng(202);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int d = 3 + t % 3;
    const WeylVector a = random_chamber_point(d, rng);
    const std::vector<Signature> sigs = all_signatures(d);
    const Signature& sig = sigs[rng.next_below(static_cast<std::uint32_t>(sigs.size()))];
    const int dc = SeparatedPairs(sig).count();
    const double r = rng.next_in(0.0, dc);
    worst = std::max(worst, std::abs(functionals::falconer_functional(a, sig, r) -
                                     functionals::lp_falconer_oracle(a, sig, r)));
    const double h = rng.next_in(0.0, functionals::falconer_functional(a, sig, dc) * 1.1);
    worst = std::max(worst, std::abs(functionals::lyapunov_functional(a, sig, h) -
                                     functionals::lp_lyapunov_oracle(a, sig, h)));
  }
  const double secs = timer.seconds();
  report(2, "greedy equals LP oracle", worst <= 1e-9 && secs < 60.0,
         fmt("max |greedy - oracle| = %.2e", worst), secs);
}

void criterion_3_combinatorics() {
  Timer timer;
  long min_slack = 1L << 60;
  bool claims = true;
  long cases = 0;
  for (int d = 2; d <= 8; ++d)
    for (const Signature& sig : all_signatures(d))
      for (int k = 1; k <= d - 1; ++k) {
        const functionals::GapCombinatorics g = functionals::gap_combinatorics(sig, k);
        min_slack = std::min(min_slack, g.slack);
        claims = claims && g.claim_dominates && g.claim_monotone;
        ++cases;
      }
  const double secs = timer.seconds();
  report(3, "counting inequalities", min_slack >= 0 && claims && secs < 5.0,
         fmt("%0.f cases, min slack %.0f", double(cases), double(min_slack)), secs);
}

void criterion_4_structural() {
  Timer timer;
  bool ok = true;
  for (int d = 2; d <= 8; ++d)
    for (const Signature& sig : all_signatures(d))
      ok = ok && functionals::flag_dimension(sig) == SeparatedPairs(sig).count();
  const Signature p12(3, {1, 2});
  ok = ok && functionals::flag_dimension(p12) == 3;
  const dimensions::GapTheoremReport rep =
      dimensions::gap_theorem_report(dimensions::GapTheoremInputs(p12));
  ok = ok && rep.flag_dim_bound == 2.5 && rep.xp_bound == 5.0;
  report(4, "structural identities",
         ok, "flag dim = #pairs for all d <= 8; d=3 bounds 2.5 and 5", timer.seconds());
}

void criterion_5_ellipsoid() {
  Timer timer;
  Rng rng(505);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int d = 3 + t % 2;
    const UnimodularMatrix g = random_gapped_matrix(d, rng);
    const std::vector<Signature> sigs = all_signatures(d);
    const Signature& sig = sigs[t % sigs.size()];
    const auto axes = flagcoords::ellipsoid_axes(g, sig);
    const auto ratios = flagcoords::cross_block_ratios(g, sig);
    for (std::size_t k = 0; k < axes.size(); ++k)
      worst = std::max(worst, std::abs(axes[k] - ratios[k]) / ratios[k]);
  }
  const double secs = timer.seconds();
  report(5, "ellipsoid axes multiset", worst <= 1e-6 && secs < 10.0,
         fmt("max rel err = %.2e", worst), secs);
}

void criterion_6_cocycle() {
  Timer timer;
  Rng rng(606);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int d = 3 + t % 2;
    const Signature full = [d] {
      std::vector<int> ps;
      for (int p = 1; p <= d - 1; ++p) ps.push_back(p);
      return Signature(d, ps);
    }();
    const UnimodularMatrix g = random_gapped_matrix(d, rng);
    const UnimodularMatrix h = random_gapped_matrix(d, rng);
    const matrixops::Flag t_flag = matrixops::flag_of(random_gapped_matrix(d, rng), full);
    const Eigen::VectorXd lhs = matrixops::iwasawa_cocycle(g * h, t_flag);
    const Eigen::VectorXd rhs = matrixops::iwasawa_cocycle(g, matrixops::apply(h, t_flag)) +
                                matrixops::iwasawa_cocycle(h, t_flag);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  report(6, "iwasawa cocycle additivity", worst <= 1e-8,
         fmt("max abs err = %.2e", worst), timer.seconds());
}

void criterion_7_degenerate() {
  Timer timer;
  const auto cfg = experiment::ExperimentConfig::load_file(config_path("single_diag.json"));
  std::vector<std::string> warnings;
  const Representation rho = cfg.make_representation(&warnings);
  const Signature sig = cfg.make_signature();
  const dimensions::ShellData data =
      dimensions::scan_shells(rho, sig, cfg.shell_min, cfg.shell_max, cfg.max_words);
  const dimensions::FalconerEstimate fal =
      dimensions::falconer_estimate(data, cfg.pressure_tol, false);
  const bool falc_ok = std::abs(fal.estimate.value) <= 1e-3;

  Eigen::Vector3d v(std::log(4.0), 0.0, -std::log(4.0));
  const WeylVector w{Eigen::VectorXd(v)};
  double worst = 0.0;
  for (double r : {0.0, 0.4, 1.0, 1.5, 2.0, 2.8, 3.0})
    worst = std::max(worst, std::abs(dimensions::pressure_curve(data, r).slope +
                                     functionals::falconer_functional(w, sig, r)));
  report(7, "degenerate closed form", falc_ok && worst <= 1e-6,
         fmt("falconer = %.2e, max pressure err = %.2e", fal.estimate.value, worst),
         timer.seconds());
}

void criterion_8_walks() {
  Timer timer;
  words::GeneratorSet gs(2);
  const walks::WalkMeasure mu = walks::WalkMeasure::uniform_on_generators(gs);
  const walks::WalkMeasure mu2 = walks::convolve(mu, mu);
  const bool return_ok = mu2.atoms().at(words::Word::identity(gs)) == 0.25;
  const bool entropy_ok = mu.entropy() == std::log(4.0);

  bool subadd = true;
  std::vector<double> big_h;
  walks::WalkMeasure power = mu;
  big_h.push_back(power.entropy());
  for (int n = 2; n <= 10; ++n) {
    power = walks::convolve(power, mu);
    big_h.push_back(power.entropy());
  }
  for (int n = 1; n <= 9; ++n)
    for (int m = 1; n + m <= 10; ++m)
      subadd = subadd && big_h[n + m - 1] <= big_h[n - 1] + big_h[m - 1] + 1e-10;

  // dirac walk against the eigenvalue moduli
  Rng rng(808);
  double mc_err = 0.0;
  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXd a(3);
    a << rng.next_in(0.8, 1.5), rng.next_in(-0.3, 0.3), 0.0;
    a[2] = -a[0] - a[1];
    Eigen::MatrixXd basis(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) basis(i, j) = rng.next_gaussian() + (i == j ? 3.0 : 0.0);
    const Eigen::MatrixXd m = basis * a.array().exp().matrix().asDiagonal() * basis.inverse();
    if (m.determinant() <= 0) continue;
    const UnimodularMatrix g = UnimodularMatrix::from_entries(m);
    words::GeneratorSet g1(1);
    const Representation rho(g1, {g});
    const walks::WalkStats stats = walks::lyapunov_exponents_mc(
        walks::WalkMeasure::dirac(g1, words::parse_word(g1, "a")), rho, 64, 1, 1);
    const WeylVector moduli = matrixops::eigen_moduli(g);
    for (int i = 0; i < 3; ++i)
      mc_err = std::max(mc_err, std::abs(stats.lambda[i] - moduli[i]));
  }
  report(8, "walk suite", return_ok && entropy_ok && subadd && mc_err <= 0.05,
         fmt("mu*2(e) and H(mu) exact, subadditive to n=10, MC err %.3f", mc_err),
         timer.seconds());
}

void criterion_9_end_to_end() {
  Timer timer;
  const auto cfg = experiment::ExperimentConfig::load_file(config_path("pingpong_sl3.json"));
  std::vector<std::string> warnings;
  const Representation rho = cfg.make_representation(&warnings);
  const Signature sig = cfg.make_signature();

  const dimensions::ShellData data =
      dimensions::scan_shells(rho, sig, cfg.shell_min, cfg.shell_max, cfg.max_words);
  const dimensions::GapFitReport gap = dimensions::anosov_gap_fit(data);
  const bool slopes_ok = gap.anosov_evidence;

  const dimensions::FalconerEstimate fal =
      dimensions::falconer_estimate(data, cfg.pressure_tol, false);
  const double falc = fal.estimate.value;
  const bool falc_ok = falc <= 2.5 + 0.05;

  const dimensions::SampledCloud cloud = dimensions::limit_set_sample(
      rho, sig, cfg.sample_depth, cfg.sample_count, Rng::substream(cfg.seed, 1),
      cfg.gap_tolerance);
  const dimensions::DimensionEstimate mink =
      dimensions::minkowski_estimate(cloud.metric(), cfg.eps_grid);
  const bool mink_ok = mink.value <= falc + 0.2;

  const walks::WalkMeasure mu = cfg.make_walk_measure(rho.generators());
  const walks::EntropySequence seq =
      walks::entropy_rate(mu, cfg.walk->entropy_n_max, cfg.walk->support_cap);
  const walks::WalkStats stats = walks::lyapunov_exponents_mc(
      mu, rho, cfg.walk->horizon, cfg.walk->trials, cfg.seed, 1);
  const functionals::LyapunovDimension ld =
      functionals::lyapunov_dimension(seq.upper_bound(), stats.lambda, sig);
  const bool lyap_ok = ld.value <= falc + 0.2;

  const walks::InequalityReport ineq = walks::inequality_report(
      seq.upper_bound(), seq.n_complete, stats.lambda, sig, std::nullopt);
  bool main_lemma_ok = false;
  for (const auto& line : ineq.lines)
    if (line.name == "main-lemma") main_lemma_ok = line.status == "PASS";

  const double secs = timer.seconds();
  const bool ok =
      slopes_ok && falc_ok && mink_ok && lyap_ok && main_lemma_ok && secs < 600.0;
  report(9, "end-to-end gap check", ok,
         fmt("falc %.3f, mink %.3f, dim_LY %.3f", falc, mink.value, ld.value), secs);
  std::printf("             gap slopes > 0: %s; falc <= 2.55: %s; mink <= falc+0.2: %s; "
              "dim_LY <= falc+0.2: %s; main lemma: %s\n",
              slopes_ok ? "yes" : "NO", falc_ok ? "yes" : "NO", mink_ok ? "yes" : "NO",
              lyap_ok ? "yes" : "NO", main_lemma_ok ? "yes" : "NO");
}

void criterion_10_reproducibility() {
  Timer timer;
  const auto cfg = experiment::ExperimentConfig::load_file(config_path("pingpong_sl3.json"));
  const std::string a = experiment::run(cfg, "report", 1).report.dump();
  const std::string b = experiment::run(cfg, "report", 1).report.dump();
  const std::string c = experiment::run(cfg, "report", 6).report.dump();
  report(10, "byte-identical reports", a == b && a == c,
         fmt("%0.f bytes, two runs + thread counts 1 and 6", double(a.size())),
         timer.seconds());
}

}  // namespace

int main() {
  criterion_1_duality();
  criterion_2_oracle();
  criterion_3_combinatorics();
  criterion_4_structural();
  criterion_5_ellipsoid();
  criterion_6_cocycle();
  criterion_7_degenerate();
  criterion_8_walks();
  criterion_9_end_to_end();
  criterion_10_reproducibility();
  if (g_failures > 0) {
    std::printf("ACCEPTANCE: %d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("ACCEPTANCE: all criteria passed\n");
  return 0;
}
