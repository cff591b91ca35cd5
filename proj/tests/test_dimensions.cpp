#include "doctest.h"

#include <cmath>
#include <set>

#include "anosov/dimensions.hpp"

using namespace anosov;
using namespace anosov::dimensions;
using matrixops::Representation;
using matrixops::UnimodularMatrix;
using words::GeneratorSet;

namespace {

UnimodularMatrix diag3(double a, double b, double c) {
  Eigen::Vector3d v(a, b, c);
  return UnimodularMatrix::from_entries(Eigen::MatrixXd(v.asDiagonal()));
}

// the bundled-style strongly contracting pair
Representation pingpong_rep() {
  const double L = 40.0;
  Eigen::Matrix3d core = Eigen::Vector3d(L, 1.0, 1.0 / L).asDiagonal();
  auto rot = [](double ax, double ay, double az) {
    Eigen::Matrix3d rx, ry, rz;
    rx << 1, 0, 0, 0, std::cos(ax), -std::sin(ax), 0, std::sin(ax), std::cos(ax);
    ry << std::cos(ay), 0, std::sin(ay), 0, 1, 0, -std::sin(ay), 0, std::cos(ay);
    rz << std::cos(az), -std::sin(az), 0, std::sin(az), std::cos(az), 0, 0, 0, 1;
    return Eigen::Matrix3d(rz * ry * rx);
  };
  Eigen::Matrix3d r = rot(0.35, 1.1, 0.6);
  GeneratorSet gs(2);
  return Representation(gs, {UnimodularMatrix::from_entries(core),
                             UnimodularMatrix::from_entries(r * core * r.transpose())});
}

Representation cyclic_rep() {
  GeneratorSet gs(1);
  return Representation(gs, {diag3(4, 1, 0.25)});
}

std::vector<double> dyadic(int coarse, int fine) {
  std::vector<double> out;
  for (int e = coarse; e >= fine; --e) out.push_back(std::ldexp(1.0, e));
  return out;
}

// evenly spaced lines in R^2 as flags of signature {1} in d = 2
std::vector<matrixops::Flag> projective_circle(int count) {
  std::vector<matrixops::Flag> out;
  const Signature sig(2, {1});
  for (int k = 0; k < count; ++k) {
    const double theta = 3.141592653589793 * k / count;
    Eigen::MatrixXd basis(2, 1);
    basis << std::cos(theta), std::sin(theta);
    out.push_back(matrixops::Flag{sig, {matrixops::Subspace{basis}}});
  }
  return out;
}

}  // namespace

TEST_CASE("covering number: trivial scales and monotonicity") {
  const auto flags = projective_circle(100);
  const MetricCloud cloud = MetricCloud::from_flags(flags);
  CHECK(covering_number(cloud, cloud.diameter() + 0.01) == 1);

  const MetricCloud single = MetricCloud::from_flags({flags[0]});
  for (double eps : dyadic(0, -8)) CHECK(covering_number(single, eps) == 1);

  std::size_t prev = 0;
  for (double eps : dyadic(0, -8)) {
    const std::size_t n = covering_number(cloud, eps);
    if (prev > 0) CHECK(n >= prev);  // finer scales need at least as many balls
    prev = n;
  }
  CHECK_THROWS_AS(covering_number(cloud, 0.0), std::invalid_argument);
}

TEST_CASE("greedy centers are a packing certificate") {
  const auto flags = projective_circle(64);
  const MetricCloud cloud = MetricCloud::from_flags(flags);
  const double eps = 0.07;
  std::vector<std::size_t> centers;
  covering_number(cloud, eps, &centers);
  for (std::size_t a = 0; a < centers.size(); ++a)
    for (std::size_t b = a + 1; b < centers.size(); ++b)
      CHECK(cloud.distance(centers[a], centers[b]) > eps);
}

TEST_CASE("minkowski estimate: curve, point, and product") {
  const MetricCloud circle = MetricCloud::from_flags(projective_circle(400));
  const DimensionEstimate one = minkowski_estimate(circle, dyadic(-2, -6));
  CHECK(std::abs(one.value - 1.0) <= 0.15);
  CHECK(one.method == "box-count");

  const MetricCloud point = MetricCloud::from_flags(projective_circle(1));
  CHECK(minkowski_estimate(point, dyadic(-2, -6)).value == doctest::Approx(0.0));

  // product of two independent circle samples, max-of-segments metric
  Rng rng(5);
  std::vector<Eigen::VectorXd> prod;
  for (int i = 0; i < 6000; ++i) {
    const double s = rng.next_double() * 3.141592653589793;
    const double t = rng.next_double() * 3.141592653589793;
    Eigen::VectorXd v(8);
    const double c1 = std::cos(s), s1 = std::sin(s), c2 = std::cos(t), s2 = std::sin(t);
    // projector entries of each factor, stacked as two segments
    v << c1 * c1, c1 * s1, s1 * c1, s1 * s1, c2 * c2, c2 * s2, s2 * c2, s2 * s2;
    prod.push_back(v);
  }
  const MetricCloud product = MetricCloud::from_vectors(prod, 2);
  const DimensionEstimate two = minkowski_estimate(product, dyadic(-1, -4));
  CHECK(std::abs(two.value - 2.0) <= 0.35);

  CHECK_THROWS_AS(minkowski_estimate(circle, dyadic(-2, -3)), std::invalid_argument);
}

TEST_CASE("shell scan: counts, trimming, and the degenerate closed form") {
  const Representation rho = cyclic_rep();
  const Signature sig(3, {1, 2});
  const ShellData data = scan_shells(rho, sig, 2, 10, 100000);
  REQUIRE(data.shells.size() == 9);
  for (std::size_t s = 0; s < data.shells.size(); ++s) CHECK(data.counts[s] == 2);
  CHECK(!data.truncated);

  // budget trimming keeps whole shells only
  const Representation free2 = pingpong_rep();
  const ShellData trimmed = scan_shells(free2, sig, 2, 12, 500);
  CHECK(trimmed.truncated);
  CHECK(trimmed.n_max < 12);
  std::size_t total = 0;
  for (std::size_t s = 0; s < trimmed.shells.size(); ++s) {
    CHECK(trimmed.counts[s] == static_cast<std::size_t>(
              words::sphere_size(free2.generators(), trimmed.shells[s])));
    total += trimmed.counts[s];
  }
  CHECK(total <= 500);
}

TEST_CASE("pressure: single-generator closed form and monotonicity") {
  const Representation rho = cyclic_rep();
  const Signature sig(3, {1, 2});
  const ShellData data = scan_shells(rho, sig, 2, 12, 100000);

  Eigen::Vector3d v(std::log(4.0), 0.0, -std::log(4.0));
  const matrixops::WeylVector w{Eigen::VectorXd(v)};
  for (double r : {0.0, 0.5, 1.0, 1.7, 2.5, 3.0}) {
    const PressureCurve curve = pressure_curve(data, r);
    const double expected = -functionals::falconer_functional(w, sig, r);
    CHECK(std::abs(curve.slope - expected) <= 1e-6);
  }
  // strictly decreasing in r
  double prev = pressure_curve(data, 0.0).slope;
  for (double r : {0.5, 1.0, 2.0, 3.0}) {
    const double cur = pressure_curve(data, r).slope;
    CHECK(cur < prev);
    prev = cur;
  }

  const FalconerEstimate fal = falconer_estimate(data, 1e-3, true);
  CHECK(fal.degenerate);
  CHECK(fal.estimate.value == doctest::Approx(0.0));
}

TEST_CASE("shell scan survives depths where raw products overflow") {
  // 4^600 overflows a double; the rescaled carry keeps the logs exact
  const Representation rho = cyclic_rep();
  const Signature sig(3, {1, 2});
  const ShellData data = scan_shells(rho, sig, 596, 600, 100000);
  Eigen::Vector3d v(std::log(4.0), 0.0, -std::log(4.0));
  const matrixops::WeylVector w{Eigen::VectorXd(v)};
  const PressureCurve curve = pressure_curve(data, 1.5);
  CHECK(std::abs(curve.slope + functionals::falconer_functional(w, sig, 1.5)) <= 1e-6);
  const GapFitReport gap = anosov_gap_fit(data);
  CHECK(gap.worst_slope == doctest::Approx(std::log(4.0)));
}

TEST_CASE("pressure at r = 0 recovers the sphere growth rate") {
  const Representation rho = pingpong_rep();
  const Signature sig(3, {1, 2});
  const ShellData data = scan_shells(rho, sig, 3, 9, 200000);
  const PressureCurve curve = pressure_curve(data, 0.0);
  CHECK(std::abs(curve.slope - std::log(3.0)) <= 1e-9);  // counts are exact
}

TEST_CASE("anosov gap fit: cyclic closed form and the identity error path") {
  const Signature sig(3, {1, 2});
  const ShellData cyc = scan_shells(cyclic_rep(), sig, 2, 10, 100000);
  const GapFitReport rep = anosov_gap_fit(cyc);
  CHECK(rep.anosov_evidence);
  for (double s : rep.slope) CHECK(s == doctest::Approx(std::log(4.0)));

  GeneratorSet gs(1);
  const Representation id_rep(gs, {UnimodularMatrix::identity(3)});
  const GapFitReport flat = anosov_gap_fit(scan_shells(id_rep, sig, 2, 8, 100000));
  CHECK(!flat.anosov_evidence);
  CHECK(flat.worst_slope == doctest::Approx(0.0));
}

TEST_CASE("falconer estimate brackets and converges on the contracting pair") {
  const Representation rho = pingpong_rep();
  const Signature sig(3, {1, 2});
  const ShellData data = scan_shells(rho, sig, 4, 9, 200000);
  const FalconerEstimate fal = falconer_estimate(data, 1e-3, true);
  CHECK(!fal.degenerate);
  CHECK(fal.bracketed);
  CHECK(fal.estimate.value > 0.0);
  CHECK(fal.estimate.value < 2.5);
  // the root is a sign change of the pressure slope
  CHECK(pressure_curve(data, fal.estimate.value - 0.01).slope > 0.0);
  CHECK(pressure_curve(data, fal.estimate.value + 0.01).slope < 0.0);
  // per-type criticals exist and the functional-indexing max matches the blend
  CHECK(!fal.per_type.empty());
  CHECK(fal.max_type_critical_functional > 0.0);
  CHECK(fal.max_type_critical_functional <= fal.estimate.value + 0.05);
}

TEST_CASE("growth indicator: cyclic direction and the wide cone") {
  const Signature sig(3, {1, 2});
  const ShellData cyc = scan_shells(cyclic_rep(), sig, 2, 12, 100000);
  Eigen::Vector3d axis(std::log(4.0), 0.0, -std::log(4.0));
  axis.normalize();
  const GrowthEstimate tight = growth_indicator(cyc, axis, 0.05);
  CHECK(tight.in_cone > 0);
  CHECK(std::abs(tight.psi) <= 0.3);  // linear counts, near-zero exponential rate

  const Representation rho = pingpong_rep();
  const ShellData data = scan_shells(rho, sig, 3, 9, 200000);
  const std::vector<Eigen::VectorXd> cone = limit_cone_sample(data, 9);
  REQUIRE(!cone.empty());
  const GrowthEstimate wide = growth_indicator(data, cone.front(), 3.2);
  CHECK(wide.in_cone == data.total_words());
  CHECK(wide.psi > 0.0);
}

TEST_CASE("growth stays below the falconer functional just above the critical value") {
  const Representation rho = pingpong_rep();
  const Signature sig(3, {1, 2});
  const ShellData data = scan_shells(rho, sig, 4, 9, 200000);
  const FalconerEstimate fal = falconer_estimate(data, 1e-3, false);
  const double r_test = fal.estimate.value + 0.1;
  const auto cone = limit_cone_sample(data, 9);
  for (std::size_t k = 0; k < cone.size(); k += cone.size() / 6) {
    const GrowthEstimate g = growth_indicator(data, cone[k], 0.25);
    if (g.points < 2) continue;
    const matrixops::WeylVector a = matrixops::WeylVector::sorted_from(cone[k]);
    CHECK(g.psi < functionals::falconer_functional(a, sig, r_test));
  }
}

TEST_CASE("limit set sampling: distinctness, caps, and depth consistency") {
  const Representation rho = pingpong_rep();
  const Signature sig(3, {1, 2});
  const SampledCloud cloud = limit_set_sample(rho, sig, 10, 300, 99);
  std::set<words::Word> seen(cloud.provenance.begin(), cloud.provenance.end());
  CHECK(seen.size() == cloud.provenance.size());
  for (const auto& w : cloud.provenance) CHECK(w.length() == 10);

  CHECK_THROWS_AS(limit_set_sample(cyclic_rep(), sig, 5, 3, 1), std::invalid_argument);

  // extending the sampled rays moves flags by at most C exp(-c R)
  const ShellData data = scan_shells(rho, sig, 3, 8, 200000);
  const GapFitReport gap = anosov_gap_fit(data);
  const int depth = 6;
  Rng rng(4);
  const SampledCloud base = limit_set_sample(rho, sig, depth, 100, 5);
  double worst = 0.0;
  for (std::size_t i = 0; i < base.flags.size(); ++i) {
    const words::Word longer =
        words::random_extension(base.provenance[i], rho.generators(), 5, rng);
    worst = std::max(worst, matrixops::flag_distance(
                                base.flags[i], matrixops::word_flag(rho, longer, sig)));
  }
  CHECK(worst <= 1000.0 * std::exp(-gap.worst_slope * depth));
}

TEST_CASE("omega sampling produces valid splitting clouds") {
  const Representation rho = pingpong_rep();
  const Signature sig(3, {1, 2});
  const SampledCloud omega = omega_sample(rho, sig, 8, 200, 21);
  CHECK(omega.splittings.size() + omega.skipped <= 200);
  CHECK(omega.splittings.size() > 100);
  for (const auto& s : omega.splittings)
    CHECK(matrixops::splitting_min_singular_value(s) > 1e-8);
  const MetricCloud cloud = omega.metric();
  CHECK(cloud.size() == omega.splittings.size());
}

TEST_CASE("shadow cover report: pass, trivial scale, and the short-ray error") {
  const Representation rho = pingpong_rep();
  const Signature sig(3, {1, 2});
  const ShellData data = scan_shells(rho, sig, 4, 9, 200000);
  const FalconerEstimate fal = falconer_estimate(data, 1e-3, false);

  Rng rng(17);
  const words::Word ray = words::random_reduced_word(rho.generators(), 40, rng);
  ShadowParams params;
  params.eps = 1.0 / 256.0;
  params.tail_depth = 10;
  params.samples = 400;
  params.seed = 3;
  params.slack = 0.1;
  params.falconer_s = fal.estimate.value;
  const ShadowReport rep = shadow_cover_report(rho, sig, ray, params);
  CHECK(rep.status == "PASS");
  CHECK(rep.q == 1);
  CHECK(rep.zeta_q >= std::log(256.0));
  CHECK(rep.empirical_count >= 1);
  CHECK(static_cast<double>(rep.empirical_count) <= rep.bound_with_slack);
  REQUIRE(rep.ellipsoid_axes.size() == 3);
  for (double a : rep.ellipsoid_axes) CHECK(a < 1.0);

  // eps larger than the shadow diameter: one ball, bound respected
  ShadowParams coarse = params;
  coarse.eps = 0.5;
  const ShadowReport triv = shadow_cover_report(rho, sig, ray, coarse);
  CHECK(triv.empirical_count == 1);
  CHECK(triv.status == "PASS");

  CHECK_THROWS_AS(shadow_cover_report(rho, sig, ray.prefix(1), params),
                  std::invalid_argument);
}

TEST_CASE("gap theorem report: statuses, bounds, and anomaly flagging") {
  const Signature sig(3, {1, 2});
  GapTheoremInputs in(sig);
  in.falconer = 0.4;
  in.minkowski_limit_set = 0.35;
  in.minkowski_omega = 0.6;
  in.lyapunov_dim = 0.5;
  const GapTheoremReport rep = gap_theorem_report(in);
  CHECK(rep.flag_dim_bound == doctest::Approx(2.5));
  CHECK(rep.xp_bound == doctest::Approx(5.0));
  CHECK(!rep.any_anomaly);
  for (const auto& line : rep.lines) CHECK(line.status == "PASS");

  GapTheoremInputs bad(sig);
  bad.falconer = 0.4;
  bad.minkowski_limit_set = 0.7;  // exceeds falconer + 0.2
  const GapTheoremReport violated = gap_theorem_report(bad);
  CHECK(violated.any_anomaly);
  CHECK(violated.lines[0].status == "ANOMALY");
  CHECK(violated.lines[3].status == "UNAVAILABLE");  // omega missing

  GapTheoremInputs partial(sig);
  const GapTheoremReport empty = gap_theorem_report(partial);
  for (const auto& line : empty.lines) CHECK(line.status == "UNAVAILABLE");
  CHECK(!empty.any_anomaly);
}
