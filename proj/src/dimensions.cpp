#include "anosov/dimensions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "anosov/numeric.hpp"

namespace anosov::dimensions {

using matrixops::GapError;
using words::GeneratorSet;

MetricCloud MetricCloud::from_flags(const std::vector<Flag>& flags) {
  MetricCloud c;
  c.n_ = flags.size();
  if (flags.empty()) throw std::invalid_argument("MetricCloud: empty cloud");
  const int d = flags.front().sig.d();
  const int pieces = static_cast<int>(flags.front().pieces.size());
  c.point_dim_ = pieces * d * d;
  for (int k = 0; k < pieces; ++k) c.segments_.emplace_back(k * d * d, d * d);
  c.features_.resize(c.n_ * c.point_dim_);
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (!(flags[i].sig == flags.front().sig))
      throw std::invalid_argument("MetricCloud: mixed signatures");
    double* out = c.features_.data() + i * c.point_dim_;
    for (int k = 0; k < pieces; ++k) {
      const Eigen::MatrixXd p = matrixops::projector(flags[i].pieces[k]);
      std::copy(p.data(), p.data() + d * d, out + k * d * d);
    }
  }
  return c;
}

MetricCloud MetricCloud::from_splittings(const std::vector<Splitting>& splittings) {
  MetricCloud c;
  c.n_ = splittings.size();
  if (splittings.empty()) throw std::invalid_argument("MetricCloud: empty cloud");
  const int d = splittings.front().sig.d();
  const int blocks = static_cast<int>(splittings.front().blocks.size());
  c.point_dim_ = blocks * d * d;
  for (int k = 0; k < blocks; ++k) c.segments_.emplace_back(k * d * d, d * d);
  c.features_.resize(c.n_ * c.point_dim_);
  for (std::size_t i = 0; i < splittings.size(); ++i) {
    double* out = c.features_.data() + i * c.point_dim_;
    for (int k = 0; k < blocks; ++k) {
      const Eigen::MatrixXd p = matrixops::projector(splittings[i].blocks[k]);
      std::copy(p.data(), p.data() + d * d, out + k * d * d);
    }
  }
  return c;
}

MetricCloud MetricCloud::from_vectors(const std::vector<Eigen::VectorXd>& points,
                                      int segments) {
  MetricCloud c;
  c.n_ = points.size();
  if (points.empty()) throw std::invalid_argument("MetricCloud: empty cloud");
  c.point_dim_ = static_cast<int>(points.front().size());
  if (segments < 1 || c.point_dim_ % segments != 0)
    throw std::invalid_argument("MetricCloud: segments must divide the dimension");
  const int seg_len = c.point_dim_ / segments;
  for (int k = 0; k < segments; ++k) c.segments_.emplace_back(k * seg_len, seg_len);
  c.features_.resize(c.n_ * c.point_dim_);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != c.point_dim_)
      throw std::invalid_argument("MetricCloud: mixed point dimensions");
    std::copy(points[i].data(), points[i].data() + c.point_dim_,
              c.features_.data() + i * c.point_dim_);
  }
  return c;
}

double MetricCloud::distance(std::size_t a, std::size_t b) const {
  const double* pa = features_.data() + a * point_dim_;
  const double* pb = features_.data() + b * point_dim_;
  double worst = 0.0;
  for (const auto& [off, len] : segments_) {
    double acc = 0.0;
    for (int k = 0; k < len; ++k) {
      const double dfr = pa[off + k] - pb[off + k];
      acc += dfr * dfr;
    }
    worst = std::max(worst, acc);
  }
  return std::sqrt(worst);
}

double MetricCloud::diameter() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j) worst = std::max(worst, distance(i, j));
  return worst;
}

MetricCloud SampledCloud::metric() const {
  if (!flags.empty()) return MetricCloud::from_flags(flags);
  return MetricCloud::from_splittings(splittings);
}

namespace {

// m distinct uniform samples from sphere(depth), without replacement
std::vector<Word> sample_distinct_words(const GeneratorSet& gs, int depth, int count,
                                        Rng& rng) {
  const double sphere = words::sphere_size(gs, depth);
  if (count > sphere)
    throw std::invalid_argument("sample: requested more words than the sphere holds");
  if (sphere <= 2.0 * count && sphere < 5e7) {
    // dense regime: enumerate and take a seeded partial shuffle
    std::vector<Word> all = words::sphere(gs, depth);
    for (int i = 0; i < count; ++i) {
      const std::size_t j = i + rng.next_below(static_cast<std::uint32_t>(all.size() - i));
      std::swap(all[i], all[j]);
    }
    all.resize(count);
    return all;
  }
  std::set<Word> seen;
  std::vector<Word> out;
  while (static_cast<int>(out.size()) < count) {
    Word w = words::random_reduced_word(gs, depth, rng);
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

}  // namespace

SampledCloud limit_set_sample(const Representation& rho, const Signature& P, int depth,
                              int count, std::uint64_t seed, double gap_tol) {
  if (depth < 1 || count < 1) throw std::invalid_argument("limit_set_sample: bad parameters");
  Rng rng(seed);
  SampledCloud cloud;
  cloud.depth = depth;
  for (Word& w : sample_distinct_words(rho.generators(), depth, count, rng)) {
    try {
      cloud.flags.push_back(matrixops::word_flag(rho, w, P, gap_tol));
      cloud.provenance.push_back(std::move(w));
    } catch (const GapError&) {
      ++cloud.skipped;
    }
  }
  if (cloud.flags.empty()) throw GapError("limit_set_sample: every sampled word failed gaps");
  return cloud;
}

SampledCloud omega_sample(const Representation& rho, const Signature& P, int depth,
                          int count, std::uint64_t seed, double gap_tol) {
  if (depth < 1 || count < 1) throw std::invalid_argument("omega_sample: bad parameters");
  Rng rng(seed);
  SampledCloud cloud;
  cloud.depth = depth;
  for (Word& w : sample_distinct_words(rho.generators(), depth, count, rng)) {
    try {
      cloud.splittings.push_back(matrixops::eigen_splitting(rho.evaluate(w), P, gap_tol));
      cloud.provenance.push_back(std::move(w));
    } catch (const GapError&) {
      ++cloud.skipped;
    } catch (const matrixops::NumericalError&) {
      ++cloud.skipped;
    }
  }
  if (cloud.splittings.empty()) throw GapError("omega_sample: every sampled word failed gaps");
  return cloud;
}

std::size_t covering_number(const MetricCloud& cloud, double eps,
                            std::vector<std::size_t>* centers) {
  if (!(eps > 0.0)) throw std::invalid_argument("covering_number: eps must be positive");
  if (cloud.size() == 0) throw std::invalid_argument("covering_number: empty cloud");
  std::vector<char> covered(cloud.size(), 0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (covered[i]) continue;
    ++count;
    if (centers) centers->push_back(i);
    for (std::size_t j = i; j < cloud.size(); ++j)
      if (!covered[j] && cloud.distance(i, j) <= eps) covered[j] = 1;
  }
  return count;
}

DimensionEstimate minkowski_estimate(const MetricCloud& cloud,
                                     const std::vector<double>& eps_grid) {
  if (eps_grid.size() < 4)
    throw std::invalid_argument("minkowski_estimate: need at least 4 scales");
  std::vector<double> xs, ys;
  for (double eps : eps_grid) {
    xs.push_back(std::log(1.0 / eps));
    ys.push_back(std::log(static_cast<double>(covering_number(cloud, eps))));
  }
  const LineFit fit = fit_line(xs, ys);
  DimensionEstimate est;
  est.value = fit.slope;
  est.method = "box-count";
  est.fit_lo = *std::min_element(eps_grid.begin(), eps_grid.end());
  est.fit_hi = *std::max_element(eps_grid.begin(), eps_grid.end());
  est.scales = static_cast<int>(eps_grid.size());
  est.residual = fit.rms_residual;
  est.bias_note = "sample-based covering counts lower-bound the true counts, biasing low";
  return est;
}

std::size_t ShellData::total_words() const {
  std::size_t acc = 0;
  for (std::size_t c : counts) acc += c;
  return acc;
}

ShellData scan_shells(const Representation& rho, const Signature& P, int n_min, int n_max,
                      std::size_t max_words) {
  if (n_min < 1 || n_max < n_min) throw std::invalid_argument("scan_shells: bad shell range");
  const GeneratorSet& gs = rho.generators();
  ShellData data(P);
  data.n_min = n_min;

  // trim n_max so the retained shells fit the word budget
  double budget = 0.0;
  int feasible = n_min - 1;
  for (int n = n_min; n <= n_max; ++n) {
    budget += words::sphere_size(gs, n);
    if (budget > static_cast<double>(max_words)) break;
    feasible = n;
  }
  if (feasible < n_min)
    throw std::invalid_argument("scan_shells: max_words too small for even one shell");
  data.truncated = feasible < n_max;
  data.n_max = feasible;

  const int d = rho.dim();
  const int np = P.count();
  for (int n = n_min; n <= data.n_max; ++n) {
    data.shells.push_back(n);
    data.log_s.emplace_back();
    data.log_s.back().reserve(static_cast<std::size_t>(words::sphere_size(gs, n)) * d);
    data.counts.push_back(0);
    data.min_gap.emplace_back(np, std::numeric_limits<double>::infinity());
  }

  // depth-first over reduced words, carrying the product and the product of
  // letter inverses (rescaled so entries stay representable at any depth) so
  // both singular spectra stay accurate
  struct Level {
    Eigen::MatrixXd prod;
    Eigen::MatrixXd prod_inv;
    double log_scale = 0.0;
    double log_scale_inv = 0.0;
  };
  std::vector<Level> stack(data.n_max + 1);
  stack[0] = {Eigen::MatrixXd::Identity(d, d), Eigen::MatrixXd::Identity(d, d), 0.0, 0.0};
  std::vector<words::Letter> letters;

  auto visit = [&](int depth) {
    if (depth < n_min) return;
    const int idx = depth - n_min;
    const Eigen::VectorXd logs = matrixops::stable_log_singular_values(
        stack[depth].prod, stack[depth].prod_inv, stack[depth].log_scale,
        stack[depth].log_scale_inv);
    auto& flat = data.log_s[idx];
    flat.insert(flat.end(), logs.data(), logs.data() + d);
    data.counts[idx] += 1;
    for (int k = 0; k < np; ++k) {
      const int p = P.p(k + 1);
      data.min_gap[idx][k] = std::min(data.min_gap[idx][k], logs[p - 1] - logs[p]);
    }
  };

  auto recurse = [&](auto&& self, int depth) -> void {
    if (depth == data.n_max) return;
    for (words::Letter l = 0; l < gs.alphabet_size(); ++l) {
      if (!letters.empty() && letters.back() == words::inverse_letter(l)) continue;
      const auto& a = rho.letter_matrix(l).mat();
      const auto& a_inv = rho.letter_matrix(words::inverse_letter(l)).mat();
      stack[depth + 1].prod = stack[depth].prod * a;
      stack[depth + 1].prod_inv = a_inv * stack[depth].prod_inv;
      const double ca = stack[depth + 1].prod.cwiseAbs().maxCoeff();
      stack[depth + 1].prod /= ca;
      stack[depth + 1].log_scale = stack[depth].log_scale + std::log(ca);
      const double cb = stack[depth + 1].prod_inv.cwiseAbs().maxCoeff();
      stack[depth + 1].prod_inv /= cb;
      stack[depth + 1].log_scale_inv = stack[depth].log_scale_inv + std::log(cb);
      letters.push_back(l);
      visit(depth + 1);
      self(self, depth + 1);
      letters.pop_back();
    }
  };
  recurse(recurse, 0);
  return data;
}

namespace {

// greedy minimum on a pre-sorted root vector (the shell loop is hot)
double falconer_on_sorted(const double* z, int n, double r) {
  const int m = static_cast<int>(r);
  double acc = 0.0;
  for (int k = 0; k < m && k < n; ++k) acc += z[k];
  const double frac = r - m;
  if (frac > 0.0 && m < n) acc += frac * z[m];
  return acc;
}

std::vector<double> sorted_roots_of(const Eigen::VectorXd& logs,
                                    std::span<const IndexPair> pairs) {
  std::vector<double> z(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k)
    z[k] = logs[pairs[k].i - 1] - logs[pairs[k].j - 1];
  std::sort(z.begin(), z.end());
  return z;
}

struct SortedShellRoots {
  std::vector<std::vector<double>> per_shell;  // D values per word
  std::vector<std::vector<int>> type_ids;      // per word
  std::vector<std::vector<int>> type_table;    // id -> pair-index permutation
  int d_count = 0;
};

SortedShellRoots prepare_roots(const ShellData& data, bool with_types) {
  const SeparatedPairs pairs(data.sig);
  const int dd = data.d();
  const int dc = pairs.count();
  SortedShellRoots out;
  out.d_count = dc;
  std::map<std::vector<int>, int> type_lookup;
  std::vector<double> z(dc);
  std::vector<int> perm(dc);
  for (std::size_t s = 0; s < data.shells.size(); ++s) {
    out.per_shell.emplace_back();
    out.per_shell.back().reserve(data.counts[s] * dc);
    if (with_types) out.type_ids.emplace_back();
    const auto& flat = data.log_s[s];
    for (std::size_t w = 0; w < data.counts[s]; ++w) {
      const double* logs = flat.data() + w * dd;
      for (int k = 0; k < dc; ++k)
        z[k] = logs[pairs.pairs()[k].i - 1] - logs[pairs.pairs()[k].j - 1];
      for (int k = 0; k < dc; ++k) perm[k] = k;
      std::stable_sort(perm.begin(), perm.end(),
                       [&](int a, int b) { return z[a] < z[b]; });
      for (int k = 0; k < dc; ++k) out.per_shell.back().push_back(z[perm[k]]);
      if (with_types) {
        auto [it, inserted] = type_lookup.try_emplace(perm, type_lookup.size());
        if (inserted) out.type_table.push_back(perm);
        out.type_ids.back().push_back(it->second);
      }
    }
  }
  return out;
}

PressureCurve curve_from_roots(const ShellData& data, const SortedShellRoots& roots,
                               double r, int only_type,
                               functionals::PhiIndexing indexing) {
  PressureCurve c;
  c.r = r;
  std::vector<double> xs, ys;
  std::vector<double> neg_costs;
  std::vector<double> terms;
  for (std::size_t s = 0; s < data.shells.size(); ++s) {
    neg_costs.clear();
    const auto& flat = roots.per_shell[s];
    for (std::size_t w = 0; w < data.counts[s]; ++w) {
      if (only_type >= 0 && roots.type_ids[s][w] != only_type) continue;
      const double* z = flat.data() + w * roots.d_count;
      double val;
      if (r <= 0.0) {
        val = 0.0;
      } else if (indexing == functionals::PhiIndexing::kFunctional) {
        val = falconer_on_sorted(z, roots.d_count, r);
      } else {
        val = functionals::phi_profile(std::span<const double>(z, roots.d_count), r,
                                       indexing);
      }
      neg_costs.push_back(-val);
    }
    if (neg_costs.empty()) continue;
    // log-sum-exp: deep shells underflow a direct sum of exponentials
    const double shift = *std::max_element(neg_costs.begin(), neg_costs.end());
    terms.clear();
    for (double nc : neg_costs) terms.push_back(std::exp(nc - shift));
    c.shells.push_back(data.shells[s]);
    c.log_shell_sum.push_back(shift + std::log(tree_sum(terms)));
    xs.push_back(data.shells[s]);
    ys.push_back(c.log_shell_sum.back());
  }
  if (xs.size() >= 2) {
    const LineFit fit = fit_line(xs, ys);
    c.slope = fit.slope;
    c.intercept = fit.intercept;
    c.residual = fit.rms_residual;
  } else if (xs.size() == 1) {
    c.slope = 0.0;
    c.intercept = ys[0];
    c.residual = 0.0;
  }
  return c;
}

// bisect slope(r) = 0 on [lo, hi] where slope(lo) > 0 > slope(hi)
double bisect_root(const std::function<double(double)>& slope, double lo, double hi,
                   double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (slope(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

PressureCurve pressure_curve(const ShellData& data, double r) {
  const SortedShellRoots roots = prepare_roots(data, /*with_types=*/false);
  return curve_from_roots(data, roots, r, -1, functionals::PhiIndexing::kFunctional);
}

FalconerEstimate falconer_estimate(const ShellData& data, double tol_r, bool per_type) {
  const SortedShellRoots roots = prepare_roots(data, per_type);
  const int dc = roots.d_count;

  auto slope_at = [&](double r) {
    return curve_from_roots(data, roots, r, -1, functionals::PhiIndexing::kFunctional).slope;
  };

  FalconerEstimate out;
  PressureCurve at_zero =
      curve_from_roots(data, roots, 0.0, -1, functionals::PhiIndexing::kFunctional);
  out.pressure_at_zero = at_zero.slope;
  out.curves.push_back(at_zero);

  double value = 0.0;
  if (at_zero.slope <= 0.0) {
    out.degenerate = true;
  } else {
    double hi = 1.0;
    while (hi < dc && slope_at(hi) > 0.0) hi = std::min(static_cast<double>(dc), hi * 2.0);
    if (slope_at(hi) > 0.0) {
      out.bracketed = false;  // diverges through the whole budget range
      value = dc;
    } else {
      value = bisect_root(slope_at, 0.0, hi, tol_r);
    }
  }

  PressureCurve at_root =
      curve_from_roots(data, roots, value, -1, functionals::PhiIndexing::kFunctional);
  out.curves.push_back(at_root);
  out.estimate.value = value;
  out.estimate.method = "critical-exponent";
  out.estimate.fit_lo = data.shells.empty() ? 0 : data.shells.front();
  out.estimate.fit_hi = data.shells.empty() ? 0 : data.shells.back();
  out.estimate.scales = static_cast<int>(data.shells.size());
  out.estimate.residual = at_root.residual;
  out.estimate.bias_note = "finite shells truncate the series; the fit residual records it";

  if (per_type) {
    for (std::size_t t = 0; t < roots.type_table.size(); ++t) {
      TypeCritical tc;
      tc.order = roots.type_table[t];
      for (std::size_t s = 0; s < data.shells.size(); ++s)
        tc.words += std::count(roots.type_ids[s].begin(), roots.type_ids[s].end(),
                               static_cast<int>(t));
      for (auto indexing :
           {functionals::PhiIndexing::kFunctional, functionals::PhiIndexing::kSeries}) {
        auto type_slope = [&](double r) {
          return curve_from_roots(data, roots, r, static_cast<int>(t), indexing).slope;
        };
        double crit = 0.0;
        const double eps_mass = 1e-6;
        if (type_slope(eps_mass) > 0.0) {
          double hi = 1.0;
          while (hi < dc && type_slope(hi) > 0.0)
            hi = std::min(static_cast<double>(dc), hi * 2.0);
          crit = (type_slope(hi) > 0.0) ? dc : bisect_root(type_slope, eps_mass, hi, tol_r);
        }
        if (indexing == functionals::PhiIndexing::kFunctional)
          tc.critical_functional = crit;
        else
          tc.critical_series = crit;
      }
      out.max_type_critical_functional =
          std::max(out.max_type_critical_functional, tc.critical_functional);
      out.max_type_critical_series =
          std::max(out.max_type_critical_series, tc.critical_series);
      out.per_type.push_back(std::move(tc));
    }
  }
  return out;
}

GapFitReport anosov_gap_fit(const ShellData& data) {
  GapFitReport rep;
  const int np = data.sig.count();
  std::vector<double> xs;
  for (int n : data.shells) xs.push_back(n);
  rep.worst_slope = std::numeric_limits<double>::infinity();
  for (int k = 0; k < np; ++k) {
    std::vector<double> ys;
    for (std::size_t s = 0; s < data.shells.size(); ++s) ys.push_back(data.min_gap[s][k]);
    const LineFit fit = fit_line(xs, ys);
    rep.ps.push_back(data.sig.p(k + 1));
    rep.slope.push_back(fit.slope);
    rep.intercept.push_back(fit.intercept);
    rep.worst_slope = std::min(rep.worst_slope, fit.slope);
  }
  rep.anosov_evidence = rep.worst_slope > 0.0;
  return rep;
}

GrowthEstimate growth_indicator(const ShellData& data, const Eigen::VectorXd& direction,
                                double half_angle, int t_points) {
  if (!(half_angle > 0.0)) throw std::invalid_argument("growth_indicator: need theta > 0");
  const double norm_a = direction.norm();
  if (!(norm_a > 0.0)) throw std::invalid_argument("growth_indicator: zero direction");
  const Eigen::VectorXd unit = direction / norm_a;
  const double cos_limit = std::cos(std::min(half_angle, 3.141592653589793));
  const int d = data.d();

  std::vector<double> norms;
  for (std::size_t s = 0; s < data.shells.size(); ++s) {
    const auto& flat = data.log_s[s];
    for (std::size_t w = 0; w < data.counts[s]; ++w) {
      Eigen::Map<const Eigen::VectorXd> logs(flat.data() + w * d, d);
      const double n2 = logs.norm();
      if (n2 <= 0.0) continue;
      if (logs.dot(unit) / n2 >= cos_limit) norms.push_back(n2);
    }
  }
  GrowthEstimate est;
  est.in_cone = norms.size();
  if (norms.size() < 8) return est;  // not enough mass in the cone to fit
  std::sort(norms.begin(), norms.end());
  const double t_lo = norms.front();
  const double t_hi = norms.back();
  if (!(t_hi > t_lo)) return est;
  std::vector<double> xs, ys;
  for (int i = 1; i <= t_points; ++i) {
    const double t = t_lo + (t_hi - t_lo) * i / t_points;
    const std::size_t count =
        std::upper_bound(norms.begin(), norms.end(), t) - norms.begin();
    if (count == 0) continue;
    xs.push_back(t);
    ys.push_back(std::log(static_cast<double>(count)));
  }
  if (xs.size() < 2) return est;
  const LineFit fit = fit_line(xs, ys);
  est.slope = fit.slope;
  est.points = static_cast<int>(xs.size());
  est.psi = norm_a * fit.slope;
  return est;
}

std::vector<Eigen::VectorXd> limit_cone_sample(const ShellData& data, int shell) {
  const auto it = std::find(data.shells.begin(), data.shells.end(), shell);
  if (it == data.shells.end()) throw std::invalid_argument("limit_cone_sample: shell not scanned");
  const std::size_t s = it - data.shells.begin();
  const int d = data.d();
  std::vector<Eigen::VectorXd> out;
  out.reserve(data.counts[s]);
  for (std::size_t w = 0; w < data.counts[s]; ++w) {
    Eigen::Map<const Eigen::VectorXd> logs(data.log_s[s].data() + w * d, d);
    const double n2 = logs.norm();
    if (n2 > 0.0) out.push_back(logs / n2);
  }
  return out;
}

ShadowReport shadow_cover_report(const Representation& rho, const Signature& P,
                                 const Word& ray, const ShadowParams& params) {
  if (!(params.eps > 0.0)) throw std::invalid_argument("shadow_cover_report: eps > 0 required");
  const SeparatedPairs pairs(P);
  const int dc = pairs.count();
  ShadowReport rep;
  rep.q = std::max(1, static_cast<int>(std::ceil(params.falconer_s)));
  if (rep.q > dc) rep.q = dc;
  const double zeta_target = std::log(1.0 / params.eps);

  // walk the ray until the q-th smallest root reaches log(1/eps)
  int stop = -1;
  Eigen::VectorXd logs_at_stop;
  for (std::size_t n = 1; n <= ray.length(); ++n) {
    const Eigen::VectorXd logs = matrixops::word_log_singular_values(rho, ray.prefix(n));
    std::vector<double> z = sorted_roots_of(logs, pairs.pairs());
    if (z[rep.q - 1] >= zeta_target) {
      stop = static_cast<int>(n);
      rep.zeta_q = z[rep.q - 1];
      logs_at_stop = logs;
      break;
    }
  }
  if (stop < 0)
    throw std::invalid_argument(
        "shadow_cover_report: ray too short to reach the stopping index");
  rep.stopping_index = stop;

  const Word prefix = ray.prefix(stop);
  const matrixops::UnimodularMatrix g_r = rho.evaluate(prefix);

  // covering bound exp( sum [zeta - zeta_ij]^+ ) at zeta = log(1/eps)
  double exponent = 0.0;
  for (const IndexPair& pr : pairs.pairs()) {
    const double zeta_ij = logs_at_stop[pr.i - 1] - logs_at_stop[pr.j - 1];
    exponent += std::max(0.0, zeta_target - zeta_ij);
  }
  rep.bound = std::exp(exponent);
  rep.bound_with_slack = rep.bound * std::exp(params.slack * stop);

  // empirical covering number of the sampled shadow image
  Rng rng(params.seed);
  std::set<Word> seen;
  std::vector<Flag> flags;
  for (int i = 0; i < params.samples; ++i) {
    const Word w = words::random_extension(prefix, rho.generators(), params.tail_depth, rng);
    if (!seen.insert(w).second) continue;
    ++rep.sampled;
    try {
      flags.push_back(matrixops::word_flag(rho, w, P, params.gap_tol));
    } catch (const GapError&) {
      ++rep.skipped;
    }
  }
  if (flags.empty()) throw GapError("shadow_cover_report: no shadow samples survived");
  rep.empirical_count = covering_number(MetricCloud::from_flags(flags), params.eps);
  rep.ratio = static_cast<double>(rep.empirical_count) / rep.bound;
  rep.status = (static_cast<double>(rep.empirical_count) <= rep.bound_with_slack)
                   ? "PASS"
                   : "ANOMALY";

  try {
    rep.ellipsoid_axes = flagcoords::ellipsoid_axes(g_r, P, params.gap_tol);
  } catch (const GapError&) {
    // axes stay empty; the covering data above is still valid
  }
  return rep;
}

GapTheoremReport gap_theorem_report(const GapTheoremInputs& in) {
  GapTheoremReport rep;
  const int m = in.sig.count();
  const double flag_dim = functionals::flag_dimension(in.sig);
  const double xp_dim = functionals::xp_dimension(in.sig);
  rep.flag_dim_bound = flag_dim - 0.5 * (m - 1);
  rep.xp_bound = xp_dim - m + 1;

  auto add = [&rep](std::string name, std::optional<double> lhs, double rhs, double tol) {
    TheoremLine line{std::move(name), 0.0, rhs, tol, "UNAVAILABLE"};
    if (lhs) {
      line.lhs = *lhs;
      line.status = (*lhs <= rhs + tol) ? "PASS" : "ANOMALY";
      if (line.status == "ANOMALY") rep.any_anomaly = true;
    }
    rep.lines.push_back(std::move(line));
  };

  std::optional<double> mink_vs_falc_rhs;
  if (in.falconer) mink_vs_falc_rhs = *in.falconer;
  add("minkowski-vs-falconer", in.minkowski_limit_set,
      mink_vs_falc_rhs.value_or(std::numeric_limits<double>::quiet_NaN()),
      in.tol_mink_vs_falconer);
  if (!in.falconer) rep.lines.back().status = "UNAVAILABLE";

  add("falconer-vs-flag-gap", in.falconer, rep.flag_dim_bound, in.tol_falconer_vs_bound);
  add("lyapunov-vs-falconer", in.lyapunov_dim,
      in.falconer ? *in.falconer : std::numeric_limits<double>::quiet_NaN(),
      in.tol_lyapunov_vs_falconer);
  if (!in.falconer && rep.lines.back().status != "UNAVAILABLE")
    rep.lines.back().status = "UNAVAILABLE";

  add("omega-vs-xp-gap", in.minkowski_omega, rep.xp_bound, in.tol_mink_vs_falconer);
  return rep;
}

}  // namespace anosov::dimensions
