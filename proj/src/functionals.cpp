#include "anosov/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace anosov::functionals {

namespace {

std::vector<double> sorted_roots(const WeylVector& a, const Signature& P) {
  const SeparatedPairs s(P);
  std::vector<double> z = root_values(a, s);
  std::sort(z.begin(), z.end());
  return z;
}

double greedy_falconer(std::span<const double> z, double r) {
  const int d_count = static_cast<int>(z.size());
  if (r < 0.0 || r > d_count + 1e-12)
    throw std::domain_error("falconer_functional: budget outside [0, #S(P)]");
  r = std::min(r, static_cast<double>(d_count));
  const int m = static_cast<int>(std::floor(r));
  double acc = 0.0;
  for (int k = 0; k < m; ++k) acc += z[k];
  const double frac = r - m;
  if (frac > 0.0 && m < d_count) acc += frac * z[m];
  return acc;
}

double greedy_lyapunov(std::span<const double> z, double h) {
  if (h < 0.0) throw std::domain_error("lyapunov_functional: budget must be >= 0");
  double remaining = h;
  double count = 0.0;
  for (double zeta : z) {
    if (remaining >= zeta) {
      count += 1.0;
      remaining -= zeta;
    } else {
      count += remaining / zeta;  // zeta > remaining >= 0, so zeta > 0
      break;
    }
  }
  return count;
}

}  // namespace

std::vector<double> root_values(const WeylVector& a, const SeparatedPairs& s) {
  if (a.dim() != s.signature().d())
    throw std::invalid_argument("root_values: dimension mismatch");
  std::vector<double> out;
  out.reserve(s.count());
  for (const IndexPair& pr : s.pairs()) out.push_back(a[pr.i - 1] - a[pr.j - 1]);
  return out;
}

double falconer_functional(const WeylVector& a, const Signature& P, double r) {
  return greedy_falconer(sorted_roots(a, P), r);
}

double lyapunov_functional(const WeylVector& a, const Signature& P, double h) {
  return greedy_lyapunov(sorted_roots(a, P), h);
}

double CoefficientProfile::mass() const {
  double acc = 0.0;
  for (double w : weights) acc += w;
  return acc;
}

double CoefficientProfile::cost(std::span<const double> roots) const {
  if (roots.size() != weights.size())
    throw std::invalid_argument("CoefficientProfile::cost: size mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) acc += weights[k] * roots[k];
  return acc;
}

namespace {

// pair indices ordered by root value, ties lexicographic (the type order)
std::vector<int> type_permutation(const std::vector<double>& z) {
  std::vector<int> idx(z.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) { return z[x] < z[y]; });
  return idx;
}

}  // namespace

CoefficientProfile falconer_optimizer(const WeylVector& a, const Signature& P, double r) {
  const SeparatedPairs s(P);
  const std::vector<double> z = root_values(a, s);
  const int n = static_cast<int>(z.size());
  if (r < 0.0 || r > n + 1e-12)
    throw std::domain_error("falconer_optimizer: budget outside [0, #S(P)]");
  r = std::min(r, static_cast<double>(n));
  const std::vector<int> order = type_permutation(z);
  CoefficientProfile profile{std::vector<double>(n, 0.0)};
  const int m = static_cast<int>(std::floor(r));
  for (int k = 0; k < m; ++k) profile.weights[order[k]] = 1.0;
  if (r - m > 0.0 && m < n) profile.weights[order[m]] = r - m;
  return profile;
}

CoefficientProfile lyapunov_optimizer(const WeylVector& a, const Signature& P, double h) {
  if (h < 0.0) throw std::domain_error("lyapunov_optimizer: budget must be >= 0");
  const SeparatedPairs s(P);
  const std::vector<double> z = root_values(a, s);
  const std::vector<int> order = type_permutation(z);
  CoefficientProfile profile{std::vector<double>(z.size(), 0.0)};
  double remaining = h;
  for (int k : order) {
    if (remaining >= z[k]) {
      profile.weights[k] = 1.0;
      remaining -= z[k];
    } else {
      profile.weights[k] = remaining / z[k];
      break;
    }
  }
  return profile;
}

double lp_falconer_oracle(const WeylVector& a, const Signature& P, double r) {
  if (P.d() > 5) throw std::invalid_argument("lp oracle capped at d <= 5");
  const SeparatedPairs s(P);
  const std::vector<double> z = root_values(a, s);
  const int n = static_cast<int>(z.size());
  if (r < 0.0 || r > n) throw std::domain_error("lp_falconer_oracle: budget out of range");
  const int m = static_cast<int>(std::floor(r));
  const double frac = r - m;
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    const int ones = __builtin_popcount(mask);
    double cost = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) cost += z[i];
    if (ones >= r) best = std::min(best, cost);  // pure 0/1 vertex
    if (ones == m && frac > 0.0) {
      for (int j = 0; j < n; ++j)
        if (!(mask & (1u << j))) best = std::min(best, cost + frac * z[j]);
    }
  }
  return best;
}

double lp_lyapunov_oracle(const WeylVector& a, const Signature& P, double h) {
  if (P.d() > 5) throw std::invalid_argument("lp oracle capped at d <= 5");
  if (h < 0.0) throw std::domain_error("lp_lyapunov_oracle: budget must be >= 0");
  const SeparatedPairs s(P);
  const std::vector<double> z = root_values(a, s);
  const int n = static_cast<int>(z.size());
  double best = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double cost = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) cost += z[i];
    if (cost > h) continue;
    double value = __builtin_popcount(mask);
    double extra = 0.0;
    for (int j = 0; j < n; ++j) {
      if (mask & (1u << j)) continue;
      const double take = (z[j] <= 0.0) ? 1.0 : std::min(1.0, (h - cost) / z[j]);
      extra = std::max(extra, take);
    }
    best = std::max(best, value + extra);
  }
  return best;
}

DualityReport duality_check(const WeylVector& a, const Signature& P, int grid_points) {
  const std::vector<double> z = sorted_roots(a, P);
  DualityReport rep;
  rep.grid_points = grid_points;
  rep.roots_positive = std::all_of(z.begin(), z.end(), [](double v) { return v > 0.0; });
  if (!rep.roots_positive) return rep;
  const int d_count = static_cast<int>(z.size());
  const double f_top = greedy_falconer(z, d_count);
  for (int i = 0; i <= grid_points; ++i) {
    const double r = d_count * static_cast<double>(i) / grid_points;
    const double back_r = greedy_lyapunov(z, greedy_falconer(z, r));
    rep.max_err_l_of_f = std::max(rep.max_err_l_of_f, std::abs(back_r - r));
    const double h = f_top * static_cast<double>(i) / grid_points;
    const double back_h = greedy_falconer(z, greedy_lyapunov(z, h));
    rep.max_err_f_of_l = std::max(rep.max_err_f_of_l, std::abs(back_h - h));
  }
  return rep;
}

TypeOrder type_of(const WeylVector& a, const Signature& P) {
  const SeparatedPairs s(P);
  const std::vector<double> z = root_values(a, s);
  std::vector<int> idx(z.size());
  std::iota(idx.begin(), idx.end(), 0);
  // stable sort on value; the initial order is lexicographic, so ties stay lex
  std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) { return z[x] < z[y]; });
  TypeOrder t;
  t.order.reserve(idx.size());
  for (int i : idx) t.order.push_back(s.pairs()[i]);
  return t;
}

double phi_profile(std::span<const double> z, double mass, PhiIndexing indexing) {
  const int n = static_cast<int>(z.size());
  if (mass <= 0.0 || mass > n) throw std::domain_error("phi_profile: mass outside (0, #S(P)]");
  if (indexing == PhiIndexing::kFunctional || mass <= 1.0) {
    const int q = static_cast<int>(std::ceil(mass));  // q-1 < mass <= q
    double acc = 0.0;
    for (int k = 0; k + 1 < q; ++k) acc += z[k];
    acc += (mass - q + 1) * z[q - 1];
    return acc;
  }
  // series convention: q' < mass <= q'+1, coefficient mass-q'+1 on z_{q'}
  int qp = static_cast<int>(std::ceil(mass)) - 1;
  if (mass == std::floor(mass)) qp = static_cast<int>(mass) - 1;
  double acc = 0.0;
  for (int k = 0; k + 1 < qp; ++k) acc += z[k];
  acc += (mass - qp + 1) * z[qp - 1];
  return acc;
}

double phi_type(const WeylVector& a, const Signature& P, double dim_f) {
  std::vector<double> z = sorted_roots(a, P);
  return phi_profile(z, dim_f, PhiIndexing::kFunctional);
}

namespace {

// number of pairs i <= k < j separated by some element of `subset`
int count_a_k(const Signature& P, std::span<const int> subset, int k) {
  const int d = P.d();
  int count = 0;
  for (int i = 1; i <= k; ++i)
    for (int j = k + 1; j <= d; ++j)
      for (int p : subset)
        if (i <= p && p < j) {
          ++count;
          break;
        }
  return count;
}

}  // namespace

GapCombinatorics gap_combinatorics(const Signature& P, int k) {
  if (k < 1 || k > P.d() - 1) throw std::invalid_argument("gap_combinatorics: k in [1, d-1]");
  const int M = P.count();
  GapCombinatorics out;
  out.k = k;
  out.a_k = count_a_k(P, P.values(), k);

  // enumeration |p_1 - k| >= ... >= |p_M - k|, ties by ascending p
  std::vector<int> order(P.values().begin(), P.values().end());
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return std::abs(x - k) > std::abs(y - k);
  });

  long sum_b = 0;
  for (int p : order) {
    const int single[] = {p};
    const int b = count_a_k(P, single, k);
    out.b_k.emplace_back(p, b);
    sum_b += b;
  }
  out.slack = static_cast<long>(M) * out.a_k - sum_b - static_cast<long>(M) * (M - 1) / 2;

  out.claim_monotone = true;
  out.claim_dominates = true;
  std::vector<int> prefix;
  for (int i = 0; i < M; ++i) {
    prefix.push_back(order[i]);
    out.a_k_partial.push_back(count_a_k(P, prefix, k));
    if (out.a_k_partial[i] < out.b_k[i].second) out.claim_dominates = false;
    if (i > 0 && out.a_k_partial[i] < out.a_k_partial[i - 1] + 1) out.claim_monotone = false;
  }
  return out;
}

int flag_dimension(const Signature& P) {
  int acc = 0;
  for (int k = 1; k <= P.count(); ++k) acc += (P.p(k) - P.p(k - 1)) * (P.d() - P.p(k));
  return acc;
}

int xp_dimension(const Signature& P) {
  int acc = P.d() * P.d();
  for (int k = 1; k <= P.count() + 1; ++k) {
    const int block = P.p(k) - P.p(k - 1);
    acc -= block * block;
  }
  return acc;
}

LyapunovDimension lyapunov_dimension(double h, const WeylVector& lambda, const Signature& P) {
  if (h < 0.0) throw std::domain_error("lyapunov_dimension: h must be >= 0");
  const SeparatedPairs s(P);
  const std::vector<double> z = root_values(lambda, s);
  const double top = lambda[0] - lambda[lambda.dim() - 1];
  if (top <= 0.0)
    throw std::domain_error("lyapunov_dimension: degenerate exponents (lambda_1 == lambda_d)");
  LyapunovDimension out;
  out.value = lyapunov_functional(lambda, P, h);
  double total = 0.0;
  for (double v : z) total += v;
  out.upper_bound = s.count() - (total - h) / top;
  if (out.value > out.upper_bound + 1e-9)
    throw matrixops::NumericalError("lyapunov_dimension: value exceeds its closed-form bound");
  return out;
}

}  // namespace anosov::functionals
