#pragma once

#include <span>
#include <vector>

#include "anosov/matrixops.hpp"
#include "anosov/signature.hpp"

namespace anosov::functionals {

using matrixops::WeylVector;

// root values a_i - a_j for each separated pair, aligned with pairs()
std::vector<double> root_values(const WeylVector& a, const SeparatedPairs& s);

// Minimum of sum r_ij * alpha_ij over 0 <= r_ij <= 1 with sum r_ij >= r.
// Greedy on the sorted roots; equals the LP optimum.
double falconer_functional(const WeylVector& a, const Signature& P, double r);

// Maximum of sum r_ij over 0 <= r_ij <= 1 with sum r_ij * alpha_ij <= h.
// Greedy dual; clamps at #S(P).
double lyapunov_functional(const WeylVector& a, const Signature& P, double h);

// An admissible coefficient assignment, one weight in [0,1] per separated
// pair, aligned with SeparatedPairs::pairs().
struct CoefficientProfile {
  std::vector<double> weights;
  double mass() const;                                // sum of weights
  double cost(std::span<const double> roots) const;   // weighted root sum
};

// the greedy optimizers behind the two functionals
CoefficientProfile falconer_optimizer(const WeylVector& a, const Signature& P, double r);
CoefficientProfile lyapunov_optimizer(const WeylVector& a, const Signature& P, double h);

// Exhaustive vertex-enumeration verifiers for the two functionals (d <= 5).
double lp_falconer_oracle(const WeylVector& a, const Signature& P, double r);
double lp_lyapunov_oracle(const WeylVector& a, const Signature& P, double h);

struct DualityReport {
  bool roots_positive = false;
  int grid_points = 0;
  double max_err_l_of_f = 0.0;  // | L_{F_r(a)}(a) - r |
  double max_err_f_of_l = 0.0;  // | F_{L_h(a)}(a) - h |
};

// Round-trip check of the inverse relation on a uniform grid; precondition
// (all roots strictly positive) is reported, not asserted.
DualityReport duality_check(const WeylVector& a, const Signature& P, int grid_points = 64);

// Ordering of the separated pairs by non-decreasing root value, ties broken
// lexicographically in (i,j).
struct TypeOrder {
  std::vector<IndexPair> order;
  bool operator==(const TypeOrder&) const = default;
};

TypeOrder type_of(const WeylVector& a, const Signature& P);

// Two indexing conventions for the partial-mass linear functional on sorted
// root values; they agree for mass <= 1 and differ elsewhere, so both are
// exposed and both get reported.
enum class PhiIndexing {
  kFunctional,  // q with q-1 < mass <= q: sum_{k<q} z_k + (mass-q+1) z_q
  kSeries,      // q' with q' < mass <= q'+1: sum_{k<q'-1} z_k + (mass-q'+1) z_q'
};

double phi_profile(std::span<const double> zetas_nondecreasing, double mass,
                   PhiIndexing indexing);

// phi evaluated at a's own type order (kFunctional indexing)
double phi_type(const WeylVector& a, const Signature& P, double dim_f);

struct GapCombinatorics {
  int k = 0;
  int a_k = 0;                                // a_k(P)
  std::vector<std::pair<int, int>> b_k;       // (p, b_k(p)), in enumeration order
  long slack = 0;                             // M a_k - sum b_k - M(M-1)/2
  std::vector<int> a_k_partial;               // a_k(A_i) for i = 1..M
  bool claim_monotone = false;                // a_k(A_{i+1}) >= a_k(A_i) + 1
  bool claim_dominates = false;               // a_k(A_i) >= b_k(p_i)
};

// Exact integer counting for the inductive inequality, with the enumeration
// |p_1 - k| >= ... >= |p_M - k|.
GapCombinatorics gap_combinatorics(const Signature& P, int k);

// p_1 (d - p_1) + (p_2 - p_1)(d - p_2) + ... ; equals #S(P)
int flag_dimension(const Signature& P);

// d^2 - sum (p_k - p_{k-1})^2, the dimension of the splitting space
int xp_dimension(const Signature& P);

struct LyapunovDimension {
  double value = 0.0;        // L_h(lambda)
  double upper_bound = 0.0;  // #S(P) - (sum of roots - h)/(lambda_1 - lambda_d)
};

LyapunovDimension lyapunov_dimension(double h, const WeylVector& lambda, const Signature& P);

}  // namespace anosov::functionals
