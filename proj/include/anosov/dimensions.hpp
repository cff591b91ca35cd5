#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anosov/flagcoords.hpp"
#include "anosov/functionals.hpp"
#include "anosov/representation.hpp"
#include "anosov/words.hpp"

namespace anosov::dimensions {

using matrixops::Flag;
using matrixops::Representation;
using matrixops::Splitting;
using words::Word;

// Point cloud with a max-over-segments Euclidean metric. Flags embed through
// per-piece projectors (Frobenius), splittings through per-block projectors,
// plain vectors as one segment; all three give the metrics used in the
// estimates.
class MetricCloud {
 public:
  static MetricCloud from_flags(const std::vector<Flag>& flags);
  static MetricCloud from_splittings(const std::vector<Splitting>& splittings);
  static MetricCloud from_vectors(const std::vector<Eigen::VectorXd>& points,
                                  int segments = 1);

  std::size_t size() const { return n_; }
  double distance(std::size_t a, std::size_t b) const;
  double diameter() const;  // exact max over pairs

 private:
  std::size_t n_ = 0;
  int point_dim_ = 0;
  std::vector<std::pair<int, int>> segments_;  // (offset, length)
  std::vector<double> features_;
};

struct SampledCloud {
  std::vector<Flag> flags;
  std::vector<Splitting> splittings;
  std::vector<Word> provenance;
  int depth = 0;
  int skipped = 0;  // gap failures
  MetricCloud metric() const;
};

// Flags of m distinct random words of length `depth`; words whose gaps fail
// are skipped and counted.
SampledCloud limit_set_sample(const Representation& rho, const Signature& P, int depth,
                              int count, std::uint64_t seed,
                              double gap_tol = matrixops::kDefaultGapTolerance);

// Eigenspace splittings of sampled words (the unstable/stable block data).
SampledCloud omega_sample(const Representation& rho, const Signature& P, int depth,
                          int count, std::uint64_t seed,
                          double gap_tol = matrixops::kDefaultGapTolerance);

// Greedy net: walk the points in index order, open a ball at every uncovered
// point. Centers are pairwise > eps apart, so the result is sandwiched
// between the eps-covering and eps-packing numbers.
std::size_t covering_number(const MetricCloud& cloud, double eps,
                            std::vector<std::size_t>* centers = nullptr);

struct DimensionEstimate {
  double value = 0.0;
  std::string method;  // box-count | critical-exponent | growth-cone
  double fit_lo = 0.0, fit_hi = 0.0;
  int scales = 0;
  double residual = 0.0;
  std::string bias_note;
};

// Least-squares slope of log N(eps) against log(1/eps); needs >= 4 scales.
DimensionEstimate minkowski_estimate(const MetricCloud& cloud,
                                     const std::vector<double>& eps_grid);

// One pass over the spheres n_min..n_max: log singular value vectors of
// every word (stable split-product form) plus per-shell minima of the gaps.
// n_max is lowered to fit max_words; `truncated` records that.
struct ShellData {
  explicit ShellData(Signature s) : sig(std::move(s)) {}

  Signature sig;
  int n_min = 0, n_max = 0;
  std::vector<int> shells;
  std::vector<std::vector<double>> log_s;  // per shell, d values per word
  std::vector<std::size_t> counts;
  std::vector<std::vector<double>> min_gap;  // per shell, one per p in P
  bool truncated = false;

  int d() const { return sig.d(); }
  std::size_t total_words() const;
};

ShellData scan_shells(const Representation& rho, const Signature& P, int n_min, int n_max,
                      std::size_t max_words);

struct PressureCurve {
  double r = 0.0;
  std::vector<int> shells;
  std::vector<double> log_shell_sum;  // log A_n(r)
  double slope = 0.0;                 // p(r)
  double intercept = 0.0;
  double residual = 0.0;
};

PressureCurve pressure_curve(const ShellData& data, double r);

struct TypeCritical {
  std::vector<int> order;        // pair indices of the type, ascending root order
  std::size_t words = 0;         // population across shells
  double critical_functional = 0.0;  // root under the kFunctional indexing
  double critical_series = 0.0;      // root under the kSeries indexing
};

struct FalconerEstimate {
  DimensionEstimate estimate;
  bool degenerate = false;  // p(0) <= 0: finite growth, critical value 0
  bool bracketed = true;
  double pressure_at_zero = 0.0;
  std::vector<PressureCurve> curves;  // the bisection trace endpoints
  std::vector<TypeCritical> per_type;
  double max_type_critical_functional = 0.0;
  double max_type_critical_series = 0.0;
};

FalconerEstimate falconer_estimate(const ShellData& data, double tol_r = 1e-3,
                                   bool per_type = true);

struct GapFitReport {
  std::vector<int> ps;
  std::vector<double> slope;      // per p
  std::vector<double> intercept;  // per p
  double worst_slope = 0.0;
  bool anosov_evidence = false;  // all slopes positive
};

// Fits min over the sphere of log(s_p/s_{p+1}) against word length.
GapFitReport anosov_gap_fit(const ShellData& data);

struct GrowthEstimate {
  double psi = 0.0;  // ||a|| * fitted rate
  double slope = 0.0;
  int points = 0;
  std::size_t in_cone = 0;
};

// Exponential rate of # { gamma : log S in cone(a, theta), ||log S|| <= T }.
GrowthEstimate growth_indicator(const ShellData& data, const Eigen::VectorXd& direction,
                                double half_angle, int t_points = 8);

// normalized log singular value vectors of one shell
std::vector<Eigen::VectorXd> limit_cone_sample(const ShellData& data, int shell);

struct ShadowParams {
  double eps = 1.0 / 256.0;
  int tail_depth = 8;
  int samples = 2000;
  std::uint64_t seed = 1;
  double slack = 0.1;  // o(R) surrogate, per letter of R
  double falconer_s = 0.0;
  double gap_tol = matrixops::kDefaultGapTolerance;
};

struct ShadowReport {
  int stopping_index = 0;  // n(rho, sigma)
  double zeta_q = 0.0;
  int q = 0;
  std::size_t empirical_count = 0;
  double bound = 0.0;          // exp(sum [zeta - zeta_ij]^+)
  double bound_with_slack = 0.0;
  double ratio = 0.0;
  int sampled = 0, skipped = 0;
  std::vector<double> ellipsoid_axes;  // predicted contraction factors at gamma_R
  std::string status;                  // PASS | ANOMALY
};

ShadowReport shadow_cover_report(const Representation& rho, const Signature& P,
                                 const Word& ray, const ShadowParams& params);

struct TheoremLine {
  std::string name;
  double lhs = 0.0, rhs = 0.0, tol = 0.0;
  std::string status;  // PASS | ANOMALY | UNAVAILABLE
};

struct GapTheoremInputs {
  explicit GapTheoremInputs(Signature s) : sig(std::move(s)) {}

  Signature sig;
  std::optional<double> falconer;
  std::optional<double> minkowski_limit_set;
  std::optional<double> minkowski_omega;
  std::optional<double> lyapunov_dim;  // at the entropy upper bound
  double tol_mink_vs_falconer = 0.2;
  double tol_falconer_vs_bound = 0.05;
  double tol_lyapunov_vs_falconer = 0.2;
};

struct GapTheoremReport {
  std::vector<TheoremLine> lines;
  double flag_dim_bound = 0.0;  // dim F_P - (M-1)/2
  double xp_bound = 0.0;        // dim X_P - M + 1
  bool any_anomaly = false;
};

// The consolidated estimate-level theorem checks; missing prerequisites
// render the matching lines UNAVAILABLE rather than failing the report.
GapTheoremReport gap_theorem_report(const GapTheoremInputs& in);

}  // namespace anosov::dimensions
