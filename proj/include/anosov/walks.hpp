#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anosov/functionals.hpp"
#include "anosov/representation.hpp"
#include "anosov/words.hpp"

namespace anosov::walks {

using matrixops::Representation;
using matrixops::WeylVector;
using words::GeneratorSet;
using words::Word;

struct SupportCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultSupportCap = 5'000'000;

// Finitely supported probability measure on the group, keyed by reduced word.
class WalkMeasure {
 public:
  static WalkMeasure uniform_on_generators(const GeneratorSet& gs);
  static WalkMeasure dirac(const GeneratorSet& gs, Word w);
  static WalkMeasure from_table(const GeneratorSet& gs,
                                std::vector<std::pair<Word, double>> atoms);

  const GeneratorSet& generators() const { return gs_; }
  const std::map<Word, double>& atoms() const { return atoms_; }
  std::size_t support_size() const { return atoms_.size(); }

  double first_moment() const;
  double entropy() const;  // Shannon, pairwise-tree summed
  WalkMeasure inverse() const;
  Word sample(Rng& rng) const;

 private:
  WalkMeasure(GeneratorSet gs, std::map<Word, double> atoms);
  void rebuild_sampler();

  GeneratorSet gs_;
  std::map<Word, double> atoms_;
  std::vector<double> cumulative_;
  std::vector<const Word*> ordered_;
};

// Exact convolution keyed by reduced products; throws SupportCapExceeded when
// the result would exceed the cap.
WalkMeasure convolve(const WalkMeasure& mu, const WalkMeasure& nu,
                     std::size_t support_cap = kDefaultSupportCap);

struct EntropySequence {
  std::vector<double> h_over_n;  // H(mu^{*n})/n for n = 1..n_complete
  int n_complete = 0;
  bool truncated = false;  // support cap hit before n_max
  double upper_bound() const;  // min over computed n: a valid bound by subadditivity
};

EntropySequence entropy_rate(const WalkMeasure& mu, int n_max,
                             std::size_t support_cap = kDefaultSupportCap);

// Plug-in entropy estimate from sampled n-step products; biased, only used
// past the convolution cap and always flagged as approximate.
double entropy_plugin_mc(const WalkMeasure& mu, int n, int samples, std::uint64_t seed);

struct WalkStats {
  WeylVector lambda;
  Eigen::VectorXd std_error;
  int horizon = 0;
  int trials = 0;
  std::uint64_t seed = 0;
  int aborted_trials = 0;
};

// Exponents of random products by trial averaging, one QR
// re-orthonormalization per step. Trial t uses the substream seed
// Rng::substream(seed, t), so results do not depend on thread count.
WalkStats lyapunov_exponents_mc(const WalkMeasure& mu, const Representation& rho,
                                int horizon, int trials, std::uint64_t seed,
                                int threads = 1);

struct InequalityLine {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string status;  // PASS | INCONCLUSIVE
};

struct InequalityReport {
  double entropy_upper_bound = 0.0;
  int entropy_n = 0;
  std::vector<InequalityLine> lines;
  bool all_pass() const;
};

// Entropy-vs-exponent inequalities, evaluated with a finite-n entropy upper
// bound on the left-hand side. A PASS is evidence; a failure is reported as
// INCONCLUSIVE because the bound may simply be loose at this horizon.
InequalityReport inequality_report(double entropy_upper_bound, int entropy_n,
                                   const WeylVector& lambda, const Signature& P,
                                   std::optional<double> psi_at_lambda);

// Samples two long products and checks that their attracting flags differ; a
// cheap corroboration of the user's non-elementarity assertion.
bool nonelementary_heuristic(const WalkMeasure& mu, const Representation& rho,
                             std::uint64_t seed, int length = 24);

}  // namespace anosov::walks
