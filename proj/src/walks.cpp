#include "anosov/walks.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "anosov/numeric.hpp"

namespace anosov::walks {

WalkMeasure::WalkMeasure(GeneratorSet gs, std::map<Word, double> atoms)
    : gs_(std::move(gs)), atoms_(std::move(atoms)) {
  rebuild_sampler();
}

void WalkMeasure::rebuild_sampler() {
  cumulative_.clear();
  ordered_.clear();
  double acc = 0.0;
  for (const auto& [w, p] : atoms_) {
    acc += p;
    cumulative_.push_back(acc);
    ordered_.push_back(&w);
  }
}

WalkMeasure WalkMeasure::uniform_on_generators(const GeneratorSet& gs) {
  std::map<Word, double> atoms;
  const double p = 1.0 / gs.alphabet_size();
  for (words::Letter l = 0; l < gs.alphabet_size(); ++l)
    atoms.emplace(Word::single(gs, l), p);
  return WalkMeasure(gs, std::move(atoms));
}

WalkMeasure WalkMeasure::dirac(const GeneratorSet& gs, Word w) {
  std::map<Word, double> atoms;
  atoms.emplace(std::move(w), 1.0);
  return WalkMeasure(gs, std::move(atoms));
}

WalkMeasure WalkMeasure::from_table(const GeneratorSet& gs,
                                    std::vector<std::pair<Word, double>> table) {
  std::map<Word, double> atoms;
  for (auto& [w, p] : table) {
    if (!(p > 0.0)) throw std::invalid_argument("WalkMeasure: probabilities must be positive");
    atoms[w] += p;
  }
  if (atoms.empty()) throw std::invalid_argument("WalkMeasure: empty support");
  std::vector<double> probs;
  probs.reserve(atoms.size());
  for (const auto& [w, p] : atoms) probs.push_back(p);
  const double total = tree_sum(probs);
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("WalkMeasure: probabilities sum to " + std::to_string(total));
  return WalkMeasure(gs, std::move(atoms));
}

double WalkMeasure::first_moment() const {
  std::vector<double> terms;
  terms.reserve(atoms_.size());
  for (const auto& [w, p] : atoms_) terms.push_back(p * static_cast<double>(w.length()));
  return tree_sum(terms);
}

double WalkMeasure::entropy() const {
  std::vector<double> terms;
  terms.reserve(atoms_.size());
  for (const auto& [w, p] : atoms_) terms.push_back(p * std::log(p));
  return -tree_sum(terms);
}

WalkMeasure WalkMeasure::inverse() const {
  std::map<Word, double> atoms;
  for (const auto& [w, p] : atoms_) atoms[w.inverse()] += p;
  return WalkMeasure(gs_, std::move(atoms));
}

Word WalkMeasure::sample(Rng& rng) const {
  const double u = rng.next_double() * cumulative_.back();
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::size_t idx = std::min<std::size_t>(it - cumulative_.begin(), ordered_.size() - 1);
  return *ordered_[idx];
}

WalkMeasure convolve(const WalkMeasure& mu, const WalkMeasure& nu, std::size_t support_cap) {
  if (!(mu.generators() == nu.generators()))
    throw std::invalid_argument("convolve: measures over different generator sets");
  std::map<Word, double> atoms;
  for (const auto& [w1, p1] : mu.atoms()) {
    for (const auto& [w2, p2] : nu.atoms()) {
      atoms[words::multiply(w1, w2)] += p1 * p2;
      if (atoms.size() > support_cap)
        throw SupportCapExceeded("convolve: support exceeds cap of " +
                                 std::to_string(support_cap));
    }
  }
  std::vector<std::pair<Word, double>> table(atoms.begin(), atoms.end());
  return WalkMeasure::from_table(mu.generators(), std::move(table));
}

double EntropySequence::upper_bound() const {
  double best = std::numeric_limits<double>::infinity();
  for (double v : h_over_n) best = std::min(best, v);
  return best;
}

EntropySequence entropy_rate(const WalkMeasure& mu, int n_max, std::size_t support_cap) {
  if (n_max < 1) throw std::invalid_argument("entropy_rate: n_max must be >= 1");
  EntropySequence seq;
  WalkMeasure power = mu;
  for (int n = 1; n <= n_max; ++n) {
    if (n > 1) {
      try {
        power = convolve(power, mu, support_cap);
      } catch (const SupportCapExceeded&) {
        seq.truncated = true;
        break;
      }
    }
    seq.h_over_n.push_back(power.entropy() / n);
    seq.n_complete = n;
  }
  return seq;
}

double entropy_plugin_mc(const WalkMeasure& mu, int n, int samples, std::uint64_t seed) {
  if (n < 1 || samples < 1) throw std::invalid_argument("entropy_plugin_mc: bad parameters");
  Rng rng(seed);
  std::map<Word, int> counts;
  for (int t = 0; t < samples; ++t) {
    Word w = Word::identity(mu.generators());
    for (int s = 0; s < n; ++s) w = words::multiply(w, mu.sample(rng));
    counts[w] += 1;
  }
  std::vector<double> terms;
  terms.reserve(counts.size());
  for (const auto& [w, c] : counts) {
    const double p = static_cast<double>(c) / samples;
    terms.push_back(p * std::log(p));
  }
  return -tree_sum(terms);
}

namespace {

// One product trial: QR-accumulated log singular values of the transposed
// product, which shares singular values with the product itself.
bool run_trial(const WalkMeasure& mu, const Representation& rho, int horizon,
               std::uint64_t seed, Eigen::VectorXd& out) {
  const int d = rho.dim();
  Rng rng(seed);
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd logs = Eigen::VectorXd::Zero(d);
  for (int step = 0; step < horizon; ++step) {
    const Word w = mu.sample(rng);
    const Eigen::MatrixXd b = rho.evaluate(w).mat().transpose() * q;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
    Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    q = qr.householderQ();
    for (int i = 0; i < d; ++i) {
      const double diag = r(i, i);
      if (diag == 0.0 || !std::isfinite(diag)) return false;
      if (diag < 0.0) q.col(i) *= -1.0;
      logs[i] += std::log(std::abs(diag));
    }
  }
  std::sort(logs.data(), logs.data() + d, std::greater<double>());
  out = logs / horizon;
  return true;
}

}  // namespace

WalkStats lyapunov_exponents_mc(const WalkMeasure& mu, const Representation& rho,
                                int horizon, int trials, std::uint64_t seed, int threads) {
  if (horizon < 1 || trials < 1)
    throw std::invalid_argument("lyapunov_exponents_mc: horizon and trials must be >= 1");
  const int d = rho.dim();
  std::vector<Eigen::VectorXd> results(trials, Eigen::VectorXd::Zero(d));
  std::vector<char> ok(trials, 0);

  auto worker = [&](int t) {
    Eigen::VectorXd r;
    if (run_trial(mu, rho, horizon, Rng::substream(seed, t), r)) {
      results[t] = r;
      ok[t] = 1;
    }
  };
  threads = std::max(1, threads);
  if (threads == 1) {
    for (int t = 0; t < trials; ++t) worker(t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i)
      pool.emplace_back([&] {
        for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) worker(t);
      });
    for (auto& th : pool) th.join();
  }

  WalkStats stats;
  stats.horizon = horizon;
  stats.trials = trials;
  stats.seed = seed;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  int good = 0;
  for (int t = 0; t < trials; ++t)
    if (ok[t]) {
      mean += results[t];
      ++good;
    }
  stats.aborted_trials = trials - good;
  if (good == 0) throw matrixops::NumericalError("lyapunov_exponents_mc: all trials overflowed");
  mean /= good;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
  for (int t = 0; t < trials; ++t)
    if (ok[t]) var += (results[t] - mean).cwiseAbs2();
  stats.std_error = (good > 1) ? ((var / (good - 1)) / good).cwiseSqrt().eval()
                               : Eigen::VectorXd::Zero(d).eval();
  stats.lambda = WeylVector::sorted_from(mean);
  return stats;
}

bool InequalityReport::all_pass() const {
  return std::all_of(lines.begin(), lines.end(),
                     [](const InequalityLine& l) { return l.status == "PASS"; });
}

InequalityReport inequality_report(double entropy_upper_bound, int entropy_n,
                                   const WeylVector& lambda, const Signature& P,
                                   std::optional<double> psi_at_lambda) {
  InequalityReport rep;
  rep.entropy_upper_bound = entropy_upper_bound;
  rep.entropy_n = entropy_n;
  const SeparatedPairs s(P);
  const std::vector<double> roots = functionals::root_values(lambda, s);

  auto add = [&rep](std::string name, double lhs, double rhs) {
    rep.lines.push_back(
        {std::move(name), lhs, rhs, lhs <= rhs + 1e-12 ? "PASS" : "INCONCLUSIVE"});
  };

  if (psi_at_lambda) add("fundamental-inequality", entropy_upper_bound, *psi_at_lambda);
  for (int p : P.values()) {
    double acc = 0.0;
    for (const IndexPair& pr : s.pairs())
      if (pr.i <= p && p < pr.j) acc += lambda[pr.i - 1] - lambda[pr.j - 1];
    add("entropy-gap-p" + std::to_string(p), entropy_upper_bound, acc);
  }
  double total = 0.0;
  for (double v : roots) total += v;
  const double top = lambda[0] - lambda[lambda.dim() - 1];
  add("main-lemma", entropy_upper_bound + 0.5 * (P.count() - 1) * top, total);
  return rep;
}

bool nonelementary_heuristic(const WalkMeasure& mu, const Representation& rho,
                             std::uint64_t seed, int length) {
  Rng rng(seed);
  auto attracting_line = [&](int trial) -> std::optional<matrixops::Subspace> {
    Rng sub(Rng::substream(seed, trial));
    Word w = Word::identity(mu.generators());
    for (int i = 0; i < length; ++i) w = words::multiply(w, mu.sample(sub));
    try {
      return matrixops::xi_p(rho.evaluate(w), 1);
    } catch (const matrixops::GapError&) {
      return std::nullopt;
    }
  };
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      const auto x = attracting_line(a), y = attracting_line(b);
      if (x && y && matrixops::grassmann_distance(*x, *y) > 1e-2) return true;
    }
  return false;
}

}  // namespace anosov::walks
