#include "anosov/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "anosov/numeric.hpp"
#include "json.hpp"

namespace anosov::experiment {

namespace {

using jsonio::JValue;
using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

const json& member(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing required field");
  return *it;
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    fail(path + "." + key, "wrong type");
  }
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig c;
  c.source_hash = jsonio::hex64(jsonio::fnv1a64(text));

  c.schema_version = get_or<int>(j, "schema_version", -1, "config");
  if (c.schema_version != kSchemaVersion)
    fail("config.schema_version", "expected " + std::to_string(kSchemaVersion));
  c.d = member(j, "d", "config").get<int>();
  if (c.d < 2 || c.d > matrixops::kMaxDimension)
    fail("config.d", "must lie in [2, " + std::to_string(matrixops::kMaxDimension) + "]");
  c.seed = get_or<std::uint64_t>(j, "seed", 1, "config");

  const json& gens = member(j, "generators", "config");
  if (!gens.is_array() || gens.empty()) fail("config.generators", "expected a nonempty array");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::string path = "config.generators[" + std::to_string(i) + "]";
    const json& g = gens[i];
    const std::string name = member(g, "name", path).get<std::string>();
    const json& mat = member(g, "matrix", path);
    if (!mat.is_array() || static_cast<int>(mat.size()) != c.d * c.d)
      fail(path + ".matrix", "expected " + std::to_string(c.d * c.d) + " row-major entries");
    Eigen::MatrixXd m(c.d, c.d);
    for (int r = 0; r < c.d; ++r)
      for (int col = 0; col < c.d; ++col) {
        const json& v = mat[r * c.d + col];
        if (!v.is_number()) fail(path + ".matrix", "entries must be numbers");
        m(r, col) = v.get<double>();
      }
    c.generator_names.push_back(name);
    c.generator_matrices.push_back(std::move(m));
  }

  const json& sig = member(j, "signature", "config");
  if (!sig.is_array() || sig.empty()) fail("config.signature", "expected a nonempty array");
  for (const json& v : sig) c.signature.push_back(v.get<int>());
  for (int p : c.signature)
    if (p < 1 || p >= c.d)
      fail("config.signature", "entries must lie in [1, d-1]; got " + std::to_string(p));
  for (std::size_t k = 1; k < c.signature.size(); ++k)
    if (c.signature[k] <= c.signature[k - 1])
      fail("config.signature", "entries must be strictly increasing");

  c.gap_tolerance = get_or<double>(j, "gap_tolerance", c.gap_tolerance, "config");
  if (!(c.gap_tolerance > 0.0)) fail("config.gap_tolerance", "must be positive");
  c.visual_metric_exponent =
      get_or<double>(j, "visual_metric_exponent", c.visual_metric_exponent, "config");
  if (!(c.visual_metric_exponent > 0.0)) fail("config.visual_metric_exponent", "must be positive");

  if (j.contains("limit_set")) {
    const json& ls = j["limit_set"];
    c.sample_depth = get_or<int>(ls, "depth", c.sample_depth, "config.limit_set");
    c.sample_count = get_or<int>(ls, "samples", c.sample_count, "config.limit_set");
    c.omega_depth = get_or<int>(ls, "omega_depth", std::min(c.omega_depth, c.sample_depth),
                                "config.limit_set");
  } else {
    c.omega_depth = std::min(c.omega_depth, c.sample_depth);
  }
  if (c.sample_depth < 1 || c.sample_count < 1 || c.omega_depth < 1)
    fail("config.limit_set", "depth, samples and omega_depth must be positive");

  if (j.contains("shells")) {
    const json& sh = j["shells"];
    c.shell_min = get_or<int>(sh, "n_min", c.shell_min, "config.shells");
    c.shell_max = get_or<int>(sh, "n_max", c.shell_max, "config.shells");
    c.max_words = get_or<std::size_t>(sh, "max_words", c.max_words, "config.shells");
  }
  if (c.shell_min < 1 || c.shell_max < c.shell_min || c.max_words < 1)
    fail("config.shells", "need 1 <= n_min <= n_max and positive max_words");

  if (j.contains("eps_grid")) {
    const json& eg = j["eps_grid"];
    if (eg.contains("values")) {
      for (const json& v : eg["values"]) c.eps_grid.push_back(v.get<double>());
    } else {
      const int coarse = get_or<int>(eg, "log2_coarse", -3, "config.eps_grid");
      const int fine = get_or<int>(eg, "log2_fine", -9, "config.eps_grid");
      if (fine > coarse) fail("config.eps_grid", "log2_fine must be <= log2_coarse");
      for (int e = coarse; e >= fine; --e) c.eps_grid.push_back(std::ldexp(1.0, e));
    }
  } else {
    for (int e = -3; e >= -9; --e) c.eps_grid.push_back(std::ldexp(1.0, e));
  }
  for (double e : c.eps_grid)
    if (!(e > 0.0)) fail("config.eps_grid", "scales must be positive");

  if (j.contains("pressure")) {
    const json& pr = j["pressure"];
    c.pressure_tol = get_or<double>(pr, "bisection_tol", c.pressure_tol, "config.pressure");
    c.per_type = get_or<bool>(pr, "per_type", c.per_type, "config.pressure");
  }
  if (!(c.pressure_tol > 0.0)) fail("config.pressure.bisection_tol", "must be positive");

  if (j.contains("growth")) {
    const json& gr = j["growth"];
    c.growth_half_angle = get_or<double>(gr, "half_angle", c.growth_half_angle, "config.growth");
    c.growth_directions = get_or<int>(gr, "directions", c.growth_directions, "config.growth");
  }
  if (!(c.growth_half_angle > 0.0) || c.growth_directions < 1)
    fail("config.growth", "half_angle must be positive and directions >= 1");

  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    c.tol_mink_vs_falconer =
        get_or<double>(t, "mink_vs_falconer", c.tol_mink_vs_falconer, "config.tolerances");
    c.tol_falconer_vs_bound =
        get_or<double>(t, "falconer_vs_bound", c.tol_falconer_vs_bound, "config.tolerances");
    c.tol_lyapunov_vs_falconer =
        get_or<double>(t, "lyapunov_vs_falconer", c.tol_lyapunov_vs_falconer, "config.tolerances");
  }

  if (j.contains("walk")) {
    const json& w = j["walk"];
    WalkConfig wc;
    wc.kind = get_or<std::string>(w, "kind", wc.kind, "config.walk");
    if (wc.kind != "uniform-on-generators" && wc.kind != "table")
      fail("config.walk.kind", "expected 'uniform-on-generators' or 'table'");
    if (wc.kind == "table") {
      const json& atoms = member(w, "atoms", "config.walk");
      if (!atoms.is_array() || atoms.empty()) fail("config.walk.atoms", "expected nonempty array");
      for (const json& a : atoms)
        wc.table.emplace_back(member(a, "word", "config.walk.atoms").get<std::string>(),
                              member(a, "prob", "config.walk.atoms").get<double>());
    }
    wc.horizon = get_or<int>(w, "horizon", wc.horizon, "config.walk");
    wc.trials = get_or<int>(w, "trials", wc.trials, "config.walk");
    wc.entropy_n_max = get_or<int>(w, "entropy_n_max", wc.entropy_n_max, "config.walk");
    wc.support_cap = get_or<std::size_t>(w, "support_cap", wc.support_cap, "config.walk");
    wc.asserted_nonelementary =
        get_or<bool>(w, "asserted_nonelementary", false, "config.walk");
    if (wc.horizon < 1 || wc.trials < 1 || wc.entropy_n_max < 1)
      fail("config.walk", "horizon, trials and entropy_n_max must be >= 1");
    c.walk = std::move(wc);
  }

  if (j.contains("shadow")) {
    const json& s = j["shadow"];
    c.shadow.present = true;
    c.shadow.eps = get_or<double>(s, "eps", c.shadow.eps, "config.shadow");
    c.shadow.tail_depth = get_or<int>(s, "tail_depth", c.shadow.tail_depth, "config.shadow");
    c.shadow.samples = get_or<int>(s, "samples", c.shadow.samples, "config.shadow");
    c.shadow.slack = get_or<double>(s, "slack", c.shadow.slack, "config.shadow");
    c.shadow.ray = get_or<std::string>(s, "ray", std::string(), "config.shadow");
    if (!(c.shadow.eps > 0.0) || c.shadow.samples < 1 || c.shadow.tail_depth < 1)
      fail("config.shadow", "eps, samples and tail_depth must be positive");
  }
  return c;
}

std::string ExperimentConfig::canonical_json() const {
  JValue root = JValue::object();
  root["schema_version"] = JValue(schema_version);
  root["d"] = JValue(d);
  root["seed"] = JValue(static_cast<std::int64_t>(seed));
  JValue gens = JValue::array();
  for (std::size_t i = 0; i < generator_names.size(); ++i) {
    JValue g = JValue::object();
    g["name"] = JValue(generator_names[i]);
    JValue mat = JValue::array();
    for (int r = 0; r < d; ++r)
      for (int col = 0; col < d; ++col) mat.push_back(JValue(generator_matrices[i](r, col)));
    g["matrix"] = std::move(mat);
    gens.push_back(std::move(g));
  }
  root["generators"] = std::move(gens);
  JValue sig = JValue::array();
  for (int p : signature) sig.push_back(JValue(p));
  root["signature"] = std::move(sig);
  root["gap_tolerance"] = JValue(gap_tolerance);
  root["visual_metric_exponent"] = JValue(visual_metric_exponent);
  JValue ls = JValue::object();
  ls["depth"] = JValue(sample_depth);
  ls["samples"] = JValue(sample_count);
  ls["omega_depth"] = JValue(omega_depth);
  root["limit_set"] = std::move(ls);
  JValue sh = JValue::object();
  sh["n_min"] = JValue(shell_min);
  sh["n_max"] = JValue(shell_max);
  sh["max_words"] = JValue(max_words);
  root["shells"] = std::move(sh);
  JValue eg = JValue::object();
  JValue vals = JValue::array();
  for (double e : eps_grid) vals.push_back(JValue(e));
  eg["values"] = std::move(vals);
  root["eps_grid"] = std::move(eg);
  JValue pr = JValue::object();
  pr["bisection_tol"] = JValue(pressure_tol);
  pr["per_type"] = JValue(per_type);
  root["pressure"] = std::move(pr);
  JValue gr = JValue::object();
  gr["half_angle"] = JValue(growth_half_angle);
  gr["directions"] = JValue(growth_directions);
  root["growth"] = std::move(gr);
  JValue tol = JValue::object();
  tol["mink_vs_falconer"] = JValue(tol_mink_vs_falconer);
  tol["falconer_vs_bound"] = JValue(tol_falconer_vs_bound);
  tol["lyapunov_vs_falconer"] = JValue(tol_lyapunov_vs_falconer);
  root["tolerances"] = std::move(tol);
  if (walk) {
    JValue w = JValue::object();
    w["kind"] = JValue(walk->kind);
    if (walk->kind == "table") {
      JValue atoms = JValue::array();
      for (const auto& [word, prob] : walk->table) {
        JValue a = JValue::object();
        a["word"] = JValue(word);
        a["prob"] = JValue(prob);
        atoms.push_back(std::move(a));
      }
      w["atoms"] = std::move(atoms);
    }
    w["horizon"] = JValue(walk->horizon);
    w["trials"] = JValue(walk->trials);
    w["entropy_n_max"] = JValue(walk->entropy_n_max);
    w["support_cap"] = JValue(walk->support_cap);
    w["asserted_nonelementary"] = JValue(walk->asserted_nonelementary);
    root["walk"] = std::move(w);
  }
  if (shadow.present) {
    JValue s = JValue::object();
    s["eps"] = JValue(shadow.eps);
    s["tail_depth"] = JValue(shadow.tail_depth);
    s["samples"] = JValue(shadow.samples);
    s["slack"] = JValue(shadow.slack);
    if (!shadow.ray.empty()) s["ray"] = JValue(shadow.ray);
    root["shadow"] = std::move(s);
  }
  return root.dump();
}

Signature ExperimentConfig::make_signature() const { return Signature(d, signature); }

matrixops::Representation ExperimentConfig::make_representation(
    std::vector<std::string>* warnings) const {
  std::vector<matrixops::UnimodularMatrix> mats;
  for (std::size_t i = 0; i < generator_matrices.size(); ++i) {
    try {
      mats.push_back(matrixops::UnimodularMatrix::from_entries(generator_matrices[i]));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config.generators['" + generator_names[i] + "']: " + e.what());
    }
    if (mats.back().was_normalized() && warnings)
      warnings->push_back("generator '" + generator_names[i] +
                          "' renormalized to determinant 1");
  }
  return matrixops::Representation(words::GeneratorSet(generator_names), std::move(mats));
}

walks::WalkMeasure ExperimentConfig::make_walk_measure(const words::GeneratorSet& gs) const {
  if (!walk) throw ConfigError("config.walk: missing walk section");
  if (walk->kind == "uniform-on-generators")
    return walks::WalkMeasure::uniform_on_generators(gs);
  std::vector<std::pair<words::Word, double>> atoms;
  for (const auto& [text, prob] : walk->table)
    atoms.emplace_back(words::parse_word(gs, text), prob);
  try {
    return walks::WalkMeasure::from_table(gs, std::move(atoms));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config.walk.atoms: ") + e.what());
  }
}

namespace {

JValue warnings_block(const std::vector<std::string>& warnings) {
  JValue w = JValue::array();
  for (const auto& msg : warnings) w.push_back(JValue(msg));
  return w;
}

JValue provenance(const ExperimentConfig& c) {
  JValue p = JValue::object();
  p["build_id"] = JValue(std::string(kBuildId));
  p["config_hash"] = JValue(c.source_hash);
  p["seed"] = JValue(static_cast<std::int64_t>(c.seed));
  p["schema_version"] = JValue(kSchemaVersion);
  return p;
}

JValue estimate_block(const dimensions::DimensionEstimate& e) {
  JValue b = JValue::object();
  b["value"] = JValue(e.value);
  b["method"] = JValue(e.method);
  b["fit_lo"] = JValue(e.fit_lo);
  b["fit_hi"] = JValue(e.fit_hi);
  b["scales"] = JValue(e.scales);
  b["residual"] = JValue(e.residual);
  b["bias_note"] = JValue(e.bias_note);
  return b;
}

JValue gap_fit_block(const dimensions::GapFitReport& g) {
  JValue b = JValue::object();
  JValue per_p = JValue::array();
  for (std::size_t k = 0; k < g.ps.size(); ++k) {
    JValue row = JValue::object();
    row["p"] = JValue(g.ps[k]);
    row["slope"] = JValue(g.slope[k]);
    row["intercept"] = JValue(g.intercept[k]);
    per_p.push_back(std::move(row));
  }
  b["per_p"] = std::move(per_p);
  b["worst_slope"] = JValue(g.worst_slope);
  b["anosov_evidence"] = JValue(g.anosov_evidence);
  return b;
}

JValue falconer_block(const dimensions::FalconerEstimate& f) {
  JValue b = JValue::object();
  b["estimate"] = estimate_block(f.estimate);
  b["degenerate"] = JValue(f.degenerate);
  b["bracketed"] = JValue(f.bracketed);
  b["pressure_at_zero"] = JValue(f.pressure_at_zero);
  if (!f.per_type.empty()) {
    JValue types = JValue::array();
    for (const auto& t : f.per_type) {
      JValue row = JValue::object();
      std::string order;
      for (std::size_t k = 0; k < t.order.size(); ++k) {
        if (k) order += ' ';
        order += std::to_string(t.order[k]);
      }
      row["order"] = JValue(order);
      row["words"] = JValue(t.words);
      row["critical_functional_indexing"] = JValue(t.critical_functional);
      row["critical_series_indexing"] = JValue(t.critical_series);
      types.push_back(std::move(row));
    }
    b["per_type"] = std::move(types);
    b["max_type_critical_functional_indexing"] = JValue(f.max_type_critical_functional);
    b["max_type_critical_series_indexing"] = JValue(f.max_type_critical_series);
    b["indexing_note"] = JValue(
        "the two restricted-series indexing conventions disagree above mass 1; both reported");
  }
  return b;
}

JValue walk_lines_block(const walks::InequalityReport& rep) {
  JValue lines = JValue::array();
  for (const auto& l : rep.lines) {
    JValue row = JValue::object();
    row["name"] = JValue(l.name);
    row["lhs"] = JValue(l.lhs);
    row["rhs"] = JValue(l.rhs);
    row["status"] = JValue(l.status);
    lines.push_back(std::move(row));
  }
  return lines;
}

JValue theorem_block(const dimensions::GapTheoremReport& rep) {
  JValue b = JValue::object();
  JValue lines = JValue::array();
  for (const auto& l : rep.lines) {
    JValue row = JValue::object();
    row["name"] = JValue(l.name);
    if (l.status != "UNAVAILABLE") {
      row["lhs"] = JValue(l.lhs);
      row["rhs"] = JValue(l.rhs);
      row["tol"] = JValue(l.tol);
    }
    row["status"] = JValue(l.status);
    lines.push_back(std::move(row));
  }
  b["lines"] = std::move(lines);
  b["flag_dim_bound"] = JValue(rep.flag_dim_bound);
  b["xp_bound"] = JValue(rep.xp_bound);
  return b;
}

std::string pressure_csv(const dimensions::PressureCurve& c) {
  std::string out = "n,A_n,log_A_n,r\n";
  for (std::size_t i = 0; i < c.shells.size(); ++i) {
    out += std::to_string(c.shells[i]) + "," + csv_num(std::exp(c.log_shell_sum[i])) + "," +
           csv_num(c.log_shell_sum[i]) + "," + csv_num(c.r) + "\n";
  }
  return out;
}

std::string covering_csv(const dimensions::MetricCloud& cloud,
                         const std::vector<double>& eps_grid) {
  std::string out = "eps,N\n";
  for (double eps : eps_grid)
    out += csv_num(eps) + "," + std::to_string(dimensions::covering_number(cloud, eps)) + "\n";
  return out;
}

int threads_from_env() {
  const char* env = std::getenv("ANOSOV_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

// shared pipeline state assembled per subcommand
struct Pipeline {
  const ExperimentConfig& cfg;
  Signature sig;
  matrixops::Representation rho;
  std::vector<std::string> warnings;

  explicit Pipeline(const ExperimentConfig& c)
      : cfg(c), sig(c.make_signature()), rho(make_rho(c, warnings)) {}

  static matrixops::Representation make_rho(const ExperimentConfig& c,
                                            std::vector<std::string>& warnings) {
    return c.make_representation(&warnings);
  }

  dimensions::ShellData shells() const {
    return dimensions::scan_shells(rho, sig, cfg.shell_min, cfg.shell_max, cfg.max_words);
  }

  int clamped_sample_count(int depth) const {
    const double sphere = words::sphere_size(rho.generators(), depth);
    return static_cast<int>(std::min<double>(cfg.sample_count, sphere));
  }
};

// box-count scales below the sampling resolution C exp(-c R) are noise; the
// visual metric exponent rescales the word-length rate into the flag metric
double resolution_floor(const dimensions::GapFitReport& gap, int depth, double exponent) {
  if (!gap.anosov_evidence) return 0.0;
  return std::exp(-gap.worst_slope * exponent * depth);
}

JValue scale_window_block(const std::vector<double>& eps_grid, double floor) {
  JValue b = JValue::object();
  double eps_min = eps_grid.front();
  for (double e : eps_grid) eps_min = std::min(eps_min, e);
  b["eps_min"] = JValue(eps_min);
  b["resolution_floor"] = JValue(floor);
  b["resolved"] = JValue(eps_min >= floor);
  return b;
}

struct WalkOutputs {
  walks::EntropySequence entropy;
  double entropy_bound = 0.0;
  walks::WalkStats stats;
  walks::InequalityReport inequalities;
  bool nonelementary_heuristic = false;
  double plugin_entropy = -1.0;  // only when truncated
  int plugin_n = 0;
};

WalkOutputs run_walk(const Pipeline& pl, std::optional<double> psi_at_lambda, int threads) {
  const WalkConfig& wc = *pl.cfg.walk;
  const walks::WalkMeasure mu = pl.cfg.make_walk_measure(pl.rho.generators());
  WalkOutputs out;
  out.entropy = walks::entropy_rate(mu, wc.entropy_n_max, wc.support_cap);
  out.entropy_bound = out.entropy.upper_bound();
  out.stats =
      walks::lyapunov_exponents_mc(mu, pl.rho, wc.horizon, wc.trials, pl.cfg.seed, threads);
  out.inequalities = walks::inequality_report(out.entropy_bound, out.entropy.n_complete,
                                              out.stats.lambda, pl.sig, psi_at_lambda);
  if (!out.inequalities.all_pass() && !out.entropy.truncated) {
    // a failed line with a loose finite-n bound: retry once at a deeper horizon
    walks::EntropySequence deeper =
        walks::entropy_rate(mu, wc.entropy_n_max + 4, wc.support_cap);
    if (deeper.upper_bound() < out.entropy_bound) {
      out.entropy = deeper;
      out.entropy_bound = deeper.upper_bound();
      out.inequalities = walks::inequality_report(out.entropy_bound, out.entropy.n_complete,
                                                  out.stats.lambda, pl.sig, psi_at_lambda);
    }
  }
  if (out.entropy.truncated) {
    out.plugin_n = wc.entropy_n_max;
    out.plugin_entropy =
        walks::entropy_plugin_mc(mu, out.plugin_n, 20000, Rng::substream(pl.cfg.seed, 77));
  }
  out.nonelementary_heuristic =
      walks::nonelementary_heuristic(mu, pl.rho, Rng::substream(pl.cfg.seed, 13));
  return out;
}

JValue walk_block(const WalkOutputs& w, const WalkConfig& wc) {
  JValue b = JValue::object();
  JValue seq = JValue::array();
  for (double v : w.entropy.h_over_n) seq.push_back(JValue(v));
  b["entropy_per_n"] = std::move(seq);
  b["entropy_upper_bound"] = JValue(w.entropy_bound);
  b["entropy_n"] = JValue(w.entropy.n_complete);
  b["entropy_truncated"] = JValue(w.entropy.truncated);
  if (w.plugin_entropy >= 0.0) {
    b["entropy_plugin_estimate"] = JValue(w.plugin_entropy);
    b["entropy_plugin_n"] = JValue(w.plugin_n);
    b["entropy_plugin_note"] = JValue("plug-in sample estimate, approximate, not a bound");
  }
  JValue lambda = JValue::array();
  for (int i = 0; i < w.stats.lambda.dim(); ++i) lambda.push_back(JValue(w.stats.lambda[i]));
  b["lambda"] = std::move(lambda);
  JValue se = JValue::array();
  for (int i = 0; i < w.stats.std_error.size(); ++i) se.push_back(JValue(w.stats.std_error[i]));
  b["lambda_std_error"] = std::move(se);
  b["horizon"] = JValue(w.stats.horizon);
  b["trials"] = JValue(w.stats.trials);
  b["aborted_trials"] = JValue(w.stats.aborted_trials);
  b["inequalities"] = walk_lines_block(w.inequalities);
  b["asserted_nonelementary"] = JValue(wc.asserted_nonelementary);
  b["nonelementary_heuristic"] = JValue(w.nonelementary_heuristic);
  return b;
}

std::string entropy_csv(const WalkOutputs& w) {
  std::string out = "n,H_over_n\n";
  for (std::size_t n = 0; n < w.entropy.h_over_n.size(); ++n)
    out += std::to_string(n + 1) + "," + csv_num(w.entropy.h_over_n[n]) + "\n";
  return out;
}

std::string exponent_csv(const WalkOutputs& w) {
  std::string out = "i,lambda,std_error\n";
  for (int i = 0; i < w.stats.lambda.dim(); ++i)
    out += std::to_string(i + 1) + "," + csv_num(w.stats.lambda[i]) + "," +
           csv_num(w.stats.std_error[i]) + "\n";
  return out;
}

words::Word shadow_ray(const Pipeline& pl) {
  if (!pl.cfg.shadow.ray.empty())
    return words::parse_word(pl.rho.generators(), pl.cfg.shadow.ray);
  Rng rng(Rng::substream(pl.cfg.seed, 29));
  const int len = std::max(pl.cfg.sample_depth, 48);
  return words::random_reduced_word(pl.rho.generators(), len, rng);
}

JValue shadow_block(const dimensions::ShadowReport& rep, const words::GeneratorSet& gs,
                    const words::Word& ray) {
  JValue b = JValue::object();
  b["ray"] = JValue(words::to_string(gs, ray));
  b["stopping_index"] = JValue(rep.stopping_index);
  b["q"] = JValue(rep.q);
  b["zeta_q"] = JValue(rep.zeta_q);
  b["empirical_count"] = JValue(rep.empirical_count);
  b["bound"] = JValue(rep.bound);
  b["bound_with_slack"] = JValue(rep.bound_with_slack);
  b["ratio"] = JValue(rep.ratio);
  b["sampled"] = JValue(rep.sampled);
  b["skipped"] = JValue(rep.skipped);
  JValue axes = JValue::array();
  for (double a : rep.ellipsoid_axes) axes.push_back(JValue(a));
  b["ellipsoid_axes"] = std::move(axes);
  b["status"] = JValue(rep.status);
  return b;
}

RunResult run_report(const Pipeline& pl, int threads);
RunResult run_falconer(const Pipeline& pl);
RunResult run_minkowski(const Pipeline& pl);
RunResult run_check_gap(const Pipeline& pl);
RunResult run_walk_cmd(const Pipeline& pl, int threads);
RunResult run_shadow(const Pipeline& pl);
RunResult run_duality(const ExperimentConfig& cfg);
RunResult run_gap_combinatorics(const ExperimentConfig& cfg);

RunResult run_falconer(const Pipeline& pl) {
  RunResult res;
  const dimensions::ShellData data = pl.shells();
  const dimensions::FalconerEstimate fal =
      dimensions::falconer_estimate(data, pl.cfg.pressure_tol, pl.cfg.per_type);
  res.report = JValue::object();
  res.report["provenance"] = provenance(pl.cfg);
  res.report["warnings"] = warnings_block(pl.warnings);
  res.report["falconer"] = falconer_block(fal);
  res.report["shells_truncated"] = JValue(data.truncated);
  res.csv_tables["pressure_curve"] = pressure_csv(fal.curves.back());
  return res;
}

RunResult run_minkowski(const Pipeline& pl) {
  RunResult res;
  res.report = JValue::object();
  res.report["provenance"] = provenance(pl.cfg);
  res.report["warnings"] = warnings_block(pl.warnings);
  const int count = pl.clamped_sample_count(pl.cfg.sample_depth);
  const dimensions::SampledCloud limit = dimensions::limit_set_sample(
      pl.rho, pl.sig, pl.cfg.sample_depth, count, Rng::substream(pl.cfg.seed, 1),
      pl.cfg.gap_tolerance);
  const dimensions::MetricCloud limit_metric = limit.metric();
  res.report["limit_set"] = estimate_block(
      dimensions::minkowski_estimate(limit_metric, pl.cfg.eps_grid));
  res.report["limit_set_skipped"] = JValue(limit.skipped);
  res.csv_tables["covering_limit_set"] = covering_csv(limit_metric, pl.cfg.eps_grid);

  const dimensions::SampledCloud omega = dimensions::omega_sample(
      pl.rho, pl.sig, pl.cfg.omega_depth, pl.clamped_sample_count(pl.cfg.omega_depth),
      Rng::substream(pl.cfg.seed, 2), pl.cfg.gap_tolerance);
  const dimensions::MetricCloud omega_metric = omega.metric();
  res.report["omega"] = estimate_block(
      dimensions::minkowski_estimate(omega_metric, pl.cfg.eps_grid));
  res.report["omega_skipped"] = JValue(omega.skipped);
  res.csv_tables["covering_omega"] = covering_csv(omega_metric, pl.cfg.eps_grid);
  return res;
}

RunResult run_check_gap(const Pipeline& pl) {
  RunResult res;
  const dimensions::ShellData data = pl.shells();
  const dimensions::GapFitReport gap = dimensions::anosov_gap_fit(data);
  res.report = JValue::object();
  res.report["provenance"] = provenance(pl.cfg);
  res.report["warnings"] = warnings_block(pl.warnings);
  res.report["gap_fit"] = gap_fit_block(gap);
  std::string csv = "n,p,min_log_gap\n";
  for (std::size_t s = 0; s < data.shells.size(); ++s)
    for (int k = 0; k < pl.sig.count(); ++k)
      csv += std::to_string(data.shells[s]) + "," + std::to_string(pl.sig.p(k + 1)) + "," +
             csv_num(data.min_gap[s][k]) + "\n";
  res.csv_tables["gap_fit"] = csv;
  return res;
}

RunResult run_walk_cmd(const Pipeline& pl, int threads) {
  if (!pl.cfg.walk) throw ConfigError("config.walk: required for the walk subcommand");
  RunResult res;
  const WalkOutputs w = run_walk(pl, std::nullopt, threads);
  res.report = JValue::object();
  res.report["provenance"] = provenance(pl.cfg);
  res.report["warnings"] = warnings_block(pl.warnings);
  res.report["walk"] = walk_block(w, *pl.cfg.walk);
  res.csv_tables["entropy"] = entropy_csv(w);
  res.csv_tables["exponents"] = exponent_csv(w);
  return res;
}

RunResult run_shadow(const Pipeline& pl) {
  RunResult res;
  const dimensions::ShellData data = pl.shells();
  const dimensions::FalconerEstimate fal =
      dimensions::falconer_estimate(data, pl.cfg.pressure_tol, /*per_type=*/false);
  dimensions::ShadowParams params;
  params.eps = pl.cfg.shadow.present ? pl.cfg.shadow.eps : params.eps;
  params.tail_depth = pl.cfg.shadow.present ? pl.cfg.shadow.tail_depth : params.tail_depth;
  params.samples = pl.cfg.shadow.present ? pl.cfg.shadow.samples : params.samples;
  params.slack = pl.cfg.shadow.present ? pl.cfg.shadow.slack : params.slack;
  params.seed = Rng::substream(pl.cfg.seed, 31);
  params.falconer_s = fal.estimate.value;
  params.gap_tol = pl.cfg.gap_tolerance;
  const words::Word ray = shadow_ray(pl);
  const dimensions::ShadowReport rep =
      dimensions::shadow_cover_report(pl.rho, pl.sig, ray, params);
  res.report = JValue::object();
  res.report["provenance"] = provenance(pl.cfg);
  res.report["warnings"] = warnings_block(pl.warnings);
  res.report["falconer_estimate"] = JValue(fal.estimate.value);
  res.report["shadow"] = shadow_block(rep, pl.rho.generators(), ray);
  if (rep.status == "ANOMALY") res.exit_code = 2;
  return res;
}

RunResult run_duality(const ExperimentConfig& cfg) {
  RunResult res;
  res.report = JValue::object();
  res.report["provenance"] = provenance(cfg);
  Rng rng(cfg.seed);
  const int samples = 200;
  std::string csv = "sample,d,signature,max_err_L_of_F,max_err_F_of_L\n";
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd a(cfg.d);
    double acc = 0.0;
    for (int i = cfg.d - 1; i >= 0; --i) {
      a[i] = acc;
      acc += rng.next_in(0.1, 2.0);
    }
    const matrixops::WeylVector w = matrixops::WeylVector::sorted_from(a);
    for (const Signature& sig : all_signatures(cfg.d)) {
      const functionals::DualityReport rep = functionals::duality_check(w, sig);
      std::string sig_text;
      for (int p : sig.values()) sig_text += (sig_text.empty() ? "" : " ") + std::to_string(p);
      csv += std::to_string(s) + "," + std::to_string(cfg.d) + "," + sig_text + "," +
             csv_num(rep.max_err_l_of_f) + "," + csv_num(rep.max_err_f_of_l) + "\n";
      worst = std::max({worst, rep.max_err_l_of_f, rep.max_err_f_of_l});
    }
  }
  res.report["samples"] = JValue(samples);
  res.report["max_round_trip_error"] = JValue(worst);
  res.report["pass"] = JValue(worst <= 1e-9);
  res.csv_tables["duality"] = csv;
  return res;
}

RunResult run_gap_combinatorics(const ExperimentConfig& cfg) {
  RunResult res;
  res.report = JValue::object();
  res.report["provenance"] = provenance(cfg);
  std::string csv = "d,P,k,a_k,sum_b_k,slack,claim_dominates,claim_monotone\n";
  long min_slack = std::numeric_limits<long>::max();
  bool all_claims = true;
  for (const Signature& sig : all_signatures(cfg.d)) {
    std::string sig_text;
    for (int p : sig.values()) sig_text += (sig_text.empty() ? "" : " ") + std::to_string(p);
    for (int k = 1; k <= cfg.d - 1; ++k) {
      const functionals::GapCombinatorics g = functionals::gap_combinatorics(sig, k);
      long sum_b = 0;
      for (const auto& [p, b] : g.b_k) sum_b += b;
      csv += std::to_string(cfg.d) + "," + sig_text + "," + std::to_string(k) + "," +
             std::to_string(g.a_k) + "," + std::to_string(sum_b) + "," +
             std::to_string(g.slack) + "," + (g.claim_dominates ? "1" : "0") + "," +
             (g.claim_monotone ? "1" : "0") + "\n";
      min_slack = std::min(min_slack, g.slack);
      all_claims = all_claims && g.claim_dominates && g.claim_monotone;
    }
  }
  res.report["min_slack"] = JValue(static_cast<std::int64_t>(min_slack));
  res.report["all_claims_hold"] = JValue(all_claims);
  res.report["pass"] = JValue(min_slack >= 0 && all_claims);
  res.csv_tables["gap_combinatorics"] = csv;
  return res;
}

RunResult run_report(const Pipeline& pl, int threads) {
  RunResult res;
  res.report = JValue::object();
  res.report["provenance"] = provenance(pl.cfg);
  JValue anomalies = JValue::array();

  res.report["warnings"] = warnings_block(pl.warnings);

  const dimensions::ShellData data = pl.shells();
  res.report["shells_truncated"] = JValue(data.truncated);
  const dimensions::GapFitReport gap = dimensions::anosov_gap_fit(data);
  res.report["gap_fit"] = gap_fit_block(gap);

  dimensions::GapTheoremInputs inputs(pl.sig);
  inputs.tol_mink_vs_falconer = pl.cfg.tol_mink_vs_falconer;
  inputs.tol_falconer_vs_bound = pl.cfg.tol_falconer_vs_bound;
  inputs.tol_lyapunov_vs_falconer = pl.cfg.tol_lyapunov_vs_falconer;

  JValue bounds = JValue::object();
  bounds["flag_dimension"] = JValue(functionals::flag_dimension(pl.sig));
  bounds["separated_pairs"] = JValue(SeparatedPairs(pl.sig).count());
  bounds["xp_dimension"] = JValue(functionals::xp_dimension(pl.sig));
  bounds["flag_dim_gap_bound"] =
      JValue(functionals::flag_dimension(pl.sig) - 0.5 * (pl.sig.count() - 1));
  bounds["xp_gap_bound"] =
      JValue(static_cast<double>(functionals::xp_dimension(pl.sig) - pl.sig.count() + 1));
  res.report["bounds"] = std::move(bounds);

  if (!gap.anosov_evidence) {
    res.report["status"] = JValue("partial");
    res.report["falconer"] = JValue("unavailable");
    res.report["limit_set"] = JValue("unavailable");
    res.report["omega"] = JValue("unavailable");
    res.report["walk"] = JValue("unavailable");
    res.report["growth"] = JValue("unavailable");
    res.report["theorems"] = theorem_block(dimensions::gap_theorem_report(inputs));
    res.report["anomalies"] = std::move(anomalies);
    return res;
  }

  const dimensions::FalconerEstimate fal =
      dimensions::falconer_estimate(data, pl.cfg.pressure_tol, pl.cfg.per_type);
  res.report["falconer"] = falconer_block(fal);
  res.csv_tables["pressure_curve"] = pressure_csv(fal.curves.back());
  inputs.falconer = fal.estimate.value;

  const int count = pl.clamped_sample_count(pl.cfg.sample_depth);
  const dimensions::SampledCloud limit = dimensions::limit_set_sample(
      pl.rho, pl.sig, pl.cfg.sample_depth, count, Rng::substream(pl.cfg.seed, 1),
      pl.cfg.gap_tolerance);
  const dimensions::MetricCloud limit_metric = limit.metric();
  const dimensions::DimensionEstimate mink_limit =
      dimensions::minkowski_estimate(limit_metric, pl.cfg.eps_grid);
  res.report["limit_set"] = estimate_block(mink_limit);
  res.report["limit_set_scale_window"] = scale_window_block(
      pl.cfg.eps_grid,
      resolution_floor(gap, pl.cfg.sample_depth, pl.cfg.visual_metric_exponent));
  res.csv_tables["covering_limit_set"] = covering_csv(limit_metric, pl.cfg.eps_grid);
  inputs.minkowski_limit_set = mink_limit.value;

  const dimensions::SampledCloud omega = dimensions::omega_sample(
      pl.rho, pl.sig, pl.cfg.omega_depth, pl.clamped_sample_count(pl.cfg.omega_depth),
      Rng::substream(pl.cfg.seed, 2), pl.cfg.gap_tolerance);
  const dimensions::MetricCloud omega_metric = omega.metric();
  const dimensions::DimensionEstimate mink_omega =
      dimensions::minkowski_estimate(omega_metric, pl.cfg.eps_grid);
  res.report["omega"] = estimate_block(mink_omega);
  res.csv_tables["covering_omega"] = covering_csv(omega_metric, pl.cfg.eps_grid);
  inputs.minkowski_omega = mink_omega.value;

  // growth indicator along sampled cone directions, compared against F_r just
  // above the critical value
  {
    JValue growth = JValue::object();
    const std::vector<Eigen::VectorXd> cone =
        dimensions::limit_cone_sample(data, data.n_max);
    JValue rows = JValue::array();
    const double r_test = std::min<double>(SeparatedPairs(pl.sig).count(),
                                           fal.estimate.value + 0.1);
    int checked = 0, consistent = 0;
    for (int k = 0; k < pl.cfg.growth_directions && !cone.empty(); ++k) {
      const std::size_t idx = (cone.size() - 1) * k / std::max(1, pl.cfg.growth_directions - 1);
      const Eigen::VectorXd& dir = cone[idx];
      const dimensions::GrowthEstimate g =
          dimensions::growth_indicator(data, dir, pl.cfg.growth_half_angle);
      if (g.points < 2) continue;
      const matrixops::WeylVector a = matrixops::WeylVector::sorted_from(dir);
      const double f_r = functionals::falconer_functional(a, pl.sig, r_test);
      JValue row = JValue::object();
      row["psi_hat"] = JValue(g.psi);
      row["f_r"] = JValue(f_r);
      row["in_cone"] = JValue(g.in_cone);
      row["consistent"] = JValue(g.psi < f_r);
      rows.push_back(std::move(row));
      ++checked;
      if (g.psi < f_r) ++consistent;
    }
    growth["r_test"] = JValue(r_test);
    growth["directions"] = std::move(rows);
    growth["checked"] = JValue(checked);
    growth["consistent"] = JValue(consistent);
    res.report["growth"] = std::move(growth);
  }

  if (pl.cfg.walk) {
    // the growth indicator at the walk's own exponent direction feeds the
    // fundamental-inequality line, so run the walk first, then re-evaluate
    WalkOutputs w = run_walk(pl, std::nullopt, threads);
    const dimensions::GrowthEstimate g =
        dimensions::growth_indicator(data, w.stats.lambda.values(), pl.cfg.growth_half_angle);
    if (g.points >= 2)
      w.inequalities = walks::inequality_report(w.entropy_bound, w.entropy.n_complete,
                                                w.stats.lambda, pl.sig, g.psi);
    res.report["walk"] = walk_block(w, *pl.cfg.walk);
    res.csv_tables["entropy"] = entropy_csv(w);
    res.csv_tables["exponents"] = exponent_csv(w);
    const functionals::LyapunovDimension ld =
        functionals::lyapunov_dimension(w.entropy_bound, w.stats.lambda, pl.sig);
    JValue lyap = JValue::object();
    lyap["value_at_entropy_bound"] = JValue(ld.value);
    lyap["closed_form_upper_bound"] = JValue(ld.upper_bound);
    res.report["lyapunov_dimension"] = std::move(lyap);
    inputs.lyapunov_dim = ld.value;
  } else {
    res.report["walk"] = JValue("unavailable");
  }

  if (pl.cfg.shadow.present) {
    dimensions::ShadowParams params;
    params.eps = pl.cfg.shadow.eps;
    params.tail_depth = pl.cfg.shadow.tail_depth;
    params.samples = pl.cfg.shadow.samples;
    params.slack = pl.cfg.shadow.slack;
    params.seed = Rng::substream(pl.cfg.seed, 31);
    params.falconer_s = fal.estimate.value;
    params.gap_tol = pl.cfg.gap_tolerance;
    const words::Word ray = shadow_ray(pl);
    const dimensions::ShadowReport sh =
        dimensions::shadow_cover_report(pl.rho, pl.sig, ray, params);
    res.report["shadow"] = shadow_block(sh, pl.rho.generators(), ray);
    if (sh.status == "ANOMALY") {
      anomalies.push_back(JValue("shadow covering bound exceeded"));
      res.exit_code = 2;
    }
  }

  const dimensions::GapTheoremReport theorems = dimensions::gap_theorem_report(inputs);
  res.report["theorems"] = theorem_block(theorems);
  if (theorems.any_anomaly) {
    for (const auto& line : theorems.lines)
      if (line.status == "ANOMALY") anomalies.push_back(JValue("theorem line: " + line.name));
    res.exit_code = 2;
  }
  res.report["status"] = JValue(res.exit_code == 0 ? "ok" : "anomaly");
  res.report["anomalies"] = std::move(anomalies);
  return res;
}

}  // namespace

RunResult run(const ExperimentConfig& config, const std::string& subcommand, int threads) {
  if (threads <= 0) threads = threads_from_env();
  if (subcommand == "duality-test") return run_duality(config);
  if (subcommand == "gap-combinatorics") return run_gap_combinatorics(config);
  Pipeline pl(config);
  if (subcommand == "report") return run_report(pl, threads);
  if (subcommand == "falconer") return run_falconer(pl);
  if (subcommand == "minkowski") return run_minkowski(pl);
  if (subcommand == "check-gap") return run_check_gap(pl);
  if (subcommand == "walk") return run_walk_cmd(pl, threads);
  if (subcommand == "shadow") return run_shadow(pl);
  throw ConfigError("unknown subcommand '" + subcommand + "'");
}

std::vector<std::string> emit(const RunResult& result, const std::string& subcommand,
                              const std::string& out_dir, const std::string& format) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  auto write_file = [&](const std::string& name, const std::string& contents) {
    const std::string path = (fs::path(out_dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit: cannot write '" + path + "'");
    out << contents;
    written.push_back(path);
  };
  if (format == "json") {
    write_file(subcommand + ".json", result.report.dump());
  } else if (format == "csv") {
    write_file(subcommand + ".json", result.report.dump());
    for (const auto& [name, contents] : result.csv_tables)
      write_file(subcommand + "_" + name + ".csv", contents);
  } else {
    throw ConfigError("emit: format must be json or csv");
  }
  return written;
}

}  // namespace anosov::experiment
