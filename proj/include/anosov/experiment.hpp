#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anosov/dimensions.hpp"
#include "anosov/jsonio.hpp"
#include "anosov/walks.hpp"

namespace anosov::experiment {

inline constexpr const char* kBuildId = "anosov-lab 1.0.0";
inline constexpr int kSchemaVersion = 1;

// config problems are reported with the offending field path
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct WalkConfig {
  std::string kind = "uniform-on-generators";  // or "table"
  std::vector<std::pair<std::string, double>> table;
  int horizon = 64;
  int trials = 1000;
  int entropy_n_max = 10;
  std::size_t support_cap = walks::kDefaultSupportCap;
  bool asserted_nonelementary = false;
};

struct ShadowConfig {
  bool present = false;
  double eps = 1.0 / 256.0;
  int tail_depth = 8;
  int samples = 2000;
  double slack = 0.1;
  std::string ray;  // empty: a seeded random ray is used
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  int d = 0;
  std::vector<std::string> generator_names;
  std::vector<Eigen::MatrixXd> generator_matrices;  // row-major in the file
  std::vector<int> signature;
  std::uint64_t seed = 1;
  double gap_tolerance = matrixops::kDefaultGapTolerance;
  double visual_metric_exponent = 1.0;

  int sample_depth = 12;
  int sample_count = 2000;
  int omega_depth = 8;  // eigen-splitting clouds lose accuracy deeper than this
  int shell_min = 6;
  int shell_max = 14;
  std::size_t max_words = 5'000'000;
  std::vector<double> eps_grid;  // coarse to fine
  double pressure_tol = 1e-3;
  bool per_type = true;
  double growth_half_angle = 0.25;
  int growth_directions = 8;

  double tol_mink_vs_falconer = 0.2;
  double tol_falconer_vs_bound = 0.05;
  double tol_lyapunov_vs_falconer = 0.2;

  std::optional<WalkConfig> walk;
  ShadowConfig shadow;

  std::string source_hash;  // fnv1a of the loaded bytes

  static ExperimentConfig load_file(const std::string& path);
  static ExperimentConfig parse(const std::string& text);
  std::string canonical_json() const;  // parse(canonical_json()) round-trips

  Signature make_signature() const;
  matrixops::Representation make_representation(std::vector<std::string>* warnings) const;
  walks::WalkMeasure make_walk_measure(const words::GeneratorSet& gs) const;
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 input error, 2 anomaly
  jsonio::JValue report;
  std::map<std::string, std::string> csv_tables;  // name -> contents
};

// Executes one subcommand against a loaded config. `threads` only affects
// scheduling of walk trials; outputs are identical for any value.
RunResult run(const ExperimentConfig& config, const std::string& subcommand, int threads = 1);

// Writes <out_dir>/<subcommand>.json (format "json") or the CSV tables
// (format "csv"); returns the written paths.
std::vector<std::string> emit(const RunResult& result, const std::string& subcommand,
                              const std::string& out_dir, const std::string& format);

}  // namespace anosov::experiment
