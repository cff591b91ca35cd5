#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "anosov/experiment.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::string format;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run_subcommand(const std::string& name, const Options& opt) {
  using namespace anosov::experiment;
  try {
    ExperimentConfig cfg = ExperimentConfig::load_file(opt.config_path);
    if (opt.seed_set) cfg.seed = opt.seed;
    const int threads = [] {
      const char* env = std::getenv("ANOSOV_THREADS");
      const int n = env ? std::atoi(env) : 1;
      return n >= 1 ? n : 1;
    }();
    const RunResult result = run(cfg, name, threads);
    std::string format = opt.format;
    if (format.empty())
      format = (name == "duality-test" || name == "gap-combinatorics") ? "csv" : "json";
    for (const std::string& path : emit(result, name, opt.out_dir, format))
      std::cout << "wrote " << path << "\n";
    if (result.exit_code == 2) std::cerr << "ANOMALY: see " << name << ".json\n";
    return result.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for singular-value dynamics of matrix groups"};
  app.require_subcommand(1);

  Options opt;
  const std::vector<std::string> names = {"report",      "falconer",     "minkowski",
                                          "check-gap",   "shadow",       "walk",
                                          "duality-test", "gap-combinatorics"};
  std::string chosen;
  for (const std::string& name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", opt.seed, "override the config seed")
        ->each([&opt](const std::string&) { opt.seed_set = true; });
    sub->add_option("--out", opt.out_dir, "output directory (default .)");
    sub->add_option("--format", opt.format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->callback([&chosen, name] { chosen = name; });
  }

  CLI11_PARSE(app, argc, argv);
  return run_subcommand(chosen, opt);
}
