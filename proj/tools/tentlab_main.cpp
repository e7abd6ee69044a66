#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "tentlab/experiments.hpp"
#include "tentlab/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tentlab: tent-space and Hardy-space experiments on finite doubling spaces"};
  app.set_version_flag("--version", TENTLAB_VERSION);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int threads = 0;
  auto* run = app.add_subcommand("run", "run one experiment config and write CSV + summary");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("--out", out_dir, "output directory (default: out)");
  auto* seed_opt = run->add_option("--seed", seed, "override the corpus seed");
  run->add_option("--threads", threads, "Eigen thread count (default: TENTLAB_THREADS or 1)");

  auto* list = app.add_subcommand("list", "list the available experiments");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    for (const auto& name : tentlab::experiment_names()) std::cout << name << "\n";
    return 0;
  }

  if (threads <= 0)
    if (const char* env = std::getenv("TENTLAB_THREADS")) threads = std::atoi(env);
  Eigen::setNbThreads(threads > 0 ? threads : 1);

  const std::uint64_t* seed_override = seed_opt->count() > 0 ? &seed : nullptr;
  return tentlab::run_config_file(config_path, out_dir, seed_override, std::cout);
}
