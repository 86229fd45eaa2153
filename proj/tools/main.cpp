#include <CLI11.hpp>

#include <cstdlib>
#include <functional>
#include <iostream>
#include <string>

#include "commands.hpp"

namespace {

using lattice_reach::cli::RunConfig;

struct RawOptions {
  std::string strategy = "split-at:1";
  std::string plot_dims;
  std::size_t jobs = 0;
};

void add_common(CLI::App* sub, RunConfig& cfg, RawOptions& raw, bool with_property = true) {
  sub->add_option("--net", cfg.net_path, "network file (.nnet or .json)")->required();
  if (!with_property) return;
  sub->add_option("--property", cfg.property, "phi1..phi4 or a property JSON path")->required();
  sub->add_option("--eps", cfg.eps, "vertex classification tolerance");
  sub->add_option("--tol", cfg.tol, "containment / comparison tolerance");
  sub->add_option("--jobs", raw.jobs, "worker threads (default: LATTICE_REACH_JOBS or all cores)");
  sub->add_option("--strategy", raw.strategy, "per-layer | split-at:N");
  sub->add_option("--region-cap", cfg.region_cap, "abort above this many regions");
  sub->add_option("--out", cfg.out, "output JSON path");
  sub->add_option("--csv", cfg.csv, "output-vertex CSV path");
  sub->add_option("--plot-dims", raw.plot_dims, "output coordinates for the CSV, e.g. 0,1");
  sub->add_option("--regions-out", cfg.regions_out, "unsafe input polytopes JSON path (verify)");
  sub->add_flag("--normalize", cfg.normalize, "treat property values as raw units and apply network scaling");
  sub->add_option("--samples", cfg.samples, "sample count (sample-check)");
  sub->add_option("--seed", cfg.seed, "random seed (sample-check)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact reachable sets of ReLU networks via face lattices"};
  app.require_subcommand(1);
  RunConfig cfg;
  RawOptions raw;

  using Cmd = std::function<int(const RunConfig&)>;
  std::vector<std::pair<CLI::App*, Cmd>> commands;
  auto add = [&](const char* name, const char* help, Cmd fn, bool with_property = true) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, cfg, raw, with_property);
    commands.emplace_back(sub, std::move(fn));
  };
  add("reach", "compute the reachable set", lattice_reach::cli::cmd_reach);
  add("verify", "check a safety property (exit 0 safe, 1 unsafe)", lattice_reach::cli::cmd_verify);
  add("extract-unsafe", "write every input polytope reaching the unsafe set", lattice_reach::cli::cmd_extract_unsafe);
  add("sample-check", "validate the reachable set by random sampling", lattice_reach::cli::cmd_sample_check);
  add("info", "print the network shape", lattice_reach::cli::cmd_info, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return lattice_reach::cli::kExitError;
  }

  try {
    cfg.workers = raw.jobs > 0 ? raw.jobs : lattice_reach::default_workers();
    cfg.strategy = lattice_reach::cli::parse_strategy(raw.strategy);
    if (!raw.plot_dims.empty()) cfg.plot_dims = lattice_reach::cli::parse_plot_dims(raw.plot_dims);
    for (auto& [sub, fn] : commands) {
      if (sub->parsed()) return fn(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return lattice_reach::cli::kExitError;
  }
  return lattice_reach::cli::kExitError;
}
