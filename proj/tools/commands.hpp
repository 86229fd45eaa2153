#pragma once

// Subcommand implementations for the lattice_reach command-line tool.
// Exit codes: 0 success / safe, 1 unsafe or failed check, 2 error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lattice_reach/lattice_reach.hpp"

namespace lattice_reach::cli {

inline constexpr int kExitSafe = 0;
inline constexpr int kExitUnsafe = 1;
inline constexpr int kExitError = 2;

struct RunConfig {
  std::string net_path;
  std::string property;
  double eps = 1e-9;
  double tol = 1e-7;
  std::size_t workers = 1;
  Strategy strategy = Strategy::split_at(1);
  std::size_t region_cap = 5'000'000;
  std::string out;
  std::string csv;
  std::string regions_out;
  std::vector<std::size_t> plot_dims;
  bool normalize = false;
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
};

inline Strategy parse_strategy(const std::string& s) {
  if (s == "per-layer") return Strategy::per_layer();
  const std::string prefix = "split-at:";
  if (s.rfind(prefix, 0) == 0) {
    const std::string num = s.substr(prefix.size());
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == num.size() && !num.empty()) return Strategy::split_at(v);
  }
  throw InvalidArgument("strategy must be 'per-layer' or 'split-at:N', got '" + s + "'");
}

inline std::vector<std::size_t> parse_plot_dims(const std::string& s) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(',', start);
    if (end == std::string::npos) end = s.size();
    const std::string tok = s.substr(start, end - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stoul(tok, &used));
      if (used != tok.size()) throw InvalidArgument("");
    } catch (const std::exception&) {
      throw InvalidArgument("--plot-dims expects comma-separated indices, got '" + s + "'");
    }
    start = end + 1;
  }
  return out;
}

inline Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open network file '" + path + "'");
  if (std::filesystem::path(path).extension() == ".json") {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("network JSON: ") + e.what(), 0);
    }
    return network_from_json(j);
  }
  return parse_nnet(in);
}

inline Property load_property(const std::string& spec) {
  for (const auto& name : builtin_property_names()) {
    if (spec == name) return builtin_property(spec);
  }
  std::ifstream in(spec);
  if (!in) throw Error("'" + spec + "' is neither a built-in property nor a readable file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("property JSON: ") + e.what(), 0);
  }
  return property_from_json(j);
}

struct Prepared {
  Network net;
  Property raw;
  Property network_space;
  bool normalized = false;
};

inline Prepared prepare(const RunConfig& cfg) {
  if (cfg.net_path.empty()) throw InvalidArgument("--net is required");
  if (cfg.property.empty()) throw InvalidArgument("--property is required");
  if (!(cfg.eps > 0.0)) throw InvalidArgument("--eps must be positive");
  if (cfg.workers < 1) throw InvalidArgument("--jobs must be at least 1");
  Prepared p{load_network(cfg.net_path), load_property(cfg.property), {}, false};
  p.normalized = (cfg.normalize || !p.raw.normalized) && p.net.normalization().has_value();
  p.network_space = to_network_space(p.net, p.raw, p.normalized);
  return p;
}

inline ReachResult run_reach(const Prepared& p, const RunConfig& cfg) {
  const FaceLattice box = box_lattice(p.network_space.input_lower, p.network_space.input_upper);
  ReachConfig rc;
  rc.eps = cfg.eps;
  rc.workers = cfg.workers;
  rc.strategy = cfg.strategy;
  rc.region_cap = cfg.region_cap;
  return reach(p.net, box, rc);
}

inline Eigen::VectorXd to_raw_input(const Prepared& p, const Eigen::VectorXd& x) {
  return p.normalized ? denormalize_input(p.net, x) : x;
}

inline int cmd_reach(const RunConfig& cfg) {
  const Prepared p = prepare(cfg);
  const ReachResult r = run_reach(p, cfg);
  std::cout << "regions: " << r.stats.region_count << "\n"
            << "splits: " << r.stats.splits_performed << "\n"
            << "time_s: " << r.stats.wall_time_seconds << "\n";
  if (!cfg.out.empty()) write_json_file(cfg.out, reach_result_to_json(r));
  if (!cfg.csv.empty()) {
    std::ofstream csv(cfg.csv);
    if (!csv) throw Error("cannot open '" + cfg.csv + "' for writing");
    write_vertex_csv(csv, r, cfg.plot_dims);
  }
  return kExitSafe;
}

inline int cmd_verify(const RunConfig& cfg) {
  const Prepared p = prepare(cfg);
  const ReachResult r = run_reach(p, cfg);
  const Verdict v = check_property(p.net, r, p.network_space.unsafe, cfg.eps, cfg.workers);
  std::optional<Eigen::VectorXd> raw_witness;
  if (v.witness) raw_witness = to_raw_input(p, *v.witness);
  std::cout << (v.sat() ? "SAT" : "UNSAT") << "\n"
            << "regions: " << r.stats.region_count << "\n"
            << "unsafe_regions: " << v.unsafe_regions.size() << "\n"
            << "time_s: " << r.stats.wall_time_seconds << "\n";
  if (raw_witness) {
    std::cout << "witness:";
    for (Eigen::Index i = 0; i < raw_witness->size(); ++i) std::cout << ' ' << (*raw_witness)(i);
    std::cout << "\nwitness_verified: " << (v.witness_verified ? "yes" : "no") << "\n";
  }
  std::optional<std::string> regions_file;
  if (!cfg.regions_out.empty()) {
    write_json_file(cfg.regions_out, regions_to_json(v.unsafe_regions));
    regions_file = cfg.regions_out;
  }
  if (!cfg.out.empty()) write_json_file(cfg.out, verdict_to_json(v, raw_witness, regions_file));
  return v.sat() ? kExitUnsafe : kExitSafe;
}

inline int cmd_extract_unsafe(const RunConfig& cfg) {
  const Prepared p = prepare(cfg);
  const ReachResult r = run_reach(p, cfg);
  const auto regions = extract_unsafe_inputs(p.net, r, p.network_space.unsafe, cfg.eps, cfg.workers);
  std::cout << "regions: " << r.stats.region_count << "\n"
            << "unsafe_regions: " << regions.size() << "\n";
  if (!cfg.out.empty()) write_json_file(cfg.out, regions_to_json(regions));
  return kExitSafe;
}

inline int cmd_sample_check(const RunConfig& cfg) {
  const Prepared p = prepare(cfg);
  const ReachResult r = run_reach(p, cfg);
  const SampleReport rep = sample_check(p.net, r, p.network_space.input_lower, p.network_space.input_upper,
                                        cfg.samples, cfg.seed, cfg.tol, cfg.workers);
  nlohmann::json j = rep.to_json();
  j["regions"] = r.stats.region_count;
  std::cout << j.dump(2) << "\n";
  if (!cfg.out.empty()) write_json_file(cfg.out, j);
  return rep.passed() ? kExitSafe : kExitUnsafe;
}

inline int cmd_info(const RunConfig& cfg) {
  if (cfg.net_path.empty()) throw InvalidArgument("--net is required");
  const Network net = load_network(cfg.net_path);
  std::cout << "input_dim: " << net.input_dim() << "\n"
            << "output_dim: " << net.output_dim() << "\n"
            << "layers: " << net.layers().size() << "\n"
            << "relu_neurons: " << net.relu_neuron_count() << "\n"
            << "widths:";
  for (const auto& l : net.layers()) std::cout << ' ' << l.width();
  std::cout << "\nactivations:";
  for (const auto& l : net.layers()) std::cout << ' ' << (l.activation == Activation::ReLU ? "relu" : "linear");
  std::cout << "\nnormalization: " << (net.normalization() ? "yes" : "no") << "\n";
  return kExitSafe;
}

}  // namespace lattice_reach::cli
