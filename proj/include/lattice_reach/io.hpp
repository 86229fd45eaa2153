#pragma once

// JSON and CSV emission for lattices, reach results, and verdicts.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lattice_reach/errors.hpp"
#include "lattice_reach/face_lattice.hpp"
#include "lattice_reach/reach.hpp"
#include "lattice_reach/verify.hpp"

namespace lattice_reach {

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_std(m.row(i).transpose()));
  return rows;
}

inline nlohmann::json columns_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json cols = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.cols(); ++i) cols.push_back(to_std(m.col(i)));
  return cols;
}

inline nlohmann::json lattice_to_json(const FaceLattice& lattice) {
  nlohmann::json faces = nlohmann::json::array();
  for (std::size_t k = 1; k <= lattice.dim(); ++k) {
    nlohmann::json level = nlohmann::json::array();
    for (FaceId f = 0; f < lattice.face_count(k); ++f) {
      auto ch = lattice.children(k, f);
      level.push_back({{"id", f}, {"children", std::vector<FaceId>(ch.begin(), ch.end())}});
    }
    faces.push_back(std::move(level));
  }
  return {{"ambient_dim", lattice.ambient_dim()},
          {"vertices", columns_to_json(lattice.vertices())},
          {"faces", faces}};
}

inline FaceLattice lattice_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("ambient_dim").get<std::size_t>();
    const auto& jv = j.at("vertices");
    Eigen::MatrixXd verts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(jv.size()));
    for (std::size_t i = 0; i < jv.size(); ++i) {
      auto v = jv[i].get<std::vector<double>>();
      detail::require_dim(v.size(), n, "lattice vertex");
      verts.col(static_cast<Eigen::Index>(i)) = detail::to_vector(v);
    }
    std::vector<Incidence> children(1);
    for (const auto& level : j.at("faces")) {
      Incidence inc;
      for (std::size_t f = 0; f < level.size(); ++f) {
        if (level[f].at("id").get<std::size_t>() != f) throw ParseError("lattice JSON: face ids must be dense", 0);
        for (auto c : level[f].at("children").get<std::vector<FaceId>>()) inc.push(c);
        inc.close_entry();
      }
      children.push_back(std::move(inc));
    }
    return FaceLattice(std::move(verts), std::move(children));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("lattice JSON: ") + e.what(), 0);
  }
}

/// Lineage as one sign string per ReLU layer ('+' active, '-' inactive).
inline nlohmann::json lineage_to_json(const Lineage& lineage) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t p = 0; p < lineage.size();) {
    const auto layer = lineage[p].layer;
    std::string signs;
    for (; p < lineage.size() && lineage[p].layer == layer; ++p) signs.push_back(lineage[p].active ? '+' : '-');
    out.push_back({{"layer", layer}, {"signs", signs}});
  }
  return out;
}

inline nlohmann::json stats_to_json(const ReachStats& s) {
  // Wall time is left out so identical runs serialize identically.
  return {{"region_count", s.region_count},
          {"splits_performed", s.splits_performed},
          {"degenerate_splits", s.degenerate_splits},
          {"per_layer_counts", s.per_layer_counts}};
}

inline nlohmann::json reach_result_to_json(const ReachResult& r) {
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& t : r.tuples) {
    Eigen::MatrixXd image = t.map * t.region.vertices();
    image.colwise() += t.shift;
    regions.push_back({{"lineage", lineage_to_json(t.lineage)},
                       {"input_vertices", columns_to_json(t.region.vertices())},
                       {"M", matrix_to_json(t.map)},
                       {"d", to_std(t.shift)},
                       {"output_vertices", columns_to_json(image)}});
  }
  return {{"regions", regions}, {"stats", stats_to_json(r.stats)}};
}

/// One row per output vertex: region id, vertex id, then the selected
/// output coordinates (all of them when `dims` is empty).
inline void write_vertex_csv(std::ostream& out, const ReachResult& r, const std::vector<std::size_t>& dims) {
  std::vector<std::size_t> cols = dims;
  if (cols.empty() && !r.tuples.empty()) {
    for (Eigen::Index i = 0; i < r.tuples[0].map.rows(); ++i) cols.push_back(static_cast<std::size_t>(i));
  }
  out << "region,vertex";
  for (auto c : cols) out << ",y" << c;
  out << '\n';
  char buf[32];
  for (std::size_t k = 0; k < r.tuples.size(); ++k) {
    const auto verts = output_vertices(r.tuples[k]);
    for (std::size_t v = 0; v < verts.size(); ++v) {
      out << k << ',' << v;
      for (auto c : cols) {
        if (c >= static_cast<std::size_t>(verts[v].size())) throw DimensionError("plot dimension out of range");
        std::snprintf(buf, sizeof buf, "%.17g", verts[v](static_cast<Eigen::Index>(c)));
        out << ',' << buf;
      }
      out << '\n';
    }
  }
}

inline nlohmann::json verdict_to_json(const Verdict& v, const std::optional<Eigen::VectorXd>& raw_witness,
                                      const std::optional<std::string>& regions_file) {
  nlohmann::json j = {{"status", v.sat() ? "SAT" : "UNSAT"},
                      {"unsafe_region_count", v.unsafe_regions.size()}};
  j["witness"] = raw_witness ? nlohmann::json(to_std(*raw_witness)) : nlohmann::json(nullptr);
  j["unsafe_regions_file"] = regions_file ? nlohmann::json(*regions_file) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json regions_to_json(const std::vector<FaceLattice>& regions) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : regions) arr.push_back(lattice_to_json(r));
  return {{"count", regions.size()}, {"regions", arr}};
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << j.dump() << '\n';
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace lattice_reach
