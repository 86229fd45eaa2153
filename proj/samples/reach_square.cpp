// Reachable set of a 2-2-1 ReLU network over the unit square, printed as one
// line per linear region.

#include <iostream>

#include "lattice_reach/lattice_reach.hpp"

using namespace lattice_reach;

int main() {
  Eigen::MatrixXd w1(2, 2), w2(1, 2);
  w1 << 1, -1, 1, 1;
  w2 << 1, -1;
  Network net({{w1, Eigen::Vector2d(0.0, -1.0), Activation::ReLU},
               {w2, Eigen::VectorXd::Zero(1), Activation::Linear}});

  const FaceLattice box = box_lattice(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1));
  ReachConfig cfg;
  cfg.strategy = Strategy::per_layer();
  const ReachResult r = reach(net, box, cfg);

  std::cout << r.stats.region_count << " regions\n";
  for (const auto& t : r.tuples) {
    std::cout << "pattern";
    for (const auto& d : t.lineage) std::cout << ' ' << (d.active ? '+' : '-');
    std::cout << "  vertices " << t.region.vertex_count() << "  y = " << t.map.row(0) << " x + " << t.shift(0)
              << "\n";
  }
}
