// Check "output 0 never exceeds 2" on a small random network and print the
// unsafe input polytopes, if any.

#include <iostream>
#include <random>

#include "lattice_reach/lattice_reach.hpp"

using namespace lattice_reach;

int main(int argc, char** argv) {
  const unsigned seed = argc > 1 ? static_cast<unsigned>(std::stoul(argv[1])) : 3;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  auto rand_mat = [&](int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = g(rng);
    return m;
  };
  Network net({{rand_mat(4, 2), rand_mat(4, 1).col(0), Activation::ReLU},
               {rand_mat(4, 4), rand_mat(4, 1).col(0), Activation::ReLU},
               {rand_mat(1, 4), rand_mat(1, 1).col(0), Activation::Linear}});

  const FaceLattice box = box_lattice(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1));
  const ReachResult r = reach(net, box, {});

  // unsafe: -y0 + 2 <= 0
  UnsafeSet unsafe{{{Halfspace(Eigen::VectorXd::Constant(1, -1.0), 2.0)}}};
  const Verdict v = check_property(net, r, unsafe, 1e-9, 1);
  std::cout << r.stats.region_count << " regions, " << (v.sat() ? "unsafe" : "safe") << "\n";
  if (v.witness) std::cout << "witness " << v.witness->transpose() << " -> " << forward(net, *v.witness) << "\n";
  for (const auto& region : v.unsafe_regions) std::cout << "unsafe polytope:\n" << region.vertices() << "\n";
}
