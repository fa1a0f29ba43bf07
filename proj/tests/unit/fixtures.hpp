#pragma once

#include <memory>
#include <random>

#include "fpsi/experiments.hpp"

namespace fpsi::testing {

// Manufactured-solution geometry at a coarse resolution.
inline std::shared_ptr<const Discretization> example1_disc(int n, DarcyPair pair = DarcyPair::RT1P1dc) {
  auto [fluid, poro] = example1_meshes(n);
  return make_discretization(std::move(fluid), std::move(poro), pair);
}

inline Eigen::VectorXd random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(gen);
  return v;
}

inline CoupledProblem homogeneous_problem(const PhysicalParams& params) { return example1_free_problem(params); }

}  // namespace fpsi::testing
