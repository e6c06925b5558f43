#ifndef OPEVAL_BENCH_COMMON_HPP
#define OPEVAL_BENCH_COMMON_HPP

#include "opeval/assignment.hpp"
#include "opeval/simulation.hpp"

namespace bench {

struct Fixture {
  opeval::SyntheticPopulation population;
  opeval::PolicyAssignment policy;
};

// Synthetic population with an offline-optimal policy, sized by the
// benchmark range arguments.
inline Fixture make_fixture(std::size_t n, std::size_t k,
                            std::uint64_t seed = 12345) {
  opeval::SyntheticConfig config;
  config.n = n;
  config.k = k;
  config.covariate_dim = 3;
  config.prediction_noise = 0.1;
  config.seed = seed;
  Fixture f{opeval::generate_population(config), {}};
  f.policy = opeval::offline_assign(
      f.population.dataset,
      opeval::build_assignment_problem(f.population.dataset,
                                       f.population.predictions));
  return f;
}

}  // namespace bench

#endif  // OPEVAL_BENCH_COMMON_HPP
