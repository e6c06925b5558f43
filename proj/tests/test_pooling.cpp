#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "opeval/error.hpp"
#include "opeval/io.hpp"
#include "opeval/estimators.hpp"
#include "opeval/pooling.hpp"

using namespace opeval;

TEST_SUITE_BEGIN("pooling");

namespace {

// 1000 singleton cases spread so the empirical shares are exactly
// [0.6, 0.3, 0.08, 0.012, 0.005, 0.003].
EvaluationDataset six_location_dataset() {
  const int counts[6] = {600, 300, 80, 12, 5, 3};
  std::vector<std::array<int, 3>> rows;
  int i = 0;
  for (int a = 0; a < 6; ++a) {
    for (int c = 0; c < counts[a]; ++c) rows.push_back({i++, a, 0});
  }
  return test::make_dataset(6, rows);
}

}  // namespace

TEST_CASE("membership uses a strict threshold comparison") {
  EvaluationDataset dataset = six_location_dataset();
  PropensityModel empirical = empirical_propensities(dataset);
  PoolingMap map = build_pooling(dataset, empirical, 0.01);
  CHECK_FALSE(map.identity);
  CHECK_FALSE(map.is_member[0]);
  CHECK_FALSE(map.is_member[1]);
  CHECK_FALSE(map.is_member[2]);
  CHECK_FALSE(map.is_member[3]);  // 0.012 >= 0.01
  CHECK(map.is_member[4]);        // 0.005
  CHECK(map.is_member[5]);        // 0.003
  CHECK(map.pooled_propensity == doctest::Approx(0.008).epsilon(1e-12));
  CHECK(map.pooled_k == 5);
  CHECK(map.forward[5] == map.pooled_index);
}

TEST_CASE("no small locations yields the identity map") {
  EvaluationDataset dataset = test::make_dataset(2, {{0, 0, 1}, {1, 1, 0}});
  PoolingMap map =
      build_pooling(dataset, empirical_propensities(dataset), 0.01);
  CHECK(map.identity);
  CHECK(map.pooled_k == 2);
}

TEST_CASE("a single small location is not pooled") {
  std::vector<std::array<int, 3>> rows;
  int i = 0;
  for (int c = 0; c < 995; ++c) rows.push_back({i++, 0, 0});
  for (int c = 0; c < 5; ++c) rows.push_back({i++, 1, 0});
  EvaluationDataset dataset = test::make_dataset(2, rows);
  PoolingMap map =
      build_pooling(dataset, empirical_propensities(dataset), 0.01);
  CHECK(map.identity);
}

TEST_CASE("threshold must lie in (0,1)") {
  EvaluationDataset dataset = test::make_dataset(2, {{0, 0, 1}, {1, 1, 0}});
  PropensityModel empirical = empirical_propensities(dataset);
  CHECK_THROWS_AS(build_pooling(dataset, empirical, 0.0), Error);
  CHECK_THROWS_AS(build_pooling(dataset, empirical, 1.0), Error);
}

TEST_CASE("identity pooling passes inputs through untouched") {
  EvaluationDataset dataset = test::make_dataset(2, {{0, 0, 1}, {1, 1, 0}});
  PredictionMatrix preds = test::make_predictions({{0.2, 0.8}, {0.4, 0.6}});
  PropensityModel empirical = empirical_propensities(dataset);
  PooledProblem pooled =
      pool_problem(dataset, preds, empirical, identity_pooling(dataset));
  CHECK(pooled.predictions.values == preds.values);
  CHECK(pooled.propensities.marginal == empirical.marginal);
  CHECK(pooled.dataset.n_locations() == 2);
}

TEST_CASE("pooled predictions are the propensity-weighted member mean") {
  EvaluationDataset dataset = six_location_dataset();
  PropensityModel empirical = empirical_propensities(dataset);
  PoolingMap map = build_pooling(dataset, empirical, 0.01);
  PredictionMatrix preds;
  preds.n = dataset.n_individuals();
  preds.k = 6;
  preds.values.assign(preds.n * 6, 0.1);
  for (std::size_t i = 0; i < preds.n; ++i) {
    preds.at(i, 4) = 0.4;  // pi 0.005
    preds.at(i, 5) = 0.8;  // pi 0.003
  }
  PooledProblem pooled = pool_problem(dataset, preds, empirical, map);
  // (0.005*0.4 + 0.003*0.8) / 0.008 = 0.55
  CHECK(pooled.predictions.at(0, map.pooled_index) ==
        doctest::Approx(0.55).epsilon(1e-12));
  CHECK(pooled.propensities.marginal[map.pooled_index] ==
        doctest::Approx(0.008).epsilon(1e-12));

  SUBCASE("pooled propensities still sum to one") {
    double sum = 0.0;
    for (double v : pooled.propensities.marginal) sum += v;
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
  SUBCASE("historical locations map through the pool") {
    // the last individual arrived at L6
    CHECK(pooled.dataset.individual(999).historical_location ==
          map.pooled_index);
    CHECK(dataset.individual(999).historical_location == 5);
  }
  SUBCASE("estimated models pool by rowwise sums") {
    PropensityModel estimated;
    estimated.kind = PropensityModel::Kind::kEstimated;
    estimated.k = 6;
    estimated.conditional.resize(dataset.n_individuals() * 6);
    for (std::size_t i = 0; i < dataset.n_individuals(); ++i) {
      const double row[6] = {0.58, 0.31, 0.09, 0.012, 0.006, 0.002};
      for (std::size_t a = 0; a < 6; ++a) {
        estimated.conditional[i * 6 + a] = row[a];
      }
    }
    PooledProblem p2 = pool_problem(dataset, preds, estimated, map);
    CHECK(p2.propensities.at(0, map.pooled_index) ==
          doctest::Approx(0.008).epsilon(1e-12));
  }
}

TEST_CASE("pooled capacities add up") {
  test::TempDir dir("poolcaps");
  std::string data = "individual_id,case_id,location,outcome\n";
  for (int c = 0; c < 600; ++c) {
    data += "a" + std::to_string(c) + ",ca" + std::to_string(c) + ",L1,0\n";
  }
  for (int c = 0; c < 396; ++c) {
    data += "b" + std::to_string(c) + ",cb" + std::to_string(c) + ",L2,0\n";
  }
  data += "x1,cx1,L3,0\nx2,cx2,L3,0\nx3,cx3,L3,0\nx4,cx4,L4,0\n";
  test::write_file(dir.file("d.csv"), data);
  test::write_file(dir.file("c.csv"),
                   "location_id,capacity\nL1,600\nL2,400\nL3,7\nL4,3\n");
  EvaluationDataset dataset = ingest_dataset(dir.file("d.csv"), dir.file("c.csv"));
  PropensityModel empirical = empirical_propensities(dataset);
  PoolingMap map = build_pooling(dataset, empirical, 0.01);
  REQUIRE_FALSE(map.identity);
  PredictionMatrix preds;
  preds.n = dataset.n_individuals();
  preds.k = 4;
  preds.values.assign(preds.n * 4, 0.5);
  PooledProblem pooled = pool_problem(dataset, preds, empirical, map);
  CHECK(pooled.dataset.location(map.pooled_index).capacity == 10);
}

TEST_CASE("match semantics: policy and history inside the pool count as matched") {
  EvaluationDataset dataset = six_location_dataset();
  PropensityModel empirical = empirical_propensities(dataset);
  PoolingMap map = build_pooling(dataset, empirical, 0.01);
  PredictionMatrix preds;
  preds.n = dataset.n_individuals();
  preds.k = 6;
  preds.values.assign(preds.n * 6, 0.5);
  PooledProblem pooled = pool_problem(dataset, preds, empirical, map);

  // Send the case that historically went to L6 (index 999) to L5: different
  // original locations, same pool.
  std::vector<std::size_t> case_location(dataset.n_cases(), 0);
  case_location[999] = 4;
  PolicyAssignment policy = test::make_policy(dataset, case_location);
  PolicyAssignment pooled_policy = pool_policy(dataset, policy, map);
  CHECK(pooled_policy.individual_location[999] == map.pooled_index);

  EstimateReport report = ipw_estimate(pooled.dataset, pooled.propensities,
                                       pooled_policy);
  // individual 999 matches in pooled space (L6 history, L5 policy)
  std::size_t matched_at_pool = 0;
  for (std::size_t i = 0; i < pooled.dataset.n_individuals(); ++i) {
    if (pooled.dataset.individual(i).historical_location == map.pooled_index &&
        pooled_policy.individual_location[i] == map.pooled_index) {
      ++matched_at_pool;
    }
  }
  CHECK(matched_at_pool == 1);
  CHECK(report.n_matched >= 601);  // the 600 L1 stayers plus the pool match
}

TEST_CASE("resolve passes non-pooled assignments through") {
  EvaluationDataset dataset = six_location_dataset();
  PropensityModel empirical = empirical_propensities(dataset);
  PoolingMap map = build_pooling(dataset, empirical, 0.01);
  std::vector<std::size_t> case_location(dataset.n_cases(), 1);
  PolicyAssignment policy = test::make_policy(dataset, case_location);
  PolicyAssignment pooled_policy = pool_policy(dataset, policy, map);
  PolicyAssignment resolved =
      resolve_pooled_assignment(dataset, pooled_policy, map, 99);
  CHECK(resolved.case_location == policy.case_location);
}

TEST_CASE("resolution draws members proportionally and deterministically") {
  // Pool {L5: 0.005, L6: 0.003}; 10000 cases sent to the pool should split
  // close to [0.625, 0.375].
  const int counts[6] = {6000, 3000, 800, 120, 50, 30};
  std::vector<std::array<int, 3>> rows;
  int i = 0;
  for (int a = 0; a < 6; ++a) {
    for (int c = 0; c < counts[a]; ++c) rows.push_back({i++, a, 0});
  }
  EvaluationDataset dataset = test::make_dataset(6, rows);
  PropensityModel empirical = empirical_propensities(dataset);
  PoolingMap map = build_pooling(dataset, empirical, 0.01);
  REQUIRE_FALSE(map.identity);

  std::vector<std::size_t> pooled_case_location(dataset.n_cases(),
                                                map.pooled_index);
  PolicyAssignment pooled_policy;
  pooled_policy.case_location = pooled_case_location;
  pooled_policy.individual_location = pooled_case_location;

  PolicyAssignment resolved =
      resolve_pooled_assignment(dataset, pooled_policy, map, 4242);
  std::size_t at_l5 = 0, at_l6 = 0;
  for (std::size_t c = 0; c < resolved.case_location.size(); ++c) {
    if (resolved.case_location[c] == 4) ++at_l5;
    if (resolved.case_location[c] == 5) ++at_l6;
  }
  CHECK(at_l5 + at_l6 == dataset.n_cases());
  CHECK(std::abs(static_cast<double>(at_l5) / dataset.n_cases() - 0.625) <
        0.02);

  PolicyAssignment again =
      resolve_pooled_assignment(dataset, pooled_policy, map, 4242);
  CHECK(again.case_location == resolved.case_location);
  PolicyAssignment other =
      resolve_pooled_assignment(dataset, pooled_policy, map, 4243);
  CHECK(other.case_location != resolved.case_location);
}

TEST_SUITE_END();
