#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "opeval/error.hpp"
#include "opeval/io.hpp"
#include "opeval/rng.hpp"

using namespace opeval;

TEST_SUITE_BEGIN("dataset");

namespace {

const char* kToyIndividuals =
    "individual_id,case_id,location,outcome,x1,x2\n"
    "i1,c1,L1,1,0.5,1\n"
    "i2,c1,L1,0,0.25,2\n"
    "i3,c2,L2,1,-1.5,3\n"
    "i4,c3,L1,1,2,4\n";

}  // namespace

TEST_CASE("ingest parses the toy file") {
  test::TempDir dir("ingest");
  auto path = test::write_file(dir.file("data.csv"), kToyIndividuals);
  EvaluationDataset dataset = ingest_dataset(path);
  CHECK(dataset.n_individuals() == 4);
  CHECK(dataset.n_locations() == 2);
  CHECK(dataset.n_cases() == 3);
  CHECK(dataset.covariate_dim() == 2);
  CHECK(dataset.individual(0).outcome == 1);
  CHECK(dataset.individual(2).historical_location ==
        *dataset.find_location("L2"));
  CHECK(dataset.case_at(*dataset.find_case("c1")).members.size() == 2);
}

TEST_CASE("ingest rejects inconsistent case placement") {
  test::TempDir dir("ingest_case");
  auto path = test::write_file(dir.file("data.csv"),
                               "individual_id,case_id,location,outcome\n"
                               "i1,c1,L1,1\n"
                               "i2,c1,L2,0\n");
  CHECK_THROWS_WITH_AS(ingest_dataset(path),
                       doctest::Contains("inconsistent case placement"),
                       Error);
}

TEST_CASE("ingest rejects an empty individuals file") {
  test::TempDir dir("ingest_empty");
  auto path = test::write_file(dir.file("data.csv"),
                               "individual_id,case_id,location,outcome\n");
  CHECK_THROWS_WITH_AS(ingest_dataset(path), doctest::Contains("empty dataset"),
                       Error);
}

TEST_CASE("ingest reports malformed rows with their line number") {
  test::TempDir dir("ingest_bad");
  SUBCASE("outcome outside {0,1}") {
    auto path = test::write_file(dir.file("data.csv"),
                                 "individual_id,case_id,location,outcome\n"
                                 "i1,c1,L1,2\n");
    CHECK_THROWS_WITH_AS(ingest_dataset(path),
                         doctest::Contains("outcome outside {0,1}"), Error);
    try {
      ingest_dataset(path);
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
  }
  SUBCASE("non-numeric outcome") {
    auto path = test::write_file(dir.file("data.csv"),
                                 "individual_id,case_id,location,outcome\n"
                                 "i1,c1,L1,yes\n");
    CHECK_THROWS_AS(ingest_dataset(path), Error);
  }
  SUBCASE("wrong field count") {
    auto path = test::write_file(dir.file("data.csv"),
                                 "individual_id,case_id,location,outcome\n"
                                 "i1,c1,L1\n");
    CHECK_THROWS_WITH_AS(ingest_dataset(path), doctest::Contains("expected 4"),
                         Error);
  }
  SUBCASE("duplicate individual id") {
    auto path = test::write_file(dir.file("data.csv"),
                                 "individual_id,case_id,location,outcome\n"
                                 "i1,c1,L1,1\n"
                                 "i1,c2,L1,0\n");
    CHECK_THROWS_WITH_AS(ingest_dataset(path),
                         doctest::Contains("duplicate individual id"), Error);
  }
}

TEST_CASE("capacities extend the location set") {
  test::TempDir dir("ingest_caps");
  auto data = test::write_file(dir.file("data.csv"), kToyIndividuals);
  auto caps = test::write_file(dir.file("caps.csv"),
                               "location_id,capacity\nL1,3\nL2,1\nL9,5\n");
  EvaluationDataset dataset = ingest_dataset(data, caps);
  CHECK(dataset.n_locations() == 3);  // L9 declared but never used
  CHECK(dataset.location(*dataset.find_location("L9")).capacity == 5);
  // zero historical arrivals shows up as zero empirical propensity
  PropensityModel pi = empirical_propensities(dataset, CountingUnit::kCase);
  CHECK(pi.marginal[*dataset.find_location("L9")] == 0.0);
}

TEST_CASE("policy files respect declared capacities") {
  test::TempDir dir("policy_caps");
  auto data = test::write_file(dir.file("data.csv"), kToyIndividuals);
  auto caps = test::write_file(dir.file("caps.csv"),
                               "location_id,capacity\nL1,3\nL2,4\n");
  EvaluationDataset dataset = ingest_dataset(data, caps);
  // c1 has two members; sending everyone to L2 fits (4), everyone to L1 fits
  // (3 only if total <= 3; total is 4, so it must fail).
  auto ok = test::write_file(dir.file("ok.csv"),
                             "case_id,location\nc1,L2\nc2,L2\nc3,L1\n");
  CHECK_NOTHROW(read_policy(ok, dataset));
  auto bad = test::write_file(dir.file("bad.csv"),
                              "case_id,location\nc1,L1\nc2,L1\nc3,L1\n");
  CHECK_THROWS_WITH_AS(read_policy(bad, dataset),
                       doctest::Contains("exceeds capacity"), Error);
  SUBCASE("unknown case and location ids are rejected") {
    auto ghost_case = test::write_file(
        dir.file("ghost.csv"), "case_id,location\nc1,L2\nc2,L2\nc9,L1\n");
    CHECK_THROWS_WITH_AS(read_policy(ghost_case, dataset),
                         doctest::Contains("unknown case"), Error);
    auto ghost_loc = test::write_file(
        dir.file("ghostloc.csv"), "case_id,location\nc1,LX\nc2,L2\nc3,L1\n");
    CHECK_THROWS_WITH_AS(read_policy(ghost_loc, dataset),
                         doctest::Contains("unknown location"), Error);
  }
}

TEST_CASE("derive_individual_assignment inherits the case location") {
  EvaluationDataset dataset =
      test::make_dataset(2, {{0, 0, 1}, {0, 0, 0}, {1, 1, 1}});
  SUBCASE("single case map") {
    EvaluationDataset two =
        test::make_dataset(1, {{0, 0, 1}, {0, 0, 0}});
    auto assignment = derive_individual_assignment(two, {{"c1", "L1"}});
    CHECK(assignment.at("i1") == "L1");
    CHECK(assignment.at("i2") == "L1");
  }
  SUBCASE("two cases") {
    auto assignment =
        derive_individual_assignment(dataset, {{"c1", "L1"}, {"c2", "L2"}});
    CHECK(assignment.at("i1") == "L1");
    CHECK(assignment.at("i2") == "L1");
    CHECK(assignment.at("i3") == "L2");
  }
  SUBCASE("missing case errors") {
    CHECK_THROWS_WITH_AS(derive_individual_assignment(dataset, {{"c1", "L1"}}),
                         doctest::Contains("unassigned case"), Error);
  }
  SUBCASE("idempotent and total") {
    auto first =
        derive_individual_assignment(dataset, {{"c1", "L2"}, {"c2", "L1"}});
    auto second =
        derive_individual_assignment(dataset, {{"c1", "L2"}, {"c2", "L1"}});
    CHECK(first == second);
    CHECK(first.size() == dataset.n_individuals());
  }
}

TEST_CASE("observed_baseline is the mean outcome") {
  CHECK(observed_baseline(test::make_dataset(
            1, {{0, 0, 1}, {1, 0, 0}, {2, 0, 1}, {3, 0, 1}})) ==
        doctest::Approx(0.75).epsilon(1e-15));
  CHECK(observed_baseline(test::make_dataset(1, {{0, 0, 0}, {1, 0, 0}})) ==
        0.0);
}

TEST_CASE("baseline on a dataset shaped like a 0.337 employment rate") {
  // 1000 individuals, 337 positive outcomes.
  std::vector<std::array<int, 3>> rows;
  for (int i = 0; i < 1000; ++i) rows.push_back({i, 0, i < 337 ? 1 : 0});
  EvaluationDataset dataset = test::make_dataset(1, rows);
  CHECK(std::abs(observed_baseline(dataset) - 0.337) <= 1e-12);
}

TEST_CASE("baseline stays inside [0,1] on random datasets") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::array<int, 3>> rows;
    int n = 1 + static_cast<int>(rng.next_u64() % 40);
    for (int i = 0; i < n; ++i) {
      rows.push_back({i, static_cast<int>(rng.next_u64() % 3),
                      rng.bernoulli(0.3) ? 1 : 0});
    }
    double b = observed_baseline(test::make_dataset(3, rows));
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
  }
}

TEST_CASE("dataset round-trips through serialization") {
  test::TempDir dir("roundtrip");
  auto data = test::write_file(dir.file("data.csv"), kToyIndividuals);
  auto caps = test::write_file(dir.file("caps.csv"),
                               "location_id,capacity\nL1,3\nL2,1\n");
  EvaluationDataset original = ingest_dataset(data, caps);

  write_dataset(dir.file("out.csv"), original);
  write_capacities(dir.file("out_caps.csv"), original);
  EvaluationDataset reread =
      ingest_dataset(dir.file("out.csv"), dir.file("out_caps.csv"));

  REQUIRE(reread.n_individuals() == original.n_individuals());
  REQUIRE(reread.n_locations() == original.n_locations());
  REQUIRE(reread.n_cases() == original.n_cases());
  for (std::size_t i = 0; i < original.n_individuals(); ++i) {
    const Individual& a = original.individual(i);
    const Individual& b = reread.individual(i);
    CHECK(a.id == b.id);
    CHECK(a.outcome == b.outcome);
    CHECK(a.covariates == b.covariates);
    CHECK(original.location(a.historical_location).id ==
          reread.location(b.historical_location).id);
    CHECK(original.case_at(a.case_index).id == reread.case_at(b.case_index).id);
  }
  for (const Location& loc : original.locations()) {
    auto idx = reread.find_location(loc.id);
    REQUIRE(idx.has_value());
    CHECK(reread.location(*idx).capacity == loc.capacity);
  }
}

TEST_CASE("prediction files validate columns and rows") {
  test::TempDir dir("preds");
  auto data = test::write_file(dir.file("data.csv"), kToyIndividuals);
  EvaluationDataset dataset = ingest_dataset(data);
  SUBCASE("column order is free") {
    auto preds = test::write_file(dir.file("p.csv"),
                                  "individual_id,mu_L2,mu_L1\n"
                                  "i1,0.2,0.8\ni2,0.3,0.7\ni3,0.4,0.6\ni4,0.5,0.5\n");
    PredictionMatrix m = read_predictions(preds, dataset);
    CHECK(m.at(0, *dataset.find_location("L1")) == 0.8);
    CHECK(m.at(0, *dataset.find_location("L2")) == 0.2);
  }
  SUBCASE("unknown location column") {
    auto preds = test::write_file(dir.file("p.csv"),
                                  "individual_id,mu_L1,mu_LX\n"
                                  "i1,0.2,0.8\n");
    CHECK_THROWS_WITH_AS(read_predictions(preds, dataset),
                         doctest::Contains("unknown location"), Error);
  }
  SUBCASE("missing individual row") {
    auto preds = test::write_file(dir.file("p.csv"),
                                  "individual_id,mu_L1,mu_L2\n"
                                  "i1,0.2,0.8\ni2,0.3,0.7\ni3,0.4,0.6\n");
    CHECK_THROWS_WITH_AS(read_predictions(preds, dataset),
                         doctest::Contains("missing row"), Error);
  }
  SUBCASE("out-of-range entry") {
    auto preds = test::write_file(dir.file("p.csv"),
                                  "individual_id,mu_L1,mu_L2\n"
                                  "i1,0.2,1.8\ni2,0.3,0.7\ni3,0.4,0.6\ni4,0.5,0.5\n");
    CHECK_THROWS_AS(read_predictions(preds, dataset), Error);
  }
}

TEST_CASE("potential-outcome tables must agree with observed outcomes") {
  EvaluationDataset dataset = test::make_dataset(2, {{0, 0, 1}, {1, 1, 0}});
  PotentialOutcomeTable table;
  table.n = 2;
  table.k = 2;
  table.values = {1, 0, 1, 0};
  CHECK_NOTHROW(validate_table_against_dataset(table, dataset));
  table.values = {0, 0, 1, 0};  // Y_1(A_1) != observed
  CHECK_THROWS_AS(validate_table_against_dataset(table, dataset), Error);
}

TEST_SUITE_END();
