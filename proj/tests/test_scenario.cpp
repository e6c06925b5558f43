#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "opeval/csv.hpp"
#include "opeval/error.hpp"
#include "opeval/io.hpp"
#include "opeval/scenario.hpp"

using namespace opeval;

TEST_SUITE_BEGIN("scenario");

namespace {

// Toy fixture: two locations with two individuals each (empirical pi =
// [0.5, 0.5]) and predictions that are perfect at the historical location,
// so IPW, AIPW, and AIPWl all equal the observed mean when g = A.
void write_toy_fixture(const test::TempDir& dir) {
  test::write_file(dir.file("data.csv"),
                   "individual_id,case_id,location,outcome,x1\n"
                   "i1,c1,L1,1,0.1\n"
                   "i2,c2,L2,0,0.7\n"
                   "i3,c3,L1,1,0.4\n"
                   "i4,c4,L2,0,0.9\n");
  test::write_file(dir.file("preds.csv"),
                   "individual_id,mu_L1,mu_L2\n"
                   "i1,1,0.3\n"
                   "i2,0.6,0\n"
                   "i3,1,0.2\n"
                   "i4,0.5,0\n");
  test::write_file(dir.file("policy.csv"),
                   "case_id,location\nc1,L1\nc2,L2\nc3,L1\nc4,L2\n");
}

ScenarioConfig toy_config(const test::TempDir& dir) {
  ScenarioConfig config;
  config.name = "toy";
  config.data = dir.file("data.csv");
  config.predictions = dir.file("preds.csv");
  config.policy = dir.file("policy.csv");
  config.assignment = AssignmentMode::kGiven;
  config.out = dir.file("run");
  return config;
}

}  // namespace

TEST_CASE("toy fixture: every estimator equals the observed mean when g = A") {
  test::TempDir dir("toy");
  write_toy_fixture(dir);
  EvaluateResult result = run_evaluate(toy_config(dir));
  const double mean = 0.5;
  REQUIRE(result.report.reports.size() == 4);
  for (const EstimateReport& r : result.report.reports) {
    CHECK(r.point == doctest::Approx(mean).epsilon(1e-14));
  }
  CHECK(result.report.baseline == doctest::Approx(mean).epsilon(1e-15));
  CHECK(std::filesystem::exists(dir.file("run.records.csv")));
  CHECK(std::filesystem::exists(dir.file("run.report.txt")));
}

TEST_CASE("identity pooling reproduces the pooling-off records byte for byte") {
  test::TempDir dir("idpool");
  write_toy_fixture(dir);
  ScenarioConfig off = toy_config(dir);
  off.out = dir.file("off");
  off.seed = 42;
  run_evaluate(off);
  ScenarioConfig on = toy_config(dir);
  on.out = dir.file("on");
  on.seed = 42;
  on.pooling_threshold = 0.01;  // no location is below 1%, identity map
  run_evaluate(on);
  std::string records_off = test::read_file(dir.file("off.records.csv"));
  std::string records_on = test::read_file(dir.file("on.records.csv"));
  // identical except the scenario name column, which we kept equal
  CHECK(records_off == records_on);
}

TEST_CASE("the human table round-trips from the machine records") {
  test::TempDir dir("roundtrip");
  write_toy_fixture(dir);
  EvaluateResult result = run_evaluate(toy_config(dir));
  CsvTable records = read_csv(dir.file("run.records.csv"));
  REQUIRE(records.rows.size() == 4);
  // rebuild the report from the records and re-render: the table text must
  // match what the run wrote (modulo the config block, which we omit here)
  ScenarioReport rebuilt;
  rebuilt.scenario = records.rows[0][0];
  rebuilt.baseline = result.report.baseline;
  for (const auto& row : records.rows) {
    EstimateReport r;
    for (EstimatorKind kind :
         {EstimatorKind::kAipw, EstimatorKind::kAipwLocal, EstimatorKind::kIpw,
          EstimatorKind::kModelBased}) {
      if (row[1] == estimator_name(kind)) r.estimator = kind;
    }
    r.point = std::stod(row[2]);
    r.gains = std::stod(row[3]);
    if (row[4] != "NA") {
      r.var_gains = std::stod(row[4]);
      r.ci95 = std::make_pair(std::stod(row[5]), std::stod(row[6]));
    }
    r.n_matched = static_cast<std::size_t>(std::stoul(row[7]));
    r.baseline = rebuilt.baseline;
    rebuilt.reports.push_back(r);
  }
  std::string from_records = render_report_table(rebuilt, {});
  std::string from_run = render_report_table(result.report, {});
  CHECK(from_records == from_run);
}

TEST_CASE("scenario grids produce one report per config plus a summary") {
  test::TempDir dir("grid");
  write_toy_fixture(dir);
  std::vector<ScenarioConfig> grid;
  int idx = 0;
  for (const char* prop : {"empirical", "estimated"}) {
    for (const char* pool : {"off", "0.01"}) {
      ScenarioConfig config = toy_config(dir);
      config.name = std::string(prop) + "_pool_" + pool;
      config.set("propensity", prop);
      config.set("pooling", pool);
      config.seed = 9;
      config.out = dir.file("grid" + std::to_string(idx++));
      grid.push_back(config);
    }
  }
  auto results = run_evaluate_grid(grid, dir.file("summary.csv"));
  CHECK(results.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::filesystem::exists(
        dir.file("grid" + std::to_string(i) + ".records.csv")));
  }
  CsvTable summary = read_csv(dir.file("summary.csv"));
  CHECK(summary.rows.size() == 16);  // 4 scenarios x 4 estimators
  CHECK(summary.header ==
        std::vector<std::string>{"scenario", "estimator", "baseline", "gains",
                                 "pct_gains"});
}

TEST_CASE("positivity violations abort the run unless overridden") {
  test::TempDir dir("positivity");
  write_toy_fixture(dir);
  // L3 exists only through the capacities file: zero historical arrivals.
  test::write_file(dir.file("caps.csv"),
                   "location_id,capacity\nL1,4\nL2,4\nL3,4\n");
  test::write_file(dir.file("policy3.csv"),
                   "case_id,location\nc1,L3\nc2,L2\nc3,L1\nc4,L2\n");
  ScenarioConfig config = toy_config(dir);
  config.capacities = dir.file("caps.csv");
  config.policy = dir.file("policy3.csv");
  test::write_file(dir.file("preds3.csv"),
                   "individual_id,mu_L1,mu_L2,mu_L3\n"
                   "i1,1,0.3,0.5\n"
                   "i2,0.6,0,0.5\n"
                   "i3,1,0.2,0.5\n"
                   "i4,0.5,0,0.5\n");
  config.predictions = dir.file("preds3.csv");
  CHECK_THROWS_WITH_AS(run_evaluate(config), doctest::Contains("positivity"),
                       Error);
  config.allow_positivity_violations = true;
  EvaluateResult result = run_evaluate(config);  // runs; IPW skips the arm
  CHECK(result.report.reports.size() == 4);
}

TEST_CASE("computed policies are emitted and deterministic") {
  test::TempDir dir("emit");
  write_toy_fixture(dir);
  ScenarioConfig config = toy_config(dir);
  config.policy.reset();
  config.assignment = AssignmentMode::kOffline;
  config.seed = 4;
  EvaluateResult result = run_evaluate(config);
  CHECK(std::filesystem::exists(dir.file("run.policy.csv")));
  // run again into another prefix: byte-identical records
  ScenarioConfig again = config;
  again.out = dir.file("run2");
  run_evaluate(again);
  CHECK(test::read_file(dir.file("run.records.csv")) ==
        test::read_file(dir.file("run2.records.csv")));
  CHECK(test::read_file(dir.file("run.policy.csv")) ==
        test::read_file(dir.file("run2.policy.csv")));
  (void)result;
}

TEST_CASE("online assignment needs an arrival column") {
  test::TempDir dir("online");
  write_toy_fixture(dir);
  ScenarioConfig config = toy_config(dir);
  config.policy.reset();
  config.assignment = AssignmentMode::kOnline;
  CHECK_THROWS_WITH_AS(run_evaluate(config), doctest::Contains("arrival"),
                       Error);
  config.arrival_column = "x1";
  EvaluateResult result = run_evaluate(config);
  CHECK(result.report.reports.size() == 4);
  SUBCASE("unknown column") {
    config.arrival_column = "x9";
    CHECK_THROWS_AS(run_evaluate(config), Error);
  }
}

TEST_CASE("config files parse with comments and reject unknown keys") {
  test::TempDir dir("cfg");
  write_toy_fixture(dir);
  auto cfg = test::write_file(dir.file("run.cfg"),
                              "# comment\n"
                              "name = from_file\n"
                              "data = " + dir.file("data.csv").string() + "\n"
                              "predictions = " + dir.file("preds.csv").string() + "\n"
                              "policy = " + dir.file("policy.csv").string() + "\n"
                              "pooling = off\n"
                              "floor = 0.001\n"
                              "seed = 11\n"
                              "out = " + dir.file("fromfile").string() + "\n");
  ScenarioConfig config = ScenarioConfig::from_file(cfg);
  CHECK(config.name == "from_file");
  CHECK(config.positivity_floor == 0.001);
  CHECK(config.seed == 11);
  EvaluateResult result = run_evaluate(config);
  CHECK(result.report.scenario == "from_file");

  auto bad = test::write_file(dir.file("bad.cfg"), "nonsense = 1\n");
  CHECK_THROWS_WITH_AS(ScenarioConfig::from_file(bad),
                       doctest::Contains("unknown scenario key"), Error);
}

TEST_CASE("externally fitted propensities drive the estimators") {
  test::TempDir dir("external");
  write_toy_fixture(dir);
  // constant rows matching the empirical shares: results must agree with
  // the empirical run
  test::write_file(dir.file("pi.csv"),
                   "individual_id,pi_L1,pi_L2\n"
                   "i1,0.5,0.5\ni2,0.5,0.5\ni3,0.5,0.5\ni4,0.5,0.5\n");
  ScenarioConfig external = toy_config(dir);
  external.propensity = PropensityMode::kExternal;
  external.propensity_file = dir.file("pi.csv");
  external.out = dir.file("ext");
  EvaluateResult ext = run_evaluate(external);
  EvaluateResult emp = run_evaluate(toy_config(dir));
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(ext.report.reports[i].point ==
          doctest::Approx(emp.report.reports[i].point).epsilon(1e-14));
  }
  // estimated-kind models are flagged as plug-in variance
  bool flagged = false;
  for (const auto& note : ext.report.reports.front().notes) {
    if (note.find("plug-in") != std::string::npos) flagged = true;
  }
  CHECK(flagged);
}

TEST_CASE("baseline override reaches the reports") {
  test::TempDir dir("base");
  write_toy_fixture(dir);
  ScenarioConfig config = toy_config(dir);
  config.baseline_override = 0.337;
  EvaluateResult result = run_evaluate(config);
  CHECK(result.report.baseline == 0.337);
  CHECK(result.report.baseline_overridden);
  for (const EstimateReport& r : result.report.reports) {
    CHECK(r.gains == doctest::Approx(r.point - 0.337).epsilon(1e-12));
  }
}

TEST_CASE("run_simulate smoke and determinism") {
  test::TempDir dir("sim");
  SimulateConfig config;
  config.synthetic.n = 40;
  config.synthetic.k = 2;
  config.replications = 10;
  config.seed = 3;
  config.out = dir.file("sim");
  SimulateResult result = run_simulate(config);
  REQUIRE(result.mc.has_value());
  CHECK(result.mc->aipw.coverage >= 0.0);
  CHECK(result.mc->aipw.coverage <= 1.0);
  CHECK(std::filesystem::exists(dir.file("sim.mc.csv")));

  SimulateConfig again = config;
  again.out = dir.file("sim_b");
  run_simulate(again);
  std::string a = test::read_file(dir.file("sim.mc.csv"));
  std::string b = test::read_file(dir.file("sim_b.mc.csv"));
  CHECK(a == b);
}

TEST_CASE("simulation config files parse every key") {
  test::TempDir dir("simcfg");
  auto cfg = test::write_file(dir.file("sim.cfg"),
                              "# simulation study\n"
                              "name = study\n"
                              "mode = mc\n"
                              "n = 60\n"
                              "k = 3\n"
                              "covariate_dim = 2\n"
                              "case_sizes = 1:0.8,2:0.2\n"
                              "pi = 0.5,0.3,0.2\n"
                              "prediction_noise = 0.1\n"
                              "replications = 12\n"
                              "pooling = off\n"
                              "local_unit = individual\n"
                              "policy_source = random\n"
                              "seed = 21\n"
                              "out = " + dir.file("study").string() + "\n");
  SimulateConfig config = SimulateConfig::from_file(cfg);
  CHECK(config.name == "study");
  CHECK(config.synthetic.n == 60);
  CHECK(config.synthetic.pi == std::vector<double>{0.5, 0.3, 0.2});
  CHECK(config.synthetic.case_sizes ==
        std::vector<std::pair<long long, double>>{{1, 0.8}, {2, 0.2}});
  CHECK(config.local_unit == CountingUnit::kIndividual);
  CHECK(config.replications == 12);
  SimulateResult result = run_simulate(config);
  REQUIRE(result.mc.has_value());
  CHECK(result.mc->replications == 12);
  CHECK(std::filesystem::exists(dir.file("study.mc.csv")));

  auto bad = test::write_file(dir.file("bad.cfg"), "mystery = 3\n");
  CHECK_THROWS_WITH_AS(SimulateConfig::from_file(bad),
                       doctest::Contains("unknown simulate key"), Error);
}

TEST_CASE("run_simulate enumeration mode reports zero AIPW bias") {
  test::TempDir dir("sim_enum");
  SimulateConfig config;
  config.mode = "enumerate";
  config.synthetic.n = 4;
  config.synthetic.k = 2;
  config.seed = 5;
  config.out = dir.file("enum");
  SimulateResult result = run_simulate(config);
  REQUIRE(result.exact.has_value());
  CHECK(std::abs(result.exact->aipw.mean - result.exact->true_value) <= 1e-12);
  CHECK(std::filesystem::exists(dir.file("enum.exact.csv")));
  SUBCASE("seed is mandatory") {
    SimulateConfig no_seed;
    no_seed.mode = "enumerate";
    CHECK_THROWS_WITH_AS(run_simulate(no_seed), doctest::Contains("seed"),
                         Error);
  }
}

TEST_CASE("run_assign writes offline, online, and passthrough policies") {
  test::TempDir dir("assign");
  // two singleton cases, two locations with capacity 1 each
  test::write_file(dir.file("data.csv"),
                   "individual_id,case_id,location,outcome,x1\n"
                   "i1,c1,L1,1,2\n"
                   "i2,c2,L2,0,1\n");
  test::write_file(dir.file("preds.csv"),
                   "individual_id,mu_L1,mu_L2\n"
                   "i1,0.9,0.1\n"
                   "i2,0.8,0.2\n");
  test::write_file(dir.file("caps.csv"), "location_id,capacity\nL1,1\nL2,1\n");

  AssignConfig config;
  config.data = dir.file("data.csv");
  config.predictions = dir.file("preds.csv");
  config.capacities = dir.file("caps.csv");
  config.out = dir.file("offline.csv");
  AssignResult offline = run_assign(config);
  CHECK(test::read_file(dir.file("offline.csv")) ==
        "case_id,location\nc1,L1\nc2,L2\n");
  CHECK(offline.total_reward == doctest::Approx(1.1).epsilon(1e-15));

  config.mode = AssignmentMode::kOnline;
  config.arrival_column = "x1";  // c2 (x1=1) arrives before c1 (x1=2)
  config.out = dir.file("online.csv");
  AssignResult online = run_assign(config);
  CHECK(test::read_file(dir.file("online.csv")) ==
        "case_id,location\nc1,L2\nc2,L1\n");
  CHECK(online.total_reward == doctest::Approx(0.9).epsilon(1e-15));

  AssignConfig pass;
  pass.data = dir.file("data.csv");
  pass.predictions = dir.file("preds.csv");
  pass.policy = dir.file("offline.csv");
  pass.out = dir.file("pass.csv");
  run_assign(pass);
  CHECK(test::read_file(dir.file("pass.csv")) ==
        test::read_file(dir.file("offline.csv")));
}

TEST_CASE("pool-inspect renders the export format") {
  test::TempDir dir("poolinspect");
  std::string data = "individual_id,case_id,location,outcome\n";
  for (int c = 0; c < 994; ++c) {
    data += "a" + std::to_string(c) + ",ca" + std::to_string(c) + ",L1,0\n";
  }
  for (int c = 0; c < 4; ++c) {
    data += "b" + std::to_string(c) + ",cb" + std::to_string(c) + ",L2,0\n";
  }
  data += "x1,cx1,L3,1\nx2,cx2,L3,0\n";
  test::write_file(dir.file("data.csv"), data);
  PoolInspectConfig config;
  config.data = dir.file("data.csv");
  config.threshold = 0.01;
  config.out = dir.file("map.csv");
  PoolInspectResult result = run_pool_inspect(config);
  CHECK_FALSE(result.pooling.identity);
  CHECK(result.rendered.find("L2,pooled,") != std::string::npos);
  CHECK(result.rendered.find("L1,L1,1") != std::string::npos);
  CHECK(test::read_file(dir.file("map.csv")) == result.rendered);
}

TEST_SUITE_END();
