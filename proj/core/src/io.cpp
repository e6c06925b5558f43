#include "opeval/io.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "opeval/csv.hpp"
#include "opeval/error.hpp"
#include "opeval/pooling.hpp"
#include "opeval/propensity.hpp"

namespace opeval {

namespace {

std::string row_location(const CsvTable& t, std::size_t row) {
  return t.source.string() + ":" + std::to_string(t.row_numbers[row]);
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    fail(ErrorClass::kParse, "cannot write file: " + path.string());
  }
  return out;
}

void require_header(const CsvTable& t, std::size_t column,
                    const std::string& expected) {
  if (column >= t.header.size() || t.header[column] != expected) {
    fail(ErrorClass::kParse, t.source.string() + ": expected column " +
                                 std::to_string(column + 1) + " to be '" +
                                 expected + "'");
  }
}

// Resolves a "<prefix><location_id>" header block covering exactly the
// dataset's locations; returns column index per location index.
std::vector<std::size_t> resolve_location_columns(
    const CsvTable& t, const EvaluationDataset& dataset,
    const std::string& prefix) {
  if (t.header.size() != 1 + dataset.n_locations()) {
    fail(ErrorClass::kParse,
         t.source.string() + ": expected " +
             std::to_string(1 + dataset.n_locations()) + " columns (" +
             prefix + "<location> for each of " +
             std::to_string(dataset.n_locations()) + " locations)");
  }
  std::vector<std::size_t> column_of(dataset.n_locations(),
                                     std::numeric_limits<std::size_t>::max());
  for (std::size_t col = 1; col < t.header.size(); ++col) {
    const std::string& h = t.header[col];
    if (h.rfind(prefix, 0) != 0) {
      fail(ErrorClass::kParse, t.source.string() + ": column '" + h +
                                   "' does not start with '" + prefix + "'");
    }
    const std::string loc_id = h.substr(prefix.size());
    auto a = dataset.find_location(loc_id);
    if (!a) {
      fail(ErrorClass::kParse,
           t.source.string() + ": unknown location id '" + loc_id + "'");
    }
    if (column_of[*a] != std::numeric_limits<std::size_t>::max()) {
      fail(ErrorClass::kParse,
           t.source.string() + ": duplicate column for location '" + loc_id +
               "'");
    }
    column_of[*a] = col;
  }
  return column_of;
}

// Reads an N x K table keyed by individual id into dataset ordering.
std::vector<double> read_individual_location_table(
    const CsvTable& t, const EvaluationDataset& dataset,
    const std::string& prefix, double lo, double hi) {
  require_header(t, 0, "individual_id");
  std::vector<std::size_t> column_of =
      resolve_location_columns(t, dataset, prefix);
  const std::size_t n = dataset.n_individuals();
  const std::size_t k = dataset.n_locations();
  std::vector<double> values(n * k, -1.0);
  std::vector<bool> seen(n, false);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    auto i = dataset.find_individual(row[0]);
    if (!i) {
      fail(ErrorClass::kParse, row_location(t, r) +
                                   ": unknown individual id '" + row[0] + "'");
    }
    if (seen[*i]) {
      fail(ErrorClass::kParse, row_location(t, r) +
                                   ": duplicate row for individual '" +
                                   row[0] + "'");
    }
    seen[*i] = true;
    for (std::size_t a = 0; a < k; ++a) {
      double v = parse_double_field(row[column_of[a]], t, r,
                                    t.header[column_of[a]]);
      if (v < lo || v > hi) {
        fail(ErrorClass::kValidation,
             row_location(t, r) + ": value " + format_double(v) +
                 " outside [" + format_double(lo) + "," + format_double(hi) +
                 "] in column '" + t.header[column_of[a]] + "'");
      }
      values[*i * k + a] = v;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) {
      fail(ErrorClass::kParse, t.source.string() + ": missing row for individual '" +
                                   dataset.individual(i).id + "'");
    }
  }
  return values;
}

}  // namespace

EvaluationDataset ingest_dataset(
    const std::filesystem::path& individuals_file,
    const std::optional<std::filesystem::path>& capacities_file) {
  std::vector<Location> locations;
  std::unordered_map<std::string, std::size_t> location_index;
  auto intern_location = [&](const std::string& id) {
    auto it = location_index.find(id);
    if (it != location_index.end()) return it->second;
    locations.push_back(Location{id, std::nullopt});
    location_index.emplace(id, locations.size() - 1);
    return locations.size() - 1;
  };

  // Capacities first so declared-but-unused locations exist in the set.
  if (capacities_file) {
    CsvTable t = read_csv(*capacities_file);
    require_header(t, 0, "location_id");
    require_header(t, 1, "capacity");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      std::size_t a = intern_location(t.rows[r][0]);
      if (locations[a].capacity) {
        fail(ErrorClass::kParse, row_location(t, r) +
                                     ": duplicate capacity for location '" +
                                     t.rows[r][0] + "'");
      }
      long long cap = parse_int_field(t.rows[r][1], t, r, "capacity");
      if (cap < 0) {
        fail(ErrorClass::kValidation,
             row_location(t, r) + ": capacity must be >= 0");
      }
      locations[a].capacity = cap;
    }
  }

  CsvTable t = read_csv(individuals_file);
  require_header(t, 0, "individual_id");
  require_header(t, 1, "case_id");
  require_header(t, 2, "location");
  require_header(t, 3, "outcome");
  const std::size_t p = t.header.size() - 4;

  if (t.rows.empty()) {
    fail(ErrorClass::kValidation, individuals_file.string() + ": empty dataset");
  }

  std::vector<Individual> individuals;
  std::vector<Case> cases;
  std::unordered_map<std::string, std::size_t> case_index;
  individuals.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    Individual ind;
    ind.id = row[0];
    std::size_t a = intern_location(row[2]);
    long long outcome = parse_int_field(row[3], t, r, "outcome");
    if (outcome != 0 && outcome != 1) {
      fail(ErrorClass::kValidation,
           row_location(t, r) + ": outcome outside {0,1}");
    }
    ind.outcome = static_cast<int>(outcome);
    ind.historical_location = a;
    ind.covariates.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
      ind.covariates[j] = parse_double_field(row[4 + j], t, r, t.header[4 + j]);
    }
    auto cit = case_index.find(row[1]);
    if (cit == case_index.end()) {
      cases.push_back(Case{row[1], {}, a});
      cit = case_index.emplace(row[1], cases.size() - 1).first;
    } else if (cases[cit->second].historical_location != a) {
      fail(ErrorClass::kValidation,
           row_location(t, r) + ": inconsistent case placement (case '" +
               row[1] + "' members list different historical locations)");
    }
    ind.case_index = cit->second;
    cases[cit->second].members.push_back(individuals.size());
    individuals.push_back(std::move(ind));
  }

  return EvaluationDataset(std::move(locations), std::move(individuals),
                           std::move(cases));
}

PredictionMatrix read_predictions(const std::filesystem::path& path,
                                  const EvaluationDataset& dataset) {
  CsvTable t = read_csv(path);
  PredictionMatrix m;
  m.n = dataset.n_individuals();
  m.k = dataset.n_locations();
  m.values = read_individual_location_table(t, dataset, "mu_", 0.0, 1.0);
  return m;
}

PolicyAssignment read_policy(const std::filesystem::path& path,
                             const EvaluationDataset& dataset,
                             bool enforce_capacities) {
  CsvTable t = read_csv(path);
  require_header(t, 0, "case_id");
  require_header(t, 1, "location");
  std::map<CaseId, LocationId> case_assignment;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (!case_assignment.emplace(t.rows[r][0], t.rows[r][1]).second) {
      fail(ErrorClass::kParse, row_location(t, r) +
                                   ": duplicate assignment for case '" +
                                   t.rows[r][0] + "'");
    }
    if (!dataset.find_case(t.rows[r][0])) {
      fail(ErrorClass::kParse, row_location(t, r) + ": unknown case id '" +
                                   t.rows[r][0] + "'");
    }
  }
  return make_policy(dataset, case_assignment, enforce_capacities);
}

void write_policy(const std::filesystem::path& path,
                  const EvaluationDataset& dataset,
                  const PolicyAssignment& policy) {
  std::ofstream out = open_output(path);
  out << "case_id,location\n";
  for (std::size_t c = 0; c < dataset.n_cases(); ++c) {
    out << dataset.case_at(c).id << ','
        << dataset.location(policy.case_location[c]).id << '\n';
  }
}

PropensityModel read_propensity_table(const std::filesystem::path& path,
                                      const EvaluationDataset& dataset) {
  CsvTable t = read_csv(path);
  PropensityModel model;
  model.kind = PropensityModel::Kind::kEstimated;
  model.unit = CountingUnit::kIndividual;
  model.k = dataset.n_locations();
  model.conditional = read_individual_location_table(t, dataset, "pi_", 0.0, 1.0);
  validate_propensities(model, dataset.n_individuals());
  return model;
}

void write_propensity_table(const std::filesystem::path& path,
                            const EvaluationDataset& dataset,
                            const PropensityModel& model) {
  std::ofstream out = open_output(path);
  out << "individual_id";
  for (const Location& loc : dataset.locations()) out << ",pi_" << loc.id;
  out << '\n';
  for (std::size_t i = 0; i < dataset.n_individuals(); ++i) {
    out << dataset.individual(i).id;
    for (std::size_t a = 0; a < dataset.n_locations(); ++a) {
      out << ',' << format_double(model.at(i, a));
    }
    out << '\n';
  }
}

std::string render_pooling_map(const EvaluationDataset& dataset,
                               const PoolingMap& pooling) {
  std::string out = "original_location,pooled_location,weight\n";
  for (std::size_t a = 0; a < dataset.n_locations(); ++a) {
    const std::string& id = dataset.location(a).id;
    if (!pooling.identity && pooling.is_member[a]) {
      out += id + ',' + pooling.pooled_id + ',' +
             format_double(pooling.member_weight[a]) + '\n';
    } else {
      out += id + ',' + id + ",1\n";
    }
  }
  return out;
}

void write_pooling_map(const std::filesystem::path& path,
                       const EvaluationDataset& dataset,
                       const PoolingMap& pooling) {
  std::ofstream out = open_output(path);
  out << render_pooling_map(dataset, pooling);
}

void write_dataset(const std::filesystem::path& individuals_file,
                   const EvaluationDataset& dataset) {
  std::ofstream out = open_output(individuals_file);
  out << "individual_id,case_id,location,outcome";
  for (std::size_t j = 0; j < dataset.covariate_dim(); ++j) {
    out << ",x" << (j + 1);
  }
  out << '\n';
  for (const Individual& ind : dataset.individuals()) {
    out << ind.id << ',' << dataset.case_at(ind.case_index).id << ','
        << dataset.location(ind.historical_location).id << ',' << ind.outcome;
    for (double x : ind.covariates) out << ',' << format_double(x);
    out << '\n';
  }
}

void write_capacities(const std::filesystem::path& path,
                      const EvaluationDataset& dataset) {
  std::ofstream out = open_output(path);
  out << "location_id,capacity\n";
  for (const Location& loc : dataset.locations()) {
    if (loc.capacity) {
      out << loc.id << ',' << *loc.capacity << '\n';
    }
  }
}

}  // namespace opeval
