#ifndef OPEVAL_TESTS_HELPERS_HPP
#define OPEVAL_TESTS_HELPERS_HPP

#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <string>
#include <vector>

#include "opeval/dataset.hpp"
#include "opeval/propensity.hpp"

namespace test {

// Dataset from compact rows {case_index, location_index, outcome}; ids are
// generated as i1.., c1.., L1... Cases must appear with consecutive member
// rows sharing the same location.
inline opeval::EvaluationDataset make_dataset(
    std::size_t k, const std::vector<std::array<int, 3>>& rows,
    const std::vector<std::vector<double>>& covariates = {}) {
  std::vector<opeval::Location> locations(k);
  for (std::size_t a = 0; a < k; ++a) {
    locations[a].id = "L" + std::to_string(a + 1);
  }
  std::vector<opeval::Individual> individuals;
  std::vector<opeval::Case> cases;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& [case_index, location, outcome] = rows[i];
    opeval::Individual ind;
    ind.id = "i" + std::to_string(i + 1);
    ind.case_index = static_cast<std::size_t>(case_index);
    ind.historical_location = static_cast<std::size_t>(location);
    ind.outcome = outcome;
    if (!covariates.empty()) ind.covariates = covariates[i];
    while (cases.size() <= ind.case_index) {
      opeval::Case cs;
      cs.id = "c" + std::to_string(cases.size() + 1);
      cs.historical_location = ind.historical_location;
      cases.push_back(cs);
    }
    cases[ind.case_index].members.push_back(i);
    individuals.push_back(std::move(ind));
  }
  return opeval::EvaluationDataset(std::move(locations),
                                   std::move(individuals), std::move(cases));
}

inline opeval::PredictionMatrix make_predictions(
    const std::vector<std::vector<double>>& rows) {
  opeval::PredictionMatrix m;
  m.n = rows.size();
  m.k = rows.front().size();
  for (const auto& row : rows) {
    m.values.insert(m.values.end(), row.begin(), row.end());
  }
  return m;
}

inline opeval::PolicyAssignment make_policy(
    const opeval::EvaluationDataset& dataset,
    const std::vector<std::size_t>& case_location) {
  return opeval::make_policy_from_indices(dataset, case_location,
                                          /*enforce_capacities=*/false);
}

inline opeval::PropensityModel empirical_model(std::vector<double> pi) {
  opeval::PropensityModel model;
  model.kind = opeval::PropensityModel::Kind::kEmpirical;
  model.k = pi.size();
  model.marginal = std::move(pi);
  return model;
}

// Unique scratch directory under the system temp dir.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("opeval_test_" + tag + "_" + std::to_string(++counter) + "_" +
             std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path write_file(const std::filesystem::path& path,
                                        const std::string& content) {
  std::ofstream out(path);
  out << content;
  return path;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace test

#endif  // OPEVAL_TESTS_HELPERS_HPP
