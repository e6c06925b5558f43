#ifndef OPEVAL_IO_HPP
#define OPEVAL_IO_HPP

#include <filesystem>
#include <map>
#include <optional>

#include "opeval/dataset.hpp"

namespace opeval {

struct PropensityModel;
struct PoolingMap;

// Individuals file: individual_id,case_id,location,outcome,x1,...,xp
// Capacities file: location_id,capacity
// Locations are the union of those named in the data and in the capacities
// file; a location with declared capacity but no historical arrivals is
// legal (it shows up with empirical propensity zero).
EvaluationDataset ingest_dataset(
    const std::filesystem::path& individuals_file,
    const std::optional<std::filesystem::path>& capacities_file = std::nullopt);

// Predictions file: individual_id,mu_<loc1>,...,mu_<locK>. Columns may come
// in any order but must cover exactly the dataset's locations; rows must
// cover exactly its individuals. Entries live in [0,1].
PredictionMatrix read_predictions(const std::filesystem::path& path,
                                  const EvaluationDataset& dataset);

// Policy file: case_id,location.
PolicyAssignment read_policy(const std::filesystem::path& path,
                             const EvaluationDataset& dataset,
                             bool enforce_capacities = true);

void write_policy(const std::filesystem::path& path,
                  const EvaluationDataset& dataset,
                  const PolicyAssignment& policy);

// Propensity table: individual_id,pi_<loc1>,...,pi_<locK>; lets externally
// fitted probability models be injected. Rows must sum to 1 within 1e-9.
PropensityModel read_propensity_table(const std::filesystem::path& path,
                                      const EvaluationDataset& dataset);

void write_propensity_table(const std::filesystem::path& path,
                            const EvaluationDataset& dataset,
                            const PropensityModel& model);

// original_location,pooled_location,weight (identity rows carry weight 1).
std::string render_pooling_map(const EvaluationDataset& dataset,
                               const PoolingMap& pooling);
void write_pooling_map(const std::filesystem::path& path,
                       const EvaluationDataset& dataset,
                       const PoolingMap& pooling);

// Writers for the ingestion formats; used to round-trip datasets.
void write_dataset(const std::filesystem::path& individuals_file,
                   const EvaluationDataset& dataset);
void write_capacities(const std::filesystem::path& path,
                      const EvaluationDataset& dataset);

}  // namespace opeval

#endif  // OPEVAL_IO_HPP
