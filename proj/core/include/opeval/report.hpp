#ifndef OPEVAL_REPORT_HPP
#define OPEVAL_REPORT_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "opeval/estimators.hpp"
#include "opeval/simulation.hpp"

namespace opeval {

// One scenario's results: the four estimator columns plus the baseline they
// were measured against.
struct ScenarioReport {
  std::string scenario;
  double baseline = 0.0;
  bool baseline_overridden = false;
  std::vector<EstimateReport> reports;  // AIPW, AIPWl, IPW, Model-Based
};

// Results table: rows Point Estimate / Gains / Var(Gains) / CI of Gains;
// 3 decimals for points and gains, 4 for variances. The numbers are
// reformatted from the same report objects the records file serializes, so
// the table always round-trips from the records.
std::string render_report_table(const ScenarioReport& report,
                                std::span<const std::string> config_lines);

// scenario,estimator,point,gains,var_gains,ci_lo,ci_hi,n_matched with full
// precision; absent fields (model-based variance) are written as NA.
void write_records_csv(const std::filesystem::path& path,
                       const ScenarioReport& report);

// Percentage-point and percent-over-baseline gains for every scenario and
// estimator; feeds external plotting.
void write_gains_summary(const std::filesystem::path& path,
                         std::span<const ScenarioReport> reports);

// estimator,R,bias,emp_var,mean_est_var,coverage,mc_se
void write_mc_records(const std::filesystem::path& path,
                      const MonteCarloResult& result);

// estimator,vectors,mean,bias,exact_var,mean_est_var,skipped_weight
void write_enumeration_records(const std::filesystem::path& path,
                               const DesignExpectation& result);

std::string render_mc_summary(const MonteCarloResult& result,
                              std::span<const std::string> config_lines);
std::string render_enumeration_summary(const DesignExpectation& result,
                                       std::span<const std::string> config_lines);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace opeval

#endif  // OPEVAL_REPORT_HPP
