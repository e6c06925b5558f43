#include "opeval/estimators.hpp"

#include <cassert>
#include <cmath>

#include "estimator_kernels.hpp"
#include "opeval/error.hpp"

namespace opeval {

namespace {

// Per-individual working arrays shared by the estimator entry points.
struct Scratch {
  std::vector<std::size_t> a, g;
  std::vector<double> y;
  std::vector<double> pa;    // pi_{A_i,i} (propensity-based runs)
  std::vector<double> mu_a;  // mu_i(A_i)
  std::vector<double> mu_g;  // mu_i(g_i)
};

Scratch make_scratch(const EvaluationDataset& dataset,
                     const PolicyAssignment& policy,
                     const PropensityModel* propensities,
                     const PredictionMatrix* predictions) {
  const std::size_t n = dataset.n_individuals();
  if (policy.individual_location.size() != n) {
    fail(ErrorClass::kValidation, "policy does not cover every individual");
  }
  if (predictions && (predictions->n != n ||
                      predictions->k != dataset.n_locations())) {
    fail(ErrorClass::kValidation,
         "prediction matrix shape does not match the dataset");
  }
  Scratch s;
  s.a.resize(n);
  s.g = policy.individual_location;
  s.y.resize(n);
  if (propensities) s.pa.resize(n);
  if (predictions) {
    s.mu_a.resize(n);
    s.mu_g.resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Individual& ind = dataset.individual(i);
    s.a[i] = ind.historical_location;
    s.y[i] = ind.outcome;
    if (propensities) s.pa[i] = propensities->at(i, ind.historical_location);
    if (predictions) {
      s.mu_a[i] = predictions->at(i, ind.historical_location);
      s.mu_g[i] = predictions->at(i, s.g[i]);
    }
  }
  return s;
}

void require_positivity(const EvaluationDataset& dataset,
                        const PropensityModel& propensities,
                        const PolicyAssignment& policy,
                        const EstimatorOptions& options) {
  if (!options.enforce_positivity) return;
  PositivityReport report =
      positivity_check(propensities, dataset, policy, options.positivity_floor);
  if (!report.pass()) {
    fail(ErrorClass::kPositivity,
         "positivity violation: " + std::to_string(report.violations.size()) +
             " individuals are assigned to locations with propensity <= " +
             std::to_string(options.positivity_floor) +
             " (first: " +
             dataset.individual(report.violations.front().individual).id +
             " -> " +
             dataset.location(report.violations.front().location).id + ")");
  }
}

double baseline_for(const EvaluationDataset& dataset,
                    const EstimatorOptions& options) {
  return options.baseline_override ? *options.baseline_override
                                   : observed_baseline(dataset);
}

void attach_common_notes(EstimateReport& report,
                         const EvaluationDataset& dataset,
                         const PropensityModel* propensities) {
  if (report.point < 0.0 || report.point > 1.0) {
    report.notes.push_back("point estimate outside [0,1]");
  }
  if (propensities &&
      propensities->kind == PropensityModel::Kind::kEstimated &&
      report.var_gains) {
    report.notes.push_back("plug-in variance (estimated propensities)");
  }
  if (report.var_gains) {
    for (const Case& cs : dataset.cases()) {
      if (cs.members.size() > 1) {
        report.notes.push_back(
            "variance treats individuals as independent within cases");
        break;
      }
    }
  }
}

void finish_report(EstimateReport& report, double var) {
  GainsCi gc = gains_and_ci(report.point, report.baseline, var);
  report.gains = gc.gains;
  report.var_gains = var;
  report.ci95 = std::make_pair(gc.lo, gc.hi);
}

std::size_t count_matched(const Scratch& s) {
  std::size_t matched = 0;
  for (std::size_t i = 0; i < s.a.size(); ++i) {
    if (s.a[i] == s.g[i]) ++matched;
  }
  return matched;
}

}  // namespace

const char* estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kAipw: return "AIPW";
    case EstimatorKind::kAipwLocal: return "AIPWl";
    case EstimatorKind::kIpw: return "IPW";
    case EstimatorKind::kModelBased: return "Model-Based";
  }
  return "?";
}

LocalPropensityTable local_propensities(const EvaluationDataset& dataset,
                                        const PolicyAssignment& policy,
                                        CountingUnit unit) {
  const std::size_t k = dataset.n_locations();
  detail::LocalCounts counts;
  if (unit == CountingUnit::kCase) {
    std::vector<std::size_t> case_a(dataset.n_cases());
    for (std::size_t c = 0; c < dataset.n_cases(); ++c) {
      case_a[c] = dataset.case_at(c).historical_location;
    }
    counts = detail::local_counts(case_a, policy.case_location, k);
  } else {
    std::vector<std::size_t> a(dataset.n_individuals());
    for (std::size_t i = 0; i < dataset.n_individuals(); ++i) {
      a[i] = dataset.individual(i).historical_location;
    }
    counts = detail::local_counts(a, policy.individual_location, k);
  }
  LocalPropensityTable table;
  table.unit = unit;
  table.value = std::move(counts.value);
  table.assigned = std::move(counts.assigned);
  table.matched = std::move(counts.matched);
  return table;
}

EstimateReport ipw_estimate(const EvaluationDataset& dataset,
                            const PropensityModel& propensities,
                            const PolicyAssignment& policy,
                            const EstimatorOptions& options) {
  require_positivity(dataset, propensities, policy, options);
  Scratch s = make_scratch(dataset, policy, &propensities, nullptr);
  detail::IpwKernelResult r = detail::ipw_point(s.a, s.y, s.g, s.pa);
  if (r.n_matched == 0) {
    fail(ErrorClass::kUndefinedEstimate, "IPW undefined: no overlap");
  }
  EstimateReport report;
  report.estimator = EstimatorKind::kIpw;
  report.point = r.point;
  report.baseline = baseline_for(dataset, options);
  report.n_matched = r.n_matched;
  finish_report(report, detail::ipw_variance(s.a, s.y, s.g, s.pa, r.point));
  attach_common_notes(report, dataset, &propensities);
  return report;
}

EstimateReport aipw_estimate(const EvaluationDataset& dataset,
                             const PropensityModel& propensities,
                             const PredictionMatrix& predictions,
                             const PolicyAssignment& policy,
                             const EstimatorOptions& options) {
  require_positivity(dataset, propensities, policy, options);
  Scratch s = make_scratch(dataset, policy, &propensities, &predictions);
  EstimateReport report;
  report.estimator = EstimatorKind::kAipw;
  report.point = detail::aipw_point(s.a, s.y, s.g, s.pa, s.mu_a, s.mu_g);
  report.baseline = baseline_for(dataset, options);
  report.n_matched = count_matched(s);
  finish_report(report,
                detail::aipw_variance(s.a, s.y, s.g, s.pa, s.mu_a));
  attach_common_notes(report, dataset, &propensities);
  return report;
}

EstimateReport aipwl_estimate(const EvaluationDataset& dataset,
                              const PredictionMatrix& predictions,
                              const PolicyAssignment& policy,
                              const EstimatorOptions& options) {
  Scratch s = make_scratch(dataset, policy, nullptr, &predictions);
  LocalPropensityTable local =
      local_propensities(dataset, policy, options.local_unit);

  EstimateReport report;
  report.estimator = EstimatorKind::kAipwLocal;
  report.point =
      detail::aipw_local_point(s.a, s.y, s.g, local.value, s.mu_a, s.mu_g);
  report.baseline = baseline_for(dataset, options);
  report.n_matched = count_matched(s);
  finish_report(report, var_aipw_local(dataset, local, predictions, policy));
  attach_common_notes(report, dataset, nullptr);
  return report;
}

EstimateReport model_based_estimate(const EvaluationDataset& dataset,
                                    const PredictionMatrix& predictions,
                                    const PolicyAssignment& policy,
                                    const EstimatorOptions& options) {
  Scratch s = make_scratch(dataset, policy, nullptr, &predictions);
  EstimateReport report;
  report.estimator = EstimatorKind::kModelBased;
  report.point = detail::mean(s.mu_g);
  report.baseline = baseline_for(dataset, options);
  report.gains = report.point - report.baseline;
  report.n_matched = count_matched(s);
  attach_common_notes(report, dataset, nullptr);
  return report;
}

double var_aipw(const EvaluationDataset& dataset,
                const PropensityModel& propensities,
                const PredictionMatrix& predictions,
                const PolicyAssignment& policy) {
  Scratch s = make_scratch(dataset, policy, &propensities, &predictions);
  return detail::aipw_variance(s.a, s.y, s.g, s.pa, s.mu_a);
}

double var_aipw_local(const EvaluationDataset& dataset,
                      const LocalPropensityTable& local,
                      const PredictionMatrix& predictions,
                      const PolicyAssignment& policy) {
  Scratch s = make_scratch(dataset, policy, nullptr, &predictions);
  // Broadcast pi_L(A_i) per matched individual; a match guarantees the
  // table is defined and positive at that location.
  std::vector<double> pi(s.a.size(), 1.0);
  for (std::size_t i = 0; i < s.a.size(); ++i) {
    if (s.a[i] == s.g[i]) {
      assert(local.defined(s.g[i]) && local.value[s.g[i]] > 0.0);
      pi[i] = local.value[s.g[i]];
    }
  }
  return detail::aipw_variance(s.a, s.y, s.g, pi, s.mu_a);
}

double var_ipw(const EvaluationDataset& dataset,
               const PropensityModel& propensities,
               const PolicyAssignment& policy, double point) {
  Scratch s = make_scratch(dataset, policy, &propensities, nullptr);
  return detail::ipw_variance(s.a, s.y, s.g, s.pa, point);
}

GainsCi gains_and_ci(double point, double baseline, double var) {
  if (var < 0.0 || !std::isfinite(var)) {
    fail(ErrorClass::kValidation, "variance must be finite and nonnegative");
  }
  GainsCi gc;
  gc.gains = point - baseline;
  const double half_width = 1.96 * std::sqrt(var);
  gc.lo = gc.gains - half_width;
  gc.hi = gc.gains + half_width;
  return gc;
}

std::vector<EstimateReport> evaluate_all(const EvaluationDataset& dataset,
                                         const PropensityModel& propensities,
                                         const PredictionMatrix& predictions,
                                         const PolicyAssignment& policy,
                                         const EstimatorOptions& options) {
  std::vector<EstimateReport> reports;
  reports.push_back(
      aipw_estimate(dataset, propensities, predictions, policy, options));
  reports.push_back(aipwl_estimate(dataset, predictions, policy, options));
  reports.push_back(ipw_estimate(dataset, propensities, policy, options));
  reports.push_back(
      model_based_estimate(dataset, predictions, policy, options));
  return reports;
}

}  // namespace opeval
