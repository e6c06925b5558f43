#include "opeval/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "estimator_kernels.hpp"
#include "opeval/error.hpp"
#include "opeval/pooling.hpp"
#include "opeval/rng.hpp"

namespace opeval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Seed streams for the independent pieces of a synthetic population.
enum SeedStream : std::uint64_t {
  kStreamCaseSizes = 1,
  kStreamCovariates = 2,
  kStreamSurface = 3,
  kStreamOutcomes = 4,
  kStreamAssignment = 5,
  kStreamPredictionNoise = 6,
};

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<double> resolve_pi(const SyntheticConfig& config) {
  std::vector<double> pi = config.pi;
  if (pi.empty()) {
    pi.assign(config.k, 1.0 / static_cast<double>(config.k));
  }
  if (pi.size() != config.k) {
    fail(ErrorClass::kConfig, "pi must list one probability per location");
  }
  double sum = 0.0;
  for (double v : pi) {
    if (v < 0.0 || v > 1.0) {
      fail(ErrorClass::kConfig, "pi entries must lie in [0,1]");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    fail(ErrorClass::kConfig, "pi must sum to 1");
  }
  return pi;
}

// The fixed part of a repeated design evaluation: policy, predictions, and
// propensities in evaluation space (pooled when requested), plus the map
// from original locations into that space.
struct DesignInstance {
  std::size_t n = 0;
  std::size_t k_eval = 0;
  std::size_t n_cases = 0;
  std::vector<std::size_t> case_of;         // individual -> case
  std::vector<std::size_t> forward;         // original loc -> eval loc
  std::vector<double> pi_eval;              // marginal propensity, eval space
  std::vector<std::size_t> g_ind;           // policy per individual, eval
  std::vector<std::size_t> g_case;          // policy per case, eval
  std::vector<double> mu;                   // n x k_eval predictions
  std::vector<double> mu_g;                 // per individual
  const PotentialOutcomeTable* table = nullptr;  // original space
  CountingUnit local_unit = CountingUnit::kCase;

  double mu_at(std::size_t i, std::size_t a) const { return mu[i * k_eval + a]; }
};

DesignInstance make_instance(const EvaluationDataset& dataset,
                             const PotentialOutcomeTable& table,
                             const PredictionMatrix& predictions,
                             const PolicyAssignment& policy,
                             const std::vector<double>& pi,
                             const DesignStudyOptions& options) {
  const std::size_t k = dataset.n_locations();
  if (pi.size() != k) {
    fail(ErrorClass::kConfig, "pi must list one probability per location");
  }
  if (table.n != dataset.n_individuals() || table.k != k) {
    fail(ErrorClass::kValidation, "potential-outcome table shape mismatch");
  }

  DesignInstance inst;
  inst.n = dataset.n_individuals();
  inst.n_cases = dataset.n_cases();
  inst.table = &table;
  inst.local_unit = options.local_unit;
  inst.case_of.resize(inst.n);
  for (std::size_t i = 0; i < inst.n; ++i) {
    inst.case_of[i] = dataset.individual(i).case_index;
  }

  if (options.pooling_threshold) {
    PropensityModel design_pi;
    design_pi.kind = PropensityModel::Kind::kEmpirical;
    design_pi.k = k;
    design_pi.marginal = pi;
    PoolingMap pooling =
        build_pooling(dataset, design_pi, *options.pooling_threshold);
    PooledProblem pooled =
        pool_problem(dataset, predictions, design_pi, pooling);
    PolicyAssignment pooled_policy = pool_policy(dataset, policy, pooling);
    inst.k_eval = pooling.pooled_k;
    inst.forward = pooling.forward;
    inst.pi_eval = pooled.propensities.marginal;
    inst.g_ind = pooled_policy.individual_location;
    inst.g_case = pooled_policy.case_location;
    inst.mu = pooled.predictions.values;
  } else {
    inst.k_eval = k;
    inst.forward.resize(k);
    for (std::size_t a = 0; a < k; ++a) inst.forward[a] = a;
    inst.pi_eval = pi;
    inst.g_ind = policy.individual_location;
    inst.g_case = policy.case_location;
    inst.mu = predictions.values;
  }
  inst.mu_g.resize(inst.n);
  for (std::size_t i = 0; i < inst.n; ++i) {
    inst.mu_g[i] = inst.mu_at(i, inst.g_ind[i]);
  }
  return inst;
}

// Reusable per-draw buffers.
struct DrawScratch {
  std::vector<std::size_t> a_ind;   // eval-space location per individual
  std::vector<std::size_t> a_case;  // eval-space location per case
  std::vector<double> y, pa, mu_a, pi_local_ind;

  explicit DrawScratch(const DesignInstance& inst)
      : a_ind(inst.n),
        a_case(inst.n_cases),
        y(inst.n),
        pa(inst.n),
        mu_a(inst.n),
        pi_local_ind(inst.n) {}
};

struct DrawEstimates {
  bool ipw_defined = false;
  double ipw = kNaN, ipw_var = kNaN;
  double aipw = 0.0, aipw_var = 0.0;
  double aipwl = 0.0, aipwl_var = 0.0;
};

// Evaluates one realized historical assignment (given per case in original
// space) through all redrawn estimators.
DrawEstimates evaluate_draw(const DesignInstance& inst,
                            const std::vector<std::size_t>& case_a_original,
                            DrawScratch& s) {
  for (std::size_t c = 0; c < inst.n_cases; ++c) {
    s.a_case[c] = inst.forward[case_a_original[c]];
  }
  for (std::size_t i = 0; i < inst.n; ++i) {
    const std::size_t a_orig = case_a_original[inst.case_of[i]];
    const std::size_t a_eval = inst.forward[a_orig];
    s.a_ind[i] = a_eval;
    s.y[i] = inst.table->at(i, a_orig);
    s.pa[i] = inst.pi_eval[a_eval];
    s.mu_a[i] = inst.mu_at(i, a_eval);
  }

  DrawEstimates est;
  detail::IpwKernelResult ipw = detail::ipw_point(s.a_ind, s.y, inst.g_ind, s.pa);
  est.ipw_defined = ipw.n_matched > 0;
  if (est.ipw_defined) {
    est.ipw = ipw.point;
    est.ipw_var = detail::ipw_variance(s.a_ind, s.y, inst.g_ind, s.pa, ipw.point);
  }
  est.aipw = detail::aipw_point(s.a_ind, s.y, inst.g_ind, s.pa, s.mu_a, inst.mu_g);
  est.aipw_var = detail::aipw_variance(s.a_ind, s.y, inst.g_ind, s.pa, s.mu_a);

  detail::LocalCounts local =
      inst.local_unit == CountingUnit::kCase
          ? detail::local_counts(s.a_case, inst.g_case, inst.k_eval)
          : detail::local_counts(s.a_ind, inst.g_ind, inst.k_eval);
  est.aipwl = detail::aipw_local_point(s.a_ind, s.y, inst.g_ind, local.value,
                                       s.mu_a, inst.mu_g);
  for (std::size_t i = 0; i < inst.n; ++i) {
    s.pi_local_ind[i] =
        s.a_ind[i] == inst.g_ind[i] ? local.value[inst.g_ind[i]] : 1.0;
  }
  est.aipwl_var =
      detail::aipw_variance(s.a_ind, s.y, inst.g_ind, s.pi_local_ind, s.mu_a);
  return est;
}

}  // namespace

SyntheticPopulation generate_population(const SyntheticConfig& config) {
  if (config.n < 1 || config.k < 1) {
    fail(ErrorClass::kConfig, "population needs n >= 1 and k >= 1");
  }
  std::vector<double> pi = resolve_pi(config);
  if (config.case_sizes.empty()) {
    fail(ErrorClass::kConfig, "case-size distribution is empty");
  }
  for (const auto& [size, weight] : config.case_sizes) {
    if (size < 1 || weight < 0.0) {
      fail(ErrorClass::kConfig, "case sizes must be >= 1 with weights >= 0");
    }
  }
  if (config.prediction_noise < 0.0) {
    fail(ErrorClass::kConfig, "prediction noise must be >= 0");
  }

  const std::size_t n = config.n;
  const std::size_t k = config.k;
  const std::size_t p = config.covariate_dim;

  // Case sizes, truncating the last case so the totals land exactly on n.
  std::vector<long long> sizes;
  {
    Rng rng(derive_seed(config.seed, kStreamCaseSizes));
    std::vector<double> weights;
    for (const auto& [size, weight] : config.case_sizes) {
      weights.push_back(weight);
    }
    long long total = 0;
    while (total < static_cast<long long>(n)) {
      long long s = config.case_sizes[rng.pick_weighted(weights)].first;
      s = std::min(s, static_cast<long long>(n) - total);
      sizes.push_back(s);
      total += s;
    }
  }

  std::vector<double> covariates(n * p);
  {
    Rng rng(derive_seed(config.seed, kStreamCovariates));
    for (double& x : covariates) x = rng.normal();
  }

  std::vector<double> intercept(k), coef(k * p);
  {
    Rng rng(derive_seed(config.seed, kStreamSurface));
    for (std::size_t a = 0; a < k; ++a) {
      intercept[a] = config.intercept_mean + config.intercept_sd * rng.normal();
    }
    for (double& b : coef) b = config.coef_sd * rng.normal();
  }

  std::vector<double> prob(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      double z = intercept[a];
      for (std::size_t j = 0; j < p; ++j) {
        z += coef[a * p + j] * covariates[i * p + j];
      }
      prob[i * k + a] = sigmoid(z);
    }
  }

  PotentialOutcomeTable table;
  table.n = n;
  table.k = k;
  table.values.resize(n * k);
  {
    Rng rng(derive_seed(config.seed, kStreamOutcomes));
    for (std::size_t idx = 0; idx < n * k; ++idx) {
      table.values[idx] = rng.bernoulli(prob[idx]) ? 1 : 0;
    }
  }

  std::vector<std::size_t> case_location(sizes.size());
  {
    Rng rng(derive_seed(config.seed, kStreamAssignment));
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      case_location[c] = rng.pick_weighted(pi);
    }
  }

  PredictionMatrix predictions;
  predictions.n = n;
  predictions.k = k;
  predictions.values.resize(n * k);
  {
    Rng rng(derive_seed(config.seed, kStreamPredictionNoise));
    for (std::size_t idx = 0; idx < n * k; ++idx) {
      double mu = prob[idx];
      if (config.prediction_noise > 0.0) {
        mu = std::clamp(mu + config.prediction_noise * rng.normal(), 0.0, 1.0);
      }
      predictions.values[idx] = mu;
    }
  }

  std::vector<Location> locations(k);
  for (std::size_t a = 0; a < k; ++a) {
    locations[a].id = "L" + std::to_string(a + 1);
  }
  std::vector<Individual> individuals;
  individuals.reserve(n);
  std::vector<Case> cases;
  cases.reserve(sizes.size());
  std::size_t i = 0;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    Case cs;
    cs.id = "c" + std::to_string(c + 1);
    cs.historical_location = case_location[c];
    for (long long m = 0; m < sizes[c]; ++m, ++i) {
      Individual ind;
      ind.id = "i" + std::to_string(i + 1);
      ind.case_index = c;
      ind.historical_location = case_location[c];
      ind.outcome = table.at(i, case_location[c]);
      ind.covariates.assign(covariates.begin() + i * p,
                            covariates.begin() + (i + 1) * p);
      cs.members.push_back(i);
      individuals.push_back(std::move(ind));
    }
    cases.push_back(std::move(cs));
  }

  SyntheticPopulation pop{
      EvaluationDataset(std::move(locations), std::move(individuals),
                        std::move(cases)),
      std::move(table), std::move(predictions), std::move(pi)};
  validate_table_against_dataset(pop.table, pop.dataset);
  return pop;
}

double true_policy_value(const PotentialOutcomeTable& table,
                         const PolicyAssignment& policy) {
  if (policy.individual_location.size() != table.n) {
    fail(ErrorClass::kValidation, "policy does not cover the table");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < table.n; ++i) {
    sum += table.at(i, policy.individual_location[i]);
  }
  return sum / static_cast<double>(table.n);
}

DesignExpectation enumerate_design(const EvaluationDataset& dataset,
                                   const PotentialOutcomeTable& table,
                                   const PredictionMatrix& predictions,
                                   const PolicyAssignment& policy,
                                   const std::vector<double>& pi,
                                   const DesignStudyOptions& options) {
  const std::size_t k = dataset.n_locations();
  const std::size_t n_cases = dataset.n_cases();
  double vectors = 1.0;
  for (std::size_t c = 0; c < n_cases; ++c) {
    vectors *= static_cast<double>(k);
    if (vectors > static_cast<double>(options.enumeration_guard)) {
      fail(ErrorClass::kConfig,
           "enumeration guard exceeded: K^C > " +
               std::to_string(options.enumeration_guard));
    }
  }

  DesignInstance inst =
      make_instance(dataset, table, predictions, policy, pi, options);
  DrawScratch scratch(inst);

  DesignExpectation out;
  out.true_value = true_policy_value(table, policy);

  double w_aipw_v = 0.0, w_aipw_v2 = 0.0, w_aipw_var = 0.0;
  double w_aipwl_v = 0.0, w_aipwl_v2 = 0.0, w_aipwl_var = 0.0;
  double w_ipw = 0.0, w_ipw_v = 0.0, w_ipw_v2 = 0.0, w_ipw_var = 0.0;
  double skipped = 0.0;
  double total_weight = 0.0;

  std::vector<std::size_t> case_a(n_cases, 0);
  bool rolled_over = false;
  while (!rolled_over) {
    double weight = 1.0;
    for (std::size_t c = 0; c < n_cases; ++c) weight *= pi[case_a[c]];
    if (weight > 0.0) {
      total_weight += weight;
      ++out.vector_count;
      DrawEstimates est = evaluate_draw(inst, case_a, scratch);
      w_aipw_v += weight * est.aipw;
      w_aipw_v2 += weight * est.aipw * est.aipw;
      w_aipw_var += weight * est.aipw_var;
      w_aipwl_v += weight * est.aipwl;
      w_aipwl_v2 += weight * est.aipwl * est.aipwl;
      w_aipwl_var += weight * est.aipwl_var;
      if (est.ipw_defined) {
        w_ipw += weight;
        w_ipw_v += weight * est.ipw;
        w_ipw_v2 += weight * est.ipw * est.ipw;
        w_ipw_var += weight * est.ipw_var;
      } else {
        skipped += weight;
      }
    }
    // odometer over case assignments
    rolled_over = true;
    for (std::size_t c = 0; c < n_cases; ++c) {
      if (++case_a[c] < k) {
        rolled_over = false;
        break;
      }
      case_a[c] = 0;
    }
  }

  auto moments = [](double w, double wv, double wv2, double wvar,
                    double skipped_weight) {
    DesignMoments m;
    if (w <= 0.0) return m;
    m.defined = true;
    m.mean = wv / w;
    m.variance = std::max(0.0, wv2 / w - m.mean * m.mean);
    m.mean_estimated_variance = wvar / w;
    m.skipped_weight = skipped_weight;
    return m;
  };
  out.aipw = moments(total_weight, w_aipw_v, w_aipw_v2, w_aipw_var, 0.0);
  out.aipwl = moments(total_weight, w_aipwl_v, w_aipwl_v2, w_aipwl_var, 0.0);
  out.ipw = moments(w_ipw, w_ipw_v, w_ipw_v2, w_ipw_var, skipped);

  // Model-based never varies with the historical draw.
  double mb = detail::mean(inst.mu_g);
  out.model_based.defined = true;
  out.model_based.mean = mb;
  out.model_based.variance = 0.0;
  return out;
}

MonteCarloResult monte_carlo(const EvaluationDataset& dataset,
                             const PotentialOutcomeTable& table,
                             const PredictionMatrix& predictions,
                             const PolicyAssignment& policy,
                             const std::vector<double>& pi, std::size_t r,
                             std::uint64_t seed,
                             const DesignStudyOptions& options) {
  if (r < 2) {
    fail(ErrorClass::kConfig, "monte carlo needs at least 2 replications");
  }
  DesignInstance inst =
      make_instance(dataset, table, predictions, policy, pi, options);
  DrawScratch scratch(inst);

  const double true_value = true_policy_value(table, policy);

  std::vector<double> aipw_v(r), aipw_var(r), aipwl_v(r), aipwl_var(r);
  std::vector<double> ipw_v, ipw_var;
  ipw_v.reserve(r);
  ipw_var.reserve(r);
  std::size_t ipw_undefined = 0;

  std::vector<std::size_t> case_a(inst.n_cases);
  for (std::size_t rep = 0; rep < r; ++rep) {
    Rng rng(derive_seed(seed, rep));
    for (std::size_t c = 0; c < inst.n_cases; ++c) {
      case_a[c] = rng.pick_weighted(pi);
    }
    DrawEstimates est = evaluate_draw(inst, case_a, scratch);
    aipw_v[rep] = est.aipw;
    aipw_var[rep] = est.aipw_var;
    aipwl_v[rep] = est.aipwl;
    aipwl_var[rep] = est.aipwl_var;
    if (est.ipw_defined) {
      ipw_v.push_back(est.ipw);
      ipw_var.push_back(est.ipw_var);
    } else {
      ++ipw_undefined;
    }
  }

  auto stats = [&](const std::vector<double>& v, const std::vector<double>& vv,
                   std::size_t undefined) {
    McEstimatorStats s;
    s.replications_used = v.size();
    s.undefined_replications = undefined;
    if (v.empty()) return s;
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean_point = sum / static_cast<double>(v.size());
    s.bias = s.mean_point - true_value;
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean_point) * (x - s.mean_point);
    s.empirical_variance =
        v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
    double var_sum = 0.0;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      var_sum += vv[i];
      if (std::abs(v[i] - true_value) <= 1.96 * std::sqrt(vv[i])) ++covered;
    }
    s.mean_estimated_variance = var_sum / static_cast<double>(v.size());
    s.coverage = static_cast<double>(covered) / static_cast<double>(v.size());
    s.mc_se =
        std::sqrt(s.empirical_variance / static_cast<double>(v.size()));
    return s;
  };

  MonteCarloResult out;
  out.replications = r;
  out.true_value = true_value;
  out.aipw = stats(aipw_v, aipw_var, 0);
  out.aipwl = stats(aipwl_v, aipwl_var, 0);
  out.ipw = stats(ipw_v, ipw_var, ipw_undefined);

  out.model_based.replications_used = r;
  out.model_based.mean_point = detail::mean(inst.mu_g);
  out.model_based.bias = out.model_based.mean_point - true_value;
  out.model_based.empirical_variance = 0.0;
  out.model_based.mean_estimated_variance = kNaN;
  out.model_based.coverage = kNaN;
  out.model_based.mc_se = 0.0;
  out.model_based.has_interval = false;
  return out;
}

}  // namespace opeval
