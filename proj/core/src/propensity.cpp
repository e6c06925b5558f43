#include "opeval/propensity.hpp"

#include <algorithm>
#include <cmath>

#include "opeval/error.hpp"

namespace opeval {

void validate_propensities(const PropensityModel& model, std::size_t n) {
  auto check_row = [&](const double* row, std::size_t k) {
    double sum = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      if (row[a] < 0.0 || row[a] > 1.0) {
        fail(ErrorClass::kValidation, "propensity outside [0,1]");
      }
      sum += row[a];
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      fail(ErrorClass::kValidation, "propensity vector does not sum to 1");
    }
  };
  if (model.kind == PropensityModel::Kind::kEmpirical) {
    if (model.marginal.size() != model.k) {
      fail(ErrorClass::kValidation, "propensity vector has wrong length");
    }
    check_row(model.marginal.data(), model.k);
  } else {
    if (model.conditional.size() != n * model.k) {
      fail(ErrorClass::kValidation, "propensity table has wrong shape");
    }
    for (std::size_t i = 0; i < n; ++i) {
      check_row(model.conditional.data() + i * model.k, model.k);
    }
  }
}

PropensityModel empirical_propensities(const EvaluationDataset& dataset,
                                       CountingUnit unit) {
  PropensityModel model;
  model.kind = PropensityModel::Kind::kEmpirical;
  model.unit = unit;
  model.k = dataset.n_locations();
  model.marginal.assign(model.k, 0.0);
  double total = 0.0;
  if (unit == CountingUnit::kCase) {
    for (const Case& cs : dataset.cases()) {
      model.marginal[cs.historical_location] += 1.0;
      total += 1.0;
    }
  } else {
    for (const Individual& ind : dataset.individuals()) {
      model.marginal[ind.historical_location] += 1.0;
      total += 1.0;
    }
  }
  for (double& v : model.marginal) v /= total;
  return model;
}

namespace {

// Multinomial logistic regression fitted by full-batch gradient descent with
// Armijo backtracking on the mean cross-entropy plus an L2 penalty. Classes
// are locations. One observation per case (the assignment unit), using the
// first member's covariates.
struct LogitFit {
  std::size_t k, p;
  std::vector<double> weights;  // (p+1) x k, column-major per class; row 0 is
                                // the intercept

  void predict_row(const double* x, double* probs) const {
    double max_z = -1e300;
    for (std::size_t a = 0; a < k; ++a) {
      double z = weights[a];  // intercept
      for (std::size_t j = 0; j < p; ++j) z += weights[(j + 1) * k + a] * x[j];
      probs[a] = z;
      max_z = std::max(max_z, z);
    }
    double denom = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      probs[a] = std::exp(probs[a] - max_z);
      denom += probs[a];
    }
    for (std::size_t a = 0; a < k; ++a) probs[a] /= denom;
  }
};

double objective_and_gradient(const std::vector<double>& x,  // n x p
                              const std::vector<std::size_t>& y,
                              std::size_t k, std::size_t p, double l2,
                              const std::vector<double>& w,
                              std::vector<double>& grad) {
  const std::size_t n = y.size();
  const std::size_t dim = (p + 1) * k;
  grad.assign(dim, 0.0);
  double loss = 0.0;
  std::vector<double> probs(k);
  LogitFit f{k, p, w};
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.data() + i * p;
    f.predict_row(xi, probs.data());
    loss -= std::log(std::max(probs[y[i]], 1e-300));
    for (std::size_t a = 0; a < k; ++a) {
      double d = probs[a] - (a == y[i] ? 1.0 : 0.0);
      grad[a] += d;
      for (std::size_t j = 0; j < p; ++j) grad[(j + 1) * k + a] += d * xi[j];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss *= inv_n;
  for (double& g : grad) g *= inv_n;
  // ridge on non-intercept weights only
  for (std::size_t j = 1; j <= p; ++j) {
    for (std::size_t a = 0; a < k; ++a) {
      loss += 0.5 * l2 * w[j * k + a] * w[j * k + a];
      grad[j * k + a] += l2 * w[j * k + a];
    }
  }
  return loss;
}

}  // namespace

PropensityModel estimate_propensities(const EvaluationDataset& dataset,
                                      const LogitConfig& config) {
  const std::size_t k = dataset.n_locations();
  const std::size_t p = dataset.covariate_dim();
  if (p == 0) {
    fail(ErrorClass::kValidation,
         "cannot estimate propensities: the dataset has no covariates");
  }
  if (config.floor < 0.0 || config.floor >= 1.0 / static_cast<double>(k)) {
    fail(ErrorClass::kConfig, "probability floor must lie in [0, 1/K)");
  }

  // One observation per case; every location must appear at least once.
  std::vector<long long> counts(k, 0);
  for (const Case& cs : dataset.cases()) counts[cs.historical_location]++;
  for (std::size_t a = 0; a < k; ++a) {
    if (counts[a] == 0) {
      fail(ErrorClass::kValidation,
           "cannot estimate propensities: location " +
               dataset.location(a).id + " has no historical units");
    }
  }

  const std::size_t n_obs = dataset.n_cases();
  std::vector<double> x(n_obs * p);
  std::vector<std::size_t> y(n_obs);
  for (std::size_t c = 0; c < n_obs; ++c) {
    const Case& cs = dataset.case_at(c);
    const Individual& head = dataset.individual(cs.members.front());
    std::copy(head.covariates.begin(), head.covariates.end(),
              x.begin() + c * p);
    y[c] = cs.historical_location;
  }

  // Standardize features; zero-variance columns are zeroed out, which
  // reduces the model to intercept-only on that coordinate.
  std::vector<double> mean(p, 0.0), sd(p, 0.0);
  for (std::size_t c = 0; c < n_obs; ++c) {
    for (std::size_t j = 0; j < p; ++j) mean[j] += x[c * p + j];
  }
  for (std::size_t j = 0; j < p; ++j) mean[j] /= static_cast<double>(n_obs);
  for (std::size_t c = 0; c < n_obs; ++c) {
    for (std::size_t j = 0; j < p; ++j) {
      double d = x[c * p + j] - mean[j];
      sd[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    sd[j] = std::sqrt(sd[j] / static_cast<double>(n_obs));
  }
  for (std::size_t c = 0; c < n_obs; ++c) {
    for (std::size_t j = 0; j < p; ++j) {
      x[c * p + j] = sd[j] > 0.0 ? (x[c * p + j] - mean[j]) / sd[j] : 0.0;
    }
  }

  const std::size_t dim = (p + 1) * k;
  std::vector<double> w(dim, 0.0), grad(dim), trial(dim), trial_grad(dim);
  double loss = objective_and_gradient(x, y, k, p, config.l2, w, grad);
  double step = 1.0;
  for (int iter = 0; iter < config.max_iter; ++iter) {
    double gmax = 0.0, gsq = 0.0;
    for (double g : grad) {
      gmax = std::max(gmax, std::abs(g));
      gsq += g * g;
    }
    if (gmax < config.tol) break;
    step = std::min(step * 2.0, 1e4);
    for (;;) {
      for (std::size_t d = 0; d < dim; ++d) trial[d] = w[d] - step * grad[d];
      double trial_loss =
          objective_and_gradient(x, y, k, p, config.l2, trial, trial_grad);
      if (trial_loss <= loss - 1e-4 * step * gsq) {
        w.swap(trial);
        grad.swap(trial_grad);
        loss = trial_loss;
        break;
      }
      step *= 0.5;
      if (step < 1e-14) break;  // stalled; current iterate is converged enough
    }
    if (step < 1e-14) break;
  }

  PropensityModel model;
  model.kind = PropensityModel::Kind::kEstimated;
  model.unit = CountingUnit::kCase;
  model.k = k;
  model.conditional.resize(dataset.n_individuals() * k);
  LogitFit fit{k, p, w};
  std::vector<double> probs(k);
  std::vector<double> xs(p);
  for (std::size_t i = 0; i < dataset.n_individuals(); ++i) {
    const Individual& ind = dataset.individual(i);
    for (std::size_t j = 0; j < p; ++j) {
      xs[j] =
          sd[j] > 0.0 ? (ind.covariates[j] - mean[j]) / sd[j] : 0.0;
    }
    fit.predict_row(xs.data(), probs.data());
    double sum = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      probs[a] = std::max(probs[a], config.floor);
      sum += probs[a];
    }
    for (std::size_t a = 0; a < k; ++a) {
      model.conditional[i * k + a] = probs[a] / sum;
    }
  }
  validate_propensities(model, dataset.n_individuals());
  return model;
}

PositivityReport positivity_check(const PropensityModel& propensities,
                                  const EvaluationDataset& dataset,
                                  const PolicyAssignment& policy,
                                  double floor) {
  PositivityReport report;
  report.floor = floor;
  for (std::size_t i = 0; i < dataset.n_individuals(); ++i) {
    std::size_t g = policy.individual_location[i];
    double pi = propensities.at(i, g);
    if (pi <= floor) {
      report.violations.push_back(PositivityViolation{i, g, pi});
    }
  }
  return report;
}

}  // namespace opeval
