#ifndef OPEVAL_SRC_ESTIMATOR_KERNELS_HPP
#define OPEVAL_SRC_ESTIMATOR_KERNELS_HPP

// Span-level estimator arithmetic shared by the public estimator API and the
// simulation loops (which re-evaluate the same formulas thousands of times
// on redrawn assignment vectors without rebuilding dataset objects).

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace opeval::detail {

// Inputs indexed per individual:
//   a      historical location
//   y      observed outcome
//   g      policy location
//   pa     propensity lookup pi_{A_i,i}
//   mu_a   mu_i(A_i)
//   mu_g   mu_i(g_i)

struct IpwKernelResult {
  double point = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_matched = 0;
};

// Ratio-form importance-weighted mean over the matched individuals:
// [sum 1(A=g) Y/pi] / [sum 1(A=g) 1/pi]. Undefined (NaN) with no matches.
inline IpwKernelResult ipw_point(std::span<const std::size_t> a,
                                 std::span<const double> y,
                                 std::span<const std::size_t> g,
                                 std::span<const double> pa) {
  double num = 0.0, den = 0.0;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != g[i]) continue;
    ++matched;
    const double w = 1.0 / pa[i];
    num += w * y[i];
    den += w;
  }
  IpwKernelResult r;
  r.n_matched = matched;
  if (matched > 0) r.point = num / den;
  return r;
}

// (1/N) sum [ mu_g + 1(A=g) (Y - mu_A)/pi ].
inline double aipw_point(std::span<const std::size_t> a,
                         std::span<const double> y,
                         std::span<const std::size_t> g,
                         std::span<const double> pa,
                         std::span<const double> mu_a,
                         std::span<const double> mu_g) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double term = mu_g[i];
    if (a[i] == g[i]) term += (y[i] - mu_a[i]) / pa[i];
    sum += term;
  }
  return sum / static_cast<double>(a.size());
}

// (1/N^2) sum over matched of (1 - pi) ((Y - mu_A)/pi)^2, with pi either the
// marginal propensity or its location-specific replacement.
inline double aipw_variance(std::span<const std::size_t> a,
                            std::span<const double> y,
                            std::span<const std::size_t> g,
                            std::span<const double> pi_matched,
                            std::span<const double> mu_a) {
  const double n = static_cast<double>(a.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != g[i]) continue;
    const double pi = pi_matched[i];
    const double d = (y[i] - mu_a[i]) / pi;
    sum += (1.0 - pi) * d * d;
  }
  return sum / (n * n);
}

// (1/N^2) sum over matched of (1 - pi) ((Y - point)/pi)^2.
inline double ipw_variance(std::span<const std::size_t> a,
                           std::span<const double> y,
                           std::span<const std::size_t> g,
                           std::span<const double> pa, double point) {
  const double n = static_cast<double>(a.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != g[i]) continue;
    const double d = (y[i] - point) / pa[i];
    sum += (1.0 - pa[i]) * d * d;
  }
  return sum / (n * n);
}

inline double mean(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

// Location-specific matched fractions pi_L(a) = #{A = g = a} / #{g = a},
// counted over whichever units the spans carry (cases or individuals).
// Locations nobody is sent to stay at zero assigned count.
struct LocalCounts {
  std::vector<double> value;            // pi_L per location
  std::vector<std::size_t> assigned;    // #{g = a}
  std::vector<std::size_t> matched;     // #{A = g = a}
};

inline LocalCounts local_counts(std::span<const std::size_t> unit_a,
                                std::span<const std::size_t> unit_g,
                                std::size_t k) {
  LocalCounts c;
  c.value.assign(k, 0.0);
  c.assigned.assign(k, 0);
  c.matched.assign(k, 0);
  for (std::size_t u = 0; u < unit_a.size(); ++u) {
    c.assigned[unit_g[u]]++;
    if (unit_a[u] == unit_g[u]) c.matched[unit_g[u]]++;
  }
  for (std::size_t loc = 0; loc < k; ++loc) {
    if (c.assigned[loc] > 0) {
      c.value[loc] = static_cast<double>(c.matched[loc]) /
                     static_cast<double>(c.assigned[loc]);
    }
  }
  return c;
}

// (1/N) sum psi with psi = mu_g + 1(A=g) (Y - mu_A)/pi_L(g). A match at a
// location forces pi_L > 0 there, so the division is always defined.
inline double aipw_local_point(std::span<const std::size_t> a,
                               std::span<const double> y,
                               std::span<const std::size_t> g,
                               std::span<const double> pi_local,
                               std::span<const double> mu_a,
                               std::span<const double> mu_g) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double term = mu_g[i];
    if (a[i] == g[i]) term += (y[i] - mu_a[i]) / pi_local[g[i]];
    sum += term;
  }
  return sum / static_cast<double>(a.size());
}

}  // namespace opeval::detail

#endif  // OPEVAL_SRC_ESTIMATOR_KERNELS_HPP
