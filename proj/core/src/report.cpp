#include "opeval/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "opeval/csv.hpp"
#include "opeval/error.hpp"

namespace opeval {

namespace {

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  std::string text = buf;
  // tiny negatives round to "-0.000"; print them unsigned
  if (text.size() > 1 && text[0] == '-' &&
      text.find_first_not_of("0.", 1) == std::string::npos) {
    text.erase(0, 1);
  }
  return text;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::string ci_text(const EstimateReport& r) {
  if (!r.ci95) return "NA";
  return "[" + fixed(r.ci95->first, 3) + ", " + fixed(r.ci95->second, 3) + "]";
}

std::string var_text(const EstimateReport& r) {
  return r.var_gains ? "(" + fixed(*r.var_gains, 4) + ")" : "NA";
}

std::string na_or(const std::optional<double>& v) {
  return v ? format_double(*v) : "NA";
}

std::string nan_to_na(double v) {
  return std::isnan(v) ? "NA" : format_double(v);
}

// Compact form for the human-readable summaries; the records files carry
// the full-precision values.
std::string compact(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) fail(ErrorClass::kParse, "cannot write file: " + path.string());
  return out;
}

}  // namespace

std::string render_report_table(const ScenarioReport& report,
                                std::span<const std::string> config_lines) {
  constexpr std::size_t kLabel = 15;
  constexpr std::size_t kCol = 17;

  std::ostringstream out;
  out << "scenario: " << report.scenario << "\n";
  out << "baseline: " << fixed(report.baseline, 3)
      << (report.baseline_overridden ? " (override)" : " (observed)") << "\n";
  if (!config_lines.empty()) {
    out << "config:\n";
    for (const std::string& line : config_lines) out << "  " << line << "\n";
  }
  out << "\n";

  out << pad("", kLabel);
  for (const EstimateReport& r : report.reports) {
    out << pad(estimator_name(r.estimator), kCol);
  }
  out << "\n";

  out << pad("Point Estimate", kLabel);
  for (const EstimateReport& r : report.reports) {
    out << pad(fixed(r.point, 3), kCol);
  }
  out << "\n";

  out << pad("Gains", kLabel);
  for (const EstimateReport& r : report.reports) {
    out << pad(fixed(r.gains, 3), kCol);
  }
  out << "\n";

  out << pad("Var(Gains)", kLabel);
  for (const EstimateReport& r : report.reports) {
    out << pad(var_text(r), kCol);
  }
  out << "\n";

  out << pad("CI of Gains", kLabel);
  for (const EstimateReport& r : report.reports) {
    out << pad(ci_text(r), kCol);
  }
  out << "\n";

  bool any_notes = false;
  for (const EstimateReport& r : report.reports) {
    for (const std::string& note : r.notes) {
      if (!any_notes) {
        out << "\nnotes:\n";
        any_notes = true;
      }
      out << "  - " << estimator_name(r.estimator) << ": " << note << "\n";
    }
  }
  return out.str();
}

void write_records_csv(const std::filesystem::path& path,
                       const ScenarioReport& report) {
  std::ofstream out = open_for_write(path);
  out << "scenario,estimator,point,gains,var_gains,ci_lo,ci_hi,n_matched\n";
  for (const EstimateReport& r : report.reports) {
    out << report.scenario << ',' << estimator_name(r.estimator) << ','
        << format_double(r.point) << ',' << format_double(r.gains) << ','
        << na_or(r.var_gains) << ','
        << (r.ci95 ? format_double(r.ci95->first) : "NA") << ','
        << (r.ci95 ? format_double(r.ci95->second) : "NA") << ','
        << r.n_matched << '\n';
  }
}

void write_gains_summary(const std::filesystem::path& path,
                         std::span<const ScenarioReport> reports) {
  std::ofstream out = open_for_write(path);
  out << "scenario,estimator,baseline,gains,pct_gains\n";
  for (const ScenarioReport& sr : reports) {
    for (const EstimateReport& r : sr.reports) {
      out << sr.scenario << ',' << estimator_name(r.estimator) << ','
          << format_double(sr.baseline) << ',' << format_double(r.gains)
          << ','
          << (sr.baseline != 0.0 ? format_double(r.gains / sr.baseline)
                                 : "NA")
          << '\n';
    }
  }
}

void write_mc_records(const std::filesystem::path& path,
                      const MonteCarloResult& result) {
  std::ofstream out = open_for_write(path);
  out << "estimator,R,bias,emp_var,mean_est_var,coverage,mc_se\n";
  auto row = [&](const char* name, const McEstimatorStats& s) {
    out << name << ',' << s.replications_used << ',' << nan_to_na(s.bias)
        << ',' << nan_to_na(s.empirical_variance) << ','
        << nan_to_na(s.mean_estimated_variance) << ','
        << nan_to_na(s.coverage) << ',' << nan_to_na(s.mc_se) << '\n';
  };
  row("AIPW", result.aipw);
  row("AIPWl", result.aipwl);
  row("IPW", result.ipw);
  row("Model-Based", result.model_based);
}

void write_enumeration_records(const std::filesystem::path& path,
                               const DesignExpectation& result) {
  std::ofstream out = open_for_write(path);
  out << "estimator,vectors,mean,bias,exact_var,mean_est_var,skipped_weight\n";
  auto row = [&](const char* name, const DesignMoments& m) {
    if (!m.defined) {
      out << name << ',' << result.vector_count << ",NA,NA,NA,NA,"
          << format_double(m.skipped_weight) << '\n';
      return;
    }
    out << name << ',' << result.vector_count << ',' << format_double(m.mean)
        << ',' << format_double(m.mean - result.true_value) << ','
        << format_double(m.variance) << ','
        << format_double(m.mean_estimated_variance) << ','
        << format_double(m.skipped_weight) << '\n';
  };
  row("AIPW", result.aipw);
  row("AIPWl", result.aipwl);
  row("IPW", result.ipw);
  row("Model-Based", result.model_based);
}

std::string render_mc_summary(const MonteCarloResult& result,
                              std::span<const std::string> config_lines) {
  std::ostringstream out;
  if (!config_lines.empty()) {
    out << "config:\n";
    for (const std::string& line : config_lines) out << "  " << line << "\n";
  }
  out << "replications: " << result.replications << "\n";
  out << "true policy value: " << format_double(result.true_value) << "\n\n";
  out << pad("", 13) << pad("bias", 14) << pad("emp_var", 14)
      << pad("mean_est_var", 14) << pad("coverage", 10) << pad("mc_se", 13)
      << "undefined\n";
  auto row = [&](const char* name, const McEstimatorStats& s) {
    out << pad(name, 13) << pad(compact(s.bias), 14)
        << pad(compact(s.empirical_variance), 14)
        << pad(compact(s.mean_estimated_variance), 14)
        << pad(std::isnan(s.coverage) ? "NA" : fixed(s.coverage, 4), 10)
        << pad(compact(s.mc_se), 13) << s.undefined_replications << "\n";
  };
  row("AIPW", result.aipw);
  row("AIPWl", result.aipwl);
  row("IPW", result.ipw);
  row("Model-Based", result.model_based);
  return out.str();
}

std::string render_enumeration_summary(
    const DesignExpectation& result,
    std::span<const std::string> config_lines) {
  std::ostringstream out;
  if (!config_lines.empty()) {
    out << "config:\n";
    for (const std::string& line : config_lines) out << "  " << line << "\n";
  }
  out << "assignment vectors: " << result.vector_count << "\n";
  out << "true policy value: " << format_double(result.true_value) << "\n\n";
  out << pad("", 13) << pad("mean", 14) << pad("bias", 14)
      << pad("exact_var", 14) << "skipped_weight\n";
  auto row = [&](const char* name, const DesignMoments& m) {
    if (!m.defined) {
      out << pad(name, 13) << "undefined (no vector with overlap)\n";
      return;
    }
    out << pad(name, 13) << pad(compact(m.mean), 14)
        << pad(compact(m.mean - result.true_value), 14)
        << pad(compact(m.variance), 14) << compact(m.skipped_weight) << "\n";
  };
  row("AIPW", result.aipw);
  row("AIPWl", result.aipwl);
  row("IPW", result.ipw);
  row("Model-Based", result.model_based);
  return out.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out = open_for_write(path);
  out << content;
}

}  // namespace opeval
