#include "teamprod/report.hpp"

#include <cmath>
#include <sstream>

#include "teamprod/io.hpp"
#include "teamprod/naive.hpp"

namespace teamprod {

using nlohmann::json;

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json ci_json(const BootstrapResult& b) {
  json ci = json::object();
  for (std::size_t k = 0; k < b.names.size(); ++k) ci[b.names[k]] = {b.lower[k], b.upper[k]};
  return ci;
}

void add_bootstrap(json& out, const std::optional<BootstrapResult>& boot) {
  if (boot) {
    out["ci"] = ci_json(*boot);
    out["level"] = boot->level;
    out["diagnostics"]["bootstrap_reps"] = boot->reps;
    out["diagnostics"]["bootstrap_failures"] = boot->failures;
  } else {
    out["ci"] = nullptr;
    out["level"] = nullptr;
  }
}

}  // namespace

json gmm_report(const std::string& method, const GmmResult& r,
                const std::optional<BootstrapResult>& boot) {
  json out;
  out["method"] = method;
  json params = json::object(), se = json::object();
  for (std::size_t k = 0; k < r.names.size(); ++k) {
    params[r.names[k]] = number_or_null(r.estimates[k]);
    se[r.names[k]] = number_or_null(r.se[k]);
  }
  out["params"] = params;
  out["se"] = se;
  out["objective"] = r.objective;
  out["n_triplets"] = r.n_obs;
  if (r.names.front() == "lambda") out["premium"] = collaboration_premium(r.estimates.front());
  json d;
  d["converged"] = r.converged;
  d["boundary"] = r.boundary;
  d["over_identified"] = r.over_identified;
  d["pseudo_inverse"] = r.pseudo_inverse;
  d["iterations"] = r.iterations;
  d["n_moments"] = r.n_moments;
  d["moment_values"] = std::vector<double>(r.g_hat.data(), r.g_hat.data() + r.g_hat.size());
  d["warnings"] = r.warnings;
  out["diagnostics"] = d;
  add_bootstrap(out, boot);
  return out;
}

json naive_report(double lambda, std::size_t n_pairs, const std::optional<BootstrapResult>& boot) {
  json out;
  out["method"] = "naive";
  out["params"] = {{"lambda", lambda}};
  out["se"] = nullptr;
  out["objective"] = nullptr;
  out["n_triplets"] = nullptr;
  out["premium"] = collaboration_premium(lambda);
  out["diagnostics"] = {{"n_pairs", n_pairs}};
  add_bootstrap(out, boot);
  return out;
}

json jtest_report(const JtestResult& r) {
  json out;
  out["statistic"] = r.statistic;
  out["dof"] = r.dof;
  out["p_value"] = r.p_value;
  out["lambda_hat"] = r.lambda_hat;
  out["lambda_first_step"] = r.lambda_first_step;
  out["n"] = r.n;
  out["statistics"] = r.statistics;
  out["reject_at"] = {{"0.10", r.reject(0.10)}, {"0.05", r.reject(0.05)}, {"0.01", r.reject(0.01)}};
  out["moment_values"] =
      std::vector<double>(r.moment_values.data(), r.moment_values.data() + r.moment_values.size());
  out["pseudo_inverse"] = r.pseudo_inverse;
  out["warnings"] = r.warnings;
  return out;
}

std::string montecarlo_csv(const McSummary& s) {
  std::ostringstream os;
  os << "cell,estimator,network,true_value,median_bias_pct,mae_pct,se_pct,n_ok,failures\n";
  for (const auto& r : s.rows) {
    const auto name = to_string(r.estimator);
    const auto split = name.find('_');
    os << s.cell << ',' << name.substr(0, split) << ',' << name.substr(split + 1) << ','
       << format_double(r.true_value) << ',' << format_double(100.0 * r.median_bias) << ','
       << format_double(100.0 * r.mae) << ',' << format_double(100.0 * r.se) << ',' << r.n_ok
       << ',' << r.failure_count << '\n';
  }
  return os.str();
}

json montecarlo_report(const McSummary& s, const json& cell_config) {
  json out;
  out["cell"] = s.cell;
  out["master_seed"] = s.master_seed;
  out["config"] = cell_config;
  json rows = json::array();
  for (const auto& r : s.rows)
    rows.push_back({{"estimator", to_string(r.estimator)},
                    {"true_value", r.true_value},
                    {"median_bias", r.median_bias},
                    {"mae", r.mae},
                    {"se", r.se},
                    {"n_ok", r.n_ok},
                    {"failures", r.failure_count}});
  out["summary"] = rows;
  json reps = json::array();
  std::vector<std::string> names;
  for (const auto& r : s.rows) names.push_back(to_string(r.estimator));
  for (const auto& rep : s.reps) {
    json est = json::object(), se = json::object();
    for (std::size_t k = 0; k < names.size() && k < rep.estimate.size(); ++k) {
      est[names[k]] = rep.estimate[k] ? json(*rep.estimate[k]) : json(nullptr);
      se[names[k]] = rep.se[k] ? json(*rep.se[k]) : json(nullptr);
    }
    reps.push_back({{"seed", rep.seed},
                    {"truncated_share", rep.truncated_share},
                    {"n_triplets_observed", rep.n_triplets_observed},
                    {"estimate", est},
                    {"se", se}});
  }
  out["replications"] = reps;
  return out;
}

}  // namespace teamprod
