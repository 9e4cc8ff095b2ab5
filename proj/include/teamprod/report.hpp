#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "teamprod/bootstrap.hpp"
#include "teamprod/gmm.hpp"
#include "teamprod/jtest.hpp"
#include "teamprod/montecarlo.hpp"

namespace teamprod {

// Result documents written by the CLI. None of them carry timing or thread
// counts, so the same inputs and seed give byte-identical files.

// {method, params, se, ci, level, objective, n_triplets, premium, diagnostics}
nlohmann::json gmm_report(const std::string& method, const GmmResult& r,
                          const std::optional<BootstrapResult>& boot);
// se is null (no analytic standard error); ci only with a bootstrap.
nlohmann::json naive_report(double lambda, std::size_t n_pairs,
                            const std::optional<BootstrapResult>& boot);

// {statistic, dof, p_value, lambda_hat, lambda_first_step, n, statistics, reject_at, ...}
nlohmann::json jtest_report(const JtestResult& r);

// One row per estimator: bias, MAE and SE in percentage points (x 100).
std::string montecarlo_csv(const McSummary& s);
// Cell definition, summary rows and every replication's raw estimates.
nlohmann::json montecarlo_report(const McSummary& s, const nlohmann::json& cell_config);

}  // namespace teamprod
