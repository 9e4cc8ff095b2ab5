#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "teamprod/gmm.hpp"
#include "teamprod/simulation.hpp"

namespace teamprod {

enum class Estimator { naive_latent, naive_observed, gmm_latent, gmm_observed };

std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& s);  // throws ConfigError

struct McCell {
  std::string name = "custom";
  DgpConfig config;
  std::size_t reps = 200;
  std::vector<Estimator> estimators{Estimator::naive_latent, Estimator::naive_observed,
                                    Estimator::gmm_latent, Estimator::gmm_observed};
  GmmOptions gmm;

  void validate() const;
};

struct McRow {
  Estimator estimator = Estimator::naive_observed;
  double true_value = 0.0;
  double median_bias = 0.0;
  double mae = 0.0;
  double se = 0.0;
  std::size_t failure_count = 0;
  std::size_t n_ok = 0;
};

// Median bias, median absolute error and IQR / 1.35 of a nonempty sample.
McRow summarize(const std::vector<double>& estimates, double true_value);

struct McRep {
  std::uint64_t seed = 0;
  double truncated_share = 0.0;
  std::size_t n_triplets_observed = 0;
  // aligned with McCell::estimators; empty when the estimator failed
  std::vector<std::optional<double>> estimate;
  std::vector<std::optional<double>> se;
};

struct McSummary {
  std::string cell;
  std::uint64_t master_seed = 0;
  std::vector<McRow> rows;
  std::vector<McRep> reps;  // in replication order
};

// Replication r simulates with substream_seed(master_seed, r). Results do not
// depend on `threads`.
McSummary run_cell(const McCell& cell, std::uint64_t master_seed, unsigned threads = 1);

// Named designs: table1-highly-sparse, table1-sparse, table1-less-sparse,
// table2-small, table2-medium, table2-large, table3-t, table3-gev.
McCell preset_cell(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace teamprod
