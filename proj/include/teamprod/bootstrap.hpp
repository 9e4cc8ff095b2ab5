#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "teamprod/gmm.hpp"
#include "teamprod/naive.hpp"

namespace teamprod {

struct BootstrapOptions {
  std::size_t reps = 999;
  double level = 0.90;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double max_failure_share = 0.05;
};

struct BootstrapResult {
  std::vector<std::string> names;
  std::vector<double> lower;
  std::vector<double> upper;
  double level = 0.90;
  std::size_t reps = 0;
  std::size_t failures = 0;
  // reps x params, in replication order; failed reps are absent.
  std::vector<std::vector<double>> draws;
};

// Percentile interval from resampling eligible pairs with replacement.
BootstrapResult bootstrap_naive(std::span<const EligiblePair> pairs, const BootstrapOptions& options);

// Percentile interval from resampling observations of the moment system; each
// replication refits from the point estimate, holding its weight matrix fixed.
BootstrapResult bootstrap_gmm(const MomentSystem& system, const GmmResult& point,
                              const GmmOptions& gmm, const BootstrapOptions& options);

}  // namespace teamprod
