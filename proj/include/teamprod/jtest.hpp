#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "teamprod/network.hpp"
#include "teamprod/triplets.hpp"

namespace teamprod {

// Node-level statistic f(i); the dyadic instrument is f(i) + f(j).
struct NodeStatistic {
  std::string name;
  std::unordered_map<std::string, double> values;  // node id -> value
};

// Built-in statistics on the observed graph: "degree", "closeness".
NodeStatistic builtin_statistic(const std::string& name, const NodeStatistics& stats);

struct JtestResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  double lambda_hat = 0.0;         // second step
  double lambda_first_step = 0.0;  // (Z'Z)^-1 weight
  Eigen::VectorXd moment_values;   // g(lambda_hat), length K + 1
  Eigen::MatrixXd weight_matrix;   // S^-1 (or its pseudo-inverse)
  std::size_t n = 0;
  bool pseudo_inverse = false;
  std::vector<std::string> statistics;
  std::vector<std::string> warnings;

  bool reject(double alpha) const { return p_value < alpha; }
};

// J-test of H0: no links missing. Moments are z * m0 with
// m0 = y_ij - lambda (y_i + y_j) and z = (1, f_1,ij, ..., f_K,ij).
// Two-step GMM: first step weighted by (Z'Z/n)^-1, then S^-1 from the first-step moments.
// `triplets` should be pair-unique (select_unique_pairs); at least 30 and K >= 1.
JtestResult jtest(std::span<const Triplet> triplets, const std::vector<NodeStatistic>& statistics,
                  std::size_t min_triplets = 30);
// Statistics by name ("degree", "closeness") computed on `net`.
JtestResult jtest(const TeamNetwork& net, std::span<const Triplet> triplets,
                  const std::vector<std::string>& statistics, std::size_t min_triplets = 30);

// n g' W g for stored moments and weight.
double j_statistic(const Eigen::VectorXd& g, const Eigen::MatrixXd& weight, std::size_t n);

}  // namespace teamprod
