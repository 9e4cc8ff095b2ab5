#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "teamprod/errors.hpp"
#include "teamprod/moments.hpp"
#include "teamprod/optimize.hpp"
#include "teamprod/triplets.hpp"

namespace teamprod {

// Every moment family used here is linear in a short basis of parameter
// monomials: m_k(theta; y) = sum_b F_kb(y) * basis_b(theta). Observations are
// reduced to their feature rows once; sample means, Jacobians and bootstrap
// resamples then cost O(moments * basis) per evaluation.
class MomentSystem {
 public:
  enum class Family { baseline, hetero, three };

  static MomentSystem baseline(std::span<const Triplet> triplets, std::vector<int> orders);
  static MomentSystem hetero(std::span<const Triplet> triplets, std::vector<int> orders);
  static MomentSystem three(std::span<const Quadruplet> quads, std::vector<int> orders);

  Family family() const { return family_; }
  std::size_t num_obs() const { return static_cast<std::size_t>(features_.rows()); }
  std::size_t num_moments() const { return orders_.size(); }
  std::size_t num_params() const { return names_.size(); }
  std::size_t basis_size() const { return 4; }
  const std::vector<std::string>& param_names() const { return names_; }
  const std::vector<int>& orders() const { return orders_; }
  // Parameters optimized on the log scale (the sigmas).
  const std::vector<bool>& positive() const { return positive_; }
  // Pooled standard deviation of all outcomes in the sample.
  double outcome_sd() const { return outcome_sd_; }
  // Ratio of mean team outcome to mean summed solo outcome.
  double ratio_start() const { return ratio_start_; }

  Eigen::VectorXd basis(std::span<const double> theta) const;
  Eigen::MatrixXd basis_jacobian(std::span<const double> theta) const;  // basis x params

  // Row means of the feature matrix, reshaped moments x basis.
  Eigen::MatrixXd mean_features() const;
  // Weighted mean with per-observation counts (bootstrap).
  Eigen::MatrixXd mean_features(std::span<const double> weights) const;

  // n x moments matrix of per-observation moment values.
  Eigen::MatrixXd moment_matrix(std::span<const double> theta) const;

 private:
  Family family_ = Family::baseline;
  std::vector<int> orders_;
  std::vector<std::string> names_;
  std::vector<bool> positive_;
  Eigen::MatrixXd features_;  // n x (moments * 4), moment-major
  double outcome_sd_ = 1.0;
  double ratio_start_ = 1.0;
};

enum class Weighting { identity, two_step };

struct GmmOptions {
  std::vector<int> moment_orders{1, 2};
  Weighting weighting = Weighting::identity;  // two_step only matters when over-identified
  std::size_t min_obs = 10;
  int grid_points = 41;
  double lambda_lo = 0.0;
  double lambda_hi = 2.0;
  double winsor_quantile = 0.999;            // applied to |m_k| for V only
  bool check_identification = true;
  bool use_grid = true;
  std::optional<std::vector<double>> start;  // natural parameters
  bool throw_on_nonconvergence = true;
  NelderMeadOptions nelder_mead;
};

struct GmmResult {
  std::vector<std::string> names;
  std::vector<double> estimates;
  std::vector<double> se;
  Eigen::MatrixXd vcov;
  Params params;
  double objective = 0.0;
  std::size_t n_obs = 0;
  std::size_t n_moments = 0;
  bool converged = false;
  bool over_identified = false;
  bool pseudo_inverse = false;
  bool boundary = false;  // a scale parameter sits at 0
  int iterations = 0;
  Eigen::VectorXd g_hat;
  Eigen::MatrixXd weight;
  std::vector<std::string> warnings;

  double estimate(const std::string& name) const;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, GmmResult best)
      : NumericalError(what), best_(std::move(best)) {}
  const GmmResult& best() const { return best_; }

 private:
  GmmResult best_;
};

// Minimizes g' W g over the system's parameters. Identity weighting for the
// first step; with Weighting::two_step and more moments than parameters the
// second step uses W = V^-1 from the first-step estimate. Covariance is the
// sandwich around the final W, which reduces to (G' V^-1 G)^-1 / n when the
// system is just-identified or efficiently weighted.
GmmResult gmm_fit(const MomentSystem& system, const GmmOptions& options = {});

// Re-fit on a resample given by per-observation counts. `start` is used only
// when options.use_grid is off. `weight` is held fixed; empty means identity.
GmmResult gmm_refit(const MomentSystem& system, std::span<const double> weights,
                    const std::vector<double>& start, const GmmOptions& options,
                    const Eigen::MatrixXd& weight = {});

// Baseline (lambda, sigma) estimator on triplets.
GmmResult gmm_estimate(std::span<const Triplet> triplets, const GmmOptions& options = {});
// (lambda, sigma_1, sigma_2) with team-size-specific shock scales; orders default 1,2,3.
GmmResult gmm_estimate_hetero(std::span<const Triplet> triplets, GmmOptions options = {});
// (lambda3, sigma) on quadruplets.
GmmResult gmm_estimate_three(std::span<const Quadruplet> quads, const GmmOptions& options = {});

// Variance of the per-observation moments with each column clipped at the
// given quantile of its absolute values.
Eigen::MatrixXd winsorized_covariance(const Eigen::MatrixXd& moments, double quantile);

}  // namespace teamprod
