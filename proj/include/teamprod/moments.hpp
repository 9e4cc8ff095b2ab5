#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "teamprod/triplets.hpp"

namespace teamprod {

struct Params {
  double lambda = 0.0;
  double sigma = 1.0;
  std::optional<std::array<double, 2>> sigma_by_size;  // (sigma_1, sigma_2)
  std::optional<double> lambda3;
};

// x^k with 0^0 = 1.
double ipow(double x, int k);

// Fixed-effect-free conditional moment of order k for a triplet (baseline model).
double moment_mk(double lambda, double sigma, double y_i, double y_j, double y_ij, int k);
// d m_k / d lambda and d m_k / d sigma.
std::array<double, 2> moment_mk_gradient(double lambda, double sigma, double y_i, double y_j,
                                         double y_ij, int k);

// Solo shocks with scale sigma_1, team shocks with scale sigma_2.
double moment_mk_hetero(double lambda, double sigma1, double sigma2, double y_i, double y_j,
                        double y_ij, int k);
// Gradient w.r.t. (lambda, sigma_1, sigma_2).
std::array<double, 3> moment_mk_hetero_gradient(double lambda, double sigma1, double sigma2,
                                                double y_i, double y_j, double y_ij, int k);

// Three-worker analogue on (y_i, y_j, y_k, y_ijk); free of the fixed effects.
double moment_mk_three(double lambda3, double sigma, double y_i, double y_j, double y_k,
                       double y_ijk, int k);
// Gradient w.r.t. (lambda3, sigma).
std::array<double, 2> moment_mk_three_gradient(double lambda3, double sigma, double y_i,
                                               double y_j, double y_k, double y_ijk, int k);

// E[Y^{k+1} - a Y^k - k s^2 Y^{k-1} | Y >= 0] for Y ~ N(a, s^2), by adaptive
// Gauss-Kronrod quadrature. Test oracle for the truncated-normal recursion.
double trunc_normal_moment_identity(double alpha_tilde, double sigma_tilde, int k);
// E[Y^k | Y >= 0] by the same quadrature.
double trunc_normal_moment(double alpha_tilde, double sigma_tilde, int k);

struct RankReport {
  std::array<std::array<double, 3>, 3> matrix{};  // rows k = 1,2,3; cols lambda, sigma^2, rho
  std::array<double, 3> singular_values{};        // descending, of the equilibrated matrix
  bool full_rank = false;
  std::size_t n = 0;
};

// Sample mean of the linear-in-(lambda, sigma^2, lambda*sigma^2) coefficient
// matrix. Rows and columns are scaled to unit max-norm before the SVD; full
// rank when n >= 3 and s_min > 1e-8 * s_max.
RankReport identification_rank_check(std::span<const Triplet> triplets);

}  // namespace teamprod
