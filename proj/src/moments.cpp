#include "teamprod/moments.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "teamprod/errors.hpp"

namespace teamprod {

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

double moment_mk(double lambda, double sigma, double y_i, double y_j, double y_ij, int k) {
  const double p = y_i * y_j * y_ij;
  const double s = y_i + y_j;
  return ipow(p, k) * (y_ij - lambda * s) +
         k * sigma * sigma * ipow(p, k - 1) * (lambda * s * y_ij - y_i * y_j);
}

std::array<double, 2> moment_mk_gradient(double lambda, double sigma, double y_i, double y_j,
                                         double y_ij, int k) {
  const double p = y_i * y_j * y_ij;
  const double s = y_i + y_j;
  const double pk1 = ipow(p, k - 1);
  return {-ipow(p, k) * s + k * sigma * sigma * pk1 * s * y_ij,
          2.0 * k * sigma * pk1 * (lambda * s * y_ij - y_i * y_j)};
}

// Scaling the two solo equations by lambda and the products of the other two
// outcomes, and the team equation by (y_i y_j)^k, then subtracting, gives
//   P^k (y_ij - lambda s) + k lambda s1^2 A - k s2^2 B
// with A = (y_i^{k-1} y_j^k + y_i^k y_j^{k-1}) y_ij^k and B = y_i^k y_j^k y_ij^{k-1}.
double moment_mk_hetero(double lambda, double sigma1, double sigma2, double y_i, double y_j,
                        double y_ij, int k) {
  const double p = y_i * y_j * y_ij;
  const double a = (ipow(y_i, k - 1) * ipow(y_j, k) + ipow(y_i, k) * ipow(y_j, k - 1)) *
                   ipow(y_ij, k);
  const double b = ipow(y_i * y_j, k) * ipow(y_ij, k - 1);
  return ipow(p, k) * (y_ij - lambda * (y_i + y_j)) + k * lambda * sigma1 * sigma1 * a -
         k * sigma2 * sigma2 * b;
}

std::array<double, 3> moment_mk_hetero_gradient(double lambda, double sigma1, double sigma2,
                                                double y_i, double y_j, double y_ij, int k) {
  const double p = y_i * y_j * y_ij;
  const double a = (ipow(y_i, k - 1) * ipow(y_j, k) + ipow(y_i, k) * ipow(y_j, k - 1)) *
                   ipow(y_ij, k);
  const double b = ipow(y_i * y_j, k) * ipow(y_ij, k - 1);
  return {-ipow(p, k) * (y_i + y_j) + k * sigma1 * sigma1 * a, 2.0 * k * lambda * sigma1 * a,
          -2.0 * k * sigma2 * b};
}

// Q^k (y_ijk - lambda3 S) + k sigma^2 Q^{k-1} (lambda3 E2 y_ijk - y_i y_j y_k),
// Q = y_i y_j y_k y_ijk, S = y_i + y_j + y_k, E2 = y_j y_k + y_i y_k + y_i y_j.
double moment_mk_three(double lambda3, double sigma, double y_i, double y_j, double y_k,
                       double y_ijk, int k) {
  const double q = y_i * y_j * y_k * y_ijk;
  const double s = y_i + y_j + y_k;
  const double e2 = y_j * y_k + y_i * y_k + y_i * y_j;
  return ipow(q, k) * (y_ijk - lambda3 * s) +
         k * sigma * sigma * ipow(q, k - 1) * (lambda3 * e2 * y_ijk - y_i * y_j * y_k);
}

std::array<double, 2> moment_mk_three_gradient(double lambda3, double sigma, double y_i,
                                               double y_j, double y_k, double y_ijk, int k) {
  const double q = y_i * y_j * y_k * y_ijk;
  const double s = y_i + y_j + y_k;
  const double e2 = y_j * y_k + y_i * y_k + y_i * y_j;
  const double qk1 = ipow(q, k - 1);
  return {-ipow(q, k) * s + k * sigma * sigma * qk1 * e2 * y_ijk,
          2.0 * k * sigma * qk1 * (lambda3 * e2 * y_ijk - y_i * y_j * y_k)};
}

namespace {

// E[h(Y) | Y >= 0], Y ~ N(a, s^2), integrating in standard units.
template <class F>
double truncated_expectation(double a, double s, F&& h) {
  if (!(s >= 0.0)) throw NumericalError("truncated normal: sigma must be >= 0");
  if (s == 0.0) {
    if (a < 0.0) throw NumericalError("truncated normal: degenerate law below the cut-off");
    return h(a);
  }
  const double z0 = -a / s;
  const double tail = 0.5 * std::erfc(z0 / std::numbers::sqrt2);
  if (!(tail > 0.0)) throw NumericalError("truncated normal: tail probability underflows");
  const double log_norm = std::log(tail) + 0.5 * std::log(2.0 * std::numbers::pi);
  auto integrand = [&](double z) { return h(a + s * z) * std::exp(-0.5 * z * z - log_norm); };

  using boost::math::quadrature::gauss_kronrod;
  const double lo = std::max(z0, -40.0);
  const double hi = std::max(z0, 0.0) + 40.0;
  double total = 0.0;
  double err_total = 0.0;
  double l1_total = 0.0;
  // split at the mode so both pieces are unimodal
  std::array<double, 3> cuts{lo, std::clamp(0.0, lo, hi), hi};
  for (int piece = 0; piece < 2; ++piece) {
    if (cuts[piece + 1] <= cuts[piece]) continue;
    double err = 0.0;
    double l1 = 0.0;
    // 1e-15 is below what the error estimate can resolve and only forces
    // needless subdivision; 1e-12 relative still leaves residuals near 1e-12.
    total += gauss_kronrod<double, 61>::integrate(integrand, cuts[piece], cuts[piece + 1], 15,
                                                  1e-12, &err, &l1);
    err_total += err;
    l1_total += l1;
  }
  if (!std::isfinite(total) || err_total > 1e-9 * std::max(1.0, l1_total))
    throw NumericalError("truncated normal quadrature did not converge");
  return total;
}

}  // namespace

double trunc_normal_moment(double alpha_tilde, double sigma_tilde, int k) {
  return truncated_expectation(alpha_tilde, sigma_tilde, [k](double y) { return ipow(y, k); });
}

double trunc_normal_moment_identity(double alpha_tilde, double sigma_tilde, int k) {
  if (k < 1) throw NumericalError("truncated normal identity: k must be >= 1");
  const double s2 = sigma_tilde * sigma_tilde;
  return truncated_expectation(alpha_tilde, sigma_tilde, [&](double y) {
    return ipow(y, k + 1) - alpha_tilde * ipow(y, k) - k * s2 * ipow(y, k - 1);
  });
}

RankReport identification_rank_check(std::span<const Triplet> triplets) {
  RankReport rep;
  rep.n = triplets.size();
  if (triplets.empty()) return rep;
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  for (const auto& t : triplets) {
    const double p = t.y_i * t.y_j * t.y_ij;
    const double s = t.y_i + t.y_j;
    for (int k = 1; k <= 3; ++k) {
      const double pk1 = ipow(p, k - 1);
      acc(k - 1, 0) += -s * ipow(p, k);
      acc(k - 1, 1) += -k * pk1 * t.y_i * t.y_j;
      acc(k - 1, 2) += k * pk1 * s * t.y_ij;
    }
  }
  acc /= static_cast<double>(triplets.size());
  // Rows grow like P^k, so equilibrate rows then columns before judging rank.
  Eigen::Matrix3d eq = acc;
  for (int r = 0; r < 3; ++r) {
    const double m = eq.row(r).cwiseAbs().maxCoeff();
    if (m > 0.0) eq.row(r) /= m;
  }
  for (int c = 0; c < 3; ++c) {
    const double m = eq.col(c).cwiseAbs().maxCoeff();
    if (m > 0.0) eq.col(c) /= m;
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(eq);
  const auto sv = svd.singularValues();
  for (int r = 0; r < 3; ++r) {
    rep.singular_values[r] = sv(r);
    for (int c = 0; c < 3; ++c) rep.matrix[r][c] = acc(r, c);
  }
  rep.full_rank = rep.n >= 3 && sv(0) > 0.0 && sv(2) > 1e-8 * sv(0);
  return rep;
}

}  // namespace teamprod
