#include "teamprod/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace teamprod {

namespace {

constexpr std::size_t kBasis = 4;

void check_orders(const std::vector<int>& orders) {
  if (orders.empty()) throw ConfigError("moments: at least one order is required");
  for (int k : orders)
    if (k < 1) throw ConfigError("moments: orders must be >= 1");
}

double pooled_sd(const std::vector<double>& ys) {
  if (ys.size() < 2) return 1.0;
  double mean = 0.0;
  for (double y : ys) mean += y;
  mean /= static_cast<double>(ys.size());
  double ss = 0.0;
  for (double y : ys) ss += (y - mean) * (y - mean);
  double sd = std::sqrt(ss / static_cast<double>(ys.size() - 1));
  return sd > 0.0 ? sd : 1.0;
}

}  // namespace

MomentSystem MomentSystem::baseline(std::span<const Triplet> triplets, std::vector<int> orders) {
  check_orders(orders);
  MomentSystem sys;
  sys.family_ = Family::baseline;
  sys.orders_ = std::move(orders);
  sys.names_ = {"lambda", "sigma"};
  sys.positive_ = {false, true};
  const auto m = sys.orders_.size();
  sys.features_.resize(static_cast<Eigen::Index>(triplets.size()),
                       static_cast<Eigen::Index>(m * kBasis));
  std::vector<double> ys;
  double team = 0.0, solo = 0.0;
  for (std::size_t r = 0; r < triplets.size(); ++r) {
    const auto& t = triplets[r];
    const double p = t.y_i * t.y_j * t.y_ij;
    const double s = t.y_i + t.y_j;
    for (std::size_t q = 0; q < m; ++q) {
      const int k = sys.orders_[q];
      const double pk = ipow(p, k);
      const double pk1 = ipow(p, k - 1);
      auto row = static_cast<Eigen::Index>(r);
      auto c = static_cast<Eigen::Index>(q * kBasis);
      // basis (1, lambda, sigma^2, lambda sigma^2)
      sys.features_(row, c + 0) = pk * t.y_ij;
      sys.features_(row, c + 1) = -pk * s;
      sys.features_(row, c + 2) = -k * pk1 * t.y_i * t.y_j;
      sys.features_(row, c + 3) = k * pk1 * s * t.y_ij;
    }
    ys.insert(ys.end(), {t.y_i, t.y_j, t.y_ij});
    team += t.y_ij;
    solo += s;
  }
  sys.outcome_sd_ = pooled_sd(ys);
  sys.ratio_start_ = solo != 0.0 ? team / solo : 1.0;
  return sys;
}

MomentSystem MomentSystem::hetero(std::span<const Triplet> triplets, std::vector<int> orders) {
  check_orders(orders);
  MomentSystem sys;
  sys.family_ = Family::hetero;
  sys.orders_ = std::move(orders);
  sys.names_ = {"lambda", "sigma1", "sigma2"};
  sys.positive_ = {false, true, true};
  const auto m = sys.orders_.size();
  sys.features_.resize(static_cast<Eigen::Index>(triplets.size()),
                       static_cast<Eigen::Index>(m * kBasis));
  std::vector<double> ys;
  double team = 0.0, solo = 0.0;
  for (std::size_t r = 0; r < triplets.size(); ++r) {
    const auto& t = triplets[r];
    const double p = t.y_i * t.y_j * t.y_ij;
    const double s = t.y_i + t.y_j;
    for (std::size_t q = 0; q < m; ++q) {
      const int k = sys.orders_[q];
      const double pk = ipow(p, k);
      const double a = (ipow(t.y_i, k - 1) * ipow(t.y_j, k) + ipow(t.y_i, k) * ipow(t.y_j, k - 1)) *
                       ipow(t.y_ij, k);
      const double b = ipow(t.y_i * t.y_j, k) * ipow(t.y_ij, k - 1);
      auto row = static_cast<Eigen::Index>(r);
      auto c = static_cast<Eigen::Index>(q * kBasis);
      // basis (1, lambda, lambda sigma1^2, sigma2^2)
      sys.features_(row, c + 0) = pk * t.y_ij;
      sys.features_(row, c + 1) = -pk * s;
      sys.features_(row, c + 2) = k * a;
      sys.features_(row, c + 3) = -k * b;
    }
    ys.insert(ys.end(), {t.y_i, t.y_j, t.y_ij});
    team += t.y_ij;
    solo += s;
  }
  sys.outcome_sd_ = pooled_sd(ys);
  sys.ratio_start_ = solo != 0.0 ? team / solo : 1.0;
  return sys;
}

MomentSystem MomentSystem::three(std::span<const Quadruplet> quads, std::vector<int> orders) {
  check_orders(orders);
  MomentSystem sys;
  sys.family_ = Family::three;
  sys.orders_ = std::move(orders);
  sys.names_ = {"lambda3", "sigma"};
  sys.positive_ = {false, true};
  const auto m = sys.orders_.size();
  sys.features_.resize(static_cast<Eigen::Index>(quads.size()),
                       static_cast<Eigen::Index>(m * kBasis));
  std::vector<double> ys;
  double team = 0.0, solo = 0.0;
  for (std::size_t r = 0; r < quads.size(); ++r) {
    const auto& t = quads[r];
    const double qv = t.y_i * t.y_j * t.y_k * t.y_ijk;
    const double s = t.y_i + t.y_j + t.y_k;
    const double e2 = t.y_j * t.y_k + t.y_i * t.y_k + t.y_i * t.y_j;
    for (std::size_t q = 0; q < m; ++q) {
      const int k = sys.orders_[q];
      const double qk = ipow(qv, k);
      const double qk1 = ipow(qv, k - 1);
      auto row = static_cast<Eigen::Index>(r);
      auto c = static_cast<Eigen::Index>(q * kBasis);
      // basis (1, lambda3, sigma^2, lambda3 sigma^2)
      sys.features_(row, c + 0) = qk * t.y_ijk;
      sys.features_(row, c + 1) = -qk * s;
      sys.features_(row, c + 2) = -k * qk1 * t.y_i * t.y_j * t.y_k;
      sys.features_(row, c + 3) = k * qk1 * e2 * t.y_ijk;
    }
    ys.insert(ys.end(), {t.y_i, t.y_j, t.y_k, t.y_ijk});
    team += t.y_ijk;
    solo += s;
  }
  sys.outcome_sd_ = pooled_sd(ys);
  sys.ratio_start_ = solo != 0.0 ? team / solo : 1.0;
  return sys;
}

Eigen::VectorXd MomentSystem::basis(std::span<const double> theta) const {
  Eigen::VectorXd b(kBasis);
  switch (family_) {
    case Family::baseline:
    case Family::three: {
      const double l = theta[0], s2 = theta[1] * theta[1];
      b << 1.0, l, s2, l * s2;
      break;
    }
    case Family::hetero: {
      const double l = theta[0], s1 = theta[1], s2 = theta[2];
      b << 1.0, l, l * s1 * s1, s2 * s2;
      break;
    }
  }
  return b;
}

Eigen::MatrixXd MomentSystem::basis_jacobian(std::span<const double> theta) const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(kBasis, static_cast<Eigen::Index>(num_params()));
  switch (family_) {
    case Family::baseline:
    case Family::three: {
      const double l = theta[0], s = theta[1];
      d(1, 0) = 1.0;
      d(3, 0) = s * s;
      d(2, 1) = 2.0 * s;
      d(3, 1) = 2.0 * l * s;
      break;
    }
    case Family::hetero: {
      const double l = theta[0], s1 = theta[1], s2 = theta[2];
      d(1, 0) = 1.0;
      d(2, 0) = s1 * s1;
      d(2, 1) = 2.0 * l * s1;
      d(3, 2) = 2.0 * s2;
      break;
    }
  }
  return d;
}

Eigen::MatrixXd MomentSystem::mean_features() const {
  const auto m = static_cast<Eigen::Index>(num_moments());
  Eigen::MatrixXd out(m, static_cast<Eigen::Index>(kBasis));
  const double n = static_cast<double>(std::max<std::size_t>(num_obs(), 1));
  for (Eigen::Index q = 0; q < m; ++q)
    for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(kBasis); ++b) {
      double acc = 0.0;
      const auto col = q * static_cast<Eigen::Index>(kBasis) + b;
      for (Eigen::Index r = 0; r < features_.rows(); ++r) acc += features_(r, col);
      out(q, b) = acc / n;
    }
  return out;
}

Eigen::MatrixXd MomentSystem::mean_features(std::span<const double> weights) const {
  const auto m = static_cast<Eigen::Index>(num_moments());
  Eigen::MatrixXd out(m, static_cast<Eigen::Index>(kBasis));
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw DegenerateData("resample has zero total weight");
  for (Eigen::Index q = 0; q < m; ++q)
    for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(kBasis); ++b) {
      double acc = 0.0;
      const auto col = q * static_cast<Eigen::Index>(kBasis) + b;
      for (Eigen::Index r = 0; r < features_.rows(); ++r)
        acc += weights[static_cast<std::size_t>(r)] * features_(r, col);
      out(q, b) = acc / total;
    }
  return out;
}

Eigen::MatrixXd MomentSystem::moment_matrix(std::span<const double> theta) const {
  const auto b = basis(theta);
  const auto m = static_cast<Eigen::Index>(num_moments());
  Eigen::MatrixXd out(features_.rows(), m);
  for (Eigen::Index q = 0; q < m; ++q)
    out.col(q) = features_.middleCols(q * static_cast<Eigen::Index>(kBasis),
                                      static_cast<Eigen::Index>(kBasis)) *
                 b;
  return out;
}

double GmmResult::estimate(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return estimates[i];
  throw InvalidInput("no parameter named " + name);
}

Eigen::MatrixXd winsorized_covariance(const Eigen::MatrixXd& moments, double quantile) {
  const auto n = moments.rows();
  const auto m = moments.cols();
  Eigen::MatrixXd clipped = moments;
  if (n >= 2 && quantile < 1.0) {
    std::vector<double> abs_vals(static_cast<std::size_t>(n));
    for (Eigen::Index q = 0; q < m; ++q) {
      for (Eigen::Index r = 0; r < n; ++r) abs_vals[static_cast<std::size_t>(r)] = std::abs(moments(r, q));
      std::sort(abs_vals.begin(), abs_vals.end());
      const double pos = quantile * static_cast<double>(n - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const auto hi = std::min(lo + 1, abs_vals.size() - 1);
      const double cap = abs_vals[lo] + (pos - static_cast<double>(lo)) * (abs_vals[hi] - abs_vals[lo]);
      for (Eigen::Index r = 0; r < n; ++r) clipped(r, q) = std::clamp(moments(r, q), -cap, cap);
    }
  }
  Eigen::RowVectorXd mean = clipped.colwise().mean();
  Eigen::MatrixXd centered = clipped.rowwise() - mean;
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  return (centered.transpose() * centered) / denom;
}

namespace {

struct Fitter {
  const MomentSystem& sys;
  Eigen::MatrixXd fbar;  // moments x basis
  Eigen::MatrixXd weight;

  std::vector<double> to_natural(std::span<const double> u) const {
    std::vector<double> th(u.begin(), u.end());
    for (std::size_t i = 0; i < th.size(); ++i)
      if (sys.positive()[i]) th[i] = std::exp(u[i]);
    return th;
  }
  std::vector<double> to_internal(std::span<const double> th) const {
    std::vector<double> u(th.begin(), th.end());
    for (std::size_t i = 0; i < u.size(); ++i)
      if (sys.positive()[i]) u[i] = std::log(th[i]);
    return u;
  }
  Eigen::VectorXd g(std::span<const double> theta) const { return fbar * sys.basis(theta); }
  Eigen::MatrixXd jac(std::span<const double> theta) const {
    return fbar * sys.basis_jacobian(theta);
  }
  double objective(std::span<const double> theta) const {
    auto gv = g(theta);
    return gv.dot(weight * gv);
  }
  double objective_internal(std::span<const double> u) const {
    auto th = to_natural(u);
    return objective(th);
  }

  // For fixed lambda the basis is affine in t = (sigma_1^2, ...):
  // basis = e(lambda) + M(lambda) t.
  void split(double lambda, Eigen::Vector4d& e, Eigen::MatrixXd& mt) const {
    e << 1.0, lambda, 0.0, 0.0;
    const auto q = static_cast<Eigen::Index>(sys.num_params() - 1);
    mt = Eigen::MatrixXd::Zero(4, q);
    if (sys.family() == MomentSystem::Family::hetero) {
      mt(2, 0) = lambda;
      mt(3, 1) = 1.0;
    } else {
      mt(2, 0) = 1.0;
      mt(3, 0) = lambda;
    }
  }

  // min over t >= 0 of g' W g at fixed lambda, by enumerating active sets
  // (at most two scale parameters, so at most four candidate sets).
  double profile(double lambda, Eigen::VectorXd& t_best) const {
    Eigen::Vector4d e;
    Eigen::MatrixXd mt;
    split(lambda, e, mt);
    const Eigen::VectorXd u = fbar * e;
    const Eigen::MatrixXd v = fbar * mt;
    const auto q = v.cols();
    double best = std::numeric_limits<double>::infinity();
    t_best = Eigen::VectorXd::Zero(q);
    for (unsigned mask = 0; mask < (1u << q); ++mask) {
      std::vector<Eigen::Index> free;
      for (Eigen::Index c = 0; c < q; ++c)
        if (mask & (1u << c)) free.push_back(c);
      Eigen::VectorXd t = Eigen::VectorXd::Zero(q);
      if (!free.empty()) {
        Eigen::MatrixXd vf(v.rows(), static_cast<Eigen::Index>(free.size()));
        for (std::size_t c = 0; c < free.size(); ++c) vf.col(static_cast<Eigen::Index>(c)) = v.col(free[c]);
        Eigen::MatrixXd a = vf.transpose() * weight * vf;
        Eigen::VectorXd rhs = -(vf.transpose() * weight * u);
        Eigen::VectorXd sol = a.completeOrthogonalDecomposition().solve(rhs);
        bool ok = sol.allFinite();
        for (Eigen::Index c = 0; ok && c < sol.size(); ++c) ok = sol(c) >= 0.0;
        if (!ok) continue;
        for (std::size_t c = 0; c < free.size(); ++c) t(free[c]) = sol(static_cast<Eigen::Index>(c));
      }
      Eigen::VectorXd gv = u + v * t;
      double f = gv.dot(weight * gv);
      if (f < best) {
        best = f;
        t_best = t;
      }
    }
    return best;
  }

  std::vector<double> from_profile(double lambda, const Eigen::VectorXd& t) const {
    std::vector<double> th{lambda};
    for (Eigen::Index c = 0; c < t.size(); ++c) th.push_back(std::sqrt(t(c)));
    return th;
  }

  double golden(double a, double b, Eigen::VectorXd& t) const {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = profile(c, t), fd = profile(d, t);
    for (int it = 0; it < 200 && b - a > 1e-13 * (1.0 + std::abs(a)); ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - r * (b - a);
        fc = profile(c, t);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + r * (b - a);
        fd = profile(d, t);
      }
    }
    return 0.5 * (a + b);
  }

  // Grid over lambda with the scale parameters profiled out exactly; every
  // local minimum of the profile is refined by golden section. When several
  // minima attain the global value (distinct exact roots of a just-identified
  // system) the one closest to the ratio-of-means start is returned.
  std::vector<double> grid(const GmmOptions& opt, double& spacing, bool& ambiguous) const {
    const int pts = std::max(2, opt.grid_points) * 10;
    spacing = (opt.lambda_hi - opt.lambda_lo) / (pts - 1);
    Eigen::VectorXd t;
    std::vector<double> f(static_cast<std::size_t>(pts));
    for (int k = 0; k < pts; ++k) f[static_cast<std::size_t>(k)] = profile(opt.lambda_lo + k * spacing, t);

    struct Cand {
      double lambda, value;
      Eigen::VectorXd t;
    };
    std::vector<Cand> cands;
    for (int k = 0; k < pts; ++k) {
      const auto i = static_cast<std::size_t>(k);
      const bool left = k == 0 || f[i] <= f[i - 1];
      const bool right = k == pts - 1 || f[i] < f[i + 1];
      if (!(left && right)) continue;
      const double grid_lam = opt.lambda_lo + k * spacing;
      double lam = golden(grid_lam - spacing, grid_lam + spacing, t);
      double v = profile(lam, t);
      if (!(v <= f[i])) {
        lam = grid_lam;
        v = profile(lam, t);
      }
      cands.push_back({lam, v, t});
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : cands) best = std::min(best, c.value);
    Eigen::VectorXd t_ref;
    const double tol = 1e-9 * (1.0 + profile(sys.ratio_start(), t_ref));
    const Cand* pick = nullptr;
    int ties = 0;
    for (const auto& c : cands) {
      if (c.value > best + tol) continue;
      ++ties;
      if (!pick || std::abs(c.lambda - sys.ratio_start()) < std::abs(pick->lambda - sys.ratio_start()))
        pick = &c;
    }
    ambiguous = ties > 1;
    return from_profile(pick->lambda, pick->t);
  }

  // Gauss-Newton steps on g' W g in natural coordinates, keeping sigmas positive.
  std::vector<double> polish(std::vector<double> theta, int max_steps = 30) const {
    double f = objective(theta);
    for (int s = 0; s < max_steps; ++s) {
      auto gv = g(theta);
      auto j = jac(theta);
      Eigen::MatrixXd a = j.transpose() * weight * j;
      Eigen::VectorXd rhs = -(j.transpose() * weight * gv);
      Eigen::VectorXd step = a.completeOrthogonalDecomposition().solve(rhs);
      if (!step.allFinite()) break;
      double scale = 1.0;
      bool improved = false;
      for (int h = 0; h < 30; ++h) {
        std::vector<double> cand = theta;
        bool ok = true;
        for (std::size_t i = 0; i < cand.size(); ++i) {
          cand[i] += scale * step(static_cast<Eigen::Index>(i));
          if (sys.positive()[i] && !(cand[i] > 0.0)) ok = false;
        }
        if (ok) {
          double fc = objective(cand);
          if (fc < f) {
            theta = cand;
            improved = f - fc > 1e-15 * std::abs(f);
            f = fc;
            break;
          }
        }
        scale *= 0.5;
      }
      if (!improved) break;
    }
    return theta;
  }
};

void fill_inference(const MomentSystem& sys, const Fitter& fit, std::span<const double> theta,
                    double winsor, GmmResult& res) {
  const auto n = sys.num_obs();
  const auto p = static_cast<Eigen::Index>(sys.num_params());
  Eigen::MatrixXd gmat = fit.jac(theta);
  Eigen::MatrixXd v = winsorized_covariance(sys.moment_matrix(theta), winsor);

  Eigen::MatrixXd bread_inner = gmat.transpose() * fit.weight * gmat;
  Eigen::MatrixXd bread = bread_inner.completeOrthogonalDecomposition().pseudoInverse();
  Eigen::MatrixXd meat = gmat.transpose() * fit.weight * v * fit.weight * gmat;
  res.vcov = bread * meat * bread / static_cast<double>(std::max<std::size_t>(n, 1));
  res.vcov = 0.5 * (res.vcov + res.vcov.transpose());
  res.se.assign(static_cast<std::size_t>(p), 0.0);
  for (Eigen::Index i = 0; i < p; ++i)
    res.se[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, res.vcov(i, i)));
}

// Inverse of V with a pseudo-inverse fallback when it is near-singular.
Eigen::MatrixXd stable_inverse(const Eigen::MatrixXd& v, bool& pseudo) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v);
  const auto& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  pseudo = !(ev.minCoeff() > 1e-12 * top);
  Eigen::VectorXd inv = ev;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    inv(i) = ev(i) > 1e-12 * top ? 1.0 / ev(i) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

GmmResult finish(const MomentSystem& sys, const Fitter& fit, const std::vector<double>& theta,
                 const GmmOptions& opt, bool converged, int iterations) {
  GmmResult res;
  res.names = sys.param_names();
  res.estimates = theta;
  res.n_obs = sys.num_obs();
  res.n_moments = sys.num_moments();
  res.over_identified = sys.num_moments() > sys.num_params();
  res.converged = converged;
  res.iterations = iterations;
  res.g_hat = fit.g(theta);
  res.objective = std::max(0.0, fit.objective(theta));
  res.weight = fit.weight;
  switch (sys.family()) {
    case MomentSystem::Family::baseline:
      res.params.lambda = theta[0];
      res.params.sigma = theta[1];
      break;
    case MomentSystem::Family::hetero:
      res.params.lambda = theta[0];
      res.params.sigma = theta[2];
      res.params.sigma_by_size = std::array<double, 2>{theta[1], theta[2]};
      break;
    case MomentSystem::Family::three:
      res.params.lambda3 = theta[0];
      res.params.lambda = theta[0];
      res.params.sigma = theta[1];
      break;
  }
  fill_inference(sys, fit, theta, opt.winsor_quantile, res);
  return res;
}

std::vector<double> minimize(const Fitter& fit, std::vector<double> start_theta,
                             const std::vector<double>& step, const GmmOptions& opt,
                             bool& converged, int& iterations) {
  auto u0 = fit.to_internal(start_theta);
  NelderMeadOptions nm = opt.nelder_mead;
  if (nm.initial_step.empty()) nm.initial_step = step;
  auto r = nelder_mead([&](std::span<const double> u) { return fit.objective_internal(u); },
                       u0, nm);
  converged = r.converged;
  iterations += r.iterations;
  return fit.polish(fit.to_natural(r.x));
}

}  // namespace

namespace {

struct Solution {
  std::vector<double> theta;
  bool converged = false;
  bool boundary = false;
  bool ambiguous = false;
  int iterations = 0;
};

Solution solve(const Fitter& fit, const GmmOptions& opt, const std::vector<double>* start_hint) {
  const MomentSystem& sys = fit.sys;
  const auto p = sys.num_params();
  Solution sol;
  std::vector<double> spacing(p, 0.1);
  std::vector<double> start;
  if (start_hint) {
    start = *start_hint;
  } else if (opt.use_grid) {
    start = fit.grid(opt, spacing[0], sol.ambiguous);
  } else {
    start.assign(p, 1.0);
  }
  // alternative start: ratio of means and the pooled sd
  {
    std::vector<double> alt(p, sys.outcome_sd());
    alt[0] = sys.ratio_start();
    if (fit.objective(alt) < fit.objective(start)) start = alt;
  }
  for (std::size_t i = 1; i < p; ++i) sol.boundary = sol.boundary || !(start[i] > 0.0);
  if (sol.boundary) {
    // The profiled minimum has a scale parameter at 0; lambda is exact there
    // and the log-scale simplex would only drift further towards the boundary.
    for (std::size_t i = 1; i < p; ++i) start[i] = std::max(start[i], 0.0);
    sol.theta = std::move(start);
    sol.converged = true;
    return sol;
  }
  sol.theta = minimize(fit, start, spacing, opt, sol.converged, sol.iterations);
  return sol;
}

void add_warnings(const MomentSystem& sys, const Solution& sol, GmmResult& res) {
  if (sol.ambiguous)
    res.warnings.push_back("several parameter values solve the moment equations; "
                           "kept the one nearest the ratio-of-means start");
  if (sol.boundary)
    for (std::size_t i = 1; i < sol.theta.size(); ++i)
      if (sol.theta[i] == 0.0)
        res.warnings.push_back(sys.param_names()[i] + " estimated on the boundary at 0");
}

}  // namespace

GmmResult gmm_fit(const MomentSystem& sys, const GmmOptions& opt) {
  if (sys.num_obs() < opt.min_obs)
    throw DegenerateData("GMM needs at least " + std::to_string(opt.min_obs) +
                         " observations, got " + std::to_string(sys.num_obs()));
  const auto m = static_cast<Eigen::Index>(sys.num_moments());
  const auto p = sys.num_params();
  if (sys.num_moments() < p)
    throw ConfigError("moments: " + std::to_string(sys.num_moments()) +
                      " moment orders cannot identify " + std::to_string(p) + " parameters");

  Fitter fit{sys, sys.mean_features(), Eigen::MatrixXd::Identity(m, m)};
  const std::vector<double>* hint = opt.start ? &*opt.start : nullptr;
  Solution sol = solve(fit, opt, hint);

  bool pseudo = false;
  if (opt.weighting == Weighting::two_step && sys.num_moments() > p) {
    Eigen::MatrixXd v = winsorized_covariance(sys.moment_matrix(sol.theta), opt.winsor_quantile);
    fit.weight = stable_inverse(v, pseudo);
    // rescale so the objective stays O(1) for the simplex tolerances
    fit.weight /= fit.weight.cwiseAbs().maxCoeff();
    Solution second = solve(fit, opt, hint);
    second.converged = second.converged && sol.converged;
    second.iterations += sol.iterations;
    sol = std::move(second);
  }

  auto res = finish(sys, fit, sol.theta, opt, sol.converged, sol.iterations);
  res.pseudo_inverse = pseudo;
  res.boundary = sol.boundary;
  add_warnings(sys, sol, res);
  if (pseudo) res.warnings.push_back("near-singular moment covariance; pseudo-inverse used");
  if (!sol.converged && opt.throw_on_nonconvergence)
    throw ConvergenceError("GMM optimizer did not converge", std::move(res));
  return res;
}

GmmResult gmm_refit(const MomentSystem& sys, std::span<const double> weights,
                    const std::vector<double>& start, const GmmOptions& opt,
                    const Eigen::MatrixXd& weight) {
  const auto m = static_cast<Eigen::Index>(sys.num_moments());
  Fitter fit{sys, sys.mean_features(weights),
             weight.size() == 0 ? Eigen::MatrixXd::Identity(m, m) : weight};
  // The profiled grid is cheap; a supplied start is used only without it.
  Solution sol = solve(fit, opt, opt.use_grid ? nullptr : &start);
  GmmResult res;
  res.names = sys.param_names();
  res.estimates = sol.theta;
  res.converged = sol.converged;
  res.boundary = sol.boundary;
  res.iterations = sol.iterations;
  res.objective = fit.objective(sol.theta);
  res.n_obs = sys.num_obs();
  add_warnings(sys, sol, res);
  return res;
}

GmmResult gmm_estimate(std::span<const Triplet> triplets, const GmmOptions& options) {
  if (triplets.size() < options.min_obs)
    throw DegenerateData("GMM needs at least " + std::to_string(options.min_obs) +
                         " triplets, got " + std::to_string(triplets.size()));
  if (options.check_identification) {
    auto rank = identification_rank_check(triplets);
    if (!rank.full_rank)
      throw IdentificationError("identification rank check failed: smallest singular value " +
                                std::to_string(rank.singular_values[2]));
  }
  auto sys = MomentSystem::baseline(triplets, options.moment_orders);
  return gmm_fit(sys, options);
}

GmmResult gmm_estimate_hetero(std::span<const Triplet> triplets, GmmOptions options) {
  if (options.moment_orders == std::vector<int>{1, 2}) options.moment_orders = {1, 2, 3};
  auto sys = MomentSystem::hetero(triplets, options.moment_orders);
  return gmm_fit(sys, options);
}

GmmResult gmm_estimate_three(std::span<const Quadruplet> quads, const GmmOptions& options) {
  auto sys = MomentSystem::three(quads, options.moment_orders);
  return gmm_fit(sys, options);
}

}  // namespace teamprod
