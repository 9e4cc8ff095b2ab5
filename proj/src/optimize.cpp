#include "teamprod/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace teamprod {

namespace {

struct Simplex {
  std::vector<std::vector<double>> x;
  std::vector<double> f;
};

NelderMeadResult run_once(const Objective& raw, const std::vector<double>& x0,
                          const NelderMeadOptions& opt, int& evals) {
  const std::size_t n = x0.size();
  auto f = [&](const std::vector<double>& p) {
    ++evals;
    double v = raw(p);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  Simplex s;
  s.x.assign(n + 1, x0);
  for (std::size_t d = 0; d < n; ++d) {
    double step = opt.initial_step.size() > d ? opt.initial_step[d] : 0.1;
    s.x[d + 1][d] += step;
  }
  s.f.resize(n + 1);
  for (std::size_t v = 0; v <= n; ++v) s.f[v] = f(s.x[v]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  NelderMeadResult res;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s.f[a] < s.f[b]; });
    const auto best = order.front();
    const auto worst = order.back();
    const auto second = order[n - 1];

    double diameter = 0.0;
    for (std::size_t v = 0; v <= n; ++v)
      for (std::size_t d = 0; d < n; ++d)
        diameter = std::max(diameter, std::abs(s.x[v][d] - s.x[best][d]) /
                                          (1.0 + std::abs(s.x[best][d])));
    const double spread = s.f[worst] - s.f[best];
    if (diameter <= opt.x_tolerance &&
        spread <= opt.f_tolerance + opt.f_rel_tolerance * std::abs(s.f[best])) {
      res.converged = true;
      break;
    }
    if (diameter <= 1e-15) {  // collapsed without meeting the value criterion
      res.converged = spread <= 1e-8 * (1.0 + std::abs(s.f[best]));
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t v = 0; v <= n; ++v) {
      if (v == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += s.x[v][d];
    }
    for (auto& c : centroid) c /= static_cast<double>(n);

    for (std::size_t d = 0; d < n; ++d) xr[d] = centroid[d] + (centroid[d] - s.x[worst][d]);
    const double fr = f(xr);
    if (fr < s.f[best]) {
      for (std::size_t d = 0; d < n; ++d) xe[d] = centroid[d] + 2.0 * (xr[d] - centroid[d]);
      const double fe = f(xe);
      if (fe < fr) {
        s.x[worst] = xe;
        s.f[worst] = fe;
      } else {
        s.x[worst] = xr;
        s.f[worst] = fr;
      }
      continue;
    }
    if (fr < s.f[second]) {
      s.x[worst] = xr;
      s.f[worst] = fr;
      continue;
    }
    const bool outside = fr < s.f[worst];
    for (std::size_t d = 0; d < n; ++d)
      xc[d] = outside ? centroid[d] + 0.5 * (xr[d] - centroid[d])
                      : centroid[d] + 0.5 * (s.x[worst][d] - centroid[d]);
    const double fc = f(xc);
    if (fc < std::min(fr, s.f[worst])) {
      s.x[worst] = xc;
      s.f[worst] = fc;
      continue;
    }
    for (std::size_t v = 0; v <= n; ++v) {
      if (v == best) continue;
      for (std::size_t d = 0; d < n; ++d)
        s.x[v][d] = s.x[best][d] + 0.5 * (s.x[v][d] - s.x[best][d]);
      s.f[v] = f(s.x[v]);
    }
  }
  auto b = static_cast<std::size_t>(std::min_element(s.f.begin(), s.f.end()) - s.f.begin());
  res.x = s.x[b];
  res.value = s.f[b];
  res.iterations = it;
  return res;
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             const NelderMeadOptions& options) {
  int evals = 0;
  auto res = run_once(f, x0, options, evals);
  int iterations = res.iterations;
  for (int r = 0; r < options.restarts && res.converged; ++r) {
    NelderMeadOptions again = options;
    again.initial_step.assign(x0.size(), 0.0);
    for (std::size_t d = 0; d < x0.size(); ++d) {
      double base = options.initial_step.size() > d ? options.initial_step[d] : 0.1;
      again.initial_step[d] = 0.05 * base;
    }
    auto next = run_once(f, res.x, again, evals);
    iterations += next.iterations;
    if (next.value <= res.value) res = std::move(next);
    else break;
  }
  res.iterations = iterations;
  res.evaluations = evals;
  return res;
}

}  // namespace teamprod
