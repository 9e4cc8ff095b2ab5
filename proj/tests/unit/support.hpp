#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "teamprod/network.hpp"
#include "teamprod/rng.hpp"
#include "teamprod/simulation.hpp"
#include "teamprod/triplets.hpp"

namespace testing {

inline teamprod::ProjectRecord project(std::string id, std::vector<std::string> workers,
                                       double outcome, std::int64_t t = 0) {
  teamprod::ProjectRecord p;
  p.id = std::move(id);
  p.workers = std::move(workers);
  p.timestamp = t;
  p.latent_outcome = outcome;
  if (outcome >= 0.0) p.observed_outcome = outcome;
  return p;
}

inline teamprod::TeamNetwork observed(std::vector<teamprod::ProjectRecord> ps) {
  return teamprod::TeamNetwork::build(std::move(ps), teamprod::NetworkView::observed);
}

inline teamprod::TeamNetwork latent(std::vector<teamprod::ProjectRecord> ps) {
  for (auto& p : ps) p.observed_outcome.reset();
  return teamprod::TeamNetwork::build(std::move(ps), teamprod::NetworkView::latent);
}

// Independent triplets from the baseline model, kept only when all three
// latent outcomes are >= 0. Fixed effects are Pareto(shape 10) with `scale`.
inline std::vector<teamprod::Triplet> truncated_triplets(std::size_t n, double lambda, double sigma,
                                                         std::uint64_t seed, double scale = 2.2,
                                                         double sigma_team = -1.0) {
  if (sigma_team < 0.0) sigma_team = sigma;
  auto rng = teamprod::make_engine(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto alpha = [&] { return scale * std::pow(1.0 - u(rng), -1.0 / 10.0); };
  std::vector<teamprod::Triplet> out;
  out.reserve(n);
  while (out.size() < n) {
    const double ai = alpha(), aj = alpha();
    const double yi = ai + sigma * z(rng);
    const double yj = aj + sigma * z(rng);
    const double yij = lambda * (ai + aj) + sigma_team * z(rng);
    if (yi < 0.0 || yj < 0.0 || yij < 0.0) continue;
    teamprod::Triplet t;
    t.y_i = yi;
    t.y_j = yj;
    t.y_ij = yij;
    out.push_back(t);
  }
  return out;
}

inline std::vector<teamprod::Quadruplet> truncated_quadruplets(std::size_t n, double lambda3,
                                                               double sigma, std::uint64_t seed) {
  auto rng = teamprod::make_engine(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto alpha = [&] { return 2.2 * std::pow(1.0 - u(rng), -1.0 / 10.0); };
  std::vector<teamprod::Quadruplet> out;
  out.reserve(n);
  while (out.size() < n) {
    const double ai = alpha(), aj = alpha(), ak = alpha();
    teamprod::Quadruplet q;
    q.y_i = ai + sigma * z(rng);
    q.y_j = aj + sigma * z(rng);
    q.y_k = ak + sigma * z(rng);
    q.y_ijk = lambda3 * (ai + aj + ak) + sigma * z(rng);
    if (q.y_i < 0.0 || q.y_j < 0.0 || q.y_k < 0.0 || q.y_ijk < 0.0) continue;
    out.push_back(q);
  }
  return out;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()))};
}

}  // namespace testing
