#include "teamprod/naive.hpp"

#include "teamprod/errors.hpp"

namespace teamprod {

namespace {

double bucket_mean(const TeamNetwork& net, std::span<const std::size_t> projects) {
  double s = 0.0;
  for (auto p : projects) s += net.outcome(p);
  return s / static_cast<double>(projects.size());
}

}  // namespace

std::vector<EligiblePair> eligible_pairs(const TeamNetwork& net) {
  std::vector<EligiblePair> out;
  for (const auto& b : net.pair_buckets()) {
    auto si = net.solo_projects(b.first);
    auto sj = net.solo_projects(b.second);
    if (si.empty() || sj.empty() || b.projects.empty()) continue;
    out.push_back({b.first, b.second, bucket_mean(net, b.projects),
                   bucket_mean(net, si) + bucket_mean(net, sj)});
  }
  return out;
}

double naive_lambda(std::span<const EligiblePair> pairs) {
  if (pairs.empty()) throw DegenerateData("naive estimator: no eligible node pair");
  double num = 0.0;
  double den = 0.0;
  for (const auto& p : pairs) {
    num += p.team_mean;
    den += p.solo_sum;
  }
  if (den == 0.0) throw DegenerateData("naive estimator: zero denominator");
  return num / den;
}

double naive_lambda(const TeamNetwork& net) {
  auto pairs = eligible_pairs(net);
  return naive_lambda(pairs);
}

}  // namespace teamprod
