#include "teamprod/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "teamprod/errors.hpp"

namespace teamprod {

namespace {

std::string padded(char prefix, std::size_t value, std::size_t width) {
  auto digits = std::to_string(value);
  std::string out(1, prefix);
  if (digits.size() < width) out.append(width - digits.size(), '0');
  out += digits;
  return out;
}

std::size_t width_for(std::size_t count) {
  return std::to_string(count == 0 ? 0 : count - 1).size();
}

}  // namespace

void DgpConfig::validate() const {
  if (n_nodes < 2) throw ConfigError("nodes: coverage needs at least 2 nodes (got " +
                                     std::to_string(n_nodes) + ")");
  if (!(lambda > 0.0)) throw ConfigError("lambda: must be > 0");
  if (!(sigma > 0.0) && sigma_by_size.empty()) throw ConfigError("sigma: must be > 0");
  for (std::size_t s = 0; s < sigma_by_size.size(); ++s)
    if (!(sigma_by_size[s] > 0.0))
      throw ConfigError("sigma_by_size[" + std::to_string(s) + "]: must be > 0");
  double mix = 0.0;
  for (double w : team_size_mix) {
    if (!(w >= 0.0)) throw ConfigError("team_size_mix: shares must be >= 0");
    mix += w;
  }
  if (!(mix > 0.0)) throw ConfigError("team_size_mix: shares must not all be zero");
  if (team_size_mix[2] > 0.0) {
    if (n_nodes < 3) throw ConfigError("nodes: three-worker teams need at least 3 nodes");
    if (!(lambda3 > 0.0)) throw ConfigError("lambda3: must be > 0");
  }
  if (error.kind == ErrorKind::student_t && !(error.df > 2.0))
    throw ConfigError("error.df: standardized Student-t needs df > 2");
  if (error.kind == ErrorKind::gev && !std::isfinite(error.gev_shape))
    throw ConfigError("error.gev_shape: must be finite");
  if (alpha.kind == AlphaDist::Kind::pareto) {
    if (!(alpha.shape > 0.0)) throw ConfigError("alpha.shape: must be > 0");
    if (!(alpha.scale > 0.0)) throw ConfigError("alpha.scale: must be > 0");
    if (!std::isfinite(alpha.location)) throw ConfigError("alpha.location: must be finite");
  } else if (!std::isfinite(alpha.value)) {
    throw ConfigError("alpha.value: must be finite");
  }
}

double DgpConfig::sigma_for(std::size_t team_size) const {
  if (sigma_by_size.empty()) return sigma;
  auto idx = std::min(team_size, sigma_by_size.size()) - 1;
  return sigma_by_size[idx];
}

std::vector<double> draw_fixed_effects(const AlphaDist& dist, std::size_t n, Engine& rng) {
  std::vector<double> out(n);
  if (dist.kind == AlphaDist::Kind::point) {
    std::fill(out.begin(), out.end(), dist.value);
    return out;
  }
  if (!(dist.shape > 0.0) || !(dist.scale > 0.0))
    throw ConfigError("alpha: Pareto shape and scale must be > 0");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& a : out) {
    double v = 1.0 - u(rng);  // (0, 1]
    a = dist.location + dist.scale * std::pow(v, -1.0 / dist.shape);
  }
  return out;
}

std::vector<double> draw_fixed_effects(const DgpConfig& config) {
  if (config.n_nodes < 1) throw ConfigError("nodes: must be >= 1");
  auto rng = make_engine(config.seed);
  return draw_fixed_effects(config.alpha, config.n_nodes, rng);
}

ShockSampler::ShockSampler(const ErrorDist& dist)
    : dist_(dist), student_(dist.kind == ErrorKind::student_t ? dist.df : 10.0) {
  if (dist.kind == ErrorKind::student_t) {
    if (!(dist.df > 2.0)) throw ConfigError("error.df: standardized Student-t needs df > 2");
    t_scale_ = 1.0 / std::sqrt(dist.df / (dist.df - 2.0));
  }
}

double ShockSampler::operator()(Engine& rng) {
  switch (dist_.kind) {
    case ErrorKind::normal:
      return normal_(rng);
    case ErrorKind::student_t:
      return student_(rng) * t_scale_;
    case ErrorKind::gev: {
      double u = uniform_(rng);
      while (u <= 0.0) u = uniform_(rng);
      double e = -std::log(u);
      double c = dist_.gev_shape;
      if (c == 0.0) return -std::log(e);
      return (1.0 - std::pow(e, c)) / c;
    }
  }
  return 0.0;
}

SimulatedNetworks simulate(const DgpConfig& config) {
  config.validate();
  auto rng = make_engine(config.seed);
  const auto n = config.n_nodes;
  auto alphas = draw_fixed_effects(config.alpha, n, rng);

  std::vector<std::vector<std::size_t>> teams;
  teams.reserve(2 * n + config.n_links);
  for (std::size_t i = 0; i < n; ++i) teams.push_back({i});
  std::uniform_int_distribution<std::size_t> other(0, n - 2);
  for (std::size_t i = 0; i < n; ++i) {
    auto j = other(rng);
    if (j >= i) ++j;
    teams.push_back({i, j});
  }

  std::discrete_distribution<int> size_pick(config.team_size_mix.begin(),
                                            config.team_size_mix.end());
  std::uniform_int_distribution<std::size_t> node(0, n - 1);
  for (std::size_t l = 0; l < config.n_links; ++l) {
    auto size = static_cast<std::size_t>(size_pick(rng)) + 1;
    std::vector<std::size_t> members;
    while (members.size() < size) {
      auto c = node(rng);
      if (std::find(members.begin(), members.end(), c) == members.end()) members.push_back(c);
    }
    teams.push_back(std::move(members));
  }

  const auto node_width = width_for(n);
  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) names[i] = padded('n', i, node_width);

  ShockSampler shock(config.error);
  const auto project_width = width_for(teams.size());
  std::vector<ProjectRecord> projects;
  projects.reserve(teams.size());
  for (std::size_t l = 0; l < teams.size(); ++l) {
    const auto& members = teams[l];
    double fixed = 0.0;
    for (auto m : members) fixed += alphas[m];
    if (members.size() == 2) fixed *= config.lambda;
    if (members.size() == 3) fixed *= config.lambda3;
    double y = fixed + config.sigma_for(members.size()) * shock(rng);

    ProjectRecord p;
    p.id = padded('p', l, project_width);
    p.timestamp = 0;
    p.latent_outcome = y;
    for (auto m : members) p.workers.push_back(names[m]);
    projects.push_back(std::move(p));
  }

  SimulatedNetworks out;
  out.latent = TeamNetwork::build(std::move(projects), NetworkView::latent);
  out.observed = truncate_network(out.latent);
  out.node_ids = std::move(names);
  out.true_alphas = std::move(alphas);
  return out;
}

}  // namespace teamprod
