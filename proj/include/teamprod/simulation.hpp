#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <random>
#include <vector>

#include "teamprod/network.hpp"
#include "teamprod/rng.hpp"

namespace teamprod {

enum class ErrorKind { normal, student_t, gev };

// Shock distribution. Student-t is rescaled to unit variance; GEV follows the
// SciPy genextreme convention and is left uncentred.
struct ErrorDist {
  ErrorKind kind = ErrorKind::normal;
  double df = 10.0;
  double gev_shape = 0.5;
};

struct AlphaDist {
  enum class Kind { pareto, point };
  Kind kind = Kind::pareto;
  double shape = 10.0;
  double scale = 2.2;  // see README: calibrated scale, support [scale + location, inf)
  double location = 0.0;
  double value = 1.0;  // point mass
};

struct DgpConfig {
  std::size_t n_nodes = 1000;
  // Links added after every node has received one solo and one two-worker project.
  std::size_t n_links = 1000;
  double lambda = 0.7;
  double lambda3 = 0.5;
  double sigma = 2.0;
  // Optional per-team-size scale (entry s-1 for size s); overrides sigma.
  std::vector<double> sigma_by_size;
  ErrorDist error;
  AlphaDist alpha;
  std::uint64_t seed = 0;
  // Share of the extra links going to team sizes 1, 2, 3.
  std::array<double, 3> team_size_mix{0.5, 0.5, 0.0};

  void validate() const;  // throws ConfigError
  double sigma_for(std::size_t team_size) const;
};

struct SimulatedNetworks {
  TeamNetwork latent;
  TeamNetwork observed;
  std::vector<std::string> node_ids;
  std::vector<double> true_alphas;  // aligned with node_ids
};

std::vector<double> draw_fixed_effects(const DgpConfig& config);
std::vector<double> draw_fixed_effects(const AlphaDist& dist, std::size_t n, Engine& rng);

// Draws standardized shocks U.
class ShockSampler {
 public:
  explicit ShockSampler(const ErrorDist& dist);
  double operator()(Engine& rng);

 private:
  ErrorDist dist_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::student_t_distribution<double> student_{10.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  double t_scale_ = 1.0;
};

SimulatedNetworks simulate(const DgpConfig& config);

}  // namespace teamprod
