#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "teamprod/gmm.hpp"
#include "teamprod/montecarlo.hpp"
#include "teamprod/simulation.hpp"

namespace teamprod {

// Config files are TOML (.toml) or JSON (.json). Every reader below rejects
// unknown keys and reports violations as ConfigError("<key path>: <reason>").
nlohmann::json load_config_file(const std::filesystem::path& path);

// Keys: nodes, links, lambda, lambda3, sigma (number, or array by team size),
// seed, team_size_mix, [error] kind/df/shape, [alpha] kind/shape/scale/location/value.
// Missing keys keep the DgpConfig defaults.
DgpConfig dgp_from_json(const nlohmann::json& j, const std::string& path = "",
                        DgpConfig base = {});
nlohmann::json to_json(const DgpConfig& c);

// Keys: moments, weighting ("identity" | "two-step"), min_obs, grid_points,
// lambda_lo, lambda_hi.
GmmOptions gmm_options_from_json(const nlohmann::json& j, const std::string& path = "",
                                 GmmOptions base = {});
nlohmann::json to_json(const GmmOptions& g);

// Keys: name, reps, estimators, [dgp], [gmm]. Starts from `base` (a preset or default).
McCell mc_cell_from_json(const nlohmann::json& j, McCell base = {});
nlohmann::json to_json(const McCell& cell);

enum class Method { naive, gmm, gmm_hetero, gmm_three };
std::string to_string(Method m);
Method method_from_string(const std::string& s);  // throws ConfigError

struct EstimateConfig {
  Method method = Method::gmm;
  std::vector<int> moments;  // empty: method default
  Weighting weighting = Weighting::identity;
  std::size_t bootstrap = 0;  // 0 disables; otherwise >= 100
  double level = 0.90;
  std::size_t min_obs = 10;

  // Cross-field checks; returns warnings (for instance an over-identified
  // baseline). Throws ConfigError on violations.
  std::vector<std::string> validate() const;
  // Moment orders after applying the method default.
  std::vector<int> effective_moments() const;
  // Number of free parameters of the method (naive: 1).
  std::size_t num_params() const;
};

// Keys: method, moments, weighting, bootstrap, level, min_obs.
EstimateConfig estimate_config_from_json(const nlohmann::json& j, EstimateConfig base = {});
nlohmann::json to_json(const EstimateConfig& c);

// "1,2,3" -> {1,2,3}; each order in {1,2,3}, no repeats.
std::vector<int> parse_moment_list(const std::string& text, const std::string& key = "moments");
void check_moment_orders(const std::vector<int>& orders, const std::string& key = "moments");

std::string to_string(Weighting w);
Weighting weighting_from_string(const std::string& s, const std::string& key = "weighting");

}  // namespace teamprod
