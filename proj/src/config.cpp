#include "teamprod/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "teamprod/errors.hpp"
#include "teamprod/io.hpp"
#include "teamprod/toml.hpp"

namespace teamprod {

using nlohmann::json;

namespace {

std::string join_path(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Walks one table, rejecting keys that were never asked for.
class Table {
 public:
  Table(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object())
      throw ConfigError((path_.empty() ? std::string("config") : path_) + ": expected a table");
  }

  std::string at(const std::string& key) const { return join_path(path_, key); }
  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& raw(const std::string& key) const { return j_.at(key); }

  void get(const std::string& key, double& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(at(key) + ": expected a number");
    out = v.get<double>();
  }
  void get(const std::string& key, std::size_t& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(at(key) + ": expected an integer");
    if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)
      throw ConfigError(at(key) + ": must be >= 0");
    out = v.get<std::size_t>();
  }
  void get(const std::string& key, int& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(at(key) + ": expected an integer");
    auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
      throw ConfigError(at(key) + ": out of range");
    out = static_cast<int>(x);
  }
  void get_seed(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (v.is_number_unsigned()) {
      out = v.get<std::uint64_t>();
    } else if (v.is_number_integer()) {
      if (v.get<std::int64_t>() < 0) throw ConfigError(at(key) + ": must be >= 0");
      out = static_cast<std::uint64_t>(v.get<std::int64_t>());
    } else {
      throw ConfigError(at(key) + ": expected a non-negative integer");
    }
  }
  void get(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(at(key) + ": expected a string");
    out = v.get<std::string>();
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(at(k) + ": unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<int> moments_from_json(const json& v, const std::string& key) {
  if (v.is_string()) return parse_moment_list(v.get<std::string>(), key);
  if (!v.is_array()) throw ConfigError(key + ": expected an array of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) throw ConfigError(key + ": expected an array of integers");
    out.push_back(e.get<int>());
  }
  check_moment_orders(out, key);
  return out;
}

// Re-raise a validation error under its full key path.
template <class F>
void with_prefix(const std::string& prefix, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    if (prefix.empty()) throw;
    throw ConfigError(prefix + "." + e.what());
  }
}

std::string error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::normal: return "normal";
    case ErrorKind::student_t: return "student_t";
    case ErrorKind::gev: return "gev";
  }
  return "?";
}

}  // namespace

nlohmann::json load_config_file(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (path.extension() == ".json") {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  return parse_toml(text, path.string());
}

DgpConfig dgp_from_json(const json& j, const std::string& path, DgpConfig c) {
  Table t(j, path);
  t.get("nodes", c.n_nodes);
  t.get("links", c.n_links);
  t.get("lambda", c.lambda);
  t.get("lambda3", c.lambda3);
  if (t.has("sigma")) {
    const auto& v = t.raw("sigma");
    if (v.is_number()) {
      c.sigma = v.get<double>();
      c.sigma_by_size.clear();
    } else if (v.is_array() && !v.empty()) {
      c.sigma_by_size.clear();
      for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(t.at("sigma") + ": expected numbers");
        c.sigma_by_size.push_back(e.get<double>());
      }
      c.sigma = c.sigma_by_size.front();
    } else {
      throw ConfigError(t.at("sigma") + ": expected a number or a nonempty array");
    }
  }
  t.get_seed("seed", c.seed);
  if (t.has("team_size_mix")) {
    const auto& v = t.raw("team_size_mix");
    if (!v.is_array() || v.empty() || v.size() > 3)
      throw ConfigError(t.at("team_size_mix") + ": expected 1 to 3 shares (sizes 1, 2, 3)");
    c.team_size_mix = {0.0, 0.0, 0.0};
    for (std::size_t s = 0; s < v.size(); ++s) {
      if (!v[s].is_number()) throw ConfigError(t.at("team_size_mix") + ": expected numbers");
      c.team_size_mix[s] = v[s].get<double>();
    }
  }
  if (t.has("error")) {
    Table e(t.raw("error"), t.at("error"));
    std::string kind = error_kind_name(c.error.kind);
    e.get("kind", kind);
    if (kind == "normal") c.error.kind = ErrorKind::normal;
    else if (kind == "student_t") c.error.kind = ErrorKind::student_t;
    else if (kind == "gev") c.error.kind = ErrorKind::gev;
    else throw ConfigError(e.at("kind") + ": expected normal, student_t or gev");
    e.get("df", c.error.df);
    e.get("shape", c.error.gev_shape);
    e.finish();
  }
  if (t.has("alpha")) {
    Table a(t.raw("alpha"), t.at("alpha"));
    std::string kind = c.alpha.kind == AlphaDist::Kind::pareto ? "pareto" : "point";
    a.get("kind", kind);
    if (kind == "pareto") c.alpha.kind = AlphaDist::Kind::pareto;
    else if (kind == "point") c.alpha.kind = AlphaDist::Kind::point;
    else throw ConfigError(a.at("kind") + ": expected pareto or point");
    a.get("shape", c.alpha.shape);
    a.get("scale", c.alpha.scale);
    a.get("location", c.alpha.location);
    a.get("value", c.alpha.value);
    a.finish();
  }
  t.finish();
  with_prefix(path, [&] { c.validate(); });
  return c;
}

json to_json(const DgpConfig& c) {
  json j;
  j["nodes"] = c.n_nodes;
  j["links"] = c.n_links;
  j["lambda"] = c.lambda;
  j["lambda3"] = c.lambda3;
  if (c.sigma_by_size.empty()) j["sigma"] = c.sigma;
  else j["sigma"] = c.sigma_by_size;
  j["seed"] = c.seed;
  j["team_size_mix"] = std::vector<double>(c.team_size_mix.begin(), c.team_size_mix.end());
  j["error"] = {{"kind", error_kind_name(c.error.kind)}, {"df", c.error.df},
                {"shape", c.error.gev_shape}};
  if (c.alpha.kind == AlphaDist::Kind::pareto)
    j["alpha"] = {{"kind", "pareto"}, {"shape", c.alpha.shape}, {"scale", c.alpha.scale},
                  {"location", c.alpha.location}};
  else
    j["alpha"] = {{"kind", "point"}, {"value", c.alpha.value}};
  return j;
}

std::string to_string(Weighting w) { return w == Weighting::identity ? "identity" : "two-step"; }

Weighting weighting_from_string(const std::string& s, const std::string& key) {
  if (s == "identity") return Weighting::identity;
  if (s == "two-step" || s == "two_step") return Weighting::two_step;
  throw ConfigError(key + ": expected identity or two-step (got '" + s + "')");
}

void check_moment_orders(const std::vector<int>& orders, const std::string& key) {
  if (orders.empty()) throw ConfigError(key + ": at least one moment order is required");
  std::set<int> seen;
  for (int k : orders) {
    if (k < 1 || k > 3) throw ConfigError(key + ": orders must be in {1, 2, 3} (got " +
                                          std::to_string(k) + ")");
    if (!seen.insert(k).second)
      throw ConfigError(key + ": order " + std::to_string(k) + " listed twice");
  }
}

std::vector<int> parse_moment_list(const std::string& text, const std::string& key) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.size() != 1 || item[0] < '0' || item[0] > '9')
      throw ConfigError(key + ": expected a comma-separated list like 1,2,3 (got '" + text + "')");
    out.push_back(item[0] - '0');
  }
  check_moment_orders(out, key);
  return out;
}

GmmOptions gmm_options_from_json(const json& j, const std::string& path, GmmOptions g) {
  Table t(j, path);
  if (t.has("moments")) g.moment_orders = moments_from_json(t.raw("moments"), t.at("moments"));
  if (t.has("weighting")) {
    std::string w;
    t.get("weighting", w);
    g.weighting = weighting_from_string(w, t.at("weighting"));
  }
  t.get("min_obs", g.min_obs);
  t.get("grid_points", g.grid_points);
  t.get("lambda_lo", g.lambda_lo);
  t.get("lambda_hi", g.lambda_hi);
  t.finish();
  if (g.min_obs < 1) throw ConfigError(t.at("min_obs") + ": must be >= 1");
  if (g.grid_points < 3) throw ConfigError(t.at("grid_points") + ": must be >= 3");
  if (!(g.lambda_lo >= 0.0) || !(g.lambda_hi > g.lambda_lo) || !std::isfinite(g.lambda_hi))
    throw ConfigError(t.at("lambda_hi") + ": need 0 <= lambda_lo < lambda_hi < inf");
  return g;
}

json to_json(const GmmOptions& g) {
  return {{"moments", g.moment_orders},     {"weighting", to_string(g.weighting)},
          {"min_obs", g.min_obs},           {"grid_points", g.grid_points},
          {"lambda_lo", g.lambda_lo},       {"lambda_hi", g.lambda_hi}};
}

McCell mc_cell_from_json(const json& j, McCell cell) {
  Table t(j, "");
  t.get("name", cell.name);
  t.get("reps", cell.reps);
  if (t.has("estimators")) {
    const auto& v = t.raw("estimators");
    if (!v.is_array() || v.empty())
      throw ConfigError("estimators: expected a nonempty array of names");
    cell.estimators.clear();
    for (const auto& e : v) {
      if (!e.is_string()) throw ConfigError("estimators: expected strings");
      auto est = estimator_from_string(e.get<std::string>());
      if (std::find(cell.estimators.begin(), cell.estimators.end(), est) != cell.estimators.end())
        throw ConfigError("estimators: '" + e.get<std::string>() + "' listed twice");
      cell.estimators.push_back(est);
    }
  }
  if (t.has("dgp")) cell.config = dgp_from_json(t.raw("dgp"), "dgp", cell.config);
  if (t.has("gmm")) cell.gmm = gmm_options_from_json(t.raw("gmm"), "gmm", cell.gmm);
  t.finish();
  cell.validate();
  return cell;
}

json to_json(const McCell& cell) {
  json est = json::array();
  for (auto e : cell.estimators) est.push_back(to_string(e));
  return {{"name", cell.name}, {"reps", cell.reps},         {"estimators", est},
          {"dgp", to_json(cell.config)}, {"gmm", to_json(cell.gmm)}};
}

std::string to_string(Method m) {
  switch (m) {
    case Method::naive: return "naive";
    case Method::gmm: return "gmm";
    case Method::gmm_hetero: return "gmm-hetero";
    case Method::gmm_three: return "gmm-three";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  for (auto m : {Method::naive, Method::gmm, Method::gmm_hetero, Method::gmm_three})
    if (to_string(m) == s) return m;
  throw ConfigError("method: expected naive, gmm, gmm-hetero or gmm-three (got '" + s + "')");
}

std::size_t EstimateConfig::num_params() const {
  switch (method) {
    case Method::naive: return 1;
    case Method::gmm_hetero: return 3;
    default: return 2;
  }
}

std::vector<int> EstimateConfig::effective_moments() const {
  if (!moments.empty()) return moments;
  if (method == Method::gmm_hetero) return {1, 2, 3};
  return {1, 2};
}

std::vector<std::string> EstimateConfig::validate() const {
  std::vector<std::string> warnings;
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level: must lie in (0, 1)");
  if (bootstrap != 0 && bootstrap < 100)
    throw ConfigError("bootstrap: need at least 100 replications (or 0 to disable)");
  if (min_obs < 1) throw ConfigError("min_obs: must be >= 1");
  if (method == Method::naive) {
    if (!moments.empty()) warnings.push_back("moments: ignored by the naive estimator");
    return warnings;
  }
  const auto m = effective_moments();
  check_moment_orders(m);
  const auto p = num_params();
  if (m.size() < p)
    throw ConfigError("moments: " + to_string(method) + " has " + std::to_string(p) +
                      " parameters but only " + std::to_string(m.size()) +
                      " moment orders were given");
  if (m.size() > p && method != Method::gmm_hetero)
    warnings.push_back("moments: " + std::to_string(m.size()) + " moment orders for " +
                       std::to_string(p) + " parameters; the system is over-identified");
  if (weighting == Weighting::two_step && m.size() == p)
    warnings.push_back("weighting: two-step has no effect on a just-identified system");
  return warnings;
}

EstimateConfig estimate_config_from_json(const json& j, EstimateConfig c) {
  Table t(j, "");
  if (t.has("method")) {
    std::string m;
    t.get("method", m);
    c.method = method_from_string(m);
  }
  if (t.has("moments")) c.moments = moments_from_json(t.raw("moments"), "moments");
  if (t.has("weighting")) {
    std::string w;
    t.get("weighting", w);
    c.weighting = weighting_from_string(w);
  }
  t.get("bootstrap", c.bootstrap);
  t.get("level", c.level);
  t.get("min_obs", c.min_obs);
  t.finish();
  c.validate();
  return c;
}

json to_json(const EstimateConfig& c) {
  return {{"method", to_string(c.method)},   {"moments", c.effective_moments()},
          {"weighting", to_string(c.weighting)}, {"bootstrap", c.bootstrap},
          {"level", c.level},                {"min_obs", c.min_obs}};
}

}  // namespace teamprod
