#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "teamprod/bootstrap.hpp"
#include "teamprod/config.hpp"
#include "teamprod/errors.hpp"
#include "teamprod/fixed_effects.hpp"
#include "teamprod/gmm.hpp"
#include "teamprod/io.hpp"
#include "teamprod/jtest.hpp"
#include "teamprod/manifest.hpp"
#include "teamprod/montecarlo.hpp"
#include "teamprod/naive.hpp"
#include "teamprod/report.hpp"
#include "teamprod/simulation.hpp"
#include "teamprod/triplets.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace teamprod;

namespace {

enum Exit { ok = 0, config_error = 2, data_error = 3, numerical_error = 4 };

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned threads = 1;
  std::string out_dir = ".";
  std::string manifest;
};

// Tracks what a command read and wrote for the manifest.
class Run {
 public:
  Run(const Globals& g, std::string command, std::vector<std::string> argv)
      : g_(g), start_(std::chrono::steady_clock::now()) {
    m_.command = std::move(command);
    m_.argv = std::move(argv);
    m_.cwd = fs::current_path().string();
    m_.seed = g.seed;
    m_.version = TEAMPROD_VERSION;
    m_.out_dir = g.out_dir;
    fs::create_directories(g.out_dir);
  }

  void input(const std::string& path) {
    if (path.empty()) return;
    m_.inputs.push_back({path, sha256_file(path)});
  }
  void config(json c) { m_.config = std::move(c); }
  void seed(std::uint64_t s) { m_.seed = s; }

  fs::path out(const std::string& name) const { return fs::path(g_.out_dir) / name; }
  void write(const std::string& name, const std::string& text) {
    write_text_file(out(name), text);
    outputs_.push_back(name);
  }
  void wrote(const std::string& name) { outputs_.push_back(name); }

  void finish() {
    for (const auto& name : outputs_) m_.outputs.push_back({name, sha256_file(out(name))});
    m_.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const fs::path path = g_.manifest.empty() ? out("manifest.json") : fs::path(g_.manifest);
    write_manifest(path, m_);
  }

 private:
  const Globals& g_;
  RunManifest m_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

TeamNetwork load_network(const std::string& path, NetworkView view = NetworkView::observed) {
  return TeamNetwork::build(read_projects_csv(path, view), view);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config;
  std::optional<std::size_t> nodes, links;
  std::optional<double> lambda, lambda3, sigma, df, gev_shape;
  std::optional<std::string> error;
};

int cmd_simulate(const Globals& g, const SimulateArgs& a, const std::vector<std::string>& argv) {
  Run run(g, "simulate", argv);
  DgpConfig cfg;
  if (!a.config.empty()) {
    run.input(a.config);
    cfg = dgp_from_json(load_config_file(a.config));
  }
  if (a.nodes) cfg.n_nodes = *a.nodes;
  if (a.links) cfg.n_links = *a.links;
  if (a.lambda) cfg.lambda = *a.lambda;
  if (a.lambda3) cfg.lambda3 = *a.lambda3;
  if (a.sigma) {
    cfg.sigma = *a.sigma;
    cfg.sigma_by_size.clear();
  }
  if (a.error) {
    if (*a.error == "normal") cfg.error.kind = ErrorKind::normal;
    else if (*a.error == "student_t") cfg.error.kind = ErrorKind::student_t;
    else if (*a.error == "gev") cfg.error.kind = ErrorKind::gev;
    else throw ConfigError("error: expected normal, student_t or gev");
  }
  if (a.df) cfg.error.df = *a.df;
  if (a.gev_shape) cfg.error.gev_shape = *a.gev_shape;
  if (g.seed_given) cfg.seed = g.seed;
  cfg.validate();
  run.seed(cfg.seed);
  run.config(to_json(cfg));

  auto sim = simulate(cfg);
  run.write("latent.csv", format_projects_csv(sim.latent));
  run.write("observed.csv", format_projects_csv(sim.observed));
  write_alphas_csv(run.out("alphas.csv"), sim.node_ids, sim.true_alphas);
  run.wrote("alphas.csv");
  std::cerr << "simulated " << sim.latent.num_projects() << " projects, "
            << sim.observed.num_projects() << " observed\n";
  run.finish();
  return ok;
}

// ----------------------------------------------------------- make-triplets

int cmd_make_triplets(const Globals& g, const std::string& network, bool quads,
                      const std::vector<std::string>& argv) {
  Run run(g, "make-triplets", argv);
  run.input(network);
  run.config({{"quadruplets", quads}});
  auto net = load_network(network);
  if (quads) {
    auto tuples = build_tuples(net);
    write_triplets_csv(run.out("triplets.csv"), tuples.triplets);
    write_quadruplets_csv(run.out("quadruplets.csv"), tuples.quadruplets);
    run.wrote("triplets.csv");
    run.wrote("quadruplets.csv");
    std::cerr << tuples.triplets.size() << " triplets, " << tuples.quadruplets.size()
              << " quadruplets\n";
  } else {
    auto trip = build_triplets(net);
    write_triplets_csv(run.out("triplets.csv"), trip);
    run.wrote("triplets.csv");
    std::cerr << trip.size() << " triplets\n";
  }
  run.finish();
  return ok;
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
  std::string config, network, triplets, quadruplets;
  std::optional<std::string> method, moments, weighting;
  std::optional<std::size_t> bootstrap, min_obs;
  std::optional<double> level;
};

int cmd_estimate(const Globals& g, const EstimateArgs& a, const std::vector<std::string>& argv) {
  Run run(g, "estimate", argv);
  EstimateConfig ec;
  if (!a.config.empty()) {
    run.input(a.config);
    ec = estimate_config_from_json(load_config_file(a.config));
  }
  if (a.method) ec.method = method_from_string(*a.method);
  if (a.moments) ec.moments = parse_moment_list(*a.moments);
  if (a.weighting) ec.weighting = weighting_from_string(*a.weighting);
  if (a.bootstrap) ec.bootstrap = *a.bootstrap;
  if (a.min_obs) ec.min_obs = *a.min_obs;
  if (a.level) ec.level = *a.level;
  warn(ec.validate());
  run.config(to_json(ec));

  BootstrapOptions bo;
  bo.reps = ec.bootstrap;
  bo.level = ec.level;
  bo.seed = g.seed;
  bo.threads = g.threads;

  json result;
  if (ec.method == Method::naive) {
    if (a.network.empty()) throw ConfigError("network: the naive estimator needs --network");
    run.input(a.network);
    auto pairs = eligible_pairs(load_network(a.network));
    const double lambda = naive_lambda(pairs);
    std::optional<BootstrapResult> boot;
    if (ec.bootstrap > 0) boot = bootstrap_naive(pairs, bo);
    result = naive_report(lambda, pairs.size(), boot);
  } else {
    GmmOptions opts;
    opts.moment_orders = ec.effective_moments();
    opts.weighting = ec.weighting;
    opts.min_obs = ec.min_obs;

    std::optional<MomentSystem> system;
    GmmResult fit;
    if (ec.method == Method::gmm_three) {
      std::vector<Quadruplet> quads;
      if (!a.quadruplets.empty()) {
        run.input(a.quadruplets);
        quads = read_quadruplets_csv(a.quadruplets);
      } else if (!a.network.empty()) {
        run.input(a.network);
        quads = build_tuples(load_network(a.network)).quadruplets;
      } else {
        throw ConfigError("quadruplets: gmm-three needs --quadruplets or --network");
      }
      fit = gmm_estimate_three(quads, opts);
      if (ec.bootstrap > 0) system = MomentSystem::three(quads, opts.moment_orders);
    } else {
      std::vector<Triplet> trip;
      if (!a.triplets.empty()) {
        run.input(a.triplets);
        trip = read_triplets_csv(a.triplets);
      } else if (!a.network.empty()) {
        run.input(a.network);
        trip = build_triplets(load_network(a.network));
      } else {
        throw ConfigError("triplets: " + to_string(ec.method) + " needs --triplets or --network");
      }
      if (ec.method == Method::gmm) {
        fit = gmm_estimate(trip, opts);
        if (ec.bootstrap > 0) system = MomentSystem::baseline(trip, opts.moment_orders);
      } else {
        fit = gmm_estimate_hetero(trip, opts);
        if (ec.bootstrap > 0) system = MomentSystem::hetero(trip, opts.moment_orders);
      }
    }
    warn(fit.warnings);
    std::optional<BootstrapResult> boot;
    if (system) boot = bootstrap_gmm(*system, fit, opts, bo);
    result = gmm_report(to_string(ec.method), fit, boot);
  }
  run.write("estimate.json", dump(result));
  std::cout << result["params"].dump() << '\n';
  run.finish();
  return ok;
}

// ------------------------------------------------------------------- jtest

struct JtestArgs {
  std::string network, triplets;
  std::string stats = "degree,closeness";
  std::vector<std::string> stat_files;  // name=path
  std::size_t min_triplets = 30;
};

int cmd_jtest(const Globals& g, const JtestArgs& a, const std::vector<std::string>& argv) {
  Run run(g, "jtest", argv);
  run.input(a.network);
  auto net = load_network(a.network);
  std::vector<Triplet> trip;
  if (!a.triplets.empty()) {
    run.input(a.triplets);
    trip = read_triplets_csv(a.triplets);
  } else {
    trip = build_triplets(net);
  }
  trip = select_unique_pairs(trip);

  std::vector<NodeStatistic> stats;
  std::vector<std::string> names;
  if (!a.stats.empty()) {
    const auto ns = node_statistics(net);
    std::stringstream ss(a.stats);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (name.empty()) continue;
      stats.push_back(builtin_statistic(name, ns));
      names.push_back(name);
    }
  }
  for (const auto& spec : a.stat_files) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("stat-file: expected name=path (got '" + spec + "')");
    NodeStatistic s;
    s.name = spec.substr(0, eq);
    const auto path = spec.substr(eq + 1);
    run.input(path);
    for (auto& [id, v] : read_node_values_csv(path)) s.values.emplace(id, v);
    stats.push_back(std::move(s));
    names.push_back(spec.substr(0, eq));
  }
  run.config({{"stats", names}, {"min_triplets", a.min_triplets}});
  auto r = jtest(trip, stats, a.min_triplets);
  warn(r.warnings);
  auto report = jtest_report(r);
  run.write("jtest.json", dump(report));
  std::cout << "J = " << r.statistic << ", dof = " << r.dof << ", p = " << r.p_value << '\n';
  run.finish();
  return ok;
}

// -------------------------------------------------------------- montecarlo

struct MontecarloArgs {
  std::string preset, config;
  std::optional<std::size_t> reps;
};

int cmd_montecarlo(const Globals& g, const MontecarloArgs& a,
                   const std::vector<std::string>& argv) {
  Run run(g, "montecarlo", argv);
  std::string config_path = a.config;
  std::string preset = a.preset;
  // --preset also accepts a config file path
  if (config_path.empty() && (preset.ends_with(".toml") || preset.ends_with(".json"))) {
    config_path = preset;
    preset.clear();
  }
  if (!preset.empty() && !config_path.empty())
    throw ConfigError("preset: give either --preset or --config, not both");
  McCell cell;
  if (!preset.empty()) {
    cell = preset_cell(preset);
  } else if (!config_path.empty()) {
    run.input(config_path);
    auto j = load_config_file(config_path);
    if (j.contains("preset")) {
      if (!j["preset"].is_string()) throw ConfigError("preset: expected a string");
      cell = preset_cell(j["preset"].get<std::string>());
      j.erase("preset");
    }
    cell = mc_cell_from_json(j, cell);
  } else {
    throw ConfigError("preset: give --preset NAME or --config FILE");
  }
  if (a.reps) cell.reps = *a.reps;
  cell.validate();
  const auto cell_json = to_json(cell);
  run.config(cell_json);

  auto summary = run_cell(cell, g.seed, g.threads);
  run.write("montecarlo.csv", montecarlo_csv(summary));
  run.write("montecarlo.json", dump(montecarlo_report(summary, cell_json)));
  std::cout << montecarlo_csv(summary);
  run.finish();
  return ok;
}

// ----------------------------------------------------------- fixed-effects

struct FixedEffectsArgs {
  std::string network, estimate;
  std::optional<double> lambda, sigma, sigma1, sigma2, lambda3;
};

int cmd_fixed_effects(const Globals& g, const FixedEffectsArgs& a,
                      const std::vector<std::string>& argv) {
  Run run(g, "fixed-effects", argv);
  Params p;
  if (!a.estimate.empty()) {
    run.input(a.estimate);
    json est;
    try {
      est = json::parse(read_text_file(a.estimate));
    } catch (const json::parse_error& e) {
      throw ConfigError(a.estimate + ": " + e.what());
    }
    if (!est.contains("params") || !est["params"].is_object())
      throw ConfigError(a.estimate + ": no params object");
    const auto& q = est["params"];
    auto get = [&](const char* k) -> std::optional<double> {
      if (q.contains(k) && q[k].is_number()) return q[k].get<double>();
      return std::nullopt;
    };
    if (auto v = get("lambda")) p.lambda = *v;
    if (auto v = get("sigma")) p.sigma = *v;
    if (auto s1 = get("sigma1"), s2 = get("sigma2"); s1 && s2)
      p.sigma_by_size = std::array<double, 2>{*s1, *s2};
    if (auto v = get("lambda3")) p.lambda3 = *v;
  }
  if (a.lambda) p.lambda = *a.lambda;
  if (a.sigma) p.sigma = *a.sigma;
  if (a.sigma1 || a.sigma2) {
    if (!(a.sigma1 && a.sigma2)) throw ConfigError("sigma1: give both --sigma1 and --sigma2");
    p.sigma_by_size = std::array<double, 2>{*a.sigma1, *a.sigma2};
  }
  if (a.lambda3) p.lambda3 = *a.lambda3;
  if (!(p.lambda > 0.0)) throw ConfigError("lambda: must be > 0 (pass --lambda or --estimate)");
  if (!(p.sigma >= 0.0)) throw ConfigError("sigma: must be >= 0");

  json cfg = {{"lambda", p.lambda}, {"sigma", p.sigma}};
  if (p.sigma_by_size) cfg["sigma_by_size"] = *p.sigma_by_size;
  if (p.lambda3) cfg["lambda3"] = *p.lambda3;
  run.config(cfg);
  run.input(a.network);
  auto fe = recover_fixed_effects(load_network(a.network), p);
  write_fixed_effects_csv(run.out("fixed_effects.csv"), fe);
  run.wrote("fixed_effects.csv");
  std::cerr << fe.num_identified() << " of " << fe.node_ids.size() << " fixed effects identified\n";
  run.finish();
  return ok;
}

int run_args(std::vector<std::string> args);

// ------------------------------------------------------------------ replay

int cmd_replay(const std::string& manifest_path, const std::string& replay_dir) {
  const auto m = read_manifest(manifest_path);
  const auto out_dir = fs::absolute(replay_dir.empty() ? fs::path(m.out_dir) / "replay"
                                                       : fs::path(replay_dir));
  if (!fs::is_directory(m.cwd)) throw InvalidInput("replay: working directory " + m.cwd + " is gone");
  const auto here = fs::current_path();
  fs::current_path(m.cwd);
  struct Restore {
    fs::path p;
    ~Restore() { fs::current_path(p); }
  } restore{here};

  for (const auto& in : m.inputs) {
    const auto now = sha256_file(in.path);
    if (now != in.sha256) throw InvalidInput("replay: input " + in.path + " changed since the run");
  }
  std::vector<std::string> args;
  for (std::size_t k = 0; k < m.argv.size(); ++k) {
    const auto& s = m.argv[k];
    if (s == "--out-dir" || s == "--manifest") {
      ++k;
      continue;
    }
    if (s.starts_with("--out-dir=") || s.starts_with("--manifest=")) continue;
    args.push_back(s);
  }
  fs::create_directories(out_dir);
  args.insert(args.end(), {"--out-dir", out_dir.string(), "--manifest",
                           (out_dir / "manifest.json").string()});
  if (int rc = run_args(args); rc != ok) return rc;

  int mismatches = 0;
  for (const auto& o : m.outputs) {
    const auto now = sha256_file(out_dir / o.path);
    const bool same = now == o.sha256;
    std::cout << (same ? "identical " : "DIFFERENT ") << o.path << '\n';
    mismatches += same ? 0 : 1;
  }
  if (mismatches) {
    std::cerr << "replay: " << mismatches << " output(s) differ\n";
    return data_error;
  }
  return ok;
}

// ------------------------------------------------------------------- setup

int run_args(std::vector<std::string> args) {
  CLI::App app{"Team production networks: simulation, estimation and tests under link truncation",
               "teamprod"};
  app.set_version_flag("--version", std::string(TEAMPROD_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Master seed (default 0)");
  app.add_option("--threads", g.threads, "Worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "Directory for result files")->capture_default_str();
  app.add_option("--manifest", g.manifest, "Manifest path (default <out-dir>/manifest.json)");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate latent and observed networks");
  s->add_option("--config", sim.config, "TOML or JSON data-generating config");
  s->add_option("--nodes", sim.nodes);
  s->add_option("--links", sim.links, "Links beyond the coverage projects");
  s->add_option("--lambda", sim.lambda);
  s->add_option("--lambda3", sim.lambda3);
  s->add_option("--sigma", sim.sigma);
  s->add_option("--error", sim.error, "normal, student_t or gev");
  s->add_option("--df", sim.df, "Student-t degrees of freedom");
  s->add_option("--gev-shape", sim.gev_shape);

  std::string trip_network;
  bool trip_quads = false;
  auto* t = app.add_subcommand("make-triplets", "Match team projects to solo projects");
  t->add_option("--network", trip_network, "Projects CSV (observed)")->required();
  t->add_flag("--quadruplets", trip_quads, "Also build quadruplets from three-worker teams");

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "Estimate the scaling factor");
  e->add_option("--config", est.config, "TOML or JSON estimation config");
  e->add_option("--method", est.method, "naive, gmm, gmm-hetero or gmm-three");
  e->add_option("--network", est.network, "Projects CSV");
  e->add_option("--triplets", est.triplets, "Triplets CSV");
  e->add_option("--quadruplets", est.quadruplets, "Quadruplets CSV");
  e->add_option("--moments", est.moments, "Moment orders, e.g. 1,2,3");
  e->add_option("--weighting", est.weighting, "identity or two-step");
  e->add_option("--bootstrap", est.bootstrap, "Bootstrap replications (0: none)");
  e->add_option("--level", est.level, "Confidence level of bootstrap intervals");
  e->add_option("--min-obs", est.min_obs, "Minimum number of triplets");

  JtestArgs jt;
  auto* j = app.add_subcommand("jtest", "J-test for missing links");
  j->add_option("--network", jt.network, "Observed projects CSV")->required();
  j->add_option("--triplets", jt.triplets, "Triplets CSV (built from the network if omitted)");
  j->add_option("--stats", jt.stats, "Built-in statistics: degree, closeness")
      ->capture_default_str();
  j->add_option("--stat-file", jt.stat_files, "Custom statistic as name=path (node_id,value)");
  j->add_option("--min-triplets", jt.min_triplets)->capture_default_str();

  MontecarloArgs mc;
  auto* m = app.add_subcommand("montecarlo", "Monte Carlo replication of a design cell");
  m->add_option("--preset", mc.preset, "Preset name or config file");
  m->add_option("--config", mc.config, "TOML or JSON cell config");
  m->add_option("--reps", mc.reps);

  FixedEffectsArgs fe;
  auto* f = app.add_subcommand("fixed-effects", "Recover node fixed effects");
  f->add_option("--network", fe.network, "Observed projects CSV")->required();
  f->add_option("--estimate", fe.estimate, "estimate.json to take parameters from");
  f->add_option("--lambda", fe.lambda);
  f->add_option("--sigma", fe.sigma);
  f->add_option("--sigma1", fe.sigma1);
  f->add_option("--sigma2", fe.sigma2);
  f->add_option("--lambda3", fe.lambda3);

  std::string manifest_path, replay_dir;
  auto* r = app.add_subcommand("replay", "Re-run a manifest and compare output digests");
  r->add_option("manifest", manifest_path)->required();
  r->add_option("--into", replay_dir, "Directory for the replayed outputs");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::Success& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return config_error;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    if (s->parsed()) return cmd_simulate(g, sim, args);
    if (t->parsed()) return cmd_make_triplets(g, trip_network, trip_quads, args);
    if (e->parsed()) return cmd_estimate(g, est, args);
    if (j->parsed()) return cmd_jtest(g, jt, args);
    if (m->parsed()) return cmd_montecarlo(g, mc, args);
    if (f->parsed()) return cmd_fixed_effects(g, fe, args);
    if (r->parsed()) return cmd_replay(manifest_path, replay_dir);
  } catch (const ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << '\n';
    return config_error;
  } catch (const InvalidInput& ex) {
    std::cerr << "data error: " << ex.what() << '\n';
    return data_error;
  } catch (const NumericalError& ex) {
    std::cerr << "numerical failure: " << ex.what() << '\n';
    return numerical_error;
  } catch (const fs::filesystem_error& ex) {
    std::cerr << "data error: " << ex.what() << '\n';
    return data_error;
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  return run_args(std::vector<std::string>(argv + 1, argv + argc));
}
