// Acceptance run: one PASS/FAIL line per criterion. Every stochastic workload
// is executed twice, single-threaded and with --threads workers, and the
// result files of both passes must match byte for byte.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "teamprod/bootstrap.hpp"
#include "teamprod/config.hpp"
#include "teamprod/errors.hpp"
#include "teamprod/gmm.hpp"
#include "teamprod/io.hpp"
#include "teamprod/jtest.hpp"
#include "teamprod/manifest.hpp"
#include "teamprod/moments.hpp"
#include "teamprod/montecarlo.hpp"
#include "teamprod/naive.hpp"
#include "teamprod/report.hpp"
#include "teamprod/rng.hpp"
#include "teamprod/simulation.hpp"
#include "teamprod/stats.hpp"
#include "teamprod/triplets.hpp"

namespace fs = std::filesystem;
using namespace teamprod;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string pct(double x) { return fmt("%+.2f%%", 100.0 * x); }

std::string g17(double x) { return fmt("%.17g", x); }

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  write_text_file(p, text);
}

// Runs body(r) for r in [0, n) on `threads` workers striding the index.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
  const unsigned w = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (w == 1) {
    for (std::size_t r = 0; r < n; ++r) body(r);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < w; ++k)
    pool.emplace_back([&, k] {
      for (std::size_t r = k; r < n; r += w) body(r);
    });
  for (auto& t : pool) t.join();
}

const McRow& row_of(const McSummary& s, const McCell& cell, Estimator e) {
  for (std::size_t k = 0; k < cell.estimators.size(); ++k)
    if (cell.estimators[k] == e) return s.rows[k];
  throw InvalidInput("estimator not in cell: " + to_string(e));
}

void write_mc(const fs::path& dir, const std::string& stem, const McSummary& s,
              const McCell& cell) {
  write_file(dir / (stem + ".csv"), montecarlo_csv(s));
  write_file(dir / (stem + ".json"), montecarlo_report(s, to_json(cell)).dump(2) + "\n");
}

struct Options {
  std::uint64_t seed = 42;
  unsigned threads = 4;
  fs::path data_dir = "data";
  fs::path out_dir = "acceptance-output";
};

// ---------------------------------------------------------------- workloads

struct C1 {
  double max_residual = 0.0;
  double seconds = 0.0;
};

C1 identity_suite(const Options& o, const fs::path& dir) {
  const auto t0 = Clock::now();
  auto rng = make_engine(substream_seed(o.seed, 1));
  std::uniform_real_distribution<double> a(-3.0, 5.0), s(0.2, 4.0);
  std::uniform_int_distribution<int> k(1, 4);
  C1 r;
  std::ostringstream out;
  out << "alpha_tilde,sigma_tilde,k,residual\n";
  for (int p = 0; p < 200; ++p) {
    const double at = a(rng), st = s(rng);
    const int kk = k(rng);
    const double res = trunc_normal_moment_identity(at, st, kk);
    r.max_residual = std::max(r.max_residual, std::abs(res));
    out << g17(at) << ',' << g17(st) << ',' << kk << ',' << g17(res) << '\n';
  }
  r.seconds = seconds_since(t0);
  write_file(dir / "c1_identity.csv", out.str());
  return r;
}

struct C2 {
  double mean[2]{}, se[2]{};
  std::size_t n = 0;
  double seconds = 0.0;
};

C2 mean_zero_suite(const Options& o, const fs::path& dir) {
  const auto t0 = Clock::now();
  DgpConfig cfg;  // lambda 0.7, sigma 2
  auto rng = make_engine(substream_seed(o.seed, 2));
  ShockSampler shock(cfg.error);
  const std::size_t target = 1'000'000;
  long double sum[2]{}, sum2[2]{};
  std::size_t n = 0;
  while (n < target) {
    auto alpha = draw_fixed_effects(cfg.alpha, 2 * 4096, rng);
    for (std::size_t q = 0; q + 1 < alpha.size() && n < target; q += 2) {
      const double ai = alpha[q], aj = alpha[q + 1];
      const double yi = ai + cfg.sigma * shock(rng);
      const double yj = aj + cfg.sigma * shock(rng);
      const double yij = cfg.lambda * (ai + aj) + cfg.sigma * shock(rng);
      if (yi < 0.0 || yj < 0.0 || yij < 0.0) continue;
      for (int k = 1; k <= 2; ++k) {
        const double m = moment_mk(cfg.lambda, cfg.sigma, yi, yj, yij, k);
        sum[k - 1] += m;
        sum2[k - 1] += static_cast<long double>(m) * m;
      }
      ++n;
    }
  }
  C2 r;
  r.n = n;
  for (int k = 0; k < 2; ++k) {
    const long double mean = sum[k] / n;
    const long double var = (sum2[k] - n * mean * mean) / (n - 1);
    r.mean[k] = static_cast<double>(mean);
    r.se[k] = std::sqrt(static_cast<double>(var) / static_cast<double>(n));
  }
  r.seconds = seconds_since(t0);
  write_file(dir / "c2_mean_zero.csv", "k,mean,se\n1," + g17(r.mean[0]) + ',' + g17(r.se[0]) +
                                           "\n2," + g17(r.mean[1]) + ',' + g17(r.se[1]) + '\n');
  return r;
}

struct C3 {
  McCell cell;
  McSummary primary;
  double seconds = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> naive_bias, gmm_bias;  // per master seed
};

C3 table2_medium(const Options& o, unsigned threads, const fs::path& dir) {
  C3 r;
  r.cell = preset_cell("table2-medium");
  r.seeds = {o.seed};
  for (std::uint64_t k = 1; k < 5; ++k) r.seeds.push_back(substream_seed(o.seed, 300 + k));
  for (std::size_t k = 0; k < r.seeds.size(); ++k) {
    const auto t0 = Clock::now();
    auto s = run_cell(r.cell, r.seeds[k], threads);
    if (k == 0) r.seconds = seconds_since(t0);
    r.naive_bias.push_back(row_of(s, r.cell, Estimator::naive_observed).median_bias);
    r.gmm_bias.push_back(row_of(s, r.cell, Estimator::gmm_observed).median_bias);
    write_mc(dir, "c3_table2_medium_run" + std::to_string(k), s, r.cell);
    if (k == 0) r.primary = std::move(s);
  }
  return r;
}

struct C4 {
  McCell cell;
  McSummary summary;
  double seconds = 0.0;
};

C4 table1_sparse(const Options& o, unsigned threads, const fs::path& dir) {
  C4 r;
  r.cell = preset_cell("table1-sparse");
  r.cell.reps = 200;
  r.cell.estimators = {Estimator::naive_observed, Estimator::gmm_observed};
  const auto t0 = Clock::now();
  r.summary = run_cell(r.cell, substream_seed(o.seed, 4), threads);
  r.seconds = seconds_since(t0);
  write_mc(dir, "c4_table1_sparse", r.summary, r.cell);
  return r;
}

struct C5 {
  McCell cell;
  McSummary summary;
  double mean = 0, var = 0, skew = 0, kurt = 0;
};

C5 robustness(const Options& o, unsigned threads, const fs::path& dir) {
  C5 r;
  r.cell = preset_cell("table3-t");
  r.cell.config.n_nodes = 1000;
  r.cell.config.n_links = 1000;
  r.cell.reps = 200;
  r.cell.estimators = {Estimator::naive_observed, Estimator::gmm_observed};
  r.summary = run_cell(r.cell, substream_seed(o.seed, 5), threads);
  write_mc(dir, "c5_table3_t", r.summary, r.cell);

  ErrorDist gev;
  gev.kind = ErrorKind::gev;
  gev.gev_shape = 0.5;
  ShockSampler shock(gev);
  auto rng = make_engine(substream_seed(o.seed, 55));
  const std::size_t n = 1'000'000;
  std::vector<double> x(n);
  for (auto& v : x) v = shock(rng);
  long double m = 0;
  for (double v : x) m += v;
  m /= n;
  long double c2 = 0, c3 = 0, c4 = 0;
  for (double v : x) {
    const long double d = v - m;
    c2 += d * d;
    c3 += d * d * d;
    c4 += d * d * d * d;
  }
  c2 /= n;
  c3 /= n;
  c4 /= n;
  r.mean = static_cast<double>(m);
  r.var = static_cast<double>(c2);
  r.skew = static_cast<double>(c3 / std::pow(c2, 1.5L));
  r.kurt = static_cast<double>(c4 / (c2 * c2) - 3.0L);
  write_file(dir / "c5_gev_moments.csv", "mean,variance,skewness,excess_kurtosis\n" + g17(r.mean) +
                                             ',' + g17(r.var) + ',' + g17(r.skew) + ',' +
                                             g17(r.kurt) + '\n');
  return r;
}

struct C7 {
  double max_rel_system = 0.0;
  double max_rel_pointwise = 0.0;
  int points = 0;
};

C7 gradient_suite(const Options& o, const fs::path& dir) {
  auto rng = make_engine(substream_seed(o.seed, 7));
  std::uniform_real_distribution<double> lam(0.3, 1.5), sig(0.5, 3.0), unit(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  auto alpha = [&] { return 2.2 * std::pow(1.0 - unit(rng), -0.1); };
  auto rel = [](double a, double b) {
    const double d = std::max(std::abs(a), std::abs(b));
    return d == 0.0 ? 0.0 : std::abs(a - b) / d;
  };
  C7 r;
  std::ostringstream out;
  out << "point,family,max_rel_system,max_rel_pointwise\n";
  for (int p = 0; p < 50; ++p) {
    const int family = p % 3;
    std::vector<double> theta;
    std::optional<MomentSystem> sys;
    double pointwise = 0.0;
    if (family == 0 || family == 1) {
      std::vector<Triplet> t;
      while (t.size() < 200) {
        const double ai = alpha(), aj = alpha();
        Triplet x;
        x.y_i = ai + 2.0 * z(rng);
        x.y_j = aj + 2.0 * z(rng);
        x.y_ij = 0.7 * (ai + aj) + 2.0 * z(rng);
        if (x.y_i >= 0.0 && x.y_j >= 0.0 && x.y_ij >= 0.0) t.push_back(x);
      }
      if (family == 0) {
        theta = {lam(rng), sig(rng)};
        sys = MomentSystem::baseline(t, {1, 2, 3});
      } else {
        theta = {lam(rng), sig(rng), sig(rng)};
        sys = MomentSystem::hetero(t, {1, 2, 3});
      }
      const auto& d = t[static_cast<std::size_t>(p) % t.size()];
      for (int k = 1; k <= 3; ++k) {
        auto f = [&](const std::vector<double>& th) {
          return family == 0 ? moment_mk(th[0], th[1], d.y_i, d.y_j, d.y_ij, k)
                             : moment_mk_hetero(th[0], th[1], th[2], d.y_i, d.y_j, d.y_ij, k);
        };
        std::vector<double> grad;
        if (family == 0) {
          auto gr = moment_mk_gradient(theta[0], theta[1], d.y_i, d.y_j, d.y_ij, k);
          grad.assign(gr.begin(), gr.end());
        } else {
          auto gr = moment_mk_hetero_gradient(theta[0], theta[1], theta[2], d.y_i, d.y_j, d.y_ij, k);
          grad.assign(gr.begin(), gr.end());
        }
        for (std::size_t j = 0; j < theta.size(); ++j) {
          const double h = 1e-4 * std::max(1.0, std::abs(theta[j]));
          auto up = theta, dn = theta;
          up[j] += h;
          dn[j] -= h;
          pointwise = std::max(pointwise, rel(grad[j], (f(up) - f(dn)) / (2.0 * h)));
        }
      }
    } else {
      std::vector<Quadruplet> q;
      while (q.size() < 200) {
        const double ai = alpha(), aj = alpha(), ak = alpha();
        Quadruplet x;
        x.y_i = ai + 2.0 * z(rng);
        x.y_j = aj + 2.0 * z(rng);
        x.y_k = ak + 2.0 * z(rng);
        x.y_ijk = 0.5 * (ai + aj + ak) + 2.0 * z(rng);
        if (x.y_i >= 0.0 && x.y_j >= 0.0 && x.y_k >= 0.0 && x.y_ijk >= 0.0) q.push_back(x);
      }
      theta = {lam(rng) * 0.7, sig(rng)};
      sys = MomentSystem::three(q, {1, 2});
      const auto& d = q[static_cast<std::size_t>(p) % q.size()];
      for (int k = 1; k <= 2; ++k) {
        auto gr = moment_mk_three_gradient(theta[0], theta[1], d.y_i, d.y_j, d.y_k, d.y_ijk, k);
        for (std::size_t j = 0; j < 2; ++j) {
          const double h = 1e-4 * std::max(1.0, std::abs(theta[j]));
          auto up = theta, dn = theta;
          up[j] += h;
          dn[j] -= h;
          const double fd = (moment_mk_three(up[0], up[1], d.y_i, d.y_j, d.y_k, d.y_ijk, k) -
                             moment_mk_three(dn[0], dn[1], d.y_i, d.y_j, d.y_k, d.y_ijk, k)) /
                            (2.0 * h);
          pointwise = std::max(pointwise, rel(gr[j], fd));
        }
      }
    }
    // G = dg/dtheta for the sample mean of the moment vector
    const Eigen::MatrixXd fbar = sys->mean_features();
    const Eigen::MatrixXd g_analytic = fbar * sys->basis_jacobian(theta);
    double system = 0.0;
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double h = 1e-4 * std::max(1.0, std::abs(theta[j]));
      auto up = theta, dn = theta;
      up[j] += h;
      dn[j] -= h;
      const Eigen::VectorXd fd = (fbar * sys->basis(up) - fbar * sys->basis(dn)) / (2.0 * h);
      for (Eigen::Index m = 0; m < fd.size(); ++m)
        system = std::max(system, rel(g_analytic(m, static_cast<Eigen::Index>(j)), fd(m)));
    }
    r.max_rel_system = std::max(r.max_rel_system, system);
    r.max_rel_pointwise = std::max(r.max_rel_pointwise, pointwise);
    ++r.points;
    out << p << ',' << family << ',' << g17(system) << ',' << g17(pointwise) << '\n';
  }
  write_file(dir / "c7_gradients.csv", out.str());
  return r;
}

struct C8 {
  std::size_t reps = 500;
  std::vector<double> t_null, p_null, t_alt, p_alt;
  double size = 0.0, power = 0.0, tail_656 = 0.0;
  double ks_d = 0.0, ks_p = 0.0;
};

// Two-sided one-sample Kolmogorov-Smirnov p-value, asymptotic series with
// Stephens' small-sample correction.
double kolmogorov_p(double d, std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  const double l = (rn + 0.12 + 0.11 / rn) * d;
  if (l < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * l * l);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

DgpConfig jtest_design() {
  // Dispersed fixed effects with mass near zero, so that truncation removes
  // enough links for observed degree to carry information about alpha.
  DgpConfig cfg;
  cfg.n_nodes = 2000;
  cfg.n_links = 8000;
  cfg.alpha.shape = 3.0;
  cfg.alpha.scale = 2.0;
  cfg.alpha.location = -2.0;
  return cfg;
}

C8 jtest_suite(const Options& o, unsigned threads, const fs::path& dir) {
  C8 r;
  r.t_null.assign(r.reps, 0.0);
  r.p_null.assign(r.reps, 0.0);
  r.t_alt.assign(r.reps, 0.0);
  r.p_alt.assign(r.reps, 0.0);
  const auto base = jtest_design();
  const std::uint64_t master = substream_seed(o.seed, 8);
  parallel_for(r.reps, threads, [&](std::size_t k) {
    DgpConfig cfg = base;
    cfg.seed = substream_seed(master, k);
    auto sim = simulate(cfg);
    auto null = jtest(sim.latent, select_unique_pairs(build_triplets(sim.latent)),
                      {"degree", "closeness"});
    auto alt = jtest(sim.observed, select_unique_pairs(build_triplets(sim.observed)),
                     {"degree", "closeness"});
    r.t_null[k] = null.statistic;
    r.p_null[k] = null.p_value;
    r.t_alt[k] = alt.statistic;
    r.p_alt[k] = alt.p_value;
  });
  std::ostringstream out;
  out << "rep,t_null,p_null,t_truncated,p_truncated\n";
  std::size_t rej0 = 0, rej1 = 0;
  for (std::size_t k = 0; k < r.reps; ++k) {
    rej0 += r.p_null[k] < 0.05;
    rej1 += r.p_alt[k] < 0.05;
    out << k << ',' << g17(r.t_null[k]) << ',' << g17(r.p_null[k]) << ',' << g17(r.t_alt[k])
        << ',' << g17(r.p_alt[k]) << '\n';
  }
  r.size = static_cast<double>(rej0) / static_cast<double>(r.reps);
  r.power = static_cast<double>(rej1) / static_cast<double>(r.reps);
  r.tail_656 = chi2_upper_tail(6.56, 2);

  std::vector<double> t = r.t_null;
  std::sort(t.begin(), t.end());
  const double n = static_cast<double>(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double f = 1.0 - std::exp(-0.5 * t[k]);  // chi-square(2) cdf
    r.ks_d = std::max({r.ks_d, (static_cast<double>(k) + 1.0) / n - f, f - static_cast<double>(k) / n});
  }
  r.ks_p = kolmogorov_p(r.ks_d, t.size());
  write_file(dir / "c8_jtest.csv", out.str());
  return r;
}

struct C9 {
  double premium_ref = 0.0;
  double gmm = 0.0, gmm_se = 0.0, naive = 0.0;
  std::size_t n_triplets = 0;
  std::string digest, expected_digest;
};

C9 synthetic_dataset(const Options& o, unsigned threads, const fs::path& dir) {
  C9 r;
  r.premium_ref = collaboration_premium(0.651);
  const auto cfg = dgp_from_json(load_config_file(o.data_dir / "synthetic" / "config.toml"));
  const auto csv = dir / "c9_synthetic" / "observed.csv";
  fs::create_directories(csv.parent_path());
  write_projects_csv(csv, simulate(cfg).observed);
  r.digest = sha256_file(csv);
  if (const auto sums = o.data_dir / "synthetic" / "observed.sha256"; fs::exists(sums)) {
    std::istringstream in(read_text_file(sums));
    in >> r.expected_digest;
  }
  // estimate from the file, as a user of the dataset would
  auto net = TeamNetwork::build(read_projects_csv(csv, NetworkView::observed), NetworkView::observed);
  auto trip = build_triplets(net);
  r.n_triplets = trip.size();
  auto fit = gmm_estimate(trip);
  r.gmm = fit.estimates[0];
  r.gmm_se = fit.se[0];
  auto pairs = eligible_pairs(net);
  r.naive = naive_lambda(pairs);
  BootstrapOptions b;
  b.reps = 199;
  b.seed = substream_seed(o.seed, 9);
  b.threads = threads;
  auto boot = bootstrap_naive(pairs, b);
  nlohmann::json doc{{"gmm", gmm_report("gmm", fit, std::nullopt)},
                     {"naive", naive_report(r.naive, pairs.size(), boot)}};
  write_file(dir / "c9_synthetic" / "estimate.json", doc.dump(2) + "\n");
  fs::remove(csv);  // large; its digest is kept instead
  write_file(dir / "c9_synthetic" / "observed.sha256", r.digest + "\n");
  return r;
}

struct AllResults {
  C1 c1;
  C2 c2;
  C3 c3;
  C4 c4;
  C5 c5;
  C7 c7;
  C8 c8;
  C9 c9;
};

AllResults run_all(const Options& o, unsigned threads, const fs::path& dir) {
  AllResults a;
  auto step = [&](const char* what) {
    std::cerr << "  [threads=" << threads << "] " << what << '\n';
  };
  step("identity oracle");
  a.c1 = identity_suite(o, dir);
  step("mean-zero moments");
  a.c2 = mean_zero_suite(o, dir);
  step("table 2 medium cell");
  a.c3 = table2_medium(o, threads, dir);
  step("table 1 sparse cell");
  a.c4 = table1_sparse(o, threads, dir);
  step("robustness cells");
  a.c5 = robustness(o, threads, dir);
  step("gradients");
  a.c7 = gradient_suite(o, dir);
  step("J-test size and power");
  a.c8 = jtest_suite(o, threads, dir);
  step("synthetic dataset");
  a.c9 = synthetic_dataset(o, threads, dir);
  return a;
}

// Files under `a` and `b` (relative paths) that are missing or differ.
std::vector<std::string> compare_trees(const fs::path& a, const fs::path& b, std::size_t& count) {
  std::vector<std::string> bad;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a));
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file() && !fs::exists(a / fs::relative(e.path(), b)))
      bad.push_back(fs::relative(e.path(), b).string() + " (only in second pass)");
  std::sort(files.begin(), files.end());
  count = files.size();
  for (const auto& f : files) {
    if (!fs::exists(b / f)) {
      bad.push_back(f.string() + " (missing)");
    } else if (read_text_file(a / f) != read_text_file(b / f)) {
      bad.push_back(f.string());
    }
  }
  return bad;
}

struct Line {
  int id;
  bool pass;
  std::string text;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"teamprod acceptance run"};
  Options o;
  app.add_option("--seed", o.seed, "master seed")->capture_default_str();
  app.add_option("--threads", o.threads, "worker threads for the repeated pass")->capture_default_str();
  app.add_option("--data-dir", o.data_dir, "directory holding synthetic/config.toml")->capture_default_str();
  app.add_option("--out-dir", o.out_dir, "where result files are written")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  if (o.threads < 2) o.threads = 2;

  try {
    const auto pass1 = o.out_dir / "threads-1";
    const auto pass2 = o.out_dir / ("threads-" + std::to_string(o.threads));
    fs::remove_all(pass1);
    fs::remove_all(pass2);
    std::cerr << "acceptance: seed " << o.seed << '\n';
    const auto a = run_all(o, 1, pass1);
    run_all(o, o.threads, pass2);

    std::vector<Line> lines;
    auto add = [&](int id, bool pass, std::string text) { lines.push_back({id, pass, std::move(text)}); };

    add(1, a.c1.max_residual < 1e-6 && a.c1.seconds < 10.0,
        "truncated-normal identity at 200 points: max |residual| " + fmt("%.2e", a.c1.max_residual) +
            " (< 1e-6), " + fmt("%.2f", a.c1.seconds) + " s (< 10 s)");

    {
      const bool ok = std::abs(a.c2.mean[0]) < 3 * a.c2.se[0] &&
                      std::abs(a.c2.mean[1]) < 3 * a.c2.se[1] && a.c2.seconds < 60.0;
      add(2, ok,
          "mean-zero moments on " + std::to_string(a.c2.n) + " truncated triplets: m1 " +
              fmt("%.3g", a.c2.mean[0]) + " (" + fmt("%.2f", a.c2.mean[0] / a.c2.se[0]) +
              " SE), m2 " + fmt("%.3g", a.c2.mean[1]) + " (" + fmt("%.2f", a.c2.mean[1] / a.c2.se[1]) +
              " SE), limit 3 SE, " + fmt("%.1f", a.c2.seconds) + " s (< 60 s)");
    }

    {
      const auto& c = a.c3;
      const double nb = row_of(c.primary, c.cell, Estimator::naive_observed).median_bias;
      const double lb = row_of(c.primary, c.cell, Estimator::naive_latent).median_bias;
      const double gb = row_of(c.primary, c.cell, Estimator::gmm_observed).median_bias;
      std::size_t better = 0;
      for (std::size_t k = 0; k < c.seeds.size(); ++k)
        better += std::abs(c.gmm_bias[k]) < std::abs(c.naive_bias[k]);
      const bool ok = std::abs(nb + 0.0696) <= 0.015 && std::abs(lb) <= 0.01 &&
                      std::abs(gb) <= 0.03 && better == c.seeds.size() && c.seconds < 300.0;
      add(3, ok,
          "table 2 medium (N=1000, 200 reps): naive observed " + pct(nb) +
              " (-6.96% +/- 1.5 pp), naive latent " + pct(lb) + " (0 +/- 1 pp), GMM observed " +
              pct(gb) + " (0 +/- 3 pp), |GMM| < |naive| in " + std::to_string(better) + "/" +
              std::to_string(c.seeds.size()) + " runs, " + fmt("%.1f", c.seconds) + " s (< 300 s)");
    }

    {
      const auto& c = a.c4;
      const auto& nr = row_of(c.summary, c.cell, Estimator::naive_observed);
      const auto& gr = row_of(c.summary, c.cell, Estimator::gmm_observed);
      const bool ok = std::abs(nr.median_bias + 0.0694) <= 0.01 && gr.mae <= 0.05 && c.seconds < 1200.0;
      add(4, ok,
          "table 1 sparse (N=10000, 200 reps): naive observed " + pct(nr.median_bias) +
              " (-6.94% +/- 1 pp), GMM observed MAE " + fmt("%.2f%%", 100 * gr.mae) + " (<= 5%), " +
              fmt("%.1f", c.seconds) + " s (< 1200 s)");
    }

    {
      const auto& c = a.c5;
      const double nb = row_of(c.summary, c.cell, Estimator::naive_observed).median_bias;
      const double gb = row_of(c.summary, c.cell, Estimator::gmm_observed).median_bias;
      const double margin = std::abs(nb) - std::abs(gb);
      const bool moments = std::abs(c.mean - 0.23) <= 0.02 && std::abs(c.var - 0.86) <= 0.02 &&
                           std::abs(c.skew + 0.63) <= 0.02 && std::abs(c.kurt - 0.25) <= 0.02;
      add(5, margin >= 0.03 && moments,
          "t(10) cell (N=1000, 200 reps): naive " + pct(nb) + ", GMM " + pct(gb) + ", margin " +
              fmt("%.2f", 100 * margin) + " pp (>= 3); GEV(0.5) mean " + fmt("%.3f", c.mean) +
              " var " + fmt("%.3f", c.var) + " skew " + fmt("%.3f", c.skew) + " kurt " +
              fmt("%.3f", c.kurt) + " (0.23/0.86/-0.63/0.25 +/- 0.02)");
    }

    {
      const auto& c = a.c3;
      std::size_t col = 0;
      for (std::size_t k = 0; k < c.cell.estimators.size(); ++k)
        if (c.cell.estimators[k] == Estimator::gmm_observed) col = k;
      std::vector<double> est, se;
      for (const auto& rep : c.primary.reps) {
        if (rep.estimate[col]) est.push_back(*rep.estimate[col]);
        if (rep.se[col] && std::isfinite(*rep.se[col])) se.push_back(*rep.se[col]);
      }
      const double med_se = median(se);
      const double mean = std::accumulate(est.begin(), est.end(), 0.0) / static_cast<double>(est.size());
      double ss = 0.0;
      for (double e : est) ss += (e - mean) * (e - mean);
      const double sd = std::sqrt(ss / static_cast<double>(est.size() - 1));
      const double robust = row_of(c.primary, c.cell, Estimator::gmm_observed).se;
      // Dispersion of the Monte Carlo draws is measured as IQR / 1.35, the same
      // robust SE the simulation tables report; a handful of far roots in
      // small samples dominate the raw SD, which is shown alongside.
      const double ratio = med_se / robust;
      add(6, std::abs(ratio - 1.0) <= 0.30,
          "GMM SE vs Monte Carlo SD (table 2 medium): median reported SE " + fmt("%.4f", med_se) +
              ", MC SD as IQR/1.35 " + fmt("%.4f", robust) + ", ratio " + fmt("%.3f", ratio) +
              " (1 +/- 0.30); raw SD " + fmt("%.4f", sd) + " (ratio " + fmt("%.3f", med_se / sd) +
              ")");
    }

    add(7, a.c7.max_rel_system < 1e-5 && a.c7.max_rel_pointwise < 1e-5 && a.c7.points == 50,
        "analytic Jacobian vs central differences at " + std::to_string(a.c7.points) +
            " points: max rel error " + fmt("%.2e", a.c7.max_rel_system) + " (sample G), " +
            fmt("%.2e", a.c7.max_rel_pointwise) + " (per observation), limit 1e-5");

    {
      const auto& c = a.c8;
      const bool ok = c.size >= 0.02 && c.size <= 0.08 && c.power >= 2.0 * c.size &&
                      std::abs(c.tail_656 - 0.0376) <= 0.0002;
      add(8, ok,
          "J-test over " + std::to_string(c.reps) + " reps: size " + fmt("%.3f", c.size) +
              " ([0.02, 0.08]), power " + fmt("%.3f", c.power) + " (>= 2 x size), chi2_2 tail at 6.56 " +
              fmt("%.5f", c.tail_656) + " (0.0376 +/- 0.0002)");
    }

    {
      const auto& c = a.c9;
      const bool premium = std::abs(c.premium_ref - 0.302) < 1e-12 &&
                           collaboration_premium(0.5) == 0.0 && collaboration_premium(1.0) == 1.0;
      const bool ok = premium && std::abs(c.gmm - 0.65) <= 0.03 && c.gmm - c.naive >= 0.04;
      std::string digest = c.expected_digest.empty() ? "no bundled digest"
                           : c.expected_digest == c.digest ? "digest matches bundled"
                                                            : "digest differs from bundled";
      add(9, ok,
          "premium 2*0.651-1 = " + fmt("%.3f", c.premium_ref) + "; synthetic dataset (" +
              std::to_string(c.n_triplets) + " triplets, " + digest + "): GMM " +
              fmt("%.4f", c.gmm) + " (SE " + fmt("%.4f", c.gmm_se) + "; 0.65 +/- 0.03), naive " +
              fmt("%.4f", c.naive) + ", gap " + fmt("%.2f", 100 * (c.gmm - c.naive)) + " pp (>= 4)");
    }

    {
      std::size_t n = 0;
      auto bad = compare_trees(pass1, pass2, n);
      std::string text = std::to_string(n) + " result files, threads 1 vs " +
                         std::to_string(o.threads) + ": ";
      if (bad.empty()) {
        text += "byte-identical";
      } else {
        text += std::to_string(bad.size()) + " differ (";
        for (std::size_t k = 0; k < bad.size(); ++k) text += (k ? ", " : "") + bad[k];
        text += ")";
      }
      add(10, bad.empty() && n > 0, text);
    }

    bool all = true;
    for (const auto& l : lines) {
      all = all && l.pass;
      std::cout << (l.pass ? "PASS" : "FAIL") << "  criterion " << l.id << ": " << l.text << '\n';
    }
    // null law of T beyond its 5% point
    const bool ks_ok = a.c8.ks_p >= 0.01;
    std::cout << (ks_ok ? "PASS" : "FAIL") << "  property J null law: KS vs chi2_2 over "
              << a.c8.reps << " reps, D " << fmt("%.4f", a.c8.ks_d) << ", p "
              << fmt("%.3f", a.c8.ks_p) << " (>= 0.01)\n";
    all = all && ks_ok;
    return all ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << '\n';
    return 2;
  }
}
