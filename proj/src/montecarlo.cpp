#include "teamprod/montecarlo.hpp"

#include <cmath>
#include <thread>

#include "teamprod/errors.hpp"
#include "teamprod/naive.hpp"
#include "teamprod/rng.hpp"
#include "teamprod/stats.hpp"
#include "teamprod/triplets.hpp"

namespace teamprod {

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::naive_latent: return "naive_latent";
    case Estimator::naive_observed: return "naive_observed";
    case Estimator::gmm_latent: return "gmm_latent";
    case Estimator::gmm_observed: return "gmm_observed";
  }
  return "?";
}

Estimator estimator_from_string(const std::string& s) {
  for (auto e : {Estimator::naive_latent, Estimator::naive_observed, Estimator::gmm_latent,
                 Estimator::gmm_observed})
    if (to_string(e) == s) return e;
  throw ConfigError("estimators: unknown estimator '" + s + "'");
}

void McCell::validate() const {
  if (reps < 1) throw ConfigError("reps: must be >= 1");
  if (estimators.empty()) throw ConfigError("estimators: at least one is required");
  config.validate();
}

McRow summarize(const std::vector<double>& estimates, double true_value) {
  if (estimates.empty()) throw DegenerateData("summarize: empty sample");
  std::vector<double> sorted = estimates;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> abs_err;
  abs_err.reserve(estimates.size());
  for (double e : estimates) abs_err.push_back(std::abs(e - true_value));
  McRow row;
  row.true_value = true_value;
  row.median_bias = quantile_sorted(sorted, 0.5) - true_value;
  row.mae = median(std::move(abs_err));
  row.se = (quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25)) / 1.35;
  row.n_ok = estimates.size();
  return row;
}

namespace {

McRep run_rep(const McCell& cell, std::uint64_t seed) {
  DgpConfig cfg = cell.config;
  cfg.seed = seed;
  auto sim = simulate(cfg);
  McRep rep;
  rep.seed = seed;
  const auto latent_n = sim.latent.num_projects();
  rep.truncated_share =
      latent_n == 0 ? 0.0
                    : 1.0 - static_cast<double>(sim.observed.num_projects()) / static_cast<double>(latent_n);

  std::optional<std::vector<Triplet>> trip_latent, trip_observed;
  for (auto e : cell.estimators) {
    std::optional<double> est, se;
    try {
      switch (e) {
        case Estimator::naive_latent:
          est = naive_lambda(sim.latent);
          break;
        case Estimator::naive_observed:
          est = naive_lambda(sim.observed);
          break;
        case Estimator::gmm_latent:
        case Estimator::gmm_observed: {
          const bool latent = e == Estimator::gmm_latent;
          auto& trip = latent ? trip_latent : trip_observed;
          if (!trip) trip = build_triplets(latent ? sim.latent : sim.observed);
          if (!latent) rep.n_triplets_observed = trip->size();
          auto fit = gmm_estimate(*trip, cell.gmm);
          est = fit.estimates[0];
          se = fit.se[0];
          break;
        }
      }
    } catch (const NumericalError&) {
      est.reset();
      se.reset();
    }
    rep.estimate.push_back(est);
    rep.se.push_back(se);
  }
  return rep;
}

}  // namespace

McSummary run_cell(const McCell& cell, std::uint64_t master_seed, unsigned threads) {
  cell.validate();
  std::vector<McRep> reps(cell.reps);
  const unsigned workers =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cell.reps)));
  auto body = [&](unsigned w) {
    for (std::size_t r = w; r < cell.reps; r += workers)
      reps[r] = run_rep(cell, substream_seed(master_seed, r));
  };
  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          body(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  McSummary out;
  out.cell = cell.name;
  out.master_seed = master_seed;
  const double truth = cell.config.lambda;
  bool any = false;
  for (std::size_t k = 0; k < cell.estimators.size(); ++k) {
    std::vector<double> ok;
    std::size_t failed = 0;
    for (const auto& r : reps) {
      if (r.estimate[k]) ok.push_back(*r.estimate[k]);
      else ++failed;
    }
    McRow row;
    if (ok.empty()) {
      row.true_value = truth;
      row.median_bias = row.mae = row.se = std::nan("");
    } else {
      row = summarize(ok, truth);
      any = true;
    }
    row.estimator = cell.estimators[k];
    row.failure_count = failed;
    out.rows.push_back(row);
  }
  if (!any) throw NumericalError("montecarlo: every replication failed for every estimator");
  out.reps = std::move(reps);
  return out;
}

std::vector<std::string> preset_names() {
  return {"table1-highly-sparse", "table1-sparse", "table1-less-sparse", "table2-small",
          "table2-medium",        "table2-large",  "table3-t",           "table3-gev"};
}

McCell preset_cell(const std::string& name) {
  McCell cell;
  cell.name = name;
  cell.reps = 200;
  auto& c = cell.config;
  c.lambda = 0.7;
  c.sigma = 2.0;
  if (name == "table1-highly-sparse") {
    c.n_nodes = 10000;
    c.n_links = 1000;
  } else if (name == "table1-sparse" || name == "table2-large") {
    c.n_nodes = 10000;
    c.n_links = 10000;
  } else if (name == "table1-less-sparse") {
    c.n_nodes = 10000;
    c.n_links = 100000;
  } else if (name == "table2-small") {
    c.n_nodes = 100;
    c.n_links = 100;
  } else if (name == "table2-medium") {
    c.n_nodes = 1000;
    c.n_links = 1000;
  } else if (name == "table3-t") {
    c.n_nodes = 10000;
    c.n_links = 10000;
    c.error.kind = ErrorKind::student_t;
    c.error.df = 10.0;
  } else if (name == "table3-gev") {
    c.n_nodes = 10000;
    c.n_links = 10000;
    c.error.kind = ErrorKind::gev;
    c.error.gev_shape = 0.5;
  } else {
    throw ConfigError("preset: unknown preset '" + name + "'");
  }
  return cell;
}

}  // namespace teamprod
