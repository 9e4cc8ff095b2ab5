#include "teamprod/bootstrap.hpp"

#include <optional>
#include <random>
#include <thread>

#include "teamprod/errors.hpp"
#include "teamprod/rng.hpp"
#include "teamprod/stats.hpp"

namespace teamprod {

namespace {

void check_options(const BootstrapOptions& o) {
  if (o.reps < 100) throw ConfigError("bootstrap: reps must be >= 100");
  if (!(o.level > 0.0 && o.level < 1.0)) throw ConfigError("bootstrap: level must lie in (0, 1)");
}

// Per-replication multinomial counts over n observations.
std::vector<double> resample_counts(std::size_t n, Engine& rng) {
  std::vector<double> counts(n, 0.0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t k = 0; k < n; ++k) counts[pick(rng)] += 1.0;
  return counts;
}

template <class Fn>
BootstrapResult run(std::vector<std::string> names, const BootstrapOptions& opt, Fn&& one) {
  std::vector<std::optional<std::vector<double>>> slots(opt.reps);
  const unsigned workers = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(opt.reps)));
  auto body = [&](unsigned w) {
    for (std::size_t r = w; r < opt.reps; r += workers) {
      Engine rng = make_engine(substream_seed(opt.seed, r));
      try {
        slots[r] = one(rng);
      } catch (const NumericalError&) {
        slots[r].reset();
      }
    }
  };
  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
    for (auto& t : pool) t.join();
  }

  BootstrapResult res;
  res.names = std::move(names);
  res.level = opt.level;
  res.reps = opt.reps;
  for (auto& s : slots) {
    if (s) res.draws.push_back(std::move(*s));
    else ++res.failures;
  }
  if (static_cast<double>(res.failures) > opt.max_failure_share * static_cast<double>(opt.reps))
    throw NumericalError("bootstrap: estimator failed in " + std::to_string(res.failures) + " of " +
                         std::to_string(opt.reps) + " replications");
  const double a = 0.5 * (1.0 - opt.level);
  for (std::size_t p = 0; p < res.names.size(); ++p) {
    std::vector<double> col;
    col.reserve(res.draws.size());
    for (const auto& d : res.draws) col.push_back(d[p]);
    std::sort(col.begin(), col.end());
    res.lower.push_back(quantile_sorted(col, a));
    res.upper.push_back(quantile_sorted(col, 1.0 - a));
  }
  return res;
}

}  // namespace

BootstrapResult bootstrap_naive(std::span<const EligiblePair> pairs, const BootstrapOptions& opt) {
  check_options(opt);
  if (pairs.empty()) throw DegenerateData("bootstrap: no eligible pairs");
  return run({"lambda"}, opt, [&](Engine& rng) {
    auto w = resample_counts(pairs.size(), rng);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      num += w[k] * pairs[k].team_mean;
      den += w[k] * pairs[k].solo_sum;
    }
    if (den == 0.0) throw DegenerateData("zero denominator");
    return std::vector<double>{num / den};
  });
}

BootstrapResult bootstrap_gmm(const MomentSystem& system, const GmmResult& point,
                              const GmmOptions& gmm, const BootstrapOptions& opt) {
  check_options(opt);
  if (system.num_obs() == 0) throw DegenerateData("bootstrap: no observations");
  return run(system.param_names(), opt, [&](Engine& rng) {
    auto w = resample_counts(system.num_obs(), rng);
    auto fit = gmm_refit(system, w, point.estimates, gmm, point.weight);
    if (!fit.converged && gmm.throw_on_nonconvergence)
      throw NumericalError("bootstrap refit did not converge");
    return fit.estimates;
  });
}

}  // namespace teamprod
