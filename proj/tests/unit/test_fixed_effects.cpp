#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "teamprod/fixed_effects.hpp"

using namespace teamprod;
using testing::project;

namespace {

std::size_t idx(const FixedEffectEstimates& fe, const std::string& id) {
  for (std::size_t k = 0; k < fe.node_ids.size(); ++k)
    if (fe.node_ids[k] == id) return k;
  FAIL("node not found: " << id);
  return 0;
}

}  // namespace

TEST_SUITE("fixed_effects") {

TEST_CASE("solo outcomes {2, 2} with sigma^2 = 1 give 1.5") {
  auto net = testing::observed({project("a", {"i"}, 2.0), project("b", {"i"}, 2.0)});
  Params p;
  p.lambda = 0.7;
  p.sigma = 1.0;
  auto fe = recover_fixed_effects(net, p);
  REQUIRE(fe.node_ids.size() == 1);
  CHECK(fe.identified[0]);
  CHECK(fe.alpha[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(fe.moment_count[0] == 2);
}

TEST_CASE("symmetric pair gets equal effects; unanchored nodes are flagged") {
  auto net = testing::observed({project("a", {"i"}, 2.0), project("b", {"j"}, 2.0),
                                project("c", {"i", "j"}, 3.0), project("d", {"k", "l"}, 3.0),
                                project("e", {"m", "i"}, 2.5)});
  Params p;
  p.lambda = 0.7;
  p.sigma = 1.0;
  auto fe = recover_fixed_effects(net, p);
  const auto i = idx(fe, "i"), j = idx(fe, "j"), k = idx(fe, "k"), l = idx(fe, "l"),
             m = idx(fe, "m");
  CHECK(fe.identified[i]);
  CHECK(fe.alpha[i] == doctest::Approx(fe.alpha[j]).epsilon(1e-12));
  CHECK_FALSE(fe.identified[k]);
  CHECK_FALSE(fe.identified[l]);
  CHECK(std::isnan(fe.alpha[k]));
  CHECK(fe.component[k] == fe.component[l]);
  CHECK(fe.component[k] != fe.component[i]);
  CHECK(fe.identified[m]);  // anchored through i
  CHECK(fe.num_identified() == 3);
}

TEST_CASE("recovers simulated effects") {
  DgpConfig cfg;
  cfg.n_nodes = 2000;
  cfg.n_links = 40000;
  cfg.sigma = 0.5;
  cfg.seed = 44;
  auto sim = simulate(cfg);
  Params p;
  p.lambda = 0.7;
  p.sigma = 0.5;
  auto fe = recover_fixed_effects(sim.latent, p);
  double se = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < fe.node_ids.size(); ++k) {
    if (!fe.identified[k]) continue;
    const double d = fe.alpha[k] - sim.true_alphas[k];
    se += d * d;
    ++n;
  }
  CHECK(n == fe.node_ids.size());
  CHECK(std::sqrt(se / double(n)) < 0.25);
}

}
