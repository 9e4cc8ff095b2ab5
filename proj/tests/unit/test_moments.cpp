#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "teamprod/gmm.hpp"
#include "teamprod/moments.hpp"

using namespace teamprod;

namespace {

// Closed-form truncated normal mean and second moment, Y ~ N(a, s^2) | Y >= 0.
double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double Phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-12});
  return std::abs(a - b) / scale;
}

}  // namespace

TEST_SUITE("moments") {

TEST_CASE("truncated-normal identity: worked points") {
  CHECK(trunc_normal_moment(0.0, 1.0, 1) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-12));
  CHECK(trunc_normal_moment(0.0, 1.0, 2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(trunc_normal_moment_identity(0.0, 1.0, 1)) < 1e-10);
  for (int k = 1; k <= 4; ++k) CHECK(std::abs(trunc_normal_moment_identity(5.0, 0.1, k)) < 1e-8);
  CHECK(std::abs(trunc_normal_moment_identity(-2.0, 1.0, 2)) < 1e-8);
}

TEST_CASE("quadrature matches closed-form truncated-normal moments") {
  for (double a : {-3.0, -1.0, 0.0, 0.7, 4.0})
    for (double s : {0.2, 1.0, 2.5}) {
      const double z = a / s;
      const double mill = phi(z) / Phi(z);
      const double m1 = a + s * mill;
      const double m2 = a * a + s * s + a * s * mill;
      CHECK(rel_err(trunc_normal_moment(a, s, 1), m1) < 1e-9);
      CHECK(rel_err(trunc_normal_moment(a, s, 2), m2) < 1e-9);
    }
}

TEST_CASE("truncated-normal identity: 200 random points") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ua(-3.0, 3.0), us(0.1, 3.0);
  std::uniform_int_distribution<int> uk(1, 4);
  double worst = 0.0;
  for (int r = 0; r < 200; ++r) {
    const double a = ua(rng), s = us(rng);
    const int k = uk(rng);
    worst = std::max(worst, std::abs(trunc_normal_moment_identity(a, s, k)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("moment_mk worked values") {
  CHECK(moment_mk(0.7, 2.0, 1.0, 1.0, 1.4, 1) == doctest::Approx(3.84).epsilon(1e-14));
  for (double lambda : {0.3, 0.7, 1.9})
    for (int k = 1; k <= 3; ++k)
      CHECK(moment_mk(lambda, 0.0, 1.3, 2.1, lambda * 3.4, k) == doctest::Approx(0.0).scale(1.0));
  // 0^0 = 1: a zero outcome is admissible
  CHECK(moment_mk(0.7, 2.0, 0.0, 1.0, 1.0, 1) == doctest::Approx(4.0 * 0.7));
}

TEST_CASE("heteroscedastic moment reduces to the baseline") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int r = 0; r < 50; ++r) {
    const double yi = u(rng), yj = u(rng), yij = u(rng), sig = 0.2 + u(rng), lam = 0.2 + u(rng) / 2;
    for (int k = 1; k <= 3; ++k)
      CHECK(rel_err(moment_mk_hetero(lam, sig, sig, yi, yj, yij, k), moment_mk(lam, sig, yi, yj, yij, k)) < 1e-12);
  }
  CHECK(moment_mk_hetero(0.6, 0.0, 0.0, 1.0, 2.0, 1.8, 2) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("three-worker moment: noiseless zero, distinct from the pair family") {
  for (int k = 1; k <= 3; ++k)
    CHECK(moment_mk_three(0.5, 0.0, 1.0, 2.0, 3.0, 0.5 * 6.0, k) == doctest::Approx(0.0).scale(1.0));
  // collapsing the third worker does not give the pair moment
  const double pair = moment_mk(0.7, 2.0, 1.0, 1.5, 2.0, 1);
  const double three = moment_mk_three(0.7, 2.0, 1.0, 1.5, 1.0, 2.0, 1);
  const double three0 = moment_mk_three(0.7, 2.0, 1.0, 1.5, 0.0, 2.0, 1);
  CHECK(std::abs(pair - three) > 1e-3);
  CHECK(std::abs(pair - three0) > 1e-3);
}

TEST_CASE("baseline moments have mean zero on truncated triplets") {
  auto t = testing::truncated_triplets(1000000, 0.7, 2.0, 101);
  for (int k = 1; k <= 3; ++k) {
    std::vector<double> m(t.size());
    for (std::size_t r = 0; r < t.size(); ++r) m[r] = moment_mk(0.7, 2.0, t[r].y_i, t[r].y_j, t[r].y_ij, k);
    auto ms = testing::mean_se(m);
    CAPTURE(k);
    CHECK(std::abs(ms.mean) < 3.0 * ms.se);
  }
  // and the wrong lambda is detected
  std::vector<double> off(t.size());
  for (std::size_t r = 0; r < t.size(); ++r) off[r] = moment_mk(0.8, 2.0, t[r].y_i, t[r].y_j, t[r].y_ij, 1);
  auto ms = testing::mean_se(off);
  CHECK(std::abs(ms.mean) > 10.0 * ms.se);
}

TEST_CASE("heteroscedastic moments have mean zero at (0.7, 1, 2)") {
  auto t = testing::truncated_triplets(1000000, 0.7, 1.0, 202, 2.2, 2.0);
  for (int k = 1; k <= 3; ++k) {
    std::vector<double> m(t.size());
    for (std::size_t r = 0; r < t.size(); ++r)
      m[r] = moment_mk_hetero(0.7, 1.0, 2.0, t[r].y_i, t[r].y_j, t[r].y_ij, k);
    auto ms = testing::mean_se(m);
    CAPTURE(k);
    CHECK(std::abs(ms.mean) < 3.0 * ms.se);
  }
  std::vector<double> swapped(t.size());
  for (std::size_t r = 0; r < t.size(); ++r)
    swapped[r] = moment_mk_hetero(0.7, 2.0, 1.0, t[r].y_i, t[r].y_j, t[r].y_ij, 1);
  auto ms = testing::mean_se(swapped);
  CHECK(std::abs(ms.mean) > 10.0 * ms.se);
}

TEST_CASE("three-worker moments have mean zero at (0.5, 2)") {
  auto q = testing::truncated_quadruplets(1000000, 0.5, 2.0, 303);
  for (int k = 1; k <= 2; ++k) {
    std::vector<double> m(q.size());
    for (std::size_t r = 0; r < q.size(); ++r)
      m[r] = moment_mk_three(0.5, 2.0, q[r].y_i, q[r].y_j, q[r].y_k, q[r].y_ijk, k);
    auto ms = testing::mean_se(m);
    CAPTURE(k);
    CHECK(std::abs(ms.mean) < 3.0 * ms.se);
  }
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uy(0.05, 5.0), ul(0.1, 1.5), us(0.2, 3.0);
  double worst = 0.0;
  for (int r = 0; r < 50; ++r) {
    const double yi = uy(rng), yj = uy(rng), yk = uy(rng), yt = uy(rng);
    const double lam = ul(rng), s1 = us(rng), s2 = us(rng);
    const int k = 1 + r % 3;
    const double h = 1e-6;
    auto fd = [&](auto f, double x) { return (f(x + h) - f(x - h)) / (2.0 * h); };
    auto g = moment_mk_gradient(lam, s1, yi, yj, yt, k);
    worst = std::max(worst, rel_err(g[0], fd([&](double x) { return moment_mk(x, s1, yi, yj, yt, k); }, lam)));
    worst = std::max(worst, rel_err(g[1], fd([&](double x) { return moment_mk(lam, x, yi, yj, yt, k); }, s1)));
    auto gh = moment_mk_hetero_gradient(lam, s1, s2, yi, yj, yt, k);
    worst = std::max(worst, rel_err(gh[0], fd([&](double x) { return moment_mk_hetero(x, s1, s2, yi, yj, yt, k); }, lam)));
    worst = std::max(worst, rel_err(gh[1], fd([&](double x) { return moment_mk_hetero(lam, x, s2, yi, yj, yt, k); }, s1)));
    worst = std::max(worst, rel_err(gh[2], fd([&](double x) { return moment_mk_hetero(lam, s1, x, yi, yj, yt, k); }, s2)));
    auto g3 = moment_mk_three_gradient(lam, s1, yi, yj, yk, yt, k);
    worst = std::max(worst, rel_err(g3[0], fd([&](double x) { return moment_mk_three(x, s1, yi, yj, yk, yt, k); }, lam)));
    worst = std::max(worst, rel_err(g3[1], fd([&](double x) { return moment_mk_three(lam, x, yi, yj, yk, yt, k); }, s1)));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("moment system Jacobian matches differences of the sample mean") {
  auto t = testing::truncated_triplets(400, 0.7, 2.0, 4);
  auto sys = MomentSystem::baseline(t, {1, 2, 3});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ul(0.2, 1.5), us(0.3, 3.0);
  double worst = 0.0;
  for (int r = 0; r < 50; ++r) {
    std::vector<double> th{ul(rng), us(rng)};
    Eigen::MatrixXd G = sys.mean_features() * sys.basis_jacobian(th);
    for (int p = 0; p < 2; ++p) {
      auto up = th, dn = th;
      const double h = 1e-6 * (1.0 + std::abs(th[p]));
      up[p] += h;
      dn[p] -= h;
      for (int q = 0; q < 3; ++q) {
        const int k = q + 1;
        double fu = 0, fdn = 0;
        for (const auto& x : t) {
          fu += moment_mk(up[0], up[1], x.y_i, x.y_j, x.y_ij, k);
          fdn += moment_mk(dn[0], dn[1], x.y_i, x.y_j, x.y_ij, k);
        }
        const double fd = (fu - fdn) / (2.0 * h * double(t.size()));
        worst = std::max(worst, rel_err(G(q, p), fd));
      }
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("identification rank check") {
  std::vector<Triplet> same(20);
  for (auto& t : same) t.y_i = t.y_j = t.y_ij = 1.0;
  CHECK_FALSE(identification_rank_check(same).full_rank);

  auto generic = testing::truncated_triplets(2000, 0.7, 2.0, 6);
  auto rep = identification_rank_check(generic);
  CHECK(rep.full_rank);
  CHECK(rep.n == 2000);
  CHECK(rep.singular_values[0] >= rep.singular_values[2]);

  auto zero = generic;
  for (auto& t : zero) t.y_ij = 0.0;
  CHECK_FALSE(identification_rank_check(zero).full_rank);

  std::vector<Triplet> two(generic.begin(), generic.begin() + 2);
  CHECK_FALSE(identification_rank_check(two).full_rank);
}

}
