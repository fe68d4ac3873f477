#include <doctest.h>

#include <cmath>
#include <random>

#include "eadlab/analytic.hpp"
#include "eadlab/error.hpp"
#include "eadlab/metrics.hpp"
#include "eadlab/ode.hpp"
#include "eadlab/simplex.hpp"

using namespace eadlab;

namespace {

SignedAtomicMeasure random_measure(std::mt19937_64& g, int n) {
  std::uniform_real_distribution<double> pos(-3.0, 3.0), w(-1.0, 1.0);
  std::vector<std::pair<double, double>> a;
  for (int i = 0; i < n; ++i) a.emplace_back(pos(g), w(g));
  return SignedAtomicMeasure(a);
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("simplex on a small LP") {
    // max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3
    const auto r = simplex_max({{1, 1}, {1, 3}, {1, 0}}, {4, 6, 3}, {3, 2});
    CHECK(r.status == LpResult::Status::Optimal);
    CHECK(r.value == doctest::Approx(11.0));
    CHECK(r.x[0] == doctest::Approx(3.0));
    CHECK(r.x[1] == doctest::Approx(1.0));
    CHECK(simplex_max({{1, -1}}, {1}, {1, 1}).status == LpResult::Status::Unbounded);
    CHECK_THROWS_AS(simplex_max({{1}}, {-1}, {1}), PreconditionError);
  }

  TEST_CASE("measure construction merges and drops zeros") {
    const SignedAtomicMeasure m({{1.0, 0.5}, {0.0, 1.0}, {1.0, -0.5}, {2.0, 0.0}});
    REQUIRE(m.size() == 1);
    CHECK(m.atoms()[0] == std::pair<double, double>(0.0, 1.0));
    CHECK_THROWS_AS(SignedAtomicMeasure({{NAN, 1.0}}), PreconditionError);
  }

  TEST_CASE("norm examples") {
    CHECK(kr_norm(SignedAtomicMeasure()) == 0.0);
    CHECK(kr_norm(SignedAtomicMeasure::dirac(0.3, -2.5)) == 2.5);
    CHECK(kr_bruteforce(SignedAtomicMeasure::dirac(0.3, -2.5)) == doctest::Approx(2.5).epsilon(1e-12));
    std::mt19937_64 g(1);
    std::uniform_real_distribution<double> pos(-3.0, 3.0);
    for (int i = 0; i < 100; ++i) {
      const double x = pos(g), y = pos(g);
      const auto m = SignedAtomicMeasure::dirac(x) - SignedAtomicMeasure::dirac(y);
      CHECK(std::fabs(kr_norm(m) - std::min(std::fabs(x - y), 2.0)) <= 1e-9);
      const auto w = m.scaled(0.7);
      CHECK(std::fabs(kr_norm(w) - 0.7 * std::min(std::fabs(x - y), 2.0)) <= 1e-9);
    }
  }

  TEST_CASE("LP agrees with the brute-force grid") {
    std::mt19937_64 g(2);
    for (int i = 0; i < 500; ++i) {
      const auto m = random_measure(g, 1 + i % 5);
      const double lp = kr_norm(m);
      const double bf = kr_bruteforce(m);
      CHECK(lp >= bf - 1e-12);
      CHECK(lp - bf <= 5e-3);
      CHECK(lp - bf <= static_cast<double>(m.size()) * 1e-3 + 1e-12);
    }
    CHECK_THROWS_AS(kr_bruteforce(random_measure(g, 7)), PreconditionError);
  }

  TEST_CASE("norm axioms") {
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> c(-3.0, 3.0);
    for (int i = 0; i < 100; ++i) {
      const auto a = random_measure(g, 1 + i % 8);
      const auto b = random_measure(g, 1 + (i + 3) % 8);
      const auto e = random_measure(g, 1 + (i + 5) % 8);
      const double s = c(g);
      CHECK(std::fabs(kr_norm(a.scaled(s)) - std::fabs(s) * kr_norm(a)) <= 1e-9 * (1 + std::fabs(s)));
      CHECK(kr_norm(a + b) <= kr_norm(a) + kr_norm(b) + 1e-9);
      CHECK(kr_norm(a) <= a.total_variation() + 1e-12);
      CHECK(kr_distance(a, a) == 0.0);
      CHECK(kr_distance(a, b) == doctest::Approx(kr_distance(b, a)).epsilon(1e-12));
      CHECK(kr_distance(a, e) <= kr_distance(a, b) + kr_distance(b, e) + 1e-9);
    }
  }

  TEST_CASE("larger measures solve") {
    std::mt19937_64 g(4);
    const auto m = random_measure(g, 60);
    const double v = kr_norm(m);
    CHECK(v > 0.0);
    CHECK(v <= m.total_variation() + 1e-12);
  }

  TEST_CASE("trajectory distances") {
    const auto spec = linear_birth_spec();
    // a monomorphic population at x0 with mass off by delta, against the constant path x0
    ModelSpec flat = linear_birth_spec();
    flat.rates.b = expr::parse("1.5");
    const auto flat_path = integrate_cead(flat, 0.3, 1.0, 1e-2);
    Trajectory off;
    off.K = 1000;
    for (int k = 0; k <= 10; ++k) {
      Trajectory::Sample s;
      s.t = k / 10.0;
      s.atoms = {{0, 0.3, 1000 + 37}};  // zbar = 1, delta = 0.037
      off.samples.push_back(s);
    }
    CHECK(traj_sup_distance(off, flat_path, flat) == doctest::Approx(0.037).epsilon(1e-12));
    Trajectory on;
    on.K = 1000;
    Trajectory::Sample s0;
    s0.atoms = {{0, 0.3, 1000}};
    on.samples = {s0};
    CHECK(traj_sup_distance(on, flat_path, flat) <= 1e-15);

    // bound: mass error + zbar * trait error + 2 * stray mass
    std::mt19937_64 g(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      const double x = 0.8 * u(g);
      const double dx = 0.05 * (u(g) - 0.5);
      const std::int64_t n = 400 + static_cast<std::int64_t>(200 * u(g));
      const std::int64_t stray = static_cast<std::int64_t>(30 * u(g));
      Trajectory t;
      t.K = 1000;
      Trajectory::Sample s;
      s.atoms = {{0, x + dx, n}, {1, 0.9, stray}};
      t.samples = {s};
      OdeSolution ref;
      ref.times = {0.0, 1.0};
      ref.states = {{x}, {x}};
      const double zb = equilibrium_mass(spec, x);
      const double bound = std::fabs(n / 1000.0 - zb) + zb * std::fabs(dx) + 2.0 * stray / 1000.0;
      CHECK(traj_sup_distance(t, ref, spec) <= bound + 1e-12);
    }
  }
}
