#include <doctest.h>

#include <cmath>

#include "eadlab/analytic.hpp"
#include "eadlab/error.hpp"
#include "eadlab/ibm.hpp"
#include "eadlab/oracles.hpp"
#include "test_support.hpp"

using namespace eadlab;
using eadlab::testing::make_spec;

namespace {
bool conserved(const Trajectory& t) {
  return t.initial_count + static_cast<std::int64_t>(t.clonal_births + t.mutant_births) -
             static_cast<std::int64_t>(t.deaths) ==
         t.final_count;
}
}  // namespace

TEST_SUITE("ibm") {
  TEST_CASE("monomorphic initial state") {
    const auto st = init_monomorphic(linear_birth_spec());
    REQUIRE(st.atoms().size() == 1);
    CHECK(st.atoms()[0].count == 500);
    CHECK(st.mutation_count() == 0);
    CHECK(st.total_mass() == 0.5);
    auto s = make_spec("1.4", "1", "1");
    s.scaling.K = 1;
    CHECK_THROWS_AS(init_monomorphic(s), PreconditionError);
  }

  TEST_CASE("event rates") {
    auto s = linear_birth_spec();
    const auto st = init_monomorphic(s);
    const auto r = st.event_rates()[0];
    const double n = 500;
    CHECK(r.clonal + r.mutant == doctest::Approx(n * 1.0));
    CHECK(r.mutant == doctest::Approx(1e-6 * 0.5 * n));  // half the kernel mass leaves X at x = 0
    CHECK(std::fabs(r.death / n - (r.clonal + r.mutant) / n) <= 1.0 / 1000.0);

    s.scaling.u = 1e-3;
    s.rates.c = expr::parse("1 + (x - y)^2");
    PopulationState two(s);
    two.add_atom(0, 0.2, 300);
    two.add_atom(1, 0.6, 100);
    const auto rr = two.event_rates();
    CHECK(rr[0].death == doctest::Approx(300 * (0.5 + (1.0 * 300 + 1.16 * 100) / 1000.0)).epsilon(1e-13));
    CHECK(rr[1].death == doctest::Approx(100 * (0.5 + (1.16 * 300 + 1.0 * 100) / 1000.0)).epsilon(1e-13));
    CHECK(rr[0].mutant == doctest::Approx(1e-3 * 1.1 * 300).epsilon(1e-13));

    s.scaling.u = 0.0;
    PopulationState nomut(s);
    nomut.add_atom(0, 0.5, 10);
    CHECK(nomut.event_rates()[0].mutant == 0.0);
  }

  TEST_CASE("pure death goes extinct") {
    auto s = make_spec("0", "1", "0");
    PopulationState st(s);
    st.add_atom(0, 0.5, 1);
    Rng rng(1);
    const auto ev = st.step(rng);
    REQUIRE(ev.has_value());
    CHECK(ev->kind == EventKind::Death);
    CHECK(st.total_count() == 0);
    CHECK_FALSE(st.step(rng).has_value());
  }

  TEST_CASE("exponential holding time") {
    auto s = make_spec("0", "1", "0");
    Rng rng(5);
    double sum = 0.0;
    const int N = 20000;
    for (int i = 0; i < N; ++i) {
      PopulationState st(s);
      st.add_atom(0, 0.5, 1);
      st.step(rng);
      sum += st.time();
    }
    CHECK(std::fabs(sum / N - 1.0) <= 3.0 / std::sqrt(N));
  }

  TEST_CASE("every birth is a mutant when u = m = 1 and the kernel is delta_{+1}") {
    auto s = linear_birth_spec();
    s.scaling.u = 1.0;
    s.kernel = MutationKernel(1, std::vector<double>{0.0, 0.0, 1.0});
    s.space = {0.0, 100.0};
    PopulationState st(s);
    st.add_atom(0, 0.0, 50);
    Rng rng(2);
    int births = 0;
    for (int i = 0; i < 200; ++i) {
      const auto ev = st.step(rng);
      REQUIRE(ev.has_value());
      CHECK(ev->kind != EventKind::ClonalBirth);
      if (ev->kind == EventKind::MutantBirth) {
        ++births;
        CHECK(ev->new_trait == ev->parent_trait + 0.1);
        CHECK(ev->h == 1);
      }
    }
    CHECK(births > 0);
    CHECK(st.mutation_count() == static_cast<std::uint64_t>(births));
  }

  TEST_CASE("equilibrium fluctuations stay in the diffusive band") {
    auto s = linear_birth_spec();
    s.scaling.u = 0.0;
    auto st = init_monomorphic(s);
    Rng rng(11);
    const double zb = 0.5, band = 4.0 * std::sqrt(zb / 1000.0);
    int outside = 0, samples = 0;
    for (int i = 1; i <= 1000000; ++i) {
      REQUIRE(st.step(rng).has_value());
      if (i % 100 == 0) {
        ++samples;
        if (std::fabs(st.total_mass() - zb) > band) ++outside;
      }
    }
    CHECK(outside <= samples / 100);
    CHECK(st.resync() <= 1e-9);
  }

  TEST_CASE("no mutation keeps the population monomorphic") {
    ModelSpec off = linear_birth_spec();
    off.scaling.u = 1e-300;  // effectively 0 but keeps the scaling triple valid
    RunOptions o;
    o.horizon = 100.0;
    o.time_scale = 1.0;
    o.grid_points = 1001;
    Rng rng(4);
    const auto tr = run(off, o, rng);
    CHECK(tr.status == RunStatus::Horizon);
    CHECK(tr.mutant_births == 0);
    double avg = 0.0;
    for (const auto& sm : tr.samples) {
      CHECK(sm.atoms.size() == 1);
      avg += sm.total_mass;
    }
    avg /= static_cast<double>(tr.samples.size());
    CHECK(std::fabs(avg - 0.5) <= 2.0 / std::sqrt(1000.0));
  }

  TEST_CASE("sigma = 0 keeps every trait at x0") {
    auto s = linear_birth_spec();
    s.x0 = 0.5;
    s.scaling = {200, 1e-2, 0.0, 0.1};
    RunOptions o;
    o.horizon = 20.0;
    o.time_scale = 1.0;
    Rng rng(9);
    const auto tr = run(s, o, rng);
    CHECK(tr.mutant_births > 0);
    for (const auto& sm : tr.samples) CHECK(sm.mean_trait == 0.5);
  }

  TEST_CASE("conservation, label counter and resync on full runs") {
    auto s = linear_birth_spec();
    s.scaling = {300, 1e-5, 0.1, 0.1};
    int increased = 0, decreased = 0;
    double endpoint_sum = 0.0;
    for (int r = 0; r < 20; ++r) {
      Rng rng(stream_seed(42, r));
      RunOptions o;
      const auto tr = run(s, o, rng);
      CHECK(tr.status == RunStatus::Horizon);
      CHECK(conserved(tr));
      CHECK(tr.final_L == tr.mutant_births);
      CHECK(tr.mutations.size() == tr.mutant_births);
      CHECK(tr.max_resync_deviation <= 1e-9);
      CHECK(tr.samples.size() == 101);
      const double end = tr.samples.back().mean_trait;
      endpoint_sum += end;
      if (end > s.x0) ++increased;
      if (end < s.x0) ++decreased;
    }
    // selection favours larger traits
    CHECK(increased > decreased);
    CHECK(endpoint_sum / 20.0 > s.x0);
  }

  TEST_CASE("runs are reproducible") {
    auto s = linear_birth_spec();
    s.scaling = {200, 1e-4, 0.1, 0.1};
    RunOptions o;
    Rng a(77), b(77);
    const auto t1 = run(s, o, a);
    const auto t2 = run(s, o, b);
    CHECK(t1.events() == t2.events());
    REQUIRE(t1.mutations.size() == t2.mutations.size());
    for (std::size_t i = 0; i < t1.mutations.size(); ++i) CHECK(t1.mutations[i].time == t2.mutations[i].time);
    CHECK(t1.samples.back().total_mass == t2.samples.back().total_mass);
  }

  TEST_CASE("single mutant against a frozen resident field") {
    auto s = linear_birth_spec();
    s.scaling = {1000, 1e-6, 0.1, 0.1};
    const double p = oracles::bd_hitting_prob({s.b(0.1), s.d(0.1) + s.c(0.1, 0.0) * equilibrium_mass(s, 0.0)}, 1, 100);
    Rng rng(123);
    const int N = 100000;
    int hits = 0;
    for (int i = 0; i < N; ++i) hits += simulate_single_mutant(s, 0.0, 0.1, 100, rng, true).invaded ? 1 : 0;
    const double rate = static_cast<double>(hits) / N;
    CHECK(std::fabs(rate - p) <= 3.0 * std::sqrt(p * (1 - p) / N));
  }

  TEST_CASE("assumption enforcement rejects bad traits") {
    auto s = make_spec("1 - x", "0.5", "1", "1", 0.0);
    PopulationState st(s);
    st.enforce_assumptions(true);
    CHECK_NOTHROW(st.add_atom(0, 0.2, 5));
    CHECK_THROWS_AS(st.add_atom(1, 0.8, 5), DomainError);
    PopulationState neg(make_spec("x - 0.5", "0.1", "1"));
    CHECK_THROWS_AS(neg.add_atom(0, 0.2, 1), DomainError);
  }
}
