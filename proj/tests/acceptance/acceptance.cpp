// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eadlab/analytic.hpp"
#include "eadlab/config.hpp"
#include "eadlab/error.hpp"
#include "eadlab/harness.hpp"
#include "eadlab/ibm.hpp"
#include "eadlab/metrics.hpp"
#include "eadlab/model.hpp"
#include "eadlab/ode.hpp"
#include "eadlab/oracles.hpp"
#include "eadlab/rng.hpp"
#include "linear_solve_oracle.hpp"

using namespace eadlab;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Context {
  fs::path config_dir;
  fs::path out_dir;
  unsigned workers = 0;
  // report files of criteria 7-10, keyed by plan name, for the determinism rerun
  std::map<std::string, std::map<std::string, std::string>> files;
};

std::map<std::string, std::string> emit_all(const ExperimentReport& rep, const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (Format f : {Format::Csv, Format::Json, Format::Svg})
    for (const auto& p : emit(rep, dir, f)) out[p.filename().string()] = read_file(p);
  return out;
}

ExperimentReport run_plan(Context& ctx, const std::string& file, const std::string& tag, double* seconds) {
  const Config cfg = load_config(ctx.config_dir / file);
  if (!cfg.experiment) throw Error(file + " has no experiment block");
  const auto t0 = Clock::now();
  ExperimentReport rep = run_experiment(*cfg.experiment, ctx.workers);
  *seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  ctx.files[file] = emit_all(rep, ctx.out_dir / tag);
  return rep;
}

// ---- 1: closed forms against tridiagonal solves ----
Outcome criterion1() {
  const auto t0 = Clock::now();
  std::mt19937_64 g(101);
  std::uniform_real_distribution<double> rate(0.2, 3.0);
  std::uniform_int_distribution<int> kdist(1, 60);
  double worst_hit = 0.0, worst_time = 0.0, worst_chain = 0.0;
  int points_hit = 0, points_time = 0, points_chain = 0;
  while (points_hit < 120) {
    const double b = rate(g), d = rate(g);
    const int k = kdist(g);
    const auto ref = testing::hitting_by_solve(b, d, k);
    for (int j = 0; j <= k; ++j)
      worst_hit = std::max(worst_hit, std::fabs(oracles::bd_hitting_prob({b, d}, j, k) - ref[j]));
    ++points_hit;
  }
  while (points_time < 120) {
    const double b = rate(g), d = rate(g);
    if (std::fabs(d / b - 1.0) < 1e-3) continue;
    const int k = kdist(g);
    const auto ref = testing::absorption_by_solve(b, d, k);
    for (int n = 1; n <= k; ++n)
      worst_time = std::max(worst_time, std::fabs(oracles::expected_absorption_time({b, d}, n, k) - ref[n]) /
                                            std::max(1.0, ref[n]));
    ++points_time;
  }
  std::uniform_real_distribution<double> c1(-1.0, 1.0), c2(-2.0, 2.0), eps(0.1, 1.0), sig(0.02, 0.3);
  std::uniform_int_distribution<int> Kdist(50, 400);
  while (points_chain < 120) {
    const double C1 = c1(g), C2 = c2(g), e = eps(g), s = sig(g);
    const int K = Kdist(g);
    const double M = 1.0;
    const auto N = oracles::chain_exit_level(e, s, K, M);
    if (N < 2) continue;
    // transition probabilities must stay inside (0, 1) on 1..N
    bool ok = true;
    for (std::int64_t i = 1; i <= N; ++i) {
      const double drift = C1 * static_cast<double>(i) / K - C2 * e * s;
      if (!(std::fabs(drift) < 0.5)) ok = false;
    }
    if (!ok) continue;
    const auto ref = testing::chain_by_solve(C1, C2, e, s, K, N);
    for (std::int64_t a = 1; a < N; ++a)
      worst_chain = std::max(worst_chain, std::fabs(oracles::chain_exit_prob(C1, C2, e, s, K, a, M) - ref[a]));
    ++points_chain;
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const double worst = std::max({worst_hit, worst_time, worst_chain});
  return {worst <= 1e-10 && secs < 5.0,
          "max error hitting " + fmt("%.2e", worst_hit) + ", absorption " + fmt("%.2e", worst_time) + ", chain " +
              fmt("%.2e", worst_chain) + " over 120 points each (limit 1e-10), " + fmt("%.2f", secs) + " s"};
}

// ---- 2: closed forms against Monte Carlo ----
Outcome criterion2() {
  const auto t0 = Clock::now();
  const std::uint64_t n = 100000;
  double worst_z = 0.0;
  int failures = 0;
  auto score = [&](double mc, double exact) {
    const double se = std::sqrt(std::max(exact * (1.0 - exact), 1e-300) / static_cast<double>(n));
    const double z = std::fabs(mc - exact) / se;
    if (exact == 0.0 || exact == 1.0) {
      if (mc != exact) ++failures;
      return;
    }
    worst_z = std::max(worst_z, z);
    if (z > 3.0) ++failures;
  };
  struct Hit {
    double b, d;
    int j, k;
  };
  const Hit hits[] = {{1.2, 1.0, 1, 10}, {1.05, 1.0, 1, 20}, {2.0, 1.0, 2, 8},  {1.0, 1.5, 3, 6},  {0.8, 1.0, 5, 10},
                      {1.5, 1.5, 2, 5},  {3.0, 1.0, 1, 30}, {1.0, 2.0, 4, 5},  {1.1, 0.9, 7, 15}, {0.5, 0.4, 1, 4}};
  for (std::size_t i = 0; i < std::size(hits); ++i) {
    Rng rng(stream_seed(2002, i, 0));
    const auto& h = hits[i];
    const auto mc = oracles::mc_birth_death({h.b, h.d}, h.j, {0, h.k}, rng, n);
    score(mc.hit_hi.mean, oracles::bd_hitting_prob({h.b, h.d}, h.j, h.k));
  }
  struct Cdf {
    double b, d;
    int n;
    double t;
  };
  const Cdf cdfs[] = {{0.5, 1.0, 1, 1.0}, {1.0, 2.0, 2, 0.5}, {1.2, 1.0, 1, 2.0}, {0.1, 1.0, 1, 0.7}, {1.5, 1.0, 3, 1.5},
                      {0.0, 1.0, 2, 1.0}, {2.0, 1.0, 1, 3.0}, {0.9, 1.1, 4, 2.0}, {1.0, 0.5, 1, 0.3}, {0.7, 1.4, 2, 4.0}};
  for (std::size_t i = 0; i < std::size(cdfs); ++i) {
    Rng rng(stream_seed(2002, i, 1));
    const auto& c = cdfs[i];
    const auto mc = oracles::mc_extinction_cdf({c.b, c.d}, c.n, c.t, rng, n);
    score(mc.mean, oracles::extinction_time_cdf({c.b, c.d}, c.n, c.t));
  }
  struct Walk {
    double C, sigma;
    int start, lo, hi;
  };
  const Walk walks[] = {{1.0, 0.1, 5, 0, 10},  {-1.0, 0.1, 5, 0, 10}, {0.0, 0.1, 3, 0, 10}, {2.0, 0.05, 1, 0, 20},
                        {-2.0, 0.05, 15, 0, 20}, {0.5, 0.2, 2, -3, 8}, {1.5, 0.1, 4, 0, 6},  {-0.5, 0.3, 6, 0, 12},
                        {3.0, 0.1, 1, 0, 40},  {0.2, 0.5, 10, 5, 25}};
  for (std::size_t i = 0; i < std::size(walks); ++i) {
    Rng rng(stream_seed(2002, i, 2));
    const auto& w = walks[i];
    const auto mc = oracles::mc_biased_walk(w.C, w.sigma, w.start, w.lo, w.hi, rng, n);
    score(mc.mean, oracles::biased_walk_ruin(w.C, w.sigma, w.start, w.lo, w.hi));
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {failures == 0 && secs < 120.0, std::to_string(failures) + " of 30 settings outside 3 SE, worst |z| " +
                                             fmt("%.2f", worst_z) + ", 1e5 paths each, " + fmt("%.1f", secs) + " s"};
}

// ---- 3: occupation Laplace transform ----
Outcome criterion3() {
  const auto t0 = Clock::now();
  std::mt19937_64 g(303);
  std::uniform_real_distribution<double> rate(0.05, 5.0), lam(0.0, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double b = rate(g), d = rate(g), l = lam(g);
    const double G = oracles::occupation_laplace({b, d}, l);
    worst = std::max(worst, std::fabs(b * G * G - (b + d + l) * G + d));
  }
  double worst0 = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double b = rate(g), d = rate(g);
    worst0 = std::max(worst0, std::fabs(oracles::occupation_laplace({b, d}, 0.0) - std::min(1.0, d / b)));
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {worst < 1e-12 && worst0 < 1e-12 && secs < 1.0, "max residual " + fmt("%.2e", worst) + ", max |G(0) - min(1,d/b)| " +
                                                            fmt("%.2e", worst0) + ", " + fmt("%.3f", secs) + " s"};
}

// ---- 4: analytic layer ----
Outcome criterion4() {
  const auto t0 = Clock::now();
  std::vector<ModelSpec> specs;
  specs.push_back(linear_birth_spec());
  {
    ModelSpec s = linear_birth_spec();
    s.rates = {expr::parse("1.5 - (x - 0.4)^2"), expr::parse("0.3 + 0.1*sin(3*x)"),
               expr::parse("exp(-(x - y)^2) * (1 + 0.2*x)"), expr::parse("1 + 0.5*x")};
    specs.push_back(s);
  }
  double worst_diag = 0.0, worst_grad = 0.0, worst_sym = 0.0;
  for (const auto& s : specs) {
    for (int i = 0; i <= 100; ++i) {
      const double x = s.space.lo + (s.space.hi - s.space.lo) * i / 100.0;
      worst_diag = std::max(worst_diag, std::fabs(invasion_fitness(s, x, x)));
      const double ad = fitness_gradient(s, x);
      const double h = 1e-6;
      const double fd = (invasion_fitness(s, x + h, x) - invasion_fitness(s, x - h, x)) / (2.0 * h);
      worst_grad = std::max(worst_grad, std::fabs(ad - fd) / std::max(std::fabs(ad), 1.0));
      worst_sym = std::max(worst_sym, std::fabs(cead_rhs(s, x) - cead_rhs_symmetric(s, x)));
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {worst_diag <= 1e-12 && worst_grad <= 1e-6 && worst_sym <= 1e-12 && secs < 1.0,
          "max |f(x,x)| " + fmt("%.2e", worst_diag) + ", gradient vs FD " + fmt("%.2e", worst_grad) +
              " relative, rhs vs symmetric form " + fmt("%.2e", worst_sym) + ", " + fmt("%.3f", secs) + " s"};
}

// ---- 5: ODE layer ----
Outcome criterion5() {
  const auto t0 = Clock::now();
  const ModelSpec s = linear_birth_spec();
  const double cead = integrate_cead(s, s.x0, 1.0, 1e-3).final_state()[0];
  const double cead_err = std::fabs(cead - std::expm1(0.125));
  auto logistic = [](double t) { return 0.5 / (1.0 + (0.5 / 0.1 - 1.0) * std::exp(-0.5 * t)); };
  const double lv_err = std::fabs(integrate_lv(s, {0.0}, {0.1}, 10.0, 1e-3).final_state()[0] - logistic(10.0));
  const double e1 = std::fabs(integrate_lv(s, {0.0}, {0.1}, 4.0, 0.4).final_state()[0] - logistic(4.0));
  const double e2 = std::fabs(integrate_lv(s, {0.0}, {0.1}, 4.0, 0.2).final_state()[0] - logistic(4.0));
  const double ratio = e1 / e2;
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {cead_err <= 1e-6 && lv_err <= 1e-6 && ratio >= 12.0 && secs < 5.0,
          "CEAD endpoint error " + fmt("%.2e", cead_err) + ", logistic error " + fmt("%.2e", lv_err) +
              ", RK4 halving ratio " + fmt("%.2f", ratio) + ", " + fmt("%.3f", secs) + " s"};
}

// ---- 6: KR metric ----
Outcome criterion6() {
  const auto t0 = Clock::now();
  std::mt19937_64 g(606);
  std::uniform_real_distribution<double> pos(0.0, 1.0), w(-1.0, 1.0), far(-3.0, 3.0);
  std::uniform_int_distribution<int> natoms(1, 5);
  double worst_lp = 0.0;
  for (int i = 0; i < 500; ++i) {
    std::vector<std::pair<double, double>> atoms;
    const int n = natoms(g);
    for (int a = 0; a < n; ++a) atoms.emplace_back(pos(g), w(g));
    const SignedAtomicMeasure mu(atoms);
    worst_lp = std::max(worst_lp, std::fabs(kr_norm(mu) - kr_bruteforce(mu)));
  }
  double worst_dirac = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = far(g), y = far(g);
    worst_dirac = std::max(worst_dirac, std::fabs(kr_distance(SignedAtomicMeasure::dirac(x), SignedAtomicMeasure::dirac(y)) -
                                                  std::min(std::fabs(x - y), 2.0)));
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {worst_lp <= 5e-3 && worst_dirac <= 1e-9 && secs < 30.0,
          "LP vs grid oracle max " + fmt("%.2e", worst_lp) + " on 500 measures, Dirac pairs max " +
              fmt("%.2e", worst_dirac) + ", " + fmt("%.2f", secs) + " s"};
}

// ---- 7: IBM micro-laws ----
Outcome criterion7(Context& ctx) {
  const auto t0 = Clock::now();
  // conservation and cache coherence on full runs with mutation
  ModelSpec s = linear_birth_spec();
  s.scaling = {300, 1e-4, 0.1, 0.1};
  bool conserved = true;
  double resync = 0.0;
  for (std::uint64_t r = 0; r < 20; ++r) {
    Rng rng(stream_seed(707, r));
    const Trajectory tr = run(s, RunOptions{}, rng);
    conserved = conserved && tr.initial_count + static_cast<std::int64_t>(tr.clonal_births + tr.mutant_births) -
                                     static_cast<std::int64_t>(tr.deaths) ==
                                 tr.final_count;
    resync = std::max(resync, tr.max_resync_deviation);
  }
  double secs = 0.0;
  const ExperimentReport rep = run_plan(ctx, "invasion_k1000.json", "first", &secs);
  const ReportRow& row = rep.rows.at(0);
  const double p = row.oracle_prob;
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(row.trials));
  const double z = std::fabs(row.success_rate.mean - p) / se;
  const double total = std::chrono::duration<double>(Clock::now() - t0).count();
  return {conserved && resync <= 1e-9 && z <= 3.0 && row.trials >= 100000 && total < 300.0,
          std::string("conservation ") + (conserved ? "exact" : "BROKEN") + " on 20 runs, max resync deviation " +
              fmt("%.2e", resync) + ", invasion rate " + fmt("%.5f", row.success_rate.mean) + " vs oracle " +
              fmt("%.5f", p) + " (|z| " + fmt("%.2f", z) + ", " + std::to_string(row.trials) + " trials), " +
              fmt("%.1f", total) + " s"};
}

// ---- 8: invasion probability is of order sigma ----
Outcome criterion8(Context& ctx) {
  double secs = 0.0;
  const ExperimentReport rep = run_plan(ctx, "invasion_order_sigma.json", "first", &secs);
  const double big = rep.rows.at(0).success_rate.mean;
  const double small = rep.rows.at(1).success_rate.mean;
  const double ratio = small / big;
  return {ratio >= 0.35 && ratio <= 0.65 && secs < 300.0,
          "rate " + fmt("%.4f", big) + " at sigma " + fmt("%g", rep.rows[0].scaling.sigma) + ", " +
              fmt("%.4f", small) + " at sigma " + fmt("%g", rep.rows[1].scaling.sigma) + ", ratio " +
              fmt("%.3f", ratio) + " (band [0.35, 0.65]), " + fmt("%.1f", secs) + " s"};
}

std::string distance_list(const ExperimentReport& rep) {
  std::string s;
  for (const auto& r : rep.rows) s += (s.empty() ? "" : ", ") + fmt("%.4f", r.distance.mean);
  return s;
}

bool strictly_decreasing(const ExperimentReport& rep) {
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (!(rep.rows[i].distance.mean < rep.rows[i - 1].distance.mean)) return false;
  return rep.rows.size() >= 2;
}

// ---- 9: TSS approaches CEAD ----
Outcome criterion9(Context& ctx) {
  double secs = 0.0;
  const ExperimentReport rep = run_plan(ctx, "tss_cead.json", "first", &secs);
  const bool dec = strictly_decreasing(rep);
  const double last = rep.rows.back().distance.mean;
  return {dec && last <= 0.05 && !rep.failed && secs < 60.0,
          "mean sup distance by sigma " + distance_list(rep) + (dec ? " (decreasing)" : " (NOT decreasing)") +
              ", smallest-sigma limit 0.05, " + fmt("%.1f", secs) + " s"};
}

// ---- 10: IBM approaches CEAD ----
Outcome criterion10(Context& ctx) {
  double secs = 0.0;
  const ExperimentReport rep = run_plan(ctx, "ibm_cead.json", "first", &secs);
  const bool dec = strictly_decreasing(rep);
  const double first = rep.rows.front().distance.mean;
  const double last = rep.rows.back().distance.mean;
  return {dec && last <= 0.7 * first && !rep.failed && rep.all_conserved && secs < 900.0,
          "mean sup-KR distance by K " + distance_list(rep) + (dec ? " (decreasing)" : " (NOT decreasing)") +
              ", last/first " + fmt("%.3f", last / first) + " (limit 0.7), " + fmt("%.1f", secs) + " s"};
}

// ---- 11: determinism ----
Outcome criterion11(Context& ctx) {
  const auto first = ctx.files;
  if (first.empty()) return {false, "criteria 7-10 were not run"};
  int compared = 0, differing = 0;
  for (const auto& [plan, files] : first) {
    double secs = 0.0;
    run_plan(ctx, plan, "second", &secs);
    const auto& again = ctx.files[plan];
    for (const auto& [name, bytes] : files) {
      if (name.find(".timing.") != std::string::npos) continue;
      ++compared;
      const auto it = again.find(name);
      if (it == again.end() || it->second != bytes) ++differing;
    }
    ctx.files[plan] = files;
  }
  return {differing == 0 && compared > 0,
          std::to_string(compared) + " report files compared after rerun, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eadlab acceptance suite"};
  Context ctx;
  std::string config_dir = EADLAB_CONFIG_DIR;
  std::string out_dir = (fs::temp_directory_path() / "eadlab_acceptance").string();
  std::vector<int> only;
  app.add_option("--config-dir", config_dir, "directory holding the experiment plans");
  app.add_option("--out", out_dir, "directory for the emitted reports");
  app.add_option("--workers", ctx.workers, "worker threads (0 = automatic)");
  app.add_option("criteria", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);
  ctx.config_dir = config_dir;
  ctx.out_dir = out_dir;
  fs::remove_all(ctx.out_dir);

  const std::vector<std::function<Outcome()>> all = {
      criterion1,
      criterion2,
      criterion3,
      criterion4,
      criterion5,
      criterion6,
      [&] { return criterion7(ctx); },
      [&] { return criterion8(ctx); },
      [&] { return criterion9(ctx); },
      [&] { return criterion10(ctx); },
      [&] { return criterion11(ctx); },
  };
  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(n)) continue;
    Outcome o;
    try {
      o = all[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
