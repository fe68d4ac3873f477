#include "eadlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "eadlab/analytic.hpp"
#include "eadlab/error.hpp"
#include "eadlab/ibm.hpp"
#include "eadlab/metrics.hpp"
#include "eadlab/ode.hpp"
#include "eadlab/oracles.hpp"
#include "eadlab/rng.hpp"
#include "eadlab/tss.hpp"

namespace eadlab {

using json = nlohmann::json;

const char* to_string(PlanKind k) {
  switch (k) {
    case PlanKind::IbmCead: return "ibm-cead";
    case PlanKind::TssCead: return "tss-cead";
    case PlanKind::InvasionMc: return "invasion-mc";
    case PlanKind::OracleSuite: return "oracle-suite";
  }
  return "?";
}

PlanKind plan_kind_from_string(const std::string& s) {
  for (auto k : {PlanKind::IbmCead, PlanKind::TssCead, PlanKind::InvasionMc, PlanKind::OracleSuite})
    if (s == to_string(k)) return k;
  throw PreconditionError("unknown experiment kind '" + s + "'");
}

void ExperimentPlan::check() const {
  if (schedule.empty()) throw PreconditionError("plan: empty schedule");
  if (replicates < 1) throw PreconditionError("plan: replicates must be >= 1");
  if (!(horizon > 0.0)) throw PreconditionError("plan: horizon must be > 0");
  if (!(epsilon > 0.0)) throw PreconditionError("plan: epsilon must be > 0");
  if (grid_points < 2) throw PreconditionError("plan: grid_points must be >= 2");
  if (!(cead_dt > 0.0)) throw PreconditionError("plan: cead_dt must be > 0");
  if ((kind == PlanKind::InvasionMc || kind == PlanKind::OracleSuite) && trials < replicates)
    throw PreconditionError("plan: trials must be >= replicates");
  if (!(slack >= 0.0)) throw PreconditionError("plan: slack must be >= 0");
  if (name.empty() || name.find_first_of("/\\") != std::string::npos)
    throw PreconditionError("plan: name must be a non-empty file stem");
}

Stat make_stat(const std::vector<double>& values) {
  Stat s;
  s.n = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    s.se = s.sd / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

bool operator==(const Stat& a, const Stat& b) {
  return a.mean == b.mean && a.sd == b.sd && a.se == b.se && a.n == b.n;
}
bool operator==(const ScalingTriple& a, const ScalingTriple& b) {
  return a.K == b.K && a.u == b.u && a.sigma == b.sigma && a.alpha == b.alpha;
}
bool operator==(const ScalingReport& a, const ScalingReport& b) {
  return a.r1 == b.r1 && a.r2 == b.r2 && a.r3 == b.r3 && a.r4 == b.r4 && a.margin1 == b.margin1 &&
         a.margin2 == b.margin2 && a.regime_consistent == b.regime_consistent && a.violations == b.violations;
}
bool operator==(const ReplicateResult& a, const ReplicateResult& b) {
  return a.replicate == b.replicate && a.seed == b.seed && a.status == b.status && a.distance == b.distance &&
         a.endpoint_trait == b.endpoint_trait && a.invasions == b.invasions && a.events == b.events &&
         a.trials == b.trials && a.conserved == b.conserved && a.resync_deviation == b.resync_deviation;
}
bool operator==(const ReportRow& a, const ReportRow& b) {
  return a.index == b.index && a.scaling == b.scaling && a.regime == b.regime && a.replicates == b.replicates &&
         a.completed == b.completed && a.aborted == b.aborted && a.distance == b.distance &&
         a.endpoint_trait == b.endpoint_trait && a.cead_endpoint == b.cead_endpoint && a.invasions == b.invasions &&
         a.events == b.events && a.trials == b.trials && a.successes == b.successes &&
         a.success_rate == b.success_rate && a.oracle_prob == b.oracle_prob && a.band_lo == b.band_lo &&
         a.band_hi == b.band_hi && a.first_order == b.first_order && a.replicate_results == b.replicate_results;
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("EADLAB_WORKERS")) {
    unsigned v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    auto [p, ec] = std::from_chars(env, end, v);
    if (ec == std::errc() && p == end && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Runs task(i) for i in [0, n) on up to `workers` threads. Results are
// written by index, so the outcome is independent of scheduling.
template <class F>
void parallel_for(std::size_t n, unsigned workers, F&& task) {
  const std::size_t threads = std::min<std::size_t>(std::max(1u, workers), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr first_error;
  std::size_t first_index = n;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < first_index) {
          first_index = i;
          first_error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

using Clock = std::chrono::steady_clock;

ModelSpec spec_at(const ExperimentPlan& plan, const ScalingTriple& t) {
  ModelSpec spec = plan.spec;
  spec.scaling = t;
  return spec;
}

ValidationReport require_valid(const ModelSpec& spec, std::size_t index) {
  ValidationReport rep = validate_model(spec);
  if (!rep.passed()) {
    for (const auto& c : rep.checks)
      if (!c.passed)
        throw PreconditionError("schedule point " + std::to_string(index) + ": model check '" + c.name +
                                "' failed: " + c.detail);
  }
  return rep;
}

std::uint64_t split_trials(std::uint64_t trials, std::uint64_t parts, std::uint64_t r) {
  return trials / parts + (r < trials % parts ? 1 : 0);
}

void summarize(ReportRow& row) {
  std::vector<double> dist, endp, inv, ev;
  for (const auto& r : row.replicate_results) {
    if (r.status != "ok") {
      ++row.aborted;
      continue;
    }
    ++row.completed;
    dist.push_back(r.distance);
    endp.push_back(r.endpoint_trait);
    inv.push_back(r.invasions);
    ev.push_back(static_cast<double>(r.events));
  }
  row.distance = make_stat(dist);
  row.endpoint_trait = make_stat(endp);
  row.invasions = make_stat(inv);
  row.events = make_stat(ev);
}

void finish(ExperimentReport& rep, const ExperimentPlan& plan) {
  for (const auto& row : rep.rows) {
    for (const auto& r : row.replicate_results) {
      rep.all_conserved = rep.all_conserved && r.conserved;
      rep.max_resync_deviation = std::max(rep.max_resync_deviation, r.resync_deviation);
    }
    if (!rep.failed && 2 * row.aborted > row.replicates) {
      rep.failed = true;
      rep.failure = "schedule point " + std::to_string(row.index) + ": " + std::to_string(row.aborted) + " of " +
                    std::to_string(row.replicates) + " replicates aborted";
    }
  }
  // order of the trend check: increasing K for ibm-cead, decreasing sigma otherwise
  std::vector<const ReportRow*> order;
  for (const auto& row : rep.rows) order.push_back(&row);
  std::stable_sort(order.begin(), order.end(), [&](const ReportRow* a, const ReportRow* b) {
    if (plan.kind == PlanKind::IbmCead) return a->scaling.K < b->scaling.K;
    return a->scaling.sigma > b->scaling.sigma;
  });
  auto value = [&](const ReportRow* r) {
    return plan.kind == PlanKind::InvasionMc ? r->success_rate.mean : r->distance.mean;
  };
  rep.monotone_decreasing = order.size() >= 2;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i]->completed == 0 && plan.kind != PlanKind::InvasionMc) rep.monotone_decreasing = false;
    if (i > 0 && !(value(order[i]) < value(order[i - 1]))) rep.monotone_decreasing = false;
  }
}

ExperimentReport start_report(const ExperimentPlan& plan, PlanKind expected) {
  plan.check();
  if (plan.kind != expected)
    throw PreconditionError(std::string("plan kind is ") + to_string(plan.kind) + ", expected " +
                            to_string(expected));
  ExperimentReport rep;
  rep.name = plan.name;
  rep.kind = plan.kind;
  rep.master_seed = plan.master_seed;
  return rep;
}

ReportRow start_row(const ExperimentPlan& plan, std::size_t i) {
  ReportRow row;
  row.index = i;
  row.scaling = plan.schedule[i];
  row.scaling.check();
  row.replicates = plan.replicates;
  if (row.scaling.sigma > 0.0) row.regime = validate_scaling(row.scaling, plan.margins);
  row.replicate_results.resize(plan.replicates);
  return row;
}

// Branching-oracle quantities for a mutant at x0 + sigma h.
void fill_invasion_oracle(ReportRow& row, const ModelSpec& spec, const ExperimentPlan& plan,
                          std::int64_t threshold) {
  const double x = spec.x0;
  const double sigma = spec.scaling.sigma;
  const double y = x + sigma * plan.h;
  const double zbar = equilibrium_mass(spec, x);
  const double b = spec.b(y);
  const double d = spec.d(y);
  const double cyx = spec.c(y, x);
  const double slack = cyx * plan.slack * plan.epsilon * sigma;
  row.oracle_prob = oracles::bd_hitting_prob({b, d + cyx * zbar}, 1, threshold);
  row.band_lo = oracles::bd_hitting_prob({b, d + cyx * zbar + slack}, 1, threshold);
  row.band_hi = oracles::bd_hitting_prob({b, std::max(0.0, d + cyx * zbar - slack)}, 1, threshold);
  row.first_order = invasion_prob_first_order(spec, x, plan.h) * sigma;
}

std::int64_t invasion_threshold(const ExperimentPlan& plan, const ScalingTriple& t) {
  return std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(plan.epsilon * t.sigma * static_cast<double>(t.K))));
}

}  // namespace

ExperimentReport run_ibm_cead(const ExperimentPlan& plan, unsigned workers, Timing* timing) {
  ExperimentReport rep = start_report(plan, PlanKind::IbmCead);
  workers = resolve_workers(workers);
  for (std::size_t i = 0; i < plan.schedule.size(); ++i) {
    const auto t0 = Clock::now();
    ReportRow row = start_row(plan, i);
    const ModelSpec spec = spec_at(plan, row.scaling);
    const ValidationReport vr = require_valid(spec, i);
    const OdeSolution cead = integrate_cead(spec, spec.x0, plan.horizon, plan.cead_dt);
    row.cead_endpoint = cead.final_state()[0];
    RunOptions opts;
    opts.horizon = plan.horizon;
    opts.grid_points = plan.grid_points;
    opts.epsilon = plan.epsilon;
    opts.mass_cap = vr.mass_cap();

    parallel_for(plan.replicates, workers, [&](std::size_t r) {
      ReplicateResult& out = row.replicate_results[r];
      out.replicate = r;
      out.seed = stream_seed(plan.master_seed, r, i);
      Rng rng(out.seed);
      try {
        const Trajectory tr = run(spec, opts, rng);
        out.events = tr.events();
        out.conserved = tr.initial_count + static_cast<std::int64_t>(tr.clonal_births + tr.mutant_births) -
                            static_cast<std::int64_t>(tr.deaths) ==
                        tr.final_count;
        out.resync_deviation = tr.max_resync_deviation;
        out.invasions = static_cast<double>(tr.invasions.size());
        if (!tr.samples.empty()) out.endpoint_trait = tr.samples.back().mean_trait;
        switch (tr.status) {
          case RunStatus::Horizon:
            out.status = "ok";
            out.distance = traj_sup_distance(tr, cead, spec);
            break;
          case RunStatus::Extinct: out.status = "extinct"; break;
          case RunStatus::MassBlowup: out.status = "blowup"; break;
        }
      } catch (const DomainError&) {
        out.status = "domain-error";
      }
    });
    summarize(row);
    rep.rows.push_back(std::move(row));
    if (timing) timing->seconds.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
  }
  finish(rep, plan);
  return rep;
}

ExperimentReport run_tss_cead(const ExperimentPlan& plan, unsigned workers, Timing* timing) {
  ExperimentReport rep = start_report(plan, PlanKind::TssCead);
  workers = resolve_workers(workers);
  for (std::size_t i = 0; i < plan.schedule.size(); ++i) {
    const auto t0 = Clock::now();
    ReportRow row = start_row(plan, i);
    const double sigma = row.scaling.sigma;
    if (!(sigma > 0.0)) throw PreconditionError("tss-cead: sigma must be > 0");
    const ModelSpec spec = spec_at(plan, row.scaling);
    const OdeSolution cead = integrate_cead(spec, spec.x0, plan.horizon, plan.cead_dt);
    row.cead_endpoint = cead.final_state()[0];
    std::vector<double> grid(plan.grid_points);
    std::vector<double> ref(plan.grid_points);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      grid[k] = plan.horizon * static_cast<double>(k) / static_cast<double>(grid.size() - 1);
      ref[k] = cead.interpolate(grid[k]);
    }

    parallel_for(plan.replicates, workers, [&](std::size_t r) {
      ReplicateResult& out = row.replicate_results[r];
      out.replicate = r;
      out.seed = stream_seed(plan.master_seed, r, i);
      Rng rng(out.seed);
      try {
        const JumpPath path =
            rescaled_tss_path(simulate_tss(spec, spec.x0, sigma, plan.horizon / (sigma * sigma), rng));
        double sup = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) sup = std::max(sup, std::fabs(path.value_at(grid[k]) - ref[k]));
        out.status = "ok";
        out.distance = sup;
        out.endpoint_trait = path.value_at(plan.horizon);
        out.invasions = static_cast<double>(path.jumps());
        out.events = path.jumps();
      } catch (const DomainError&) {
        out.status = "domain-error";
      }
    });
    summarize(row);
    rep.rows.push_back(std::move(row));
    if (timing) timing->seconds.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
  }
  finish(rep, plan);
  return rep;
}

ExperimentReport run_invasion_mc(const ExperimentPlan& plan, unsigned workers, Timing* timing) {
  ExperimentReport rep = start_report(plan, PlanKind::InvasionMc);
  workers = resolve_workers(workers);
  for (std::size_t i = 0; i < plan.schedule.size(); ++i) {
    const auto t0 = Clock::now();
    ReportRow row = start_row(plan, i);
    const ModelSpec spec = spec_at(plan, row.scaling);
    require_valid(spec, i);
    const double x = spec.x0;
    const double y = x + row.scaling.sigma * plan.h;
    if (!spec.space.contains(y)) throw PreconditionError("invasion-mc: mutant trait x0 + sigma h outside X");
    const std::int64_t threshold = invasion_threshold(plan, row.scaling);
    fill_invasion_oracle(row, spec, plan, threshold);

    parallel_for(plan.replicates, workers, [&](std::size_t r) {
      ReplicateResult& out = row.replicate_results[r];
      out.replicate = r;
      out.seed = stream_seed(plan.master_seed, r, i);
      out.trials = split_trials(plan.trials, plan.replicates, r);
      Rng rng(out.seed);
      try {
        std::uint64_t hits = 0;
        for (std::uint64_t k = 0; k < out.trials; ++k) {
          const MutantTrial trial = simulate_single_mutant(spec, x, y, threshold, rng);
          hits += trial.invaded ? 1 : 0;
          out.events += trial.events;
        }
        out.status = "ok";
        out.invasions = static_cast<double>(hits);
        out.distance = std::fabs(static_cast<double>(hits) / static_cast<double>(out.trials) - row.oracle_prob);
      } catch (const DomainError&) {
        out.status = "domain-error";
      }
    });
    summarize(row);
    for (const auto& r : row.replicate_results) {
      if (r.status != "ok") continue;
      row.trials += r.trials;
      row.successes += static_cast<std::uint64_t>(r.invasions);
    }
    const auto est = oracles::binomial_estimate(row.successes, row.trials);
    row.success_rate = {est.mean, std::sqrt(est.mean * (1.0 - est.mean)), est.se, est.trials};
    rep.rows.push_back(std::move(row));
    if (timing) timing->seconds.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
  }
  finish(rep, plan);
  return rep;
}

ExperimentReport run_oracle_suite(const ExperimentPlan& plan, unsigned workers, Timing* timing) {
  ExperimentReport rep = start_report(plan, PlanKind::OracleSuite);
  workers = resolve_workers(workers);
  for (std::size_t i = 0; i < plan.schedule.size(); ++i) {
    const auto t0 = Clock::now();
    ReportRow row = start_row(plan, i);
    const ModelSpec spec = spec_at(plan, row.scaling);
    require_valid(spec, i);
    const std::int64_t threshold = invasion_threshold(plan, row.scaling);
    fill_invasion_oracle(row, spec, plan, threshold);
    const double x = spec.x0;
    const double y = x + row.scaling.sigma * plan.h;
    const oracles::BranchingParams bp{spec.b(y), spec.d(y) + spec.c(y, x) * equilibrium_mass(spec, x)};

    parallel_for(plan.replicates, workers, [&](std::size_t r) {
      ReplicateResult& out = row.replicate_results[r];
      out.replicate = r;
      out.seed = stream_seed(plan.master_seed, r, i);
      out.trials = split_trials(plan.trials, plan.replicates, r);
      Rng rng(out.seed);
      const auto mc = oracles::mc_birth_death(bp, 1, {0, threshold}, rng, out.trials);
      out.status = "ok";
      out.invasions = std::round(mc.hit_hi.mean * static_cast<double>(out.trials));
      out.distance = std::fabs(mc.hit_hi.mean - row.oracle_prob);
      out.endpoint_trait = mc.absorption_time.mean;
    });
    summarize(row);
    for (const auto& r : row.replicate_results) {
      row.trials += r.trials;
      row.successes += static_cast<std::uint64_t>(r.invasions);
    }
    const auto est = oracles::binomial_estimate(row.successes, row.trials);
    row.success_rate = {est.mean, std::sqrt(est.mean * (1.0 - est.mean)), est.se, est.trials};
    rep.rows.push_back(std::move(row));
    if (timing) timing->seconds.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
  }
  finish(rep, plan);
  return rep;
}

ExperimentReport run_experiment(const ExperimentPlan& plan, unsigned workers, Timing* timing) {
  switch (plan.kind) {
    case PlanKind::IbmCead: return run_ibm_cead(plan, workers, timing);
    case PlanKind::TssCead: return run_tss_cead(plan, workers, timing);
    case PlanKind::InvasionMc: return run_invasion_mc(plan, workers, timing);
    case PlanKind::OracleSuite: return run_oracle_suite(plan, workers, timing);
  }
  throw PreconditionError("unknown plan kind");
}

// ---- output ----

const char* to_string(Format f) {
  switch (f) {
    case Format::Csv: return "csv";
    case Format::Json: return "json";
    case Format::Svg: return "svg";
  }
  return "?";
}

Format format_from_string(const std::string& s) {
  for (auto f : {Format::Csv, Format::Json, Format::Svg})
    if (s == to_string(f)) return f;
  throw PreconditionError("unknown format '" + s + "' (expected csv, json or svg)");
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

const std::string& summary_csv_header() {
  static const std::string h =
      "index,K,u,sigma,alpha,r1,r2,r3,r4,regime_consistent,replicates,completed,aborted,"
      "distance_mean,distance_sd,distance_se,endpoint_mean,endpoint_sd,endpoint_se,cead_endpoint,"
      "invasions_mean,invasions_se,events_mean,events_se,trials,successes,success_rate,success_se,"
      "oracle_prob,band_lo,band_hi,first_order";
  return h;
}

const std::string& replicate_csv_header() {
  static const std::string h =
      "replicate,seed,status,distance,endpoint_trait,invasions,events,trials,conserved,resync_deviation";
  return h;
}

std::string summary_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << summary_csv_header() << '\n';
  auto n = [](double v) { return format_number(v); };
  for (const auto& row : r.rows) {
    os << row.index << ',' << row.scaling.K << ',' << n(row.scaling.u) << ',' << n(row.scaling.sigma) << ','
       << n(row.scaling.alpha) << ',' << n(row.regime.r1) << ',' << n(row.regime.r2) << ',' << n(row.regime.r3)
       << ',' << n(row.regime.r4) << ',' << (row.regime.regime_consistent ? 1 : 0) << ',' << row.replicates << ','
       << row.completed << ',' << row.aborted << ',' << n(row.distance.mean) << ',' << n(row.distance.sd) << ','
       << n(row.distance.se) << ',' << n(row.endpoint_trait.mean) << ',' << n(row.endpoint_trait.sd) << ','
       << n(row.endpoint_trait.se) << ',' << n(row.cead_endpoint) << ',' << n(row.invasions.mean) << ','
       << n(row.invasions.se) << ',' << n(row.events.mean) << ',' << n(row.events.se) << ',' << row.trials << ','
       << row.successes << ',' << n(row.success_rate.mean) << ',' << n(row.success_rate.se) << ','
       << n(row.oracle_prob) << ',' << n(row.band_lo) << ',' << n(row.band_hi) << ',' << n(row.first_order)
       << '\n';
  }
  return os.str();
}

std::string replicate_csv(const ReportRow& row) {
  std::ostringstream os;
  os << replicate_csv_header() << '\n';
  for (const auto& r : row.replicate_results) {
    os << r.replicate << ',' << r.seed << ',' << r.status << ',' << format_number(r.distance) << ','
       << format_number(r.endpoint_trait) << ',' << format_number(r.invasions) << ',' << r.events << ','
       << r.trials << ',' << (r.conserved ? 1 : 0) << ',' << format_number(r.resync_deviation) << '\n';
  }
  return os.str();
}

namespace {

json stat_json(const Stat& s) { return {{"mean", s.mean}, {"sd", s.sd}, {"se", s.se}, {"n", s.n}}; }

Stat stat_from(const json& j) {
  return {j.at("mean").get<double>(), j.at("sd").get<double>(), j.at("se").get<double>(),
          j.at("n").get<std::uint64_t>()};
}

json to_json(const ReportRow& row) {
  json reps = json::array();
  for (const auto& r : row.replicate_results) {
    reps.push_back({{"replicate", r.replicate},
                    {"seed", r.seed},
                    {"status", r.status},
                    {"distance", r.distance},
                    {"endpoint_trait", r.endpoint_trait},
                    {"invasions", r.invasions},
                    {"events", r.events},
                    {"trials", r.trials},
                    {"conserved", r.conserved},
                    {"resync_deviation", r.resync_deviation}});
  }
  return {
      {"index", row.index},
      {"scaling", {{"K", row.scaling.K}, {"u", row.scaling.u}, {"sigma", row.scaling.sigma},
                   {"alpha", row.scaling.alpha}}},
      {"regime", {{"r1", row.regime.r1}, {"r2", row.regime.r2}, {"r3", row.regime.r3}, {"r4", row.regime.r4},
                  {"margin1", row.regime.margin1}, {"margin2", row.regime.margin2},
                  {"regime_consistent", row.regime.regime_consistent}, {"violations", row.regime.violations}}},
      {"replicates", row.replicates},
      {"completed", row.completed},
      {"aborted", row.aborted},
      {"distance", stat_json(row.distance)},
      {"endpoint_trait", stat_json(row.endpoint_trait)},
      {"cead_endpoint", row.cead_endpoint},
      {"invasions", stat_json(row.invasions)},
      {"events", stat_json(row.events)},
      {"trials", row.trials},
      {"successes", row.successes},
      {"success_rate", stat_json(row.success_rate)},
      {"oracle_prob", row.oracle_prob},
      {"band_lo", row.band_lo},
      {"band_hi", row.band_hi},
      {"first_order", row.first_order},
      {"replicate_results", std::move(reps)},
  };
}

ReportRow row_from(const json& j) {
  ReportRow row;
  row.index = j.at("index").get<std::size_t>();
  const auto& s = j.at("scaling");
  row.scaling = {s.at("K").get<std::int64_t>(), s.at("u").get<double>(), s.at("sigma").get<double>(),
                 s.at("alpha").get<double>()};
  const auto& g = j.at("regime");
  row.regime.r1 = g.at("r1").get<double>();
  row.regime.r2 = g.at("r2").get<double>();
  row.regime.r3 = g.at("r3").get<double>();
  row.regime.r4 = g.at("r4").get<double>();
  row.regime.margin1 = g.at("margin1").get<double>();
  row.regime.margin2 = g.at("margin2").get<double>();
  row.regime.regime_consistent = g.at("regime_consistent").get<bool>();
  row.regime.violations = g.at("violations").get<std::vector<std::string>>();
  row.replicates = j.at("replicates").get<std::uint64_t>();
  row.completed = j.at("completed").get<std::uint64_t>();
  row.aborted = j.at("aborted").get<std::uint64_t>();
  row.distance = stat_from(j.at("distance"));
  row.endpoint_trait = stat_from(j.at("endpoint_trait"));
  row.cead_endpoint = j.at("cead_endpoint").get<double>();
  row.invasions = stat_from(j.at("invasions"));
  row.events = stat_from(j.at("events"));
  row.trials = j.at("trials").get<std::uint64_t>();
  row.successes = j.at("successes").get<std::uint64_t>();
  row.success_rate = stat_from(j.at("success_rate"));
  row.oracle_prob = j.at("oracle_prob").get<double>();
  row.band_lo = j.at("band_lo").get<double>();
  row.band_hi = j.at("band_hi").get<double>();
  row.first_order = j.at("first_order").get<double>();
  for (const auto& r : j.at("replicate_results")) {
    ReplicateResult rr;
    rr.replicate = r.at("replicate").get<std::uint64_t>();
    rr.seed = r.at("seed").get<std::uint64_t>();
    rr.status = r.at("status").get<std::string>();
    rr.distance = r.at("distance").get<double>();
    rr.endpoint_trait = r.at("endpoint_trait").get<double>();
    rr.invasions = r.at("invasions").get<double>();
    rr.events = r.at("events").get<std::uint64_t>();
    rr.trials = r.at("trials").get<std::uint64_t>();
    rr.conserved = r.at("conserved").get<bool>();
    rr.resync_deviation = r.at("resync_deviation").get<double>();
    row.replicate_results.push_back(std::move(rr));
  }
  return row;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string row_json(const ReportRow& row) { return to_json(row).dump(2) + "\n"; }

std::string report_json(const ExperimentReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) rows.push_back(to_json(row));
  json j = {{"name", r.name},
            {"kind", to_string(r.kind)},
            {"master_seed", r.master_seed},
            {"monotone_decreasing", r.monotone_decreasing},
            {"all_conserved", r.all_conserved},
            {"max_resync_deviation", r.max_resync_deviation},
            {"failed", r.failed},
            {"failure", r.failure},
            {"rows", std::move(rows)}};
  return j.dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.byte, e.what());
  }
  try {
    ExperimentReport r;
    r.name = j.at("name").get<std::string>();
    r.kind = plan_kind_from_string(j.at("kind").get<std::string>());
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    r.monotone_decreasing = j.at("monotone_decreasing").get<bool>();
    r.all_conserved = j.at("all_conserved").get<bool>();
    r.max_resync_deviation = j.at("max_resync_deviation").get<double>();
    r.failed = j.at("failed").get<bool>();
    r.failure = j.at("failure").get<std::string>();
    for (const auto& row : j.at("rows")) r.rows.push_back(row_from(row));
    return r;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("report: ") + e.what());
  }
}

std::string report_svg(const ExperimentReport& r) {
  const bool by_k = r.kind == PlanKind::IbmCead;
  const bool rate = r.kind == PlanKind::InvasionMc || r.kind == PlanKind::OracleSuite;
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : r.rows) {
    const double xv = by_k ? static_cast<double>(row.scaling.K) : row.scaling.sigma;
    const double yv = rate ? row.success_rate.mean : row.distance.mean;
    if (xv > 0.0 && yv > 0.0) pts.emplace_back(std::log10(xv), std::log10(yv));
  }
  std::sort(pts.begin(), pts.end());
  constexpr double W = 480, H = 320, L = 70, R = 20, T = 30, B = 50;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!pts.empty()) {
    x0 = x1 = pts[0].first;
    y0 = y1 = pts[0].second;
    for (const auto& [a, b] : pts) {
      x0 = std::min(x0, a);
      x1 = std::max(x1, a);
      y0 = std::min(y0, b);
      y1 = std::max(y1, b);
    }
  }
  if (x1 - x0 < 1e-9) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 < 1e-9) { y0 -= 0.5; y1 += 0.5; }
  auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
     << W << ' ' << H << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
     << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(r.name)
     << " (" << to_string(r.kind) << ")</text>\n"
     << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
     << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"12\">log10 "
     << (by_k ? "K" : "sigma") << "</text>\n"
     << "<text x=\"15\" y=\"" << (T + H - B) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 15 " << (T + H - B) / 2
     << ")\" text-anchor=\"middle\">log10 " << (rate ? "success rate" : "mean distance") << "</text>\n";
  for (double v : {x0, x1})
    os << "<text x=\"" << px(v) << "\" y=\"" << H - B + 15 << "\" text-anchor=\"middle\" font-size=\"10\">"
       << format_number(std::round(v * 1000) / 1000) << "</text>\n";
  for (double v : {y0, y1})
    os << "<text x=\"" << L - 5 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\" font-size=\"10\">"
       << format_number(std::round(v * 1000) / 1000) << "</text>\n";
  if (!pts.empty()) {
    os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      os << (i ? " " : "") << px(pts[i].first) << ',' << py(pts[i].second);
    os << "\"/>\n";
    for (const auto& [a, b] : pts)
      os << "<circle cx=\"" << px(a) << "\" cy=\"" << py(b) << "\" r=\"3\" fill=\"steelblue\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw Error("write to " + path.string() + " failed");
}

std::vector<std::filesystem::path> emit(const ExperimentReport& r, const std::filesystem::path& dir, Format f) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> out;
  auto put = [&](const std::string& file, const std::string& text) {
    out.push_back(dir / file);
    write_file(out.back(), text);
  };
  switch (f) {
    case Format::Csv:
      put(r.name + ".summary.csv", summary_csv(r));
      for (const auto& row : r.rows) put(r.name + "." + std::to_string(row.index) + ".csv", replicate_csv(row));
      break;
    case Format::Json:
      put(r.name + ".summary.json", report_json(r));
      for (const auto& row : r.rows) put(r.name + "." + std::to_string(row.index) + ".json", row_json(row));
      break;
    case Format::Svg:
      put(r.name + ".svg", report_svg(r));
      break;
  }
  return out;
}

std::filesystem::path emit_timing(const ExperimentReport& r, const Timing& t, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory " + dir.string() + ": " + ec.message());
  const auto path = dir / (r.name + ".timing.json");
  write_file(path, json{{"name", r.name}, {"seconds", t.seconds}}.dump(2) + "\n");
  return path;
}

}  // namespace eadlab
