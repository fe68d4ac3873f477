#include "eadlab/ibm.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "eadlab/analytic.hpp"
#include "eadlab/error.hpp"

namespace eadlab {

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::ClonalBirth:
      return "clonal-birth";
    case EventKind::MutantBirth:
      return "mutant-birth";
    case EventKind::Death:
      return "death";
  }
  return "?";
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Horizon:
      return "horizon";
    case RunStatus::Extinct:
      return "extinct";
    case RunStatus::MassBlowup:
      return "mass-blowup";
  }
  return "?";
}

PopulationState::PopulationState(ModelSpec spec)
    : spec_(std::move(spec)), inv_K_(1.0 / static_cast<double>(spec_.scaling.K)) {
  if (spec_.scaling.K < 1) throw PreconditionError("PopulationState: K must be >= 1");
}

void PopulationState::add_atom(std::uint64_t label, double trait, std::int64_t count) {
  if (count < 1) throw PreconditionError("add_atom: count must be >= 1");
  Atom a;
  a.label = label;
  a.trait = trait;
  a.count = count;
  a.birth = spec_.b(trait);
  a.death = spec_.d(trait);
  const double m = spec_.m(trait);
  const std::string where = " at trait " + std::to_string(trait);
  if (a.birth < 0.0 || a.death < 0.0) throw DomainError("negative rate" + where);
  if (m < 0.0 || m > 1.0) throw DomainError("m(x) outside [0,1]" + where);
  if (enforce_assumptions_) {
    if (!(a.birth - a.death > 0.0)) throw DomainError("b(x) - d(x) <= 0" + where);
    if (!(spec_.c(trait, trait) > 0.0)) throw DomainError("c(x,x) <= 0" + where);
  }
  // Mutations whose jump would leave X are dropped (the birth stays
  // clonal); the retained ones are drawn from the renormalized kernel.
  a.jumps = admissible_kernel_at(spec_, trait, spec_.scaling.sigma);
  a.mutant_share = a.jumps.empty() ? 0.0 : spec_.scaling.u * m * admissible_mass(spec_, trait, spec_.scaling.sigma);

  a.c_row.reserve(atoms_.size() + 1);
  for (const auto& other : atoms_) {
    const double v = spec_.c(trait, other.trait);
    if (v < 0.0) throw DomainError("negative competition" + where);
    a.c_row.push_back(v);
    a.competition += v * static_cast<double>(other.count);
  }
  const double self = spec_.c(trait, trait);
  if (self < 0.0) throw DomainError("negative competition" + where);
  a.c_row.push_back(self);
  a.competition += self * static_cast<double>(count);

  for (auto& other : atoms_) {
    const double v = spec_.c(other.trait, trait);
    if (v < 0.0) throw DomainError("negative competition" + where);
    other.c_row.push_back(v);
    other.competition += v * static_cast<double>(count);
  }
  atoms_.push_back(std::move(a));
  total_count_ += count;
}

double PopulationState::mean_trait() const {
  if (total_count_ == 0) return 0.0;
  double s = 0.0;
  for (const auto& a : atoms_) s += a.trait * static_cast<double>(a.count);
  return s / static_cast<double>(total_count_);
}

std::vector<AtomCount> PopulationState::snapshot() const {
  std::vector<AtomCount> out;
  out.reserve(atoms_.size());
  for (const auto& a : atoms_) out.push_back({a.label, a.trait, a.count});
  return out;
}

AtomRates PopulationState::rates_of(const Atom& a) const {
  const double n = static_cast<double>(a.count);
  const double births = a.birth * n;
  const double mutant = births * a.mutant_share;
  return {births - mutant, mutant, n * (a.death + a.competition * inv_K_)};
}

std::vector<AtomRates> PopulationState::event_rates() const {
  std::vector<AtomRates> out;
  out.reserve(atoms_.size());
  for (const auto& a : atoms_) {
    const auto r = rates_of(a);
    if (r.clonal < 0.0 || r.mutant < 0.0 || r.death < 0.0)
      throw DomainError("negative event rate at trait " + std::to_string(a.trait));
    out.push_back(r);
  }
  return out;
}

double PopulationState::total_rate() const {
  double R = 0.0;
  for (const auto& a : atoms_) R += rates_of(a).total();
  return R;
}

double PopulationState::waiting_time(Rng& rng) {
  pending_rate_ = total_rate();
  if (!(pending_rate_ > 0.0)) return std::numeric_limits<double>::infinity();
  return rng.exponential(pending_rate_);
}

void PopulationState::apply_count_change(std::size_t i, std::int64_t delta) {
  atoms_[i].count += delta;
  total_count_ += delta;
  const double dv = static_cast<double>(delta);
  for (auto& a : atoms_) a.competition += a.c_row[i] * dv;
}

void PopulationState::remove_atom(std::size_t i) {
  atoms_.erase(atoms_.begin() + static_cast<std::ptrdiff_t>(i));
  for (auto& a : atoms_) a.c_row.erase(a.c_row.begin() + static_cast<std::ptrdiff_t>(i));
}

EventRecord PopulationState::fire(Rng& rng, double event_time) {
  if (!(pending_rate_ > 0.0)) throw PreconditionError("fire: no pending event (total rate is 0)");
  t_ = event_time;
  double target = rng.uniform() * pending_rate_;
  pending_rate_ = 0.0;

  std::size_t chosen = atoms_.size();
  EventKind kind = EventKind::Death;
  // fallback for rounding at the top of the cumulative sum: the last
  // category with positive rate
  std::size_t last_i = 0;
  EventKind last_kind = EventKind::Death;
  for (std::size_t i = 0; i < atoms_.size() && chosen == atoms_.size(); ++i) {
    const auto r = rates_of(atoms_[i]);
    if (r.clonal < 0.0 || r.mutant < 0.0 || r.death < 0.0)
      throw DomainError("negative event rate at trait " + std::to_string(atoms_[i].trait));
    if (r.clonal > 0.0) {
      if (target < r.clonal) {
        chosen = i;
        kind = EventKind::ClonalBirth;
        break;
      }
      last_i = i;
      last_kind = EventKind::ClonalBirth;
      target -= r.clonal;
    }
    if (r.mutant > 0.0) {
      if (target < r.mutant) {
        chosen = i;
        kind = EventKind::MutantBirth;
        break;
      }
      last_i = i;
      last_kind = EventKind::MutantBirth;
      target -= r.mutant;
    }
    if (r.death > 0.0) {
      if (target < r.death) {
        chosen = i;
        kind = EventKind::Death;
        break;
      }
      last_i = i;
      last_kind = EventKind::Death;
      target -= r.death;
    }
  }
  if (chosen == atoms_.size()) {
    chosen = last_i;
    kind = last_kind;
  }

  Atom& parent = atoms_[chosen];
  EventRecord ev;
  ev.time = t_;
  ev.kind = kind;
  ev.parent_label = parent.label;
  ev.parent_trait = parent.trait;
  switch (kind) {
    case EventKind::ClonalBirth:
      apply_count_change(chosen, +1);
      break;
    case EventKind::Death:
      apply_count_change(chosen, -1);
      if (atoms_[chosen].count == 0) remove_atom(chosen);
      break;
    case EventKind::MutantBirth: {
      double pick = rng.uniform();
      int h = parent.jumps.back().first;
      for (const auto& [jump, w] : parent.jumps) {
        if (pick < w) {
          h = jump;
          break;
        }
        pick -= w;
      }
      ev.h = h;
      ev.new_trait = parent.trait + spec_.scaling.sigma * h;
      ev.new_label = ++L_;
      add_atom(ev.new_label, ev.new_trait, 1);
      break;
    }
  }

  if (++events_since_resync_ >= kResyncInterval) resync();
  return ev;
}

std::optional<EventRecord> PopulationState::step(Rng& rng) {
  const double tau = waiting_time(rng);
  if (!std::isfinite(tau)) return std::nullopt;
  return fire(rng, t_ + tau);
}

double PopulationState::resync() {
  events_since_resync_ = 0;
  double worst = 0.0;
  for (auto& a : atoms_) {
    double exact = 0.0;
    for (std::size_t j = 0; j < atoms_.size(); ++j) exact += a.c_row[j] * static_cast<double>(atoms_[j].count);
    const double dev = std::fabs(a.competition - exact) / std::max(std::fabs(exact), 1e-300);
    if (exact == 0.0 && a.competition == 0.0) continue;
    worst = std::max(worst, dev);
    a.competition = exact;
  }
  max_resync_dev_ = std::max(max_resync_dev_, worst);
  if (worst > 1e-9)
    throw Error("competition cache drifted by " + std::to_string(worst) + " (relative) from recomputation");
  return worst;
}

PopulationState init_monomorphic(const ModelSpec& spec) {
  const double zbar = equilibrium_mass(spec, spec.x0);
  const auto count = static_cast<std::int64_t>(std::llround(static_cast<double>(spec.scaling.K) * zbar));
  if (count < 1)
    throw PreconditionError("init_monomorphic: K * zbar(x0) rounds to 0 individuals; K is unusable");
  PopulationState st(spec);
  st.add_atom(0, spec.x0, count);
  return st;
}

Trajectory run(const ModelSpec& spec, const RunOptions& opts, Rng& rng) {
  PopulationState st = init_monomorphic(spec);
  return run(std::move(st), opts, rng);
}

Trajectory run(PopulationState st, const RunOptions& opts, Rng& rng) {
  const auto& spec = st.spec();
  const auto& sc = spec.scaling;
  if (!(opts.horizon > 0.0)) throw PreconditionError("run: horizon must be > 0");
  if (opts.grid_points < 2) throw PreconditionError("run: need at least 2 grid points");
  if (!(opts.epsilon > 0.0)) throw PreconditionError("run: epsilon must be > 0");
  const double time_scale =
      opts.time_scale ? *opts.time_scale
                      : 1.0 / (static_cast<double>(sc.K) * sc.u * sc.sigma * sc.sigma);
  if (!(time_scale > 0.0) || !std::isfinite(time_scale))
    throw PreconditionError("run: time scale 1/(K u sigma^2) is not finite; pass RunOptions::time_scale");
  st.enforce_assumptions(true);
  for (const auto& a : st.atoms()) {
    if (!(a.birth - a.death > 0.0)) throw DomainError("b(x) - d(x) <= 0 at initial trait");
  }

  Trajectory tr;
  tr.K = sc.K;
  tr.time_scale = time_scale;
  tr.initial_count = st.total_count();
  const std::size_t n = opts.grid_points;
  const double wall_horizon = opts.horizon * time_scale;
  std::vector<double> grid_t(n), grid_wall(n);
  for (std::size_t k = 0; k < n; ++k) {
    grid_t[k] = opts.horizon * static_cast<double>(k) / static_cast<double>(n - 1);
    grid_wall[k] = grid_t[k] * time_scale;
  }
  grid_wall.back() = wall_horizon;
  const auto threshold = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(opts.epsilon * sc.sigma * static_cast<double>(sc.K))));

  std::size_t next = 0;
  auto record = [&](std::size_t k) {
    Trajectory::Sample s;
    s.t = grid_t[k];
    s.wall_time = grid_wall[k];
    s.atoms = st.snapshot();
    s.total_mass = st.total_mass();
    s.mean_trait = st.mean_trait();
    s.L = st.mutation_count();
    tr.samples.push_back(std::move(s));
  };
  std::unordered_set<std::uint64_t> invaded;
  auto note_invasion = [&](std::uint64_t label) {
    if (label == 0 || invaded.contains(label)) return;
    for (const auto& a : st.atoms()) {
      if (a.label != label) continue;
      if (a.count >= threshold) {
        invaded.insert(label);
        tr.invasions.push_back({st.time() / time_scale, a.label, a.trait});
      }
      return;
    }
  };

  for (;;) {
    const double tau = st.waiting_time(rng);
    if (!std::isfinite(tau)) {
      while (next < n && grid_wall[next] <= st.time()) record(next++);
      tr.status = RunStatus::Extinct;
      tr.stop_time = st.time() / time_scale;
      break;
    }
    const double t_next = st.time() + tau;
    while (next < n && grid_wall[next] < t_next) record(next++);
    if (t_next > wall_horizon) {
      tr.status = RunStatus::Horizon;
      tr.stop_time = opts.horizon;
      break;
    }
    const EventRecord ev = st.fire(rng, t_next);
    switch (ev.kind) {
      case EventKind::ClonalBirth:
        ++tr.clonal_births;
        note_invasion(ev.parent_label);
        break;
      case EventKind::MutantBirth:
        ++tr.mutant_births;
        tr.mutations.push_back(ev);
        note_invasion(ev.new_label);
        break;
      case EventKind::Death:
        ++tr.deaths;
        break;
    }
    if (ev.kind != EventKind::Death && st.total_mass() >= opts.mass_cap) {
      tr.status = RunStatus::MassBlowup;
      tr.stop_time = st.time() / time_scale;
      break;
    }
  }
  tr.final_count = st.total_count();
  tr.final_L = st.mutation_count();
  tr.max_resync_deviation = std::max(st.max_resync_deviation(), st.resync());
  return tr;
}

MutantTrial simulate_single_mutant(const ModelSpec& spec, double x, double y, std::int64_t threshold,
                                   Rng& rng, bool frozen_resident) {
  if (threshold < 1) throw PreconditionError("simulate_single_mutant: threshold must be >= 1");
  const double K = static_cast<double>(spec.scaling.K);
  const auto resident = static_cast<std::int64_t>(std::llround(K * equilibrium_mass(spec, x)));
  if (resident < 1) throw PreconditionError("simulate_single_mutant: resident rounds to 0 individuals");
  MutantTrial out;

  if (frozen_resident) {
    const double b = spec.b(y);
    const double d = spec.d(y) + spec.c(y, x) * static_cast<double>(resident) / K;
    std::int64_t n = 1;
    double t = 0.0;
    while (n > 0 && n < threshold) {
      const double nn = static_cast<double>(n);
      const double birth = b * nn;
      const double death = nn * d;
      const double R = birth + death;
      t += rng.exponential(R);
      n += rng.uniform() * R < birth ? 1 : -1;
      ++out.events;
    }
    out.invaded = n >= threshold;
    out.time = t;
    return out;
  }

  ModelSpec local = spec;
  local.scaling.u = 0.0;
  PopulationState st(std::move(local));
  st.add_atom(0, x, resident);
  st.add_atom(1, y, 1);
  for (;;) {
    const auto ev = st.step(rng);
    if (!ev) break;
    ++out.events;
    if (ev->parent_label != 1) continue;
    const auto& atoms = st.atoms();
    const auto it = std::find_if(atoms.begin(), atoms.end(), [](const auto& a) { return a.label == 1; });
    if (it == atoms.end()) break;
    if (it->count >= threshold) {
      out.invaded = true;
      break;
    }
  }
  out.time = st.time();
  return out;
}

}  // namespace eadlab
