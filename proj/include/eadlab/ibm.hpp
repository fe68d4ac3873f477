#pragma once

// Exact event-driven (Gillespie direct method) simulation of the
// individual-based birth/death/mutation process. Individuals sharing a
// (label, trait) pair are aggregated into one atom with a count.
//
// Rates for an atom with trait x and count n, carrying capacity K:
//   clonal birth  (1 - u m(x) a(x)) b(x) n
//   mutant birth  u m(x) a(x) b(x) n
//   death         n (d(x) + sum_y c(x, y) n_y / K)
// where a(x) is the kernel mass on jumps that stay inside X (1 away from the
// boundary). The competition sum runs over every atom including the focal
// one.

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "eadlab/model.hpp"
#include "eadlab/rng.hpp"

namespace eadlab {

enum class EventKind { ClonalBirth, MutantBirth, Death };

const char* to_string(EventKind k);

struct EventRecord {
  double time = 0.0;
  EventKind kind = EventKind::ClonalBirth;
  std::uint64_t parent_label = 0;
  double parent_trait = 0.0;
  // mutant births only
  int h = 0;
  std::uint64_t new_label = 0;
  double new_trait = 0.0;
};

struct AtomRates {
  double clonal = 0.0;
  double mutant = 0.0;
  double death = 0.0;

  double total() const { return clonal + mutant + death; }
};

struct AtomCount {
  std::uint64_t label = 0;
  double trait = 0.0;
  std::int64_t count = 0;
};

class PopulationState {
 public:
  struct Atom {
    std::uint64_t label = 0;
    double trait = 0.0;
    std::int64_t count = 0;
    double birth = 0.0;         ///< b(x)
    double death = 0.0;         ///< d(x)
    double mutant_share = 0.0;  ///< u m(x) a(x)
    double competition = 0.0;   ///< sum_j c(x, x_j) n_j, maintained incrementally
    std::vector<double> c_row;  ///< c(x, x_j) in atom order
    std::vector<std::pair<int, double>> jumps;  ///< admissible kernel at x
  };

  /// Empty population; use add_atom or init_monomorphic.
  explicit PopulationState(ModelSpec spec);

  /// Appends an atom. Throws DomainError on a negative rate or m outside
  /// [0, 1] at `trait`, and additionally on b <= d or c(x,x) <= 0 when
  /// assumption enforcement is on.
  void add_atom(std::uint64_t label, double trait, std::int64_t count);

  /// Re-check growth and self-competition positivity at every trait that
  /// enters the population (off by default).
  void enforce_assumptions(bool on) { enforce_assumptions_ = on; }

  const ModelSpec& spec() const { return spec_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::int64_t K() const { return spec_.scaling.K; }
  double time() const { return t_; }
  std::uint64_t mutation_count() const { return L_; }
  std::int64_t total_count() const { return total_count_; }
  double total_mass() const { return static_cast<double>(total_count_) / static_cast<double>(K()); }
  double mean_trait() const;
  std::vector<AtomCount> snapshot() const;

  /// Per-atom event rates in atom order.
  std::vector<AtomRates> event_rates() const;
  double total_rate() const;

  /// One event of the jump chain. Returns nullopt when the total rate is 0
  /// (extinction); the state is then left untouched.
  std::optional<EventRecord> step(Rng& rng);

  /// First half of step(): draws the Exp(R) holding time, or +inf if R = 0.
  double waiting_time(Rng& rng);
  /// Second half of step(): sets the clock to `event_time` and applies an
  /// event chosen proportionally to the rates seen by waiting_time().
  EventRecord fire(Rng& rng, double event_time);

  /// Recomputes the competition sums from scratch and returns the largest
  /// relative deviation of the incrementally maintained ones. Throws Error
  /// if it exceeds 1e-9.
  double resync();
  double max_resync_deviation() const { return max_resync_dev_; }

  static constexpr std::uint64_t kResyncInterval = std::uint64_t{1} << 16;

 private:
  void apply_count_change(std::size_t i, std::int64_t delta);
  void remove_atom(std::size_t i);
  AtomRates rates_of(const Atom& a) const;

  ModelSpec spec_;
  double inv_K_;
  std::vector<Atom> atoms_;
  double t_ = 0.0;
  double pending_rate_ = 0.0;
  bool enforce_assumptions_ = false;
  std::uint64_t L_ = 0;
  std::int64_t total_count_ = 0;
  std::uint64_t events_since_resync_ = 0;
  double max_resync_dev_ = 0.0;
};

/// Single atom (label 0, x0) with count round(K zbar(x0)). Throws
/// PreconditionError if that count is 0.
PopulationState init_monomorphic(const ModelSpec& spec);

enum class RunStatus { Horizon, Extinct, MassBlowup };

const char* to_string(RunStatus s);

struct RunOptions {
  double horizon = 1.0;  ///< in rescaled time units
  std::size_t grid_points = 101;
  double epsilon = 1.0;  ///< invasion threshold is ceil(epsilon sigma K) individuals
  /// Wall-clock time per rescaled unit; defaults to 1 / (K u sigma^2).
  std::optional<double> time_scale;
  /// Abort when total mass reaches this value (e.g. ValidationReport::mass_cap()).
  double mass_cap = std::numeric_limits<double>::infinity();
};

struct InvasionRecord {
  double time = 0.0;  ///< rescaled
  std::uint64_t label = 0;
  double trait = 0.0;
};

struct Trajectory {
  struct Sample {
    double t = 0.0;  ///< rescaled
    double wall_time = 0.0;
    std::vector<AtomCount> atoms;
    double total_mass = 0.0;
    double mean_trait = 0.0;
    std::uint64_t L = 0;
  };

  std::int64_t K = 0;
  double time_scale = 1.0;
  std::vector<Sample> samples;
  std::vector<EventRecord> mutations;
  std::vector<InvasionRecord> invasions;
  RunStatus status = RunStatus::Horizon;
  double stop_time = 0.0;  ///< rescaled
  std::uint64_t clonal_births = 0;
  std::uint64_t mutant_births = 0;
  std::uint64_t deaths = 0;
  std::int64_t initial_count = 0;
  std::int64_t final_count = 0;
  std::uint64_t final_L = 0;
  double max_resync_deviation = 0.0;

  std::uint64_t events() const { return clonal_births + mutant_births + deaths; }
};

/// Simulates from the monomorphic initial state to `opts.horizon` (rescaled)
/// or until extinction or mass blowup. Samples are taken on a uniform grid
/// of `grid_points` rescaled times within [0, stop time].
Trajectory run(const ModelSpec& spec, const RunOptions& opts, Rng& rng);

/// Same, from a caller-supplied state.
Trajectory run(PopulationState state, const RunOptions& opts, Rng& rng);

struct MutantTrial {
  bool invaded = false;
  double time = 0.0;  ///< wall time at absorption
  std::uint64_t events = 0;
};

/// One mutant at trait y enters a resident population at x sitting at
/// round(K zbar(x)); mutation is switched off. Runs until the mutant count
/// hits `threshold` (invaded) or 0. With `frozen_resident` the resident
/// count is held fixed and the mutant line is the linear branching process
/// with birth b(y) and death d(y) + c(y, x) n_x / K (no self-competition).
MutantTrial simulate_single_mutant(const ModelSpec& spec, double x, double y, std::int64_t threshold,
                                   Rng& rng, bool frozen_resident = false);

}  // namespace eadlab
