#pragma once

// Convergence experiments over a schedule of scaling triples: IBM against
// the canonical equation, TSS against the canonical equation, single-mutant
// invasion Monte Carlo against the branching oracle, and a branching-oracle
// suite. Replicates run in parallel; reports depend only on the plan.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "eadlab/model.hpp"

namespace eadlab {

enum class PlanKind { IbmCead, TssCead, InvasionMc, OracleSuite };

const char* to_string(PlanKind k);
/// Inverse of to_string; throws PreconditionError on an unknown name.
PlanKind plan_kind_from_string(const std::string& s);

struct ExperimentPlan {
  std::string name = "experiment";
  PlanKind kind = PlanKind::IbmCead;
  ModelSpec spec;
  /// One scaling triple per schedule point; tss-cead reads only sigma.
  std::vector<ScalingTriple> schedule;
  std::uint64_t replicates = 20;
  std::uint64_t master_seed = 1;
  double horizon = 1.0;  ///< rescaled
  std::size_t grid_points = 101;
  double epsilon = 1.0;
  double cead_dt = 1e-3;  ///< rescaled RK4 step for the reference path
  // invasion-mc and oracle-suite
  int h = 1;                     ///< mutant at x0 + sigma h
  std::uint64_t trials = 10000;  ///< per schedule point, split evenly over replicates
  double slack = 1.0;            ///< band half-width in units of epsilon sigma
  std::pair<double, double> margins{0.5, 0.5};

  /// Throws PreconditionError on an empty schedule, replicates < 1,
  /// horizon <= 0, epsilon <= 0, grid_points < 2, trials < replicates.
  void check() const;
};

struct Stat {
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
  std::uint64_t n = 0;
};

Stat make_stat(const std::vector<double>& values);

/// Outcome of one replicate (one batch of trials for invasion-mc).
struct ReplicateResult {
  std::uint64_t replicate = 0;
  std::uint64_t seed = 0;
  std::string status;  ///< "ok", "extinct", "blowup" or "domain-error"
  double distance = 0.0;
  double endpoint_trait = 0.0;
  double invasions = 0.0;  ///< invasion events, TSS jumps or successful trials
  std::uint64_t events = 0;
  std::uint64_t trials = 0;
  bool conserved = true;  ///< event-count balance held
  double resync_deviation = 0.0;
};

struct ReportRow {
  std::size_t index = 0;
  ScalingTriple scaling;
  ScalingReport regime;
  std::uint64_t replicates = 0;
  std::uint64_t completed = 0;
  std::uint64_t aborted = 0;
  Stat distance;
  Stat endpoint_trait;
  double cead_endpoint = 0.0;
  Stat invasions;
  Stat events;
  // invasion-mc and oracle-suite
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  Stat success_rate;  ///< binomial estimate over all trials
  double oracle_prob = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
  double first_order = 0.0;
  std::vector<ReplicateResult> replicate_results;
};

struct ExperimentReport {
  std::string name;
  PlanKind kind = PlanKind::IbmCead;
  std::uint64_t master_seed = 0;
  std::vector<ReportRow> rows;
  /// Mean distance strictly decreasing along the schedule (ibm-cead ordered
  /// by K, tss-cead by decreasing sigma); success rate for invasion-mc.
  bool monotone_decreasing = false;
  bool all_conserved = true;
  double max_resync_deviation = 0.0;
  bool failed = false;  ///< more than half of some point's replicates aborted
  std::string failure;

  bool operator==(const ExperimentReport&) const = default;
};

bool operator==(const Stat& a, const Stat& b);
bool operator==(const ScalingTriple& a, const ScalingTriple& b);
bool operator==(const ScalingReport& a, const ScalingReport& b);
bool operator==(const ReplicateResult& a, const ReplicateResult& b);
bool operator==(const ReportRow& a, const ReportRow& b);

/// Wall-clock seconds per schedule point, kept apart from the report so that
/// report files stay reproducible.
struct Timing {
  std::vector<double> seconds;
};

/// Worker count: `requested` if > 0, else EADLAB_WORKERS, else the hardware
/// concurrency.
unsigned resolve_workers(unsigned requested);

ExperimentReport run_experiment(const ExperimentPlan& plan, unsigned workers = 0, Timing* timing = nullptr);

ExperimentReport run_ibm_cead(const ExperimentPlan& plan, unsigned workers = 0, Timing* timing = nullptr);
ExperimentReport run_tss_cead(const ExperimentPlan& plan, unsigned workers = 0, Timing* timing = nullptr);
ExperimentReport run_invasion_mc(const ExperimentPlan& plan, unsigned workers = 0, Timing* timing = nullptr);
ExperimentReport run_oracle_suite(const ExperimentPlan& plan, unsigned workers = 0, Timing* timing = nullptr);

enum class Format { Csv, Json, Svg };

const char* to_string(Format f);
Format format_from_string(const std::string& s);

/// Column header of the summary csv.
const std::string& summary_csv_header();
/// Column header of the per-point replicate csv.
const std::string& replicate_csv_header();

std::string summary_csv(const ExperimentReport& r);
std::string replicate_csv(const ReportRow& row);
std::string report_json(const ExperimentReport& r);
std::string row_json(const ReportRow& row);
/// Parses report_json output back; throws ParseError on malformed input.
ExperimentReport report_from_json(const std::string& text);
/// Log-log line chart of the mean distance (or success rate) along the schedule.
std::string report_svg(const ExperimentReport& r);

/// Writes {name}.summary.{ext} and {name}.{i}.{ext} per schedule point (svg:
/// one chart {name}.svg). Returns the written paths. Throws Error with the
/// path on I/O failure.
std::vector<std::filesystem::path> emit(const ExperimentReport& r, const std::filesystem::path& dir, Format f);

/// Writes {name}.timing.json next to the report files.
std::filesystem::path emit_timing(const ExperimentReport& r, const Timing& t, const std::filesystem::path& dir);

/// Shortest round-trip decimal form of x ("nan", "inf", "-inf" for
/// non-finite values).
std::string format_number(double x);

/// Writes `text` to `path`, throwing Error with the path on failure.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace eadlab
