#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "eadlab/config.hpp"
#include "eadlab/error.hpp"
#include "eadlab/harness.hpp"
#include "eadlab/rng.hpp"
#include "xml_check.hpp"

using namespace eadlab;

namespace {

ScalingTriple schedule_point(std::int64_t K) {
  const double k = static_cast<double>(K);
  const double sigma = std::pow(k, -0.3);
  return {K, 0.1 * std::pow(sigma, 1.2) / (k * std::log(k)), sigma, 0.1};
}

ExperimentPlan small_ibm_plan() {
  ExperimentPlan p;
  p.name = "small";
  p.kind = PlanKind::IbmCead;
  p.spec = linear_birth_spec();
  p.schedule = {schedule_point(100), schedule_point(200)};
  p.replicates = 3;
  p.master_seed = 2024;
  p.horizon = 0.2;
  p.grid_points = 21;
  return p;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("eadlab_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("plan preconditions") {
    ExperimentPlan p = small_ibm_plan();
    CHECK_NOTHROW(p.check());
    p.replicates = 0;
    CHECK_THROWS_AS(p.check(), PreconditionError);
    p = small_ibm_plan();
    p.horizon = 0.0;
    CHECK_THROWS_AS(p.check(), PreconditionError);
    p = small_ibm_plan();
    p.epsilon = -1.0;
    CHECK_THROWS_AS(p.check(), PreconditionError);
    p = small_ibm_plan();
    p.schedule.clear();
    CHECK_THROWS_AS(p.check(), PreconditionError);
    p = small_ibm_plan();
    CHECK_THROWS_AS(run_tss_cead(p), PreconditionError);
    CHECK(plan_kind_from_string("tss-cead") == PlanKind::TssCead);
    CHECK_THROWS_AS(plan_kind_from_string("nope"), PreconditionError);
  }

  TEST_CASE("statistics") {
    const Stat s = make_stat({1.0, 2.0, 3.0, 4.0});
    CHECK(s.mean == 2.5);
    CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(s.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(s.n == 4);
    CHECK(make_stat({}).n == 0);
  }

  TEST_CASE("ibm-cead report is independent of the worker count") {
    const ExperimentPlan p = small_ibm_plan();
    const auto a = run_ibm_cead(p, 1);
    const auto b = run_ibm_cead(p, 3);
    CHECK(report_json(a) == report_json(b));
    CHECK(summary_csv(a) == summary_csv(b));
    REQUIRE(a.rows.size() == 2);
    for (const auto& row : a.rows) {
      CHECK(row.replicates == 3);
      CHECK(row.completed + row.aborted == 3);
      CHECK(row.distance.n == row.completed);
      CHECK(row.regime.r1 > 0.0);
      CHECK(row.cead_endpoint > 0.0);
      for (const auto& r : row.replicate_results) {
        CHECK(r.conserved);
        CHECK(r.seed == stream_seed(p.master_seed, r.replicate, row.index));
      }
    }
    CHECK(a.all_conserved);
    CHECK(a.max_resync_deviation <= 1e-9);
    CHECK_FALSE(a.failed);
  }

  TEST_CASE("json round trip and csv schema") {
    const auto r = run_ibm_cead(small_ibm_plan(), 2);
    CHECK(report_from_json(report_json(r)) == r);
    const std::string csv = summary_csv(r);
    CHECK(csv.substr(0, csv.find('\n')) == summary_csv_header());
    ExperimentReport empty;
    empty.name = "empty";
    CHECK(summary_csv(empty) == summary_csv_header() + "\n");
    CHECK(report_from_json(report_json(empty)) == empty);
    CHECK_THROWS_AS(report_from_json("{"), ParseError);
    CHECK_THROWS_AS(report_from_json("{}"), ParseError);
  }

  TEST_CASE("svg is well formed") {
    const auto r = run_ibm_cead(small_ibm_plan(), 1);
    std::string why;
    CHECK_MESSAGE(testing::xml_well_formed(report_svg(r), &why), why);
    ExperimentReport odd;
    odd.name = "a<b & \"c\"";
    CHECK_MESSAGE(testing::xml_well_formed(report_svg(odd), &why), why);
    CHECK_FALSE(testing::xml_well_formed("<svg><g></svg>"));
  }

  TEST_CASE("emit writes the documented files") {
    const auto r = run_ibm_cead(small_ibm_plan(), 1);
    const auto dir = scratch("emit");
    const auto csv = emit(r, dir, Format::Csv);
    REQUIRE(csv.size() == 3);
    CHECK(csv[0].filename() == "small.summary.csv");
    CHECK(csv[1].filename() == "small.0.csv");
    CHECK(read_file(csv[1]).substr(0, replicate_csv_header().size()) == replicate_csv_header());
    const auto js = emit(r, dir, Format::Json);
    CHECK(report_from_json(read_file(js[0])) == r);
    const auto svg = emit(r, dir, Format::Svg);
    CHECK(svg.at(0).filename() == "small.svg");
    Timing t{{1.0, 2.0}};
    CHECK(emit_timing(r, t, dir).filename() == "small.timing.json");
    CHECK_THROWS_AS(write_file(dir / "missing" / "x.csv", "x"), Error);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("tss-cead") {
    ExperimentPlan p;
    p.name = "tss";
    p.kind = PlanKind::TssCead;
    p.spec = linear_birth_spec();
    p.schedule = {{1000, 1e-6, 0.08, 0.1}, {1000, 1e-6, 0.04, 0.1}};
    p.replicates = 20;
    const auto r = run_tss_cead(p, 2);
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].completed == 20);
    CHECK(r.rows[1].distance.mean < r.rows[0].distance.mean);
    CHECK(r.monotone_decreasing);
    CHECK(report_json(r) == report_json(run_tss_cead(p, 1)));

    // fitness peak at x0 and zero drift: the path never moves
    p.spec.rates.b = expr::parse("1.5 - (x-0.5)^2");
    p.spec.x0 = 0.5;
    const auto flat = run_tss_cead(p, 1);
    for (const auto& row : flat.rows) CHECK(row.distance.mean == 0.0);
  }

  TEST_CASE("invasion-mc") {
    ExperimentPlan p;
    p.name = "inv";
    p.kind = PlanKind::InvasionMc;
    p.spec = linear_birth_spec();
    p.spec.x0 = 0.5;
    p.schedule = {{200, 1e-6, 0.1, 0.1}};
    p.replicates = 4;
    p.trials = 2000;
    p.h = -1;
    const auto r = run_invasion_mc(p, 2);
    REQUIRE(r.rows.size() == 1);
    const auto& row = r.rows[0];
    CHECK(row.trials == 2000);
    CHECK(row.first_order == 0.0);
    // deleterious: bounded by 1/(eps sigma K) plus noise
    CHECK(row.success_rate.mean <= 1.0 / 20.0 + 3.0 * row.success_rate.se);
    CHECK(row.band_lo <= row.oracle_prob);
    CHECK(row.oracle_prob <= row.band_hi);
    CHECK(report_json(r) == report_json(run_invasion_mc(p, 1)));
  }

  TEST_CASE("oracle-suite Monte Carlo matches the branching oracle") {
    ExperimentPlan p;
    p.name = "suite";
    p.kind = PlanKind::OracleSuite;
    p.spec = linear_birth_spec();
    p.schedule = {{1000, 1e-6, 0.1, 0.1}, {1000, 1e-6, 0.05, 0.1}};
    p.replicates = 4;
    p.trials = 40000;
    const auto r = run_oracle_suite(p, 2);
    for (const auto& row : r.rows)
      CHECK(std::fabs(row.success_rate.mean - row.oracle_prob) <= 3.0 * row.success_rate.se);
  }

  TEST_CASE("worker resolution") {
    CHECK(resolve_workers(3) == 3);
    CHECK(resolve_workers(0) >= 1);
  }
}
