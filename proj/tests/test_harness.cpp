#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fdbandits/harness.hpp"
#include "fdbandits/instances.hpp"

using namespace fdbandits;

namespace {

SweepConfig small_config() {
  SweepConfig cfg;
  cfg.instance = random_instance(2, 2, 3, 0.4);
  cfg.fclass = random_function_class(cfg.instance, 8, 4);
  cfg.algo = Algo::kKlPcb;
  cfg.reg = Regularizer::kl(1.0);
  cfg.n_grid = {32, 64, 128};
  cfg.seeds = 4;
  cfg.delta = 0.1;
  cfg.base_seed = 42;
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("algorithm names round trip") {
  for (Algo algo : {Algo::kKlPcb, Algo::kFCb, Algo::kKlPcdb, Algo::kFCdb,
                    Algo::kLsSoftmaxBaseline}) {
    CHECK(algo_from_name(algo_name(algo)) == algo);
  }
  CHECK_THROWS(algo_from_name("nope"));
  CHECK(algo_uses_preferences(Algo::kKlPcdb));
  CHECK(!algo_uses_preferences(Algo::kFCb));
}

TEST_CASE("config validation catches a non-increasing grid") {
  SweepConfig cfg = small_config();
  cfg.n_grid = {64, 64};
  bool found = false;
  for (const auto& v : validate_sweep_config(cfg)) {
    found = found || v.find("strictly increasing") != std::string::npos;
  }
  CHECK(found);
}

TEST_CASE("a singleton class gives one row at the exact optimum") {
  SweepConfig cfg = small_config();
  cfg.fclass.members = {cfg.instance.mean_reward};
  cfg.fclass.realizable_index = 0;
  cfg.n_grid = {64};
  cfg.seeds = 1;
  const auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].status == "ok");
  CHECK(rows[0].subopt <= 1e-10);
}

TEST_CASE("sweeps are deterministic and byte-identical as CSV") {
  const SweepConfig cfg = small_config();
  const auto rows_a = run_sweep(cfg);
  const auto rows_b = run_sweep(cfg);
  std::stringstream csv_a;
  std::stringstream csv_b;
  write_sweep_csv(csv_a, rows_a);
  write_sweep_csv(csv_b, rows_b);
  CHECK(csv_a.str() == csv_b.str());
  CHECK(rows_a.size() == 12);
}

TEST_CASE("parallel execution preserves row order and values") {
  SweepConfig cfg = small_config();
  const auto serial = run_sweep(cfg);
  cfg.workers = 4;
  const auto parallel = run_sweep(cfg);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].n == parallel[i].n);
    CHECK(serial[i].seed == parallel[i].seed);
    CHECK(serial[i].subopt == parallel[i].subopt);
  }
}

TEST_CASE("each row is reproducible in isolation") {
  const SweepConfig cfg = small_config();
  const auto rows = run_sweep(cfg);
  const SweepRow again = run_cell(cfg, rows[5].n, rows[5].seed);
  CHECK(again.subopt == rows[5].subopt);
  CHECK(again.event_e == rows[5].event_e);
}

TEST_CASE("sweep CSV round trips") {
  const auto rows = run_sweep(small_config());
  std::stringstream ss;
  write_sweep_csv(ss, rows);
  const auto back = read_sweep_csv(ss);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].n == rows[i].n);
    CHECK(back[i].seed == rows[i].seed);
    CHECK(back[i].subopt == rows[i].subopt);
    CHECK(back[i].event_e == rows[i].event_e);
    CHECK(back[i].status == rows[i].status);
  }
}

TEST_CASE("the CSV header is the documented contract") {
  std::stringstream ss;
  write_sweep_csv(ss, {});
  std::string header;
  std::getline(ss, header);
  CHECK(header == "algo,eta,alpha,n,seed,subopt,event_e,c_pistar,d2_single,runtime_ms,status");
}

TEST_CASE("rate fit recovers exact power laws") {
  std::vector<SweepRow> rows;
  for (long n : {128L, 256L, 512L, 1024L, 2048L}) {
    for (int seed = 0; seed < 3; ++seed) {
      SweepRow row;
      row.n = n;
      row.seed = seed;
      row.subopt = 7.5 / static_cast<double>(n);
      rows.push_back(row);
    }
  }
  const RateFitResult inv = rate_fit(rows, RateStatistic::kMedian);
  CHECK(inv.slope == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(inv.r2 == doctest::Approx(1.0).epsilon(1e-9));

  for (auto& row : rows) row.subopt = 3.0 / std::sqrt(static_cast<double>(row.n));
  const RateFitResult half = rate_fit(rows, RateStatistic::kMean);
  CHECK(half.slope == doctest::Approx(-0.5).epsilon(1e-9));

  for (auto& row : rows) row.subopt = 0.0;
  CHECK_THROWS_WITH(rate_fit(rows, RateStatistic::kMedian),
                    "degenerate rate fit (exact optimum reached)");
}

TEST_CASE("rate fit needs three distinct sample sizes") {
  std::vector<SweepRow> rows;
  for (long n : {128L, 256L}) {
    SweepRow row;
    row.n = n;
    row.subopt = 1.0 / n;
    rows.push_back(row);
  }
  CHECK_THROWS(rate_fit(rows, RateStatistic::kMedian));
}

TEST_CASE("a sweep survives cells that raise component errors") {
  // Two class members disagree only on a state rho never visits, so the
  // divergence is infinite at an action the reference policy still plays.
  SweepConfig cfg;
  cfg.instance = random_instance(2, 2, 5, 0.0);
  cfg.instance.context_dist = {1.0, 0.0};
  Table g(2, 2, 0.4);
  Table h = g;
  h(1, 0) = 0.9;
  cfg.fclass.members = {g, h};
  cfg.algo = Algo::kKlPcb;
  cfg.reg = Regularizer::kl(1.0);
  cfg.n_grid = {16, 32};
  cfg.seeds = 2;
  const auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    CHECK(row.status == "class not covered by reference policy");
    CHECK(std::isnan(row.subopt));
  }
  CHECK_THROWS(rate_fit(rows, RateStatistic::kMedian));  // no usable rows
}

TEST_CASE("failed cells are recorded and skipped by the fit") {
  std::vector<SweepRow> rows;
  for (long n : {128L, 256L, 512L}) {
    SweepRow ok;
    ok.n = n;
    ok.subopt = 1.0 / n;
    rows.push_back(ok);
    SweepRow bad;
    bad.n = n;
    bad.subopt = std::nan("");
    bad.status = "boom";
    rows.push_back(bad);
  }
  const RateFitResult fit = rate_fit(rows, RateStatistic::kMedian);
  CHECK(fit.slope == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("the solver verify suite passes") {
  const VerifyReport report = verify(VerifySuite::kSolvers, 1);
  for (const auto& check : report.checks) {
    INFO(check.name, " measured=", check.measured, " threshold=", check.threshold);
    CHECK(check.pass);
  }
  std::stringstream ss;
  print_report(ss, report);
  CHECK(ss.str().find("PASS solvers.softmax_dual_agreement") != std::string::npos);
}

TEST_CASE("suite names resolve") {
  CHECK(suite_from_name("lemmas") == VerifySuite::kLemmas);
  CHECK(suite_from_name("lower_bounds") == VerifySuite::kLowerBounds);
  CHECK_THROWS(suite_from_name("bogus"));
}

TEST_SUITE_END();
