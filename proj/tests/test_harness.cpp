#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "helpers.hpp"
#include "riv/harness.hpp"

using namespace riv;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.seed = 424242;
  cfg.trials = 3;
  CellConfig cell;
  cell.sigma = 2;
  cell.m = 12;
  cell.k = 2;
  cell.n = 40;
  cell.placement = "iid_uniform";
  cfg.cells.push_back(cell);
  return cfg;
}

std::string csv_of(const Report& r) {
  std::ostringstream out;
  write_csv(out, r.rows);
  return out.str();
}

}  // namespace

TEST_CASE("candidate placement rules", "[harness]") {
  const RivModel m = RivModel::make_uniform({0.5, 0.5});
  SplitStream rng(5);
  for (const char* rule : {"iid_uniform", "equally_spaced", "adversarial_cluster"}) {
    const auto pos = place_candidates(m, 64, rule, rng.split(1));
    REQUIRE(pos.size() == 64);
    for (std::size_t i = 1; i < pos.size(); ++i) REQUIRE(pos[i - 1] < pos[i]);
    const CandidateSet cs(pos, m);  // validates in-segment placement
    CHECK(cs.size() == 64);
  }
  CHECK_THROWS_AS(place_candidates(m, 4, "bogus", rng), HarnessError);
  SECTION("clusters really cluster") {
    const auto pos = place_candidates(m, 32, "adversarial_cluster", rng.split(9));
    CHECK(pos.back() - pos.front() <= 0.05);
  }
}

TEST_CASE("trivial one-of-everything run", "[harness]") {
  ExperimentConfig cfg;
  cfg.seed = 1;
  cfg.trials = 1;
  CellConfig cell;
  cell.sigma = 1;
  cell.m = 1;
  cell.k = 1;
  cell.n = 1;
  cfg.cells.push_back(cell);
  const Report r = run_experiment(cfg);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].verified);
  CHECK(r.rows[0].path == "guessed");
}

TEST_CASE("identical configs give byte-identical reports", "[harness]") {
  const Report a = run_experiment(tiny_config());
  const Report b = run_experiment(tiny_config());
  CHECK(csv_of(a) == csv_of(b));
  CHECK(a.aggregates.dump() == b.aggregates.dump());
}

TEST_CASE("thread count does not change the report", "[harness]") {
  ExperimentConfig cfg = tiny_config();
  const Report serial = run_experiment(cfg);
  cfg.threads = 4;
  const Report parallel = run_experiment(cfg);
  CHECK(csv_of(serial) == csv_of(parallel));
  CHECK(serial.aggregates.dump() == parallel.aggregates.dump());
}

TEST_CASE("every emitted committee is re-verified", "[harness]") {
  const Report r = run_experiment(tiny_config());
  for (const TrialRow& row : r.rows) {
    CHECK(row.verified);
    CHECK(row.validate_sound);
  }
}

TEST_CASE("mes_full pipeline runs and verifies", "[harness]") {
  ExperimentConfig cfg = tiny_config();
  cfg.pipeline = "mes_full";
  cfg.trials = 2;
  const Report r = run_experiment(cfg);
  for (const TrialRow& row : r.rows) {
    CHECK(row.verified);
    CHECK(row.path == "mes_full");
  }
}

TEST_CASE("aggregates are recomputable from rows", "[harness]") {
  const Report r = run_experiment(tiny_config());
  long long fallbacks = 0;
  for (const TrialRow& row : r.rows)
    if (row.path == "fallback") ++fallbacks;
  const double rate = static_cast<double>(fallbacks) / static_cast<double>(r.rows.size());
  CHECK(r.aggregates.at("cells").at(0).at("fallback_rate").get<double>() ==
        Catch::Approx(rate).margin(1e-12));
}

TEST_CASE("ols recovers planted coefficients", "[harness]") {
  // y = 2 + 3 x1 - x2, exactly.
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  SplitStream rng(77);
  for (int i = 0; i < 24; ++i) {
    const double x1 = rng.uniform01() * 4.0;
    const double x2 = rng.uniform01() * 2.0;
    X.push_back({1.0, x1, x2});
    y.push_back(2.0 + 3.0 * x1 - x2);
  }
  const OlsFit fit = ols(X, y);
  CHECK(fit.coef[0] == Catch::Approx(2.0).margin(1e-9));
  CHECK(fit.coef[1] == Catch::Approx(3.0).margin(1e-9));
  CHECK(fit.coef[2] == Catch::Approx(-1.0).margin(1e-9));
  CHECK(fit.stderr_[1] <= 1e-9);
}
