#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "riv/harness.hpp"
#include "riv/io.hpp"

using namespace riv;

TEST_CASE("model files round-trip and validate", "[io]") {
  SECTION("uniform shorthand") {
    const json j{{"kind", "uniform"}, {"weights", {0.25, 0.75}}};
    const RivModel m = model_from_json(j);
    CHECK(m.sigma() == 2);
    CHECK(model_from_json(model_to_json(m)).segment(2).weight == 0.75);
  }
  SECTION("general models carry geometry") {
    SplitStream rng(1);
    const RivModel m = rivtest::random_general_model(3, rng);
    const RivModel back = model_from_json(model_to_json(m));
    REQUIRE(back.sigma() == m.sigma());
    for (int t = 1; t <= m.sigma(); ++t) {
      CHECK(back.segment(t).z_minus == m.segment(t).z_minus);
      CHECK(back.segment(t).weight == m.segment(t).weight);
      CHECK(back.segment(t).cdf.xs() == m.segment(t).cdf.xs());
    }
  }
  SECTION("the first violated invariant is named") {
    const json j{{"kind", "uniform"}, {"weights", {0.5, 0.4}}};
    CHECK_THROWS_WITH(model_from_json(j), Catch::Matchers::ContainsSubstring("weight_sum"));
  }
}

TEST_CASE("election files accept both ballot encodings", "[io]") {
  Election e;
  e.positions = {0.5, 1.5, 2.5};
  e.k = 2;
  e.ballots = {{0, 1}, {}, {2}};
  const json j = election_to_json(e);
  CHECK(j.contains("ballots_ci"));  // consecutive ballots use the compact form
  const Election back = election_from_json(j);
  CHECK(back.ballots == e.ballots);
  CHECK(back.k == 2);

  const json explicit_j{{"positions", {0.5, 1.5, 2.5}},
                        {"k", 1},
                        {"ballots", {{0, 2}, {1}}}};
  const Election e2 = election_from_json(explicit_j);
  CHECK(e2.ballots[0] == std::vector<int>{0, 2});
  CHECK_FALSE(e2.ballots_consecutive());
}

TEST_CASE("committee and witness serialization", "[io]") {
  Election e;
  e.positions = {0.5, 1.5, 2.5};
  e.k = 2;
  e.ballots = {{0}, {0}, {0}};
  const std::vector<int> W{1, 2};
  const json cj = committee_to_json(e, W);
  CHECK(committee_from_json(cj, e) == W);
  const json by_pos{{"positions", {1.5, 2.5}}};
  CHECK(committee_from_json(by_pos, e) == W);
  const json bad{{"positions", {1.6}}};
  CHECK_THROWS_AS(committee_from_json(bad, e), IoError);

  Witness w;
  w.axiom = Witness::Axiom::pjr_plus;
  w.ell = 1;
  w.candidate = 0;
  w.group = {0, 1, 2};
  const Witness back = witness_from_json(witness_to_json(w));
  CHECK(back.ell == 1);
  CHECK(back.candidate == 0);
  CHECK(back.group == w.group);
  CHECK(witness_replay(e, W, back));
}

TEST_CASE("experiment configs parse cells and defaults", "[io]") {
  const json j{{"seed", 7},
               {"trials", 2},
               {"cells", {{{"sigma", 2}, {"m", 16}, {"k", 2}, {"n", 50}}}}};
  const ExperimentConfig cfg = config_from_json(j);
  CHECK(cfg.seed == 7);
  CHECK(cfg.trials == 2);
  REQUIRE(cfg.cells.size() == 1);
  CHECK(cfg.cells[0].sigma == 2);
  CHECK(cfg.cells[0].placement == "iid_uniform");

  const json single{{"seed", 1}, {"m", 4}, {"k", 1}, {"n", 3}};
  CHECK(config_from_json(single).cells.size() == 1);
}
