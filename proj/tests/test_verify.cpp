#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "riv/verify.hpp"

using namespace riv;

namespace {

Election make_election(int m, int k, std::vector<std::vector<int>> ballots) {
  Election e;
  for (int c = 0; c < m; ++c) e.positions.push_back(static_cast<double>(c));
  e.k = k;
  e.ballots = std::move(ballots);
  return e;
}

}  // namespace

TEST_CASE("ci checker finds the canonical violation", "[verify]") {
  // Everyone approves only candidate 0; the committee is the unapproved 1.
  const Election e = make_election(2, 1, {{0}, {0}, {0}});
  const std::vector<int> W{1};
  const auto w = check_pjr_plus_ci(e, W);
  REQUIRE(w.has_value());
  CHECK(w->ell == 1);
  CHECK(w->candidate == 0);
  CHECK(w->group == std::vector<int>{0, 1, 2});
  CHECK(witness_replay(e, W, *w));
}

TEST_CASE("ci checker accepts a covered election", "[verify]") {
  const Election e = make_election(4, 2, {{0, 1}, {1, 2}, {2, 3}, {1, 2}});
  const std::vector<int> W{1, 2};
  CHECK_FALSE(check_pjr_plus_ci(e, W).has_value());
}

TEST_CASE("ci checker rejects malformed input", "[verify]") {
  Election e = make_election(3, 1, {{0, 2}});  // non-consecutive ballot
  CHECK_THROWS_AS(check_pjr_plus_ci(e, std::vector<int>{0}), VerifyError);
  const Election ok = make_election(3, 2, {{0}});
  CHECK_THROWS_AS(check_pjr_plus_ci(ok, std::vector<int>{0}), VerifyError);  // |W| != k
}

TEST_CASE("brute-force PJR+ checker spec cases", "[verify]") {
  SECTION("empty ballots cannot form a violating group") {
    const Election e = make_election(3, 2, {{}, {}, {}});
    CHECK_FALSE(check_pjr_plus_bruteforce(e, std::vector<int>{0, 1}).has_value());
  }
  SECTION("single satisfied voter") {
    const Election e = make_election(1, 1, {{0}});
    CHECK_FALSE(check_pjr_plus_bruteforce(e, std::vector<int>{0}).has_value());
  }
  SECTION("size caps are hard errors") {
    const Election e = make_election(2, 1, std::vector<std::vector<int>>(15, {0}));
    CHECK_THROWS_AS(check_pjr_plus_bruteforce(e, std::vector<int>{0}), VerifyError);
  }
}

TEST_CASE("core brute-force checker spec cases", "[verify]") {
  SECTION("electing everything is core stable") {
    const Election e = make_election(3, 3, {{0}, {1}, {0, 1, 2}});
    CHECK_FALSE(check_core_bruteforce(e, std::vector<int>{0, 1, 2}).has_value());
  }
  SECTION("two singleton blocs, one seat: no group clears the threshold") {
    const Election e = make_election(2, 1, {{0}, {1}});
    CHECK_FALSE(check_core_bruteforce(e, std::vector<int>{0}).has_value());
  }
  SECTION("a starved unanimous electorate deviates") {
    const Election e = make_election(2, 1, {{1}, {1}, {1}});
    const auto w = check_core_bruteforce(e, std::vector<int>{0});
    REQUIRE(w.has_value());
    CHECK(w->deviating_set == std::vector<int>{1});
    CHECK(w->group == std::vector<int>{0, 1, 2});
    CHECK(witness_replay(e, std::vector<int>{0}, *w));
  }
  SECTION("a two-thirds bloc is below the full-population threshold") {
    const Election e = make_election(2, 1, {{1}, {1}, {0}});
    CHECK_FALSE(check_core_bruteforce(e, std::vector<int>{0}).has_value());
  }
}

TEST_CASE("ci checker agrees with the brute-force checker", "[verify][property]") {
  SplitStream rng(101);
  int failures_seen = 0;
  for (int trial = 0; trial < 400; ++trial) {
    SplitStream trng = rng.split(static_cast<std::uint64_t>(trial));
    const Election e = rivtest::random_ci_election(8, 8, 4, trng);
    const std::vector<int> W = rivtest::random_committee(e.num_candidates(), e.k, trng);
    const auto ci = check_pjr_plus_ci(e, W);
    const auto bf = check_pjr_plus_bruteforce(e, W);
    REQUIRE(ci.has_value() == bf.has_value());
    if (ci) {
      ++failures_seen;
      CHECK(witness_replay(e, W, *ci));
      CHECK(witness_replay(e, W, *bf));
    }
  }
  CHECK(failures_seen > 20);  // the generator must exercise both verdicts
}

TEST_CASE("failing PJR+ implies failing core", "[verify][property]") {
  SplitStream rng(103);
  int implications = 0;
  for (int trial = 0; trial < 150; ++trial) {
    SplitStream trng = rng.split(static_cast<std::uint64_t>(trial));
    const Election e = rivtest::random_ci_election(6, 6, 3, trng);
    // Sweep all committees of size k.
    const int m = e.num_candidates();
    std::vector<int> idx(static_cast<std::size_t>(e.k));
    for (int i = 0; i < e.k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
      if (check_pjr_plus_ci(e, idx).has_value()) {
        ++implications;
        REQUIRE(check_core_bruteforce(e, idx).has_value());
      }
      int i = e.k - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - e.k + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < e.k; ++j)
        idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  CHECK(implications > 50);
}

TEST_CASE("witness replay rejects doctored witnesses", "[verify]") {
  const Election e = make_election(2, 1, {{0}, {0}, {0}});
  const std::vector<int> W{1};
  auto w = check_pjr_plus_ci(e, W);
  REQUIRE(w.has_value());
  Witness bad = *w;
  bad.group.pop_back();
  bad.group.pop_back();  // group too small for the threshold
  CHECK_FALSE(witness_replay(e, W, bad));
  Witness wrong_candidate = *w;
  wrong_candidate.candidate = 1;  // candidate is in W
  CHECK_FALSE(witness_replay(e, W, wrong_candidate));
}
