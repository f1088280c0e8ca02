#pragma once

// Committee selection under limited communication. A committee is guessed by
// snapping evenly spread marked points to the nearest candidates, every voter
// is resolved against a per-segment probe set, and a counting validation
// decides whether the guess certifiably provides proportional justified
// representation. When validation fails, the pipeline elicits full
// preferences and falls back to the Method of Equal Shares. Equal-shares
// price arithmetic is exact (big-integer budgets over a common denominator).

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "riv/elicit.hpp"
#include "riv/model.hpp"
#include "riv/oracle.hpp"
#include "riv/verify.hpp"

namespace riv {

struct GuessArtifacts {
  int k = 0;
  std::vector<double> committee;                     // global sorted W_hat
  std::vector<int> seats;                            // k_t, indexed t-1
  std::vector<std::vector<double>> per_segment;      // W_hat_t, sorted
  std::vector<std::vector<double>> marked_points;    // per segment
  std::vector<std::vector<double>> probe_sets;       // P_t, sorted
  std::vector<std::pair<double, double>> core_zone;  // K_t open bounds
};

// Is c strictly inside the zone bounded by segment t's first and last
// marked points?
inline bool in_core_zone(const GuessArtifacts& g, int t, double c) {
  const auto& z = g.core_zone.at(static_cast<std::size_t>(t) - 1);
  return z.first < c && c < z.second;
}

// Candidate-neighbors of an evenly spaced grid of 15k points across segment
// t, plus the guessed members themselves. Neighbors that fall back to a
// segment endpoint are skipped: point queries may only name candidates.
inline std::vector<double> probe_set(const GuessArtifacts& guess, const CandidateSet& C, int k,
                                     int t) {
  const double z_lo = static_cast<double>(t);
  const std::span<const double> slice = C.segment_slice(t);
  std::vector<double> probes = guess.per_segment.at(static_cast<std::size_t>(t) - 1);
  const int grid = 15 * k;
  for (int j = 1; j <= grid; ++j) {
    const double g = z_lo + static_cast<double>(j) / static_cast<double>(grid);
    const NeighborResult lo = detail::neighbor_clamped(g, slice, Side::left, z_lo, z_lo + 1.0);
    const NeighborResult hi = detail::neighbor_clamped(g, slice, Side::right, z_lo, z_lo + 1.0);
    if (!lo.from_endpoint) probes.push_back(lo.position);
    if (!hi.from_endpoint) probes.push_back(hi.position);
  }
  std::sort(probes.begin(), probes.end());
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
  return probes;
}

// Guess a committee: each segment gets k_t = floor(p_t k) seats; marked
// points t + (2 xi - 1) / (2 (k_t + 2)) for xi = 2 .. k_t + 1 pick, left to
// right, the nearest not-yet-selected candidate (ties to the leftmost).
inline GuessArtifacts build_guess(const RivModel& model, const CandidateSet& C, int k) {
  if (model.kind() != ModelKind::uniform)
    throw std::invalid_argument("build_guess: uniform model required");
  if (k < 1) throw std::invalid_argument("build_guess: k must be at least 1");
  GuessArtifacts out;
  out.k = k;
  const int sigma = model.sigma();
  out.seats.resize(static_cast<std::size_t>(sigma));
  out.per_segment.resize(static_cast<std::size_t>(sigma));
  out.marked_points.resize(static_cast<std::size_t>(sigma));
  out.probe_sets.resize(static_cast<std::size_t>(sigma));
  out.core_zone.resize(static_cast<std::size_t>(sigma));

  for (int t = 1; t <= sigma; ++t) {
    const std::size_t ti = static_cast<std::size_t>(t) - 1;
    // Seats honor the intended ratio within the same tolerance the weight
    // sum is validated at, so p_t = 1/3, k = 3 still yields one seat.
    const int kt = static_cast<int>(std::floor(model.weight(t) * k + 1e-12 * k));
    out.seats[ti] = kt;
    const double denom = 2.0 * (kt + 2);
    for (int xi = 2; xi <= kt + 1; ++xi)
      out.marked_points[ti].push_back(static_cast<double>(t) + (2.0 * xi - 1.0) / denom);
    out.core_zone[ti] = {static_cast<double>(t) + 3.0 / denom,
                         static_cast<double>(t) + 1.0 - 3.0 / denom};

    const std::span<const double> pool = C.segment_slice(t);
    std::vector<char> taken(pool.size(), 0);
    std::vector<double>& w_t = out.per_segment[ti];
    for (double mark : out.marked_points[ti]) {
      std::size_t best = pool.size();
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (taken[i]) continue;
        const double d = std::abs(pool[i] - mark);
        if (d < best_dist) {
          best_dist = d;
          best = i;
        }
      }
      if (best == pool.size()) break;  // fewer candidates than seats
      taken[best] = 1;
      w_t.push_back(pool[best]);
    }
    std::sort(w_t.begin(), w_t.end());
    out.committee.insert(out.committee.end(), w_t.begin(), w_t.end());
  }
  std::sort(out.committee.begin(), out.committee.end());
  for (int t = 1; t <= sigma; ++t)
    out.probe_sets[static_cast<std::size_t>(t) - 1] = probe_set(out, C, k, t);
  return out;
}

// Point-query evidence from one voter's dialogue, reduced to the four
// positions bounding where the approval interval can still lie:
// phi2/phi3 are the extreme approved points, phi1/phi4 the nearest
// disapproved points (or segment endpoints) beyond them.
struct VoterEvidence {
  bool any_point_approved = false;
  bool empty_certificate = false;
  int segment = 0;  // 0 when unknown
  double phi1 = 0.0, phi2 = 0.0, phi3 = 0.0, phi4 = 0.0;
};

inline VoterEvidence summarize_evidence(const VoterOracle& oracle, const RivModel& model,
                                        const ResolveOutcome& outcome) {
  VoterEvidence ev;
  ev.segment = outcome.segment.value_or(0);
  ev.empty_certificate = outcome.status == ResolveStatus::resolved_empty_certificate;
  std::vector<double> approved;
  std::vector<double> disapproved;
  for (const DialogueEntry& e : oracle.log()) {
    if (e.kind != QueryKind::point) continue;
    (e.answer ? approved : disapproved).push_back(e.x);
  }
  if (approved.empty()) return ev;
  ev.any_point_approved = true;
  std::sort(disapproved.begin(), disapproved.end());
  ev.phi2 = *std::min_element(approved.begin(), approved.end());
  ev.phi3 = *std::max_element(approved.begin(), approved.end());
  ev.phi1 = neighbor(ev.phi2, disapproved, Side::left, model).position;
  ev.phi4 = neighbor(ev.phi3, disapproved, Side::right, model).position;
  return ev;
}

// Could this voter, consistently with her answers, approve c while
// disapproving everything in S? Exact half-open interval intersections.
inline bool poss(const VoterEvidence& ev, double c, std::span<const double> S,
                 const RivModel& model) {
  if (!ev.any_point_approved)
    throw std::logic_error("poss: voter has no approved point query");
  if (std::binary_search(S.begin(), S.end(), c)) return false;
  const NeighborResult cl = neighbor(c, S, Side::left, model);
  const NeighborResult cr = neighbor(c, S, Side::right, model);
  return std::max(ev.phi1, cl.position) < std::min(ev.phi2, c) &&
         std::max(ev.phi3, c) < std::min(ev.phi4, cr.position);
}

struct ValidationFailure {
  int ell = 0;
  int candidate = 0;  // global candidate index
  int j = 0;
};

class ValidationTally {
 public:
  ValidationTally() = default;
  ValidationTally(int k, int m) : k_(k), m_(m), counts_(static_cast<std::size_t>(k) * k * m, 0) {}

  long long& at(int ell, int candidate, int j) {
    return counts_[(static_cast<std::size_t>(ell) - 1) * static_cast<std::size_t>(k_) * m_ +
                   static_cast<std::size_t>(j) * static_cast<std::size_t>(m_) +
                   static_cast<std::size_t>(candidate)];
  }
  long long at(int ell, int candidate, int j) const {
    return counts_[(static_cast<std::size_t>(ell) - 1) * static_cast<std::size_t>(k_) * m_ +
                   static_cast<std::size_t>(j) * static_cast<std::size_t>(m_) +
                   static_cast<std::size_t>(candidate)];
  }

  long long unlocated = 0;  // u: no approved point and no empty certificate
  bool verdict = true;
  std::optional<ValidationFailure> first_failure;
  long long max_count = 0;
  std::optional<ValidationFailure> max_triple;

 private:
  int k_ = 0;
  int m_ = 0;
  std::vector<long long> counts_;
};

// Counting validation of a guessed committee. For every threshold ell,
// unelected candidate c, and window split j, counts the voters that could
// still belong to a group witnessing a violation; the verdict flips to false
// as soon as some count plus u reaches the real-valued threshold n*ell/k
// (compared in exact integers).
inline ValidationTally validate(const GuessArtifacts& guess,
                                const std::vector<VoterEvidence>& evidence,
                                const CandidateSet& C, int k, const RivModel& model) {
  const long long n = static_cast<long long>(evidence.size());
  const int m = static_cast<int>(C.size());
  ValidationTally tally(k, m);
  for (const VoterEvidence& ev : evidence)
    if (!ev.any_point_approved && !ev.empty_certificate) ++tally.unlocated;

  // Bucket voters with usable evidence by segment; only same-segment voters
  // can ever satisfy poss for a candidate.
  std::vector<std::vector<const VoterEvidence*>> by_segment(
      static_cast<std::size_t>(model.sigma()) + 1);
  for (const VoterEvidence& ev : evidence)
    if (ev.any_point_approved && ev.segment >= 1 && ev.segment <= model.sigma())
      by_segment[static_cast<std::size_t>(ev.segment)].push_back(&ev);

  const std::vector<double>& W = guess.committee;
  const std::vector<double>& pos = C.positions();
  for (int ell = 1; ell <= k; ++ell) {
    for (int ci = 0; ci < m; ++ci) {
      const double c = pos[static_cast<std::size_t>(ci)];
      if (std::binary_search(W.begin(), W.end(), c)) continue;
      const int t = model.segment_of(c).value();
      const double z_lo = static_cast<double>(t);
      const int rho = static_cast<int>(std::lower_bound(W.begin(), W.end(), c) - W.begin());
      for (int j = 0; j < ell; ++j) {
        // S = W \ W[rho-j : rho+ell-1-j]; its neighbors around c collapse to
        // two slice lookups clamped at the segment endpoints.
        const int left_idx = rho - j - 1;
        const int right_idx = rho + ell - 1 - j;
        const double cl = std::max(
            left_idx >= 0 ? W[static_cast<std::size_t>(left_idx)] : -std::numeric_limits<double>::infinity(),
            z_lo);
        const double cr = std::min(right_idx < static_cast<int>(W.size())
                                       ? W[static_cast<std::size_t>(right_idx)]
                                       : std::numeric_limits<double>::infinity(),
                                   z_lo + 1.0);
        long long count = 0;
        for (const VoterEvidence* ev : by_segment[static_cast<std::size_t>(t)]) {
          if (std::max(ev->phi1, cl) < std::min(ev->phi2, c) &&
              std::max(ev->phi3, c) < std::min(ev->phi4, cr))
            ++count;
        }
        tally.at(ell, ci, j) = count;
        if (count > tally.max_count) {
          tally.max_count = count;
          tally.max_triple = ValidationFailure{ell, ci, j};
        }
        if ((count + tally.unlocated) * k >= n * ell) {
          tally.verdict = false;
          tally.first_failure = ValidationFailure{ell, ci, j};
          return tally;
        }
      }
    }
  }
  return tally;
}

namespace detail {

using bigint = boost::multiprecision::cpp_int;

}  // namespace detail

// Method of Equal Shares for approval ballots with unit costs: every voter
// holds budget k/n, and the candidate whose supporters can cover cost 1 at
// the lowest uniform price is bought until no candidate is affordable.
// Budgets are big integers over a common denominator, so every comparison is
// exact; price ties break toward the lower candidate index.
inline std::vector<int> mes(const Election& e, int k) {
  e.validate();
  const int n = e.num_voters();
  const int m = e.num_candidates();
  if (n == 0 || k == 0) return {};
  std::vector<std::vector<int>> supporters(static_cast<std::size_t>(m));
  for (int v = 0; v < n; ++v)
    for (int c : e.ballots[static_cast<std::size_t>(v)])
      supporters[static_cast<std::size_t>(c)].push_back(v);

  detail::bigint denom = n;                                        // budgets in units of 1/denom
  std::vector<detail::bigint> budget(static_cast<std::size_t>(n), detail::bigint(k));
  std::vector<char> elected(static_cast<std::size_t>(m), 0);
  std::vector<int> committee;
  std::vector<detail::bigint> sorted_budgets;

  while (static_cast<int>(committee.size()) < k) {
    int best = -1;
    detail::bigint best_paid = 0;  // price = paid / (payers * denom)
    long long best_payers = 0;
    for (int c = 0; c < m; ++c) {
      if (elected[static_cast<std::size_t>(c)]) continue;
      const auto& sup = supporters[static_cast<std::size_t>(c)];
      if (sup.empty()) continue;
      detail::bigint total = 0;
      for (int v : sup) total += budget[static_cast<std::size_t>(v)];
      if (total < denom) continue;  // supporters cannot cover cost 1
      sorted_budgets.clear();
      for (int v : sup) sorted_budgets.push_back(budget[static_cast<std::size_t>(v)]);
      std::sort(sorted_budgets.begin(), sorted_budgets.end());
      // After the i poorest pay everything, the rest pay price rho each;
      // the first feasible prefix gives the minimal rho.
      detail::bigint prefix = 0;
      detail::bigint paid = 0;
      long long payers = 0;
      for (std::size_t i = 0; i < sorted_budgets.size(); ++i) {
        const detail::bigint rest_paid = denom - prefix;
        const long long rest = static_cast<long long>(sorted_budgets.size() - i);
        if (rest_paid <= rest * sorted_budgets[i]) {
          paid = rest_paid;
          payers = rest;
          break;
        }
        prefix += sorted_budgets[i];
      }
      if (payers == 0) continue;  // unreachable given total >= denom
      if (best < 0 || paid * best_payers < best_paid * payers) {
        best = c;
        best_paid = paid;
        best_payers = payers;
      }
    }
    if (best < 0) break;

    // Charge the supporters: rescale all budgets so the capped payment is an
    // integer, then deduct.
    if (best_payers > 1) {
      denom *= best_payers;
      for (auto& b : budget) b *= best_payers;
    }
    for (int v : supporters[static_cast<std::size_t>(best)]) {
      detail::bigint& b = budget[static_cast<std::size_t>(v)];
      if (b <= best_paid)
        b = 0;
      else
        b -= best_paid;
    }
    elected[static_cast<std::size_t>(best)] = 1;
    committee.push_back(best);
  }
  std::sort(committee.begin(), committee.end());
  return committee;
}

// Pads a committee to exactly k seats with unelected candidates in
// descending approval count, ties toward the lower position. Adding seats
// can only extend coverage, so a committee that already provides
// proportional representation keeps it.
inline std::vector<int> complete(std::vector<int> partial, const Election& e, int k) {
  if (k > e.num_candidates()) throw std::invalid_argument("complete: k exceeds the candidate count");
  std::vector<char> in(static_cast<std::size_t>(e.num_candidates()), 0);
  for (int c : partial) in[static_cast<std::size_t>(c)] = 1;
  std::vector<long long> count(static_cast<std::size_t>(e.num_candidates()), 0);
  for (const auto& b : e.ballots)
    for (int c : b) ++count[static_cast<std::size_t>(c)];
  std::vector<int> rest;
  for (int c = 0; c < e.num_candidates(); ++c)
    if (!in[static_cast<std::size_t>(c)]) rest.push_back(c);
  std::stable_sort(rest.begin(), rest.end(), [&](int a, int b) {
    return count[static_cast<std::size_t>(a)] > count[static_cast<std::size_t>(b)];
  });
  for (int c : rest) {
    if (static_cast<int>(partial.size()) >= k) break;
    partial.push_back(c);
  }
  std::sort(partial.begin(), partial.end());
  return partial;
}

enum class PipelinePath { guessed, fallback };

struct VoterQueryStats {
  std::int64_t resolve_distinct = 0;  // queries spent locating and resolving
  std::int64_t resolve_gross = 0;
  std::int64_t total_distinct = 0;  // includes full elicitation on fallback
  std::int64_t total_gross = 0;
};

struct PipelineResult {
  std::vector<double> committee;  // sorted positions, exactly k of them
  PipelinePath path = PipelinePath::guessed;
  GuessArtifacts guess;
  ValidationTally tally;
  std::vector<VoterQueryStats> voter_stats;
  std::vector<ResolveOutcome> outcomes;  // per voter, probe-set resolution
  Election elicited;                     // ballots backing the committee choice
};

// End-to-end committee selection: guess, resolve every voter against her
// segment's probe set, validate; on success pad the guess to k seats, on
// failure elicit full preferences and run equal shares.
inline PipelineResult pjr_pipeline(const RivModel& model, const CandidateSet& C, int k,
                                   std::vector<VoterOracle>& oracles) {
  if (model.kind() != ModelKind::uniform)
    throw std::invalid_argument("pjr_pipeline: uniform model required");
  if (k < 1 || k > static_cast<int>(C.size()))
    throw std::invalid_argument("pjr_pipeline: k must lie in [1, m]");
  if (oracles.empty()) throw std::invalid_argument("pjr_pipeline: no voters");

  PipelineResult result;
  result.guess = build_guess(model, C, k);
  std::vector<int> all_segments(static_cast<std::size_t>(model.sigma()));
  for (int t = 1; t <= model.sigma(); ++t) all_segments[static_cast<std::size_t>(t) - 1] = t;

  std::vector<VoterEvidence> evidence;
  evidence.reserve(oracles.size());
  result.voter_stats.resize(oracles.size());
  result.outcomes.reserve(oracles.size());
  for (std::size_t vi = 0; vi < oracles.size(); ++vi) {
    VoterOracle& oracle = oracles[vi];
    const int t = segment_search(oracle, all_segments).value();
    const auto& probes = result.guess.probe_sets[static_cast<std::size_t>(t) - 1];
    ResolveOutcome outcome;
    if (probes.empty()) {
      // Segment without candidates: the approval set is structurally empty.
      outcome.segment = t;
      outcome.status = ResolveStatus::resolved_empty_certificate;
      outcome.log_begin = outcome.log_end = oracle.log().size();
    } else {
      outcome = resolve(oracle, model, C, probes, t);
    }
    evidence.push_back(summarize_evidence(oracle, model, outcome));
    result.outcomes.push_back(std::move(outcome));
    const QueryStats st = oracle.stats();
    result.voter_stats[vi].resolve_distinct = st.total;
    result.voter_stats[vi].resolve_gross = st.gross_total;
  }

  result.tally = validate(result.guess, evidence, C, k, model);

  Election election;
  election.positions = C.positions();
  election.k = k;
  election.ballots.resize(oracles.size());

  std::vector<int> committee_idx;
  if (result.tally.verdict) {
    result.path = PipelinePath::guessed;
    for (std::size_t vi = 0; vi < oracles.size(); ++vi) {
      auto& ballot = election.ballots[vi];
      for (double p : result.outcomes[vi].approved)
        ballot.push_back(static_cast<int>(*C.index_of(p)));
    }
    for (double p : result.guess.committee)
      committee_idx.push_back(static_cast<int>(*C.index_of(p)));
    committee_idx = complete(std::move(committee_idx), election, k);
  } else {
    result.path = PipelinePath::fallback;
    for (std::size_t vi = 0; vi < oracles.size(); ++vi) {
      auto& ballot = election.ballots[vi];
      for (double p : elicit_full(oracles[vi], model, C))
        ballot.push_back(static_cast<int>(*C.index_of(p)));
    }
    committee_idx = complete(mes(election, k), election, k);
  }

  for (int c : committee_idx) result.committee.push_back(C.positions()[static_cast<std::size_t>(c)]);
  for (std::size_t vi = 0; vi < oracles.size(); ++vi) {
    const QueryStats st = oracles[vi].stats();
    result.voter_stats[vi].total_distinct = st.total;
    result.voter_stats[vi].total_gross = st.gross_total;
  }
  result.elicited = std::move(election);
  return result;
}

}  // namespace riv
