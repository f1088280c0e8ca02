#pragma once

// Adaptive preference elicitation. Stage one locates the voter's segment by
// binary search over interval queries; stage two probes the candidate
// neighbors of a dyadic grid of exponentially increasing resolution until a
// point query lands inside the approval interval, then pins the interval's
// endpoints with two more binary searches. A voter that dodges every probe
// is resolved by querying every target candidate in her segment.

#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "riv/model.hpp"
#include "riv/oracle.hpp"

namespace riv {

enum class ResolveStatus {
  resolved_nonempty,           // some point query was approved; approved = A(v) cap P exactly
  resolved_empty_certificate,  // dialogue proves A(v) cap C is empty
  resolved_by_fallback,        // exhaustive stage ran and found approvals
  no_point_approved,           // exhaustive stage ran and found nothing
  segment_not_found,           // voter lies in no segment touched by P
};

struct ResolveOutcome {
  std::optional<int> segment;
  std::vector<double> approved;  // sorted positions of P known approved
  ResolveStatus status = ResolveStatus::segment_not_found;
  int rounds_entered = 0;
  std::size_t log_begin = 0;  // slice of the oracle's dialogue used
  std::size_t log_end = 0;
};

// Binary search for the segment containing the voter, over a sorted list of
// candidate segment indices. Uses at most ceil(log2 |T|) + 1 interval
// queries; returns nothing when the voter sits in none of the listed
// segments.
inline std::optional<int> segment_search(VoterOracle& oracle, std::span<const int> T) {
  if (T.empty()) throw std::invalid_argument("segment_search: empty segment list");
  std::size_t lower = 0;
  std::size_t upper = T.size() - 1;
  while (upper > lower) {
    const std::size_t mid = (lower + upper) / 2;
    if (oracle.interval_query(static_cast<double>(T[lower]), static_cast<double>(T[mid]) + 1.0))
      upper = mid;
    else
      lower = mid + 1;
  }
  if (oracle.interval_query(static_cast<double>(T[lower]), static_cast<double>(T[lower]) + 1.0))
    return T[lower];
  return std::nullopt;
}

namespace detail {

inline int ceil_log2(std::size_t n) {
  if (n <= 1) return 0;
  return static_cast<int>(std::bit_width(n - 1));
}

// First approved position in positions[lo, hi) under a predicate that is
// monotone in position (everything right of the approval threshold answers
// yes). Returns the index or hi when nothing is approved.
inline std::size_t find_first_approved(VoterOracle& oracle, std::span<const double> positions,
                                       std::size_t lo, std::size_t hi) {
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo - 1) / 2;
    if (oracle.point_query(positions[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

// Last approved position in positions[lo, hi) under the mirrored monotone
// predicate. Returns the index + 1, or lo when nothing is approved.
inline std::size_t find_last_approved_end(VoterOracle& oracle, std::span<const double> positions,
                                          std::size_t lo, std::size_t hi) {
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (oracle.point_query(positions[mid]))
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace detail

// Resolves a voter for the target set P (a sorted subset of the candidate
// positions): afterwards the approval status of every p in P is pinned to 0
// or 1. When known_segment is given and resegment is false, the redundant
// segment search is skipped; the default keeps it, where the dialogue cache
// absorbs its queries.
inline ResolveOutcome resolve(VoterOracle& oracle, const RivModel& model, const CandidateSet& C,
                              std::span<const double> P,
                              std::optional<int> known_segment = std::nullopt,
                              bool resegment = true) {
  if (model.kind() != ModelKind::uniform)
    throw std::invalid_argument("resolve: uniform model required");
  if (P.empty()) throw std::invalid_argument("resolve: empty target set");
  for (std::size_t i = 0; i < P.size(); ++i) {
    if (i > 0 && !(P[i - 1] < P[i])) throw std::invalid_argument("resolve: P must be sorted and distinct");
    if (!C.index_of(P[i])) throw std::invalid_argument("resolve: P must be a subset of the candidates");
  }

  ResolveOutcome out;
  out.log_begin = oracle.log().size();
  const auto finish = [&](ResolveStatus status) {
    out.status = status;
    out.log_end = oracle.log().size();
    return out;
  };

  // Stage 1: find the segment among those P touches.
  if (known_segment && !resegment) {
    out.segment = known_segment;
  } else {
    std::vector<int> touched;
    for (double p : P) {
      const int tp = model.segment_of(p).value();
      if (touched.empty() || touched.back() != tp) touched.push_back(tp);
    }
    out.segment = segment_search(oracle, touched);
    if (!out.segment) return finish(ResolveStatus::segment_not_found);
  }
  const int t = *out.segment;
  const double z_lo = static_cast<double>(t);
  const double z_hi = z_lo + 1.0;
  const std::span<const double> all = C.positions();

  // Stage 2: dyadic grid probing.
  const int rounds = detail::ceil_log2(P.size());
  for (int i = 1; i <= rounds; ++i) {
    out.rounds_entered = i;
    const double step = std::ldexp(1.0, -i);  // exact binary fraction
    const std::int64_t grid_points = std::int64_t{1} << i;
    for (std::int64_t j = 1; j <= grid_points; ++j) {
      const double g = z_lo + static_cast<double>(j) * step;
      const NeighborResult lo = detail::neighbor_clamped(g, all, Side::left, z_lo, z_hi);
      const NeighborResult hi = detail::neighbor_clamped(g, all, Side::right, z_lo, z_hi);
      bool lo_yes = false;
      bool hi_yes = false;
      if (!lo.from_endpoint) lo_yes = oracle.point_query(lo.position);
      if (!hi.from_endpoint) hi_yes = oracle.point_query(hi.position);
      if (lo_yes || hi_yes) {
        // Known approved anchors; everything in P between them approves too.
        const double a0 = lo_yes ? lo.position : hi.position;
        const double b0 = hi_yes ? hi.position : lo.position;
        const double cell_lo = z_lo + static_cast<double>(j - 1) * step;
        const double cell_hi = z_lo + static_cast<double>(j + 1) * step;

        // Left endpoint search: P inside (cell_lo, a0), closed at the
        // segment start for the first cell.
        const std::size_t lb = (j == 1)
                                   ? static_cast<std::size_t>(std::lower_bound(P.begin(), P.end(), z_lo) - P.begin())
                                   : static_cast<std::size_t>(std::upper_bound(P.begin(), P.end(), cell_lo) - P.begin());
        const std::size_t le = static_cast<std::size_t>(std::lower_bound(P.begin(), P.end(), a0) - P.begin());
        const std::size_t first_left = detail::find_first_approved(oracle, P, lb, le);
        const bool has_left = first_left < le;

        // Right endpoint search: P inside (b0, cell_hi), closed at the
        // segment end for the last cell.
        const std::size_t rb = static_cast<std::size_t>(std::upper_bound(P.begin(), P.end(), b0) - P.begin());
        const std::size_t re = (j == grid_points)
                                   ? static_cast<std::size_t>(std::upper_bound(P.begin(), P.end(), z_hi) - P.begin())
                                   : static_cast<std::size_t>(std::lower_bound(P.begin(), P.end(), cell_hi) - P.begin());
        const std::size_t last_right_end = detail::find_last_approved_end(oracle, P, rb, re);
        const bool has_right = last_right_end > rb;

        // Members of P between the anchors are approved without queries.
        const std::size_t mb = static_cast<std::size_t>(std::lower_bound(P.begin(), P.end(), a0) - P.begin());
        const std::size_t me = static_cast<std::size_t>(std::upper_bound(P.begin(), P.end(), b0) - P.begin());
        const bool has_mid = mb < me;

        std::optional<std::size_t> first, last;
        if (has_left) first = first_left;
        else if (has_mid) first = mb;
        else if (has_right) first = rb;
        if (has_right) last = last_right_end - 1;
        else if (has_mid) last = me - 1;
        else if (has_left) last = le - 1;

        if (first) {
          out.approved.assign(P.begin() + static_cast<std::ptrdiff_t>(*first),
                              P.begin() + static_cast<std::ptrdiff_t>(*last) + 1);
        }
        return finish(ResolveStatus::resolved_nonempty);
      }
      // Both neighbors known disapproving (or standing endpoints): if the
      // voter fits between them, no candidate at all is approved.
      if (oracle.interval_query(lo.position, hi.position))
        return finish(ResolveStatus::resolved_empty_certificate);
    }
  }

  // Last resort: ask about every target candidate in the located segment.
  const auto fb = std::lower_bound(P.begin(), P.end(), z_lo);
  const auto fe = std::upper_bound(P.begin(), P.end(), z_hi);
  for (auto it = fb; it != fe; ++it) {
    if (model.segment_of(*it).value_or(-1) != t) continue;
    if (oracle.point_query(*it)) out.approved.push_back(*it);
  }
  return finish(out.approved.empty() ? ResolveStatus::no_point_approved
                                     : ResolveStatus::resolved_by_fallback);
}

// Full-information elicitation: resolve with P = C. The result equals
// A(v) cap C exactly, at an expected O(log m) query cost.
inline std::vector<double> elicit_full(VoterOracle& oracle, const RivModel& model,
                                       const CandidateSet& C) {
  return resolve(oracle, model, C, C.positions()).approved;
}

}  // namespace riv
