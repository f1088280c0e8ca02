#pragma once

// Ground-truth proportionality checkers. The candidate-interval checker runs
// in polynomial time and is exact for consecutive ballots; the brute-force
// checkers evaluate the PJR+ and core definitions literally at tiny scale
// and exist to cross-validate everything else. All group-size thresholds are
// compared in exact integer arithmetic.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace riv {

class VerifyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Full-information approval election. Ballots are sorted candidate-index
// sets; candidate positions fix the linear order for the CI property.
struct Election {
  std::vector<double> positions;           // sorted, distinct
  std::vector<std::vector<int>> ballots;   // per voter, sorted indices
  int k = 0;

  int num_candidates() const { return static_cast<int>(positions.size()); }
  int num_voters() const { return static_cast<int>(ballots.size()); }

  bool ballots_consecutive() const {
    for (const auto& b : ballots)
      for (std::size_t i = 1; i < b.size(); ++i)
        if (b[i] != b[i - 1] + 1) return false;
    return true;
  }

  void validate() const {
    if (k < 0 || k > num_candidates()) throw VerifyError("election: k must lie in [0, m]");
    for (std::size_t i = 1; i < positions.size(); ++i)
      if (!(positions[i - 1] < positions[i]))
        throw VerifyError("election: candidate positions must be strictly increasing");
    for (const auto& b : ballots)
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i] < 0 || b[i] >= num_candidates()) throw VerifyError("election: ballot index out of range");
        if (i > 0 && b[i] <= b[i - 1]) throw VerifyError("election: ballots must be sorted and distinct");
      }
  }
};

struct Witness {
  enum class Axiom { pjr_plus, core };
  Axiom axiom = Axiom::pjr_plus;
  int ell = 0;
  std::optional<int> candidate;    // jointly approved unelected candidate (PJR+)
  std::vector<int> deviating_set;  // T (core)
  std::vector<int> group;          // voter ids
  int j = 0;                       // window split recorded by the CI checker
};

namespace detail {

inline void require_sorted_committee(const Election& e, std::span<const int> committee) {
  for (std::size_t i = 0; i < committee.size(); ++i) {
    if (committee[i] < 0 || committee[i] >= e.num_candidates())
      throw VerifyError("committee: candidate index out of range");
    if (i > 0 && committee[i] <= committee[i - 1])
      throw VerifyError("committee: indices must be sorted and distinct");
  }
}

// Does some group of >= n*ell/k voters jointly approve an unelected
// candidate while collectively covering < ell committee members? Exact for
// CI ballots; threshold is the real value n*ell/k under >= comparison.
// The committee may be smaller than the seat count used for thresholds.
inline std::optional<Witness> ci_group_violation(const Election& e, std::span<const int> W,
                                                 int k_seats) {
  const int n = e.num_voters();
  const int m = e.num_candidates();
  // Per voter: ballot as index range [lo, hi], and the window of committee
  // slots covered, as [wl, wr) over W's index space.
  std::vector<int> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
  std::vector<int> wl(static_cast<std::size_t>(n)), wr(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    const auto& b = e.ballots[static_cast<std::size_t>(v)];
    if (b.empty()) {
      lo[v] = 1;
      hi[v] = 0;
      continue;
    }
    lo[v] = b.front();
    hi[v] = b.back();
    wl[v] = static_cast<int>(std::lower_bound(W.begin(), W.end(), lo[v]) - W.begin());
    wr[v] = static_cast<int>(std::upper_bound(W.begin(), W.end(), hi[v]) - W.begin());
  }
  std::vector<char> in_w(static_cast<std::size_t>(m), 0);
  for (int c : W) in_w[static_cast<std::size_t>(c)] = 1;

  for (int ell = 1; ell <= k_seats; ++ell) {
    for (int c = 0; c < m; ++c) {
      if (in_w[static_cast<std::size_t>(c)]) continue;
      const int rho = static_cast<int>(std::lower_bound(W.begin(), W.end(), c) - W.begin());
      for (int j = 0; j < ell; ++j) {
        const int rb = std::clamp(rho - j, 0, static_cast<int>(W.size()));
        const int re = std::clamp(rho + ell - 1 - j, rb, static_cast<int>(W.size()));
        const auto member = [&](int v) {
          if (lo[v] > hi[v] || c < lo[v] || c > hi[v]) return false;
          return wl[v] >= wr[v] || (wl[v] >= rb && wr[v] <= re);
        };
        long long count = 0;
        for (int v = 0; v < n; ++v)
          if (member(v)) ++count;
        if (count * k_seats >= static_cast<long long>(n) * ell) {
          Witness w;
          w.axiom = Witness::Axiom::pjr_plus;
          w.ell = ell;
          w.candidate = c;
          w.j = j;
          for (int v = 0; v < n; ++v)
            if (member(v)) w.group.push_back(v);
          return w;
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Exact PJR+ check for candidate-interval elections. Walks every threshold
// ell, every unelected candidate c, and every split j of a window of ell-1
// committee members around c; a group of >= n*ell/k voters whose committee
// approvals all fall inside the window is a violation. Deterministic: the
// first witness has the smallest ell, then the leftmost c, then the
// smallest j.
inline std::optional<Witness> check_pjr_plus_ci(const Election& e, std::span<const int> committee) {
  e.validate();
  detail::require_sorted_committee(e, committee);
  if (static_cast<int>(committee.size()) != e.k)
    throw VerifyError("check_pjr_plus_ci: committee size must equal k");
  if (!e.ballots_consecutive())
    throw VerifyError("check_pjr_plus_ci: ballots are not candidate-interval");
  return detail::ci_group_violation(e, committee, e.k);
}

// Same group condition evaluated for a partial committee against the full
// seat-count threshold; used to audit an unpadded guess.
inline std::optional<Witness> check_pjr_plus_ci_partial(const Election& e,
                                                        std::span<const int> committee,
                                                        int k_seats) {
  e.validate();
  detail::require_sorted_committee(e, committee);
  if (!e.ballots_consecutive())
    throw VerifyError("check_pjr_plus_ci_partial: ballots are not candidate-interval");
  return detail::ci_group_violation(e, committee, k_seats);
}

// Literal PJR+ check by subset enumeration. Any approval structure, but the
// voter count is hard-capped.
inline std::optional<Witness> check_pjr_plus_bruteforce(const Election& e,
                                                        std::span<const int> committee) {
  e.validate();
  detail::require_sorted_committee(e, committee);
  const int n = e.num_voters();
  const int m = e.num_candidates();
  if (n > 14) throw VerifyError("check_pjr_plus_bruteforce: instance too large (n > 14)");
  if (m > 30) throw VerifyError("check_pjr_plus_bruteforce: instance too large (m > 30)");
  std::vector<std::uint32_t> ballot_mask(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v)
    for (int c : e.ballots[static_cast<std::size_t>(v)])
      ballot_mask[static_cast<std::size_t>(v)] |= std::uint32_t{1} << c;
  std::uint32_t w_mask = 0;
  for (int c : committee) w_mask |= std::uint32_t{1} << c;

  for (int ell = 1; ell <= e.k; ++ell) {
    for (std::uint32_t g = 1; g < (std::uint32_t{1} << n); ++g) {
      const int size = std::popcount(g);
      if (static_cast<long long>(size) * e.k < static_cast<long long>(n) * ell) continue;
      std::uint32_t common = ~std::uint32_t{0};
      std::uint32_t joint = 0;
      for (int v = 0; v < n; ++v)
        if (g & (std::uint32_t{1} << v)) {
          common &= ballot_mask[static_cast<std::size_t>(v)];
          joint |= ballot_mask[static_cast<std::size_t>(v)];
        }
      if ((common & ~w_mask) == 0) continue;            // no jointly approved unelected candidate
      if (std::popcount(joint & w_mask) >= ell) continue;  // enough coverage
      Witness w;
      w.axiom = Witness::Axiom::pjr_plus;
      w.ell = ell;
      w.candidate = std::countr_zero(common & ~w_mask);
      for (int v = 0; v < n; ++v)
        if (g & (std::uint32_t{1} << v)) w.group.push_back(v);
      return w;
    }
  }
  return std::nullopt;
}

// Literal core check: for every alternative set T with |T| <= k, the group
// of voters who strictly prefer T must stay below n*|T|/k.
inline std::optional<Witness> check_core_bruteforce(const Election& e,
                                                    std::span<const int> committee) {
  e.validate();
  detail::require_sorted_committee(e, committee);
  const int n = e.num_voters();
  const int m = e.num_candidates();
  if (n > 20) throw VerifyError("check_core_bruteforce: instance too large (n > 20)");
  if (m > 16) throw VerifyError("check_core_bruteforce: instance too large (m > 16)");
  std::vector<std::uint32_t> ballot_mask(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v)
    for (int c : e.ballots[static_cast<std::size_t>(v)])
      ballot_mask[static_cast<std::size_t>(v)] |= std::uint32_t{1} << c;
  std::uint32_t w_mask = 0;
  for (int c : committee) w_mask |= std::uint32_t{1} << c;
  std::vector<int> w_score(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v)
    w_score[static_cast<std::size_t>(v)] = std::popcount(ballot_mask[static_cast<std::size_t>(v)] & w_mask);

  for (std::uint32_t tset = 1; tset < (std::uint32_t{1} << m); ++tset) {
    const int tsize = std::popcount(tset);
    if (tsize > e.k) continue;
    std::vector<int> improvers;
    for (int v = 0; v < n; ++v)
      if (std::popcount(ballot_mask[static_cast<std::size_t>(v)] & tset) > w_score[static_cast<std::size_t>(v)])
        improvers.push_back(v);
    if (static_cast<long long>(improvers.size()) * e.k >= static_cast<long long>(n) * tsize) {
      Witness w;
      w.axiom = Witness::Axiom::core;
      w.ell = tsize;
      for (int c = 0; c < m; ++c)
        if (tset & (std::uint32_t{1} << c)) w.deviating_set.push_back(c);
      w.group = std::move(improvers);
      return w;
    }
  }
  return std::nullopt;
}

// Re-validates a witness against the raw election.
inline bool witness_replay(const Election& e, std::span<const int> committee, const Witness& w) {
  const int n = e.num_voters();
  std::vector<char> in_w(static_cast<std::size_t>(e.num_candidates()), 0);
  for (int c : committee) in_w[static_cast<std::size_t>(c)] = 1;
  if (w.group.empty()) return false;
  if (w.axiom == Witness::Axiom::pjr_plus) {
    if (!w.candidate || in_w[static_cast<std::size_t>(*w.candidate)]) return false;
    if (static_cast<long long>(w.group.size()) * e.k < static_cast<long long>(n) * w.ell) return false;
    std::vector<char> covered(static_cast<std::size_t>(e.num_candidates()), 0);
    for (int v : w.group) {
      const auto& b = e.ballots.at(static_cast<std::size_t>(v));
      if (!std::binary_search(b.begin(), b.end(), *w.candidate)) return false;
      for (int c : b) covered[static_cast<std::size_t>(c)] = 1;
    }
    long long coverage = 0;
    for (int c : committee) coverage += covered[static_cast<std::size_t>(c)];
    return coverage < w.ell;
  }
  // core
  if (w.deviating_set.empty() || static_cast<int>(w.deviating_set.size()) > e.k) return false;
  if (static_cast<long long>(w.group.size()) * e.k <
      static_cast<long long>(n) * static_cast<long long>(w.deviating_set.size()))
    return false;
  for (int v : w.group) {
    const auto& b = e.ballots.at(static_cast<std::size_t>(v));
    long long t_score = 0;
    long long w_score = 0;
    for (int c : w.deviating_set)
      if (std::binary_search(b.begin(), b.end(), c)) ++t_score;
    for (int c : committee)
      if (std::binary_search(b.begin(), b.end(), c)) ++w_score;
    if (t_score <= w_score) return false;
  }
  return true;
}

}  // namespace riv
