#pragma once

// One-bit query channel to a simulated voter. The oracle hides an approval
// interval, answers point queries ("do you approve the candidate at x?") and
// interval queries ("is your whole approval interval inside [x, y]?"),
// enforces the query grammar, logs the dialogue, and counts communication.
// Repeated identical queries are answered from cache and are not re-counted;
// the counters measure information, not retransmissions.

#include <bit>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "riv/model.hpp"

namespace riv {

class ProtocolViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class QueryKind { point, interval };

struct DialogueEntry {
  std::int64_t seq = 0;
  int voter_id = 0;
  QueryKind kind = QueryKind::point;
  double x = 0.0;
  double y = 0.0;  // equals x for point queries
  bool answer = false;
};

struct QueryStats {
  std::int64_t point_count = 0;     // distinct answered point queries
  std::int64_t interval_count = 0;  // distinct answered interval queries
  std::int64_t total = 0;
  std::int64_t gross_point = 0;  // including cache hits
  std::int64_t gross_interval = 0;
  std::int64_t gross_total = 0;
};

// Legal query positions, shared by every oracle of one election: point
// queries may only name candidate positions; interval endpoints may also be
// segment endpoints.
class QueryUniverse {
 public:
  QueryUniverse(const CandidateSet& candidates, const RivModel& model)
      : candidates_(candidates.positions()) {
    anchors_ = candidates_;
    for (const Segment& s : model.segments()) {
      anchors_.push_back(s.z_minus);
      anchors_.push_back(s.z_plus);
    }
    std::sort(anchors_.begin(), anchors_.end());
    anchors_.erase(std::unique(anchors_.begin(), anchors_.end()), anchors_.end());
  }

  bool is_candidate(double x) const {
    return std::binary_search(candidates_.begin(), candidates_.end(), x);
  }
  bool is_anchor(double x) const {
    return std::binary_search(anchors_.begin(), anchors_.end(), x);
  }

 private:
  std::vector<double> candidates_;
  std::vector<double> anchors_;
};

class VoterOracle {
 public:
  VoterOracle(int voter_id, VoterInterval hidden, std::shared_ptr<const QueryUniverse> universe)
      : voter_id_(voter_id), hidden_(hidden), universe_(std::move(universe)) {
    if (!universe_) throw std::invalid_argument("VoterOracle: null query universe");
  }

  bool point_query(double x) {
    ++stats_.gross_point;
    ++stats_.gross_total;
    if (!universe_->is_candidate(x)) {
      violations_.push_back({next_seq(), voter_id_, QueryKind::point, x, x, false});
      throw ProtocolViolation("point query at a non-candidate position");
    }
    const std::uint64_t key = std::bit_cast<std::uint64_t>(x);
    if (const auto it = point_cache_.find(key); it != point_cache_.end()) return it->second;
    const bool ans = hidden_.a <= x && x <= hidden_.b;
    point_cache_.emplace(key, ans);
    log_.push_back({next_seq(), voter_id_, QueryKind::point, x, x, ans});
    ++stats_.point_count;
    ++stats_.total;
    return ans;
  }

  bool interval_query(double x, double y) {
    ++stats_.gross_interval;
    ++stats_.gross_total;
    if (!(x <= y) || !universe_->is_anchor(x) || !universe_->is_anchor(y)) {
      violations_.push_back({next_seq(), voter_id_, QueryKind::interval, x, y, false});
      throw ProtocolViolation("interval query with endpoints that are not candidates or segment endpoints");
    }
    const auto key = std::make_pair(x, y);
    if (const auto it = interval_cache_.find(key); it != interval_cache_.end()) return it->second;
    const bool ans = x <= hidden_.a && hidden_.b <= y;
    interval_cache_.emplace(key, ans);
    log_.push_back({next_seq(), voter_id_, QueryKind::interval, x, y, ans});
    ++stats_.interval_count;
    ++stats_.total;
    return ans;
  }

  const QueryStats& stats() const { return stats_; }
  const std::vector<DialogueEntry>& log() const { return log_; }
  const std::vector<DialogueEntry>& violations() const { return violations_; }
  int voter_id() const { return voter_id_; }

  // Ground truth. Simulation harnesses and tests read it; the elicitation
  // code never does.
  const VoterInterval& hidden() const { return hidden_; }

 private:
  std::int64_t next_seq() { return seq_++; }

  int voter_id_;
  VoterInterval hidden_;
  std::shared_ptr<const QueryUniverse> universe_;
  std::vector<DialogueEntry> log_;
  std::vector<DialogueEntry> violations_;
  QueryStats stats_;
  std::int64_t seq_ = 0;
  std::unordered_map<std::uint64_t, bool> point_cache_;
  std::map<std::pair<double, double>, bool> interval_cache_;
};

inline QueryStats query_stats(const VoterOracle& oracle) { return oracle.stats(); }

// Recomputes the answer a hidden interval would give to a logged query.
inline bool replay_answer(const VoterInterval& hidden, const DialogueEntry& e) {
  if (e.kind == QueryKind::point) return hidden.a <= e.x && e.x <= hidden.b;
  return e.x <= hidden.a && hidden.b <= e.y;
}

}  // namespace riv
