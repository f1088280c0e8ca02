#pragma once

// Segmented one-dimensional voter model. A model is an ordered list of
// disjoint segments, each carrying a selection weight and an invertible CDF;
// a voter picks a segment by weight and draws both endpoints of her approval
// interval from that segment's distribution. The uniform special case places
// segment t on [t, t+1] with the identity-offset CDF, and every general model
// reduces to it through the position map mu(x) = t + F_t(x).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "riv/rng.hpp"

namespace riv {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Strictly increasing piecewise-linear CDF over [xs.front(), xs.back()],
// given as breakpoint tables with us.front() == 0 and us.back() == 1.
// Inversion is analytic per piece, so value() and inverse() are exact at
// breakpoints and consistent with each other everywhere else.
class PiecewiseLinearCdf {
 public:
  PiecewiseLinearCdf() = default;

  PiecewiseLinearCdf(std::vector<double> xs, std::vector<double> us)
      : xs_(std::move(xs)), us_(std::move(us)) {
    if (xs_.size() < 2 || xs_.size() != us_.size())
      throw ModelError("cdf_breakpoints: need matching tables with at least two rows");
    for (std::size_t i = 1; i < xs_.size(); ++i) {
      if (!(xs_[i - 1] < xs_[i])) throw ModelError("cdf_monotone: positions not strictly increasing");
      if (!(us_[i - 1] < us_[i])) throw ModelError("cdf_monotone: values not strictly increasing");
    }
    if (us_.front() != 0.0 || us_.back() != 1.0)
      throw ModelError("cdf_endpoints: F must run from 0 to 1");
  }

  static PiecewiseLinearCdf identity_offset(double lo, double hi) {
    return PiecewiseLinearCdf({lo, hi}, {0.0, 1.0});
  }

  double value(double x) const {
    if (x <= xs_.front()) return 0.0;
    if (x >= xs_.back()) return 1.0;
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
    return us_[i] + (x - xs_[i]) * (us_[i + 1] - us_[i]) / (xs_[i + 1] - xs_[i]);
  }

  double inverse(double u) const {
    if (u <= 0.0) return xs_.front();
    if (u >= 1.0) return xs_.back();
    const auto it = std::upper_bound(us_.begin(), us_.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - us_.begin()) - 1;
    return xs_[i] + (u - us_[i]) * (xs_[i + 1] - xs_[i]) / (us_[i + 1] - us_[i]);
  }

  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& us() const { return us_; }

 private:
  std::vector<double> xs_;
  std::vector<double> us_;
};

struct Segment {
  int index = 0;  // 1-based rank in left-to-right order
  double z_minus = 0.0;
  double z_plus = 0.0;
  double weight = 0.0;  // selection probability p_t
  PiecewiseLinearCdf cdf;
};

enum class ModelKind { uniform, general };

class RivModel {
 public:
  static RivModel make_uniform(std::vector<double> weights) {
    if (weights.empty()) throw ModelError("segments: model needs at least one segment");
    std::vector<Segment> segs(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const double t = static_cast<double>(i + 1);
      segs[i] = Segment{static_cast<int>(i + 1), t, t + 1.0, weights[i],
                        PiecewiseLinearCdf::identity_offset(t, t + 1.0)};
    }
    return RivModel(std::move(segs), ModelKind::uniform);
  }

  static RivModel make_general(std::vector<Segment> segments) {
    std::sort(segments.begin(), segments.end(),
              [](const Segment& a, const Segment& b) { return a.z_minus < b.z_minus; });
    for (std::size_t i = 0; i < segments.size(); ++i) segments[i].index = static_cast<int>(i + 1);
    return RivModel(std::move(segments), ModelKind::general);
  }

  ModelKind kind() const { return kind_; }
  int sigma() const { return static_cast<int>(segments_.size()); }
  const std::vector<Segment>& segments() const { return segments_; }
  const Segment& segment(int t) const { return segments_.at(static_cast<std::size_t>(t) - 1); }
  double weight(int t) const { return segment(t).weight; }

  // t(x): the segment containing x. Boundary points shared by two adjacent
  // segments belong to the segment that starts there, so the map is a
  // function even on the closed covers.
  std::optional<int> segment_of(double x) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), x,
                               [](double v, const Segment& s) { return v < s.z_minus; });
    if (it == segments_.begin()) return std::nullopt;
    --it;
    if (x > it->z_plus) return std::nullopt;
    return it->index;
  }

 private:
  RivModel(std::vector<Segment> segments, ModelKind kind)
      : segments_(std::move(segments)), kind_(kind) {
    if (segments_.empty()) throw ModelError("segments: model needs at least one segment");
    double sum = 0.0;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const Segment& s = segments_[i];
      if (!(s.z_minus < s.z_plus)) throw ModelError("segment_order: segment has z_minus >= z_plus");
      if (s.weight < 0.0 || s.weight > 1.0) throw ModelError("weight_range: p_t outside [0, 1]");
      if (i > 0 && !(segments_[i - 1].z_plus <= s.z_minus))
        throw ModelError("segment_disjoint: segments overlap");
      if (s.cdf.xs().front() != s.z_minus || s.cdf.xs().back() != s.z_plus)
        throw ModelError("cdf_support: CDF breakpoints must span the segment");
      sum += s.weight;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ModelError("weight_sum: segment weights must sum to 1");
    if (kind_ == ModelKind::uniform) {
      for (const Segment& s : segments_) {
        const double t = static_cast<double>(s.index);
        if (s.z_minus != t || s.z_plus != t + 1.0 || s.cdf.xs().size() != 2)
          throw ModelError("uniform_shape: segment t must be [t, t+1] with the identity-offset CDF");
      }
    }
  }

  std::vector<Segment> segments_;
  ModelKind kind_;
};

struct VoterInterval {
  int segment = 0;
  double a = 0.0;
  double b = 0.0;
};

// Draws one voter. The segment is chosen by weight (no draw is consumed when
// there is only one segment), then both endpoints come from the segment's
// distribution via inverse-CDF sampling.
template <class UniformSource>
VoterInterval sample_voter(const RivModel& model, UniformSource& rng) {
  const auto& segs = model.segments();
  std::size_t pick = 0;
  if (segs.size() > 1) {
    const double u = rng.uniform01();
    double cum = 0.0;
    pick = segs.size() - 1;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      cum += segs[i].weight;
      if (u < cum) {
        pick = i;
        break;
      }
    }
  }
  const Segment& seg = segs[pick];
  const double x = seg.cdf.inverse(rng.uniform01());
  const double y = seg.cdf.inverse(rng.uniform01());
  return VoterInterval{seg.index, std::min(x, y), std::max(x, y)};
}

// Sorted distinct candidate positions, each inside some segment of the model
// it was validated against. Per-segment slices are precomputed.
class CandidateSet {
 public:
  CandidateSet() = default;

  CandidateSet(std::vector<double> positions, const RivModel& model)
      : positions_(std::move(positions)) {
    std::sort(positions_.begin(), positions_.end());
    for (std::size_t i = 1; i < positions_.size(); ++i)
      if (positions_[i - 1] == positions_[i])
        throw ModelError("candidate_distinct: duplicate candidate position " +
                         std::to_string(positions_[i]));
    seg_begin_.assign(static_cast<std::size_t>(model.sigma()) + 1, 0);
    std::size_t at = 0;
    for (int t = 1; t <= model.sigma(); ++t) {
      while (at < positions_.size() && model.segment_of(positions_[at]).value_or(-1) < t) {
        if (!model.segment_of(positions_[at]))
          throw ModelError("candidate_in_segment: position " + std::to_string(positions_[at]) +
                           " lies outside all segments");
        ++at;
      }
      seg_begin_[static_cast<std::size_t>(t) - 1] = at;
      while (at < positions_.size() && model.segment_of(positions_[at]).value_or(-1) == t) ++at;
      seg_begin_[static_cast<std::size_t>(t)] = at;
    }
    if (at != positions_.size())
      throw ModelError("candidate_in_segment: position " + std::to_string(positions_[at]) +
                       " lies outside all segments");
  }

  const std::vector<double>& positions() const { return positions_; }
  std::size_t size() const { return positions_.size(); }
  double operator[](std::size_t i) const { return positions_[i]; }

  std::optional<std::size_t> index_of(double x) const {
    const auto it = std::lower_bound(positions_.begin(), positions_.end(), x);
    if (it == positions_.end() || *it != x) return std::nullopt;
    return static_cast<std::size_t>(it - positions_.begin());
  }

  // C_t as a view into the sorted position list.
  std::span<const double> segment_slice(int t) const {
    const std::size_t b = seg_begin_.at(static_cast<std::size_t>(t) - 1);
    const std::size_t e = seg_begin_.at(static_cast<std::size_t>(t));
    return std::span<const double>(positions_.data() + b, e - b);
  }

 private:
  std::vector<double> positions_;
  std::vector<std::size_t> seg_begin_;  // sigma+1 offsets into positions_
};

enum class Side { left, right };

struct NeighborResult {
  double position = 0.0;
  bool from_endpoint = false;  // true when the segment endpoint stood in
};

namespace detail {

// Closest element of T on one side of x (non-strict, so x itself counts for
// both sides), clamped to explicit segment bounds when T has nothing there.
inline NeighborResult neighbor_clamped(double x, std::span<const double> T, Side side,
                                       double z_minus, double z_plus) {
  if (side == Side::left) {
    const auto it = std::upper_bound(T.begin(), T.end(), x);
    if (it != T.begin() && *(it - 1) >= z_minus) return {*(it - 1), false};
    return {z_minus, true};
  }
  const auto it = std::lower_bound(T.begin(), T.end(), x);
  if (it != T.end() && *it <= z_plus) return {*it, false};
  return {z_plus, true};
}

}  // namespace detail

inline NeighborResult neighbor(double x, std::span<const double> T, Side side,
                               const RivModel& model) {
  const auto t = model.segment_of(x);
  if (!t) throw ModelError("neighbor: position " + std::to_string(x) + " outside all segments");
  const Segment& s = model.segment(*t);
  return detail::neighbor_clamped(x, T, side, s.z_minus, s.z_plus);
}

// Probability that a sampled voter approves c while disapproving all of S.
// Closed form for the uniform model: 2 p_t (c - c_S^-)(c_S^+ - c).
inline double approval_probability(double c, std::span<const double> S, const RivModel& model) {
  if (model.kind() != ModelKind::uniform)
    throw std::invalid_argument("approval_probability: uniform model required");
  if (std::binary_search(S.begin(), S.end(), c))
    throw std::invalid_argument("approval_probability: c must not belong to S");
  const auto t = model.segment_of(c);
  if (!t) throw ModelError("approval_probability: c outside all segments");
  const NeighborResult lo = neighbor(c, S, Side::left, model);
  const NeighborResult hi = neighbor(c, S, Side::right, model);
  return 2.0 * model.weight(*t) * (c - lo.position) * (hi.position - c);
}

// d^+_r(c) / d^-_r(c): distance from c to the (r+1)-th member of the sorted
// per-segment committee slice on the given side, measured to the segment
// endpoint when the index runs off the slice.
inline double gap_distance(double c, std::span<const double> committee_slice, int r, Side side,
                           const RivModel& model) {
  if (r < 0) throw std::invalid_argument("gap_distance: r must be non-negative");
  if (std::binary_search(committee_slice.begin(), committee_slice.end(), c))
    throw std::invalid_argument("gap_distance: c must not belong to the committee slice");
  const auto t = model.segment_of(c);
  if (!t) throw ModelError("gap_distance: c outside all segments");
  const Segment& seg = model.segment(*t);
  const auto lb = std::lower_bound(committee_slice.begin(), committee_slice.end(), c);
  const std::ptrdiff_t rho = lb - committee_slice.begin();  // members strictly left of c
  if (side == Side::right) {
    const std::ptrdiff_t idx = rho + r;
    if (idx < static_cast<std::ptrdiff_t>(committee_slice.size())) return committee_slice[static_cast<std::size_t>(idx)] - c;
    return seg.z_plus - c;
  }
  const std::ptrdiff_t idx = rho - r - 1;
  if (idx >= 0) return c - committee_slice[static_cast<std::size_t>(idx)];
  return c - seg.z_minus;
}

// Contiguous run of sorted positions that lie in segment t, honoring the
// same boundary convention as segment_of.
inline std::span<const double> segment_members(std::span<const double> sorted, int t,
                                               const RivModel& model) {
  const Segment& s = model.segment(t);
  std::size_t b = static_cast<std::size_t>(
      std::lower_bound(sorted.begin(), sorted.end(), s.z_minus) - sorted.begin());
  std::size_t e = static_cast<std::size_t>(
      std::upper_bound(sorted.begin(), sorted.end(), s.z_plus) - sorted.begin());
  // A position equal to z_plus belongs to the next segment when one starts there.
  if (e > b && model.segment_of(sorted[e - 1]).value_or(-1) != t) --e;
  return sorted.subspan(b, e - b);
}

// pi(ell, c, j): probability that a voter approves c, at most j committee
// members to the left of c, and fewer than ell members in total. Equals
// 2 p_t d^-_j(c) d^+_{ell-1-j}(c) on the uniform model.
inline double window_probability(int ell, double c, int j, std::span<const double> committee,
                                 const RivModel& model) {
  if (model.kind() != ModelKind::uniform)
    throw std::invalid_argument("window_probability: uniform model required");
  if (ell < 1) throw std::invalid_argument("window_probability: ell must be at least 1");
  if (j < 0 || j >= ell) throw std::invalid_argument("window_probability: j must lie in [0, ell)");
  if (std::binary_search(committee.begin(), committee.end(), c))
    throw std::invalid_argument("window_probability: c must not belong to the committee");
  const auto t = model.segment_of(c);
  if (!t) throw ModelError("window_probability: c outside all segments");
  const std::span<const double> slice = segment_members(committee, *t, model);
  const double d_left = gap_distance(c, slice, j, Side::left, model);
  const double d_right = gap_distance(c, slice, ell - 1 - j, Side::right, model);
  return 2.0 * model.weight(*t) * d_left * d_right;
}

// Order-preserving map between a general model and its uniform counterpart:
// mu(x) = t + F_t(x) for x in segment t.
class PositionMap {
 public:
  PositionMap() = default;
  explicit PositionMap(const RivModel& model) : segments_(model.segments()) {}

  double forward(double x) const {
    const Segment* s = locate(x);
    if (!s) throw ModelError("position_map: " + std::to_string(x) + " outside all segments");
    return static_cast<double>(s->index) + s->cdf.value(x);
  }

  double inverse(double y) const {
    const int sigma = static_cast<int>(segments_.size());
    int t = static_cast<int>(std::floor(y));
    t = std::max(1, std::min(sigma, t));
    if (y < 1.0 || y > sigma + 1.0)
      throw ModelError("position_map: mapped position " + std::to_string(y) + " outside [1, sigma+1]");
    const Segment& s = segments_[static_cast<std::size_t>(t) - 1];
    return s.cdf.inverse(y - static_cast<double>(t));
  }

 private:
  const Segment* locate(double x) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), x,
                               [](double v, const Segment& s) { return v < s.z_minus; });
    if (it == segments_.begin()) return nullptr;
    --it;
    return x <= it->z_plus ? &*it : nullptr;
  }

  std::vector<Segment> segments_;
};

struct Uniformized {
  RivModel model;
  CandidateSet candidates;
  PositionMap map;
};

// Rebases a model and its candidates onto the uniform layout. Approval
// membership is preserved: x in [a, b] iff mu(x) in [mu(a), mu(b)].
inline Uniformized uniformize(const RivModel& model, const CandidateSet& candidates) {
  std::vector<double> weights;
  weights.reserve(model.segments().size());
  for (const Segment& s : model.segments()) weights.push_back(s.weight);
  PositionMap map(model);
  std::vector<double> mapped;
  mapped.reserve(candidates.size());
  for (double c : candidates.positions()) {
    if (!model.segment_of(c))
      throw ModelError("uniformize: candidate " + std::to_string(c) + " outside all segments");
    mapped.push_back(map.forward(c));
  }
  RivModel uni = RivModel::make_uniform(std::move(weights));
  CandidateSet mapped_set(std::move(mapped), uni);
  return Uniformized{std::move(uni), std::move(mapped_set), std::move(map)};
}

}  // namespace riv
