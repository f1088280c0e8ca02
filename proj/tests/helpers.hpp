#pragma once

// Shared test utilities: scripted random sources, random instance
// generators, and Monte-Carlo oracles. The oracles recompute probabilities
// and event frequencies straight from the sampling definition, independent
// of the closed-form code paths they check.

#include <memory>
#include <span>
#include <vector>

#include "riv/committee.hpp"
#include "riv/elicit.hpp"
#include "riv/model.hpp"
#include "riv/oracle.hpp"
#include "riv/rng.hpp"
#include "riv/verify.hpp"

namespace rivtest {

// Uniform source that plays back a fixed script.
class ScriptedSource {
 public:
  explicit ScriptedSource(std::vector<double> values) : values_(std::move(values)) {}
  double uniform01() {
    if (at_ >= values_.size()) throw std::runtime_error("scripted source exhausted");
    return values_[at_++];
  }
  std::size_t consumed() const { return at_; }

 private:
  std::vector<double> values_;
  std::size_t at_ = 0;
};

// Frequency of the event "voter approves c and disapproves all of S" over
// sampled voters; brute-force companion to the closed-form probability.
inline double mc_approval_frequency(const riv::RivModel& model, double c,
                                    std::span<const double> S, long long samples,
                                    riv::SplitStream rng) {
  long long hits = 0;
  for (long long i = 0; i < samples; ++i) {
    const riv::VoterInterval v = riv::sample_voter(model, rng);
    if (!(v.a <= c && c <= v.b)) continue;
    bool clean = true;
    for (double s : S)
      if (v.a <= s && s <= v.b) {
        clean = false;
        break;
      }
    if (clean) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

// Frequency of the window event: voter approves c, at most j committee
// members to the left of c, and fewer than ell members in total.
inline double mc_window_frequency(const riv::RivModel& model, int ell, double c, int j,
                                  std::span<const double> committee, long long samples,
                                  riv::SplitStream rng) {
  long long hits = 0;
  for (long long i = 0; i < samples; ++i) {
    const riv::VoterInterval v = riv::sample_voter(model, rng);
    if (!(v.a <= c && c <= v.b)) continue;
    int left = 0, total = 0;
    for (double w : committee) {
      if (v.a <= w && w <= v.b) {
        ++total;
        if (w < c) ++left;
      }
    }
    if (left <= j && total < ell) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

// Random candidate positions, distinct, strictly inside segments.
inline std::vector<double> random_positions(const riv::RivModel& model, int m,
                                            riv::SplitStream& rng) {
  std::vector<double> out;
  while (static_cast<int>(out.size()) < m) {
    out.push_back(1.0 + model.sigma() * rng.uniform01());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

// Random tiny candidate-interval election (ballots are index ranges).
inline riv::Election random_ci_election(int max_n, int max_m, int max_k, riv::SplitStream& rng) {
  riv::Election e;
  const int m = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(max_m)));
  const int n = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(max_n)));
  e.k = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(std::min(max_k, m))));
  for (int c = 0; c < m; ++c) e.positions.push_back(static_cast<double>(c));
  for (int v = 0; v < n; ++v) {
    std::vector<int> ballot;
    if (rng.uniform01() > 0.15) {  // some voters stay empty
      const int lo = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(m)));
      const int hi = lo + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(m - lo)));
      for (int c = lo; c <= hi; ++c) ballot.push_back(c);
    }
    e.ballots.push_back(std::move(ballot));
  }
  return e;
}

inline std::vector<int> random_committee(int m, int k, riv::SplitStream& rng) {
  std::vector<int> all;
  for (int c = 0; c < m; ++c) all.push_back(c);
  for (int i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(all.size() - static_cast<std::size_t>(i));
    std::swap(all[static_cast<std::size_t>(i)], all[j]);
  }
  all.resize(static_cast<std::size_t>(k));
  std::sort(all.begin(), all.end());
  return all;
}

// Strictly increasing piecewise-linear CDF over [lo, hi] with random
// interior breakpoints.
inline riv::PiecewiseLinearCdf random_cdf(double lo, double hi, riv::SplitStream& rng) {
  const int pieces = 2 + static_cast<int>(rng.uniform_index(4));
  std::vector<double> xs{lo}, us{0.0};
  for (int i = 1; i < pieces; ++i) {
    xs.push_back(lo + (hi - lo) * (static_cast<double>(i) + 0.6 * rng.uniform01() - 0.3) /
                          static_cast<double>(pieces));
    us.push_back((static_cast<double>(i) + 0.6 * rng.uniform01() - 0.3) /
                 static_cast<double>(pieces));
  }
  xs.push_back(hi);
  us.push_back(1.0);
  std::sort(xs.begin(), xs.end());
  std::sort(us.begin(), us.end());
  return riv::PiecewiseLinearCdf(xs, us);
}

// Random general model with gaps between segments.
inline riv::RivModel random_general_model(int sigma, riv::SplitStream& rng) {
  std::vector<riv::Segment> segs;
  double at = rng.uniform01() * 3.0;
  std::vector<double> weights(static_cast<std::size_t>(sigma), 0.0);
  double acc = 0.0;
  for (int t = 0; t < sigma; ++t) {
    weights[static_cast<std::size_t>(t)] = 0.2 + rng.uniform01();
    acc += weights[static_cast<std::size_t>(t)];
  }
  for (auto& w : weights) w /= acc;
  double wsum = 0.0;
  for (int t = 0; t + 1 < sigma; ++t) wsum += weights[static_cast<std::size_t>(t)];
  weights[static_cast<std::size_t>(sigma) - 1] = 1.0 - wsum;
  for (int t = 0; t < sigma; ++t) {
    riv::Segment s;
    s.z_minus = at;
    s.z_plus = at + 0.5 + 2.0 * rng.uniform01();
    s.weight = weights[static_cast<std::size_t>(t)];
    s.cdf = random_cdf(s.z_minus, s.z_plus, rng);
    at = s.z_plus + rng.uniform01();  // leave a gap
    segs.push_back(std::move(s));
  }
  return riv::RivModel::make_general(std::move(segs));
}

inline std::shared_ptr<const riv::QueryUniverse> make_universe(const riv::CandidateSet& c,
                                                               const riv::RivModel& m) {
  return std::make_shared<const riv::QueryUniverse>(c, m);
}

}  // namespace rivtest
