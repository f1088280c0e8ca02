#pragma once

// Experiment runner: seeded, reproducible batches of end-to-end pipeline
// runs with per-trial CSV rows and JSON aggregates. Every committee the
// harness emits is re-verified against the ground-truth election before the
// report is written; a verification failure stops the run and leaves a
// replayable bundle on disk.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "riv/committee.hpp"
#include "riv/io.hpp"
#include "riv/model.hpp"
#include "riv/rng.hpp"

namespace riv {

class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Candidate placement rules. The bounds the pipeline relies on hold for
// arbitrary candidate sets, so the harness offers benign and adversarial
// layouts.
inline std::vector<double> place_candidates(const RivModel& model, int m, const std::string& rule,
                                            SplitStream rng) {
  const int sigma = model.sigma();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m));
  if (rule == "equally_spaced") {
    for (int i = 0; i < m; ++i)
      out.push_back(1.0 + sigma * ((static_cast<double>(i) + 0.5) / static_cast<double>(m)));
  } else if (rule == "adversarial_cluster") {
    const int t = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(sigma)));
    while (static_cast<int>(out.size()) < m)
      out.push_back(static_cast<double>(t) + 0.4 + 0.05 * rng.uniform01());
  } else if (rule == "iid_uniform") {
    while (static_cast<int>(out.size()) < m) out.push_back(1.0 + sigma * rng.uniform01());
  } else {
    throw HarnessError("placement: unknown rule " + rule);
  }
  std::sort(out.begin(), out.end());
  // Positions must be distinct as 64-bit doubles; redraw any collisions.
  while (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    const auto it = std::adjacent_find(out.begin(), out.end());
    *it = 1.0 + sigma * rng.uniform01();
    std::sort(out.begin(), out.end());
  }
  return out;
}

// Ground-truth ballots straight from the hidden intervals.
inline Election true_election(const CandidateSet& C, const std::vector<VoterOracle>& oracles,
                              int k) {
  Election e;
  e.positions = C.positions();
  e.k = k;
  e.ballots.reserve(oracles.size());
  for (const VoterOracle& o : oracles) {
    const VoterInterval& h = o.hidden();
    const auto& pos = e.positions;
    const auto lo = std::lower_bound(pos.begin(), pos.end(), h.a);
    const auto hi = std::upper_bound(pos.begin(), pos.end(), h.b);
    std::vector<int> ballot;
    for (auto it = lo; it != hi; ++it) ballot.push_back(static_cast<int>(it - pos.begin()));
    e.ballots.push_back(std::move(ballot));
  }
  return e;
}

struct CellConfig {
  int sigma = 1;
  std::vector<double> weights;  // empty means equal weights
  int m = 0;
  std::string placement = "iid_uniform";
  int k = 1;
  long long n = 1;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  int trials = 1;  // per cell
  std::string pipeline = "pjr";  // "pjr" or "mes_full"
  std::vector<CellConfig> cells;
  std::string out_csv;
  std::string out_json;
  std::string bundle_dir = ".";
  int threads = 1;
};

struct TrialRow {
  int cell = 0;
  int trial = 0;
  int sigma = 0, k = 0, m = 0;
  long long n = 0;
  std::string placement;
  std::string path;  // "guessed", "fallback", or "mes_full"
  bool verified = false;
  bool validate_sound = true;  // unpadded guess passes the group condition
  long long u = 0;
  long long max_tally = 0;
  double mean_distinct_q = 0.0;
  std::int64_t max_distinct_q = 0;
  double mean_gross_q = 0.0;
  std::vector<long long> query_hist;  // distinct-query counts, bucket = count
};

struct Report {
  std::vector<TrialRow> rows;
  json aggregates;
};

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.trials = j.value("trials", 1);
  cfg.pipeline = j.value("pipeline", std::string("pjr"));
  cfg.out_csv = j.value("out_csv", std::string());
  cfg.out_json = j.value("out_json", std::string());
  cfg.bundle_dir = j.value("bundle_dir", std::string("."));
  cfg.threads = j.value("threads", 1);
  const json cells = j.contains("cells") ? j.at("cells") : json::array({j});
  for (const json& cj : cells) {
    CellConfig cell;
    cell.sigma = cj.value("sigma", 1);
    if (cj.contains("weights")) cell.weights = cj.at("weights").get<std::vector<double>>();
    cell.m = cj.at("m").get<int>();
    cell.placement = cj.value("placement", std::string("iid_uniform"));
    cell.k = cj.at("k").get<int>();
    cell.n = cj.at("n").get<long long>();
    cfg.cells.push_back(std::move(cell));
  }
  if (cfg.trials < 1) throw HarnessError("config: trials must be at least 1");
  if (cfg.cells.empty()) throw HarnessError("config: no cells");
  return cfg;
}

namespace detail {

inline RivModel cell_model(const CellConfig& cell) {
  std::vector<double> w = cell.weights;
  if (w.empty()) {
    w.assign(static_cast<std::size_t>(cell.sigma), 0.0);
    // Equal weights that sum to 1 exactly despite rounding.
    double acc = 0.0;
    for (int i = 0; i + 1 < cell.sigma; ++i) {
      w[static_cast<std::size_t>(i)] = 1.0 / cell.sigma;
      acc += 1.0 / cell.sigma;
    }
    w[static_cast<std::size_t>(cell.sigma) - 1] = 1.0 - acc;
  }
  return RivModel::make_uniform(std::move(w));
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// Runs one trial of one cell. Pure given the derived stream, so trials can
// run on any thread in any order.
inline TrialRow run_trial(const ExperimentConfig& cfg, int cell_idx, int trial_idx,
                          std::optional<json>* failure_bundle) {
  const CellConfig& cell = cfg.cells.at(static_cast<std::size_t>(cell_idx));
  SplitStream trial_rng =
      SplitStream(cfg.seed).split(static_cast<std::uint64_t>(cell_idx)).split(static_cast<std::uint64_t>(trial_idx));
  const RivModel model = detail::cell_model(cell);
  const CandidateSet candidates(place_candidates(model, cell.m, cell.placement, trial_rng.split(1)),
                                model);
  auto universe = std::make_shared<const QueryUniverse>(candidates, model);
  SplitStream voter_rng = trial_rng.split(2);
  std::vector<VoterOracle> oracles;
  oracles.reserve(static_cast<std::size_t>(cell.n));
  for (long long v = 0; v < cell.n; ++v) {
    SplitStream s = voter_rng.split(static_cast<std::uint64_t>(v));
    oracles.emplace_back(static_cast<int>(v), sample_voter(model, s), universe);
  }

  TrialRow row;
  row.cell = cell_idx;
  row.trial = trial_idx;
  row.sigma = cell.sigma;
  row.k = cell.k;
  row.m = cell.m;
  row.n = cell.n;
  row.placement = cell.placement;

  const Election truth = true_election(candidates, oracles, cell.k);
  std::vector<int> committee_idx;
  std::vector<VoterQueryStats> stats;

  if (cfg.pipeline == "pjr") {
    PipelineResult res = pjr_pipeline(model, candidates, cell.k, oracles);
    row.path = res.path == PipelinePath::guessed ? "guessed" : "fallback";
    row.u = res.tally.unlocated;
    row.max_tally = res.tally.max_count;
    stats = std::move(res.voter_stats);
    for (double p : res.committee) committee_idx.push_back(static_cast<int>(*candidates.index_of(p)));
    if (res.path == PipelinePath::guessed) {
      std::vector<int> unpadded;
      for (double p : res.guess.committee)
        unpadded.push_back(static_cast<int>(*candidates.index_of(p)));
      row.validate_sound = !check_pjr_plus_ci_partial(truth, unpadded, cell.k).has_value();
    }
  } else if (cfg.pipeline == "mes_full") {
    Election elicited;
    elicited.positions = candidates.positions();
    elicited.k = cell.k;
    elicited.ballots.resize(oracles.size());
    stats.resize(oracles.size());
    for (std::size_t vi = 0; vi < oracles.size(); ++vi) {
      for (double p : elicit_full(oracles[vi], model, candidates))
        elicited.ballots[vi].push_back(static_cast<int>(*candidates.index_of(p)));
      const QueryStats st = oracles[vi].stats();
      stats[vi] = VoterQueryStats{st.total, st.gross_total, st.total, st.gross_total};
    }
    committee_idx = complete(mes(elicited, cell.k), elicited, cell.k);
    row.path = "mes_full";
  } else {
    throw HarnessError("config: unknown pipeline " + cfg.pipeline);
  }

  row.verified = !check_pjr_plus_ci(truth, committee_idx).has_value();
  double sum_distinct = 0.0;
  double sum_gross = 0.0;
  for (const VoterQueryStats& st : stats) {
    sum_distinct += static_cast<double>(st.total_distinct);
    sum_gross += static_cast<double>(st.total_gross);
    row.max_distinct_q = std::max(row.max_distinct_q, st.total_distinct);
    if (static_cast<std::size_t>(st.total_distinct) + 1 > row.query_hist.size())
      row.query_hist.resize(static_cast<std::size_t>(st.total_distinct) + 1, 0);
    ++row.query_hist[static_cast<std::size_t>(st.total_distinct)];
  }
  row.mean_distinct_q = sum_distinct / static_cast<double>(stats.size());
  row.mean_gross_q = sum_gross / static_cast<double>(stats.size());

  if (!row.verified && failure_bundle) {
    json bundle;
    bundle["config_cell"] = cell_idx;
    bundle["trial"] = trial_idx;
    bundle["seed"] = cfg.seed;
    bundle["model"] = model_to_json(model);
    bundle["candidates"] = candidates_to_json(candidates.positions());
    bundle["election"] = election_to_json(truth);
    bundle["committee"] = committee_to_json(truth, committee_idx);
    std::ostringstream dialogues;
    for (const VoterOracle& o : oracles) write_dialogues(dialogues, o.log());
    bundle["dialogues"] = dialogues.str();
    *failure_bundle = std::move(bundle);
  }
  return row;
}

inline void write_csv(std::ostream& out, const std::vector<TrialRow>& rows) {
  out << "cell,trial,sigma,k,m,n,placement,path,verified,validate_sound,u,max_tally,"
         "mean_distinct_q,max_distinct_q,mean_gross_q,query_hist\n";
  for (const TrialRow& r : rows) {
    out << r.cell << ',' << r.trial << ',' << r.sigma << ',' << r.k << ',' << r.m << ',' << r.n
        << ',' << r.placement << ',' << r.path << ',' << (r.verified ? 1 : 0) << ','
        << (r.validate_sound ? 1 : 0) << ',' << r.u << ',' << r.max_tally << ','
        << detail::format_double(r.mean_distinct_q) << ',' << r.max_distinct_q << ','
        << detail::format_double(r.mean_gross_q) << ',';
    for (std::size_t i = 0; i < r.query_hist.size(); ++i) {
      if (i) out << ';';
      out << r.query_hist[i];
    }
    out << '\n';
  }
}

// Ordinary least squares for y = X b; returns coefficients and their
// standard errors. Tiny systems only (the harness fits 2-3 regressors).
struct OlsFit {
  std::vector<double> coef;
  std::vector<double> stderr_;
  int dof = 0;
};

inline OlsFit ols(const std::vector<std::vector<double>>& X, const std::vector<double>& y) {
  const std::size_t n = X.size();
  const std::size_t p = X.empty() ? 0 : X[0].size();
  std::vector<std::vector<double>> xtx(p, std::vector<double>(p, 0.0));
  std::vector<double> xty(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < p; ++a) {
      xty[a] += X[i][a] * y[i];
      for (std::size_t b = 0; b < p; ++b) xtx[a][b] += X[i][a] * X[i][b];
    }
  }
  // Gauss-Jordan inverse of X'X.
  std::vector<std::vector<double>> inv(p, std::vector<double>(p, 0.0));
  for (std::size_t i = 0; i < p; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < p; ++r)
      if (std::abs(xtx[r][col]) > std::abs(xtx[piv][col])) piv = r;
    std::swap(xtx[piv], xtx[col]);
    std::swap(inv[piv], inv[col]);
    const double d = xtx[col][col];
    if (d == 0.0) throw HarnessError("ols: singular design matrix");
    for (std::size_t cc = 0; cc < p; ++cc) {
      xtx[col][cc] /= d;
      inv[col][cc] /= d;
    }
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const double f = xtx[r][col];
      for (std::size_t cc = 0; cc < p; ++cc) {
        xtx[r][cc] -= f * xtx[col][cc];
        inv[r][cc] -= f * inv[col][cc];
      }
    }
  }
  OlsFit fit;
  fit.coef.assign(p, 0.0);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) fit.coef[a] += inv[a][b] * xty[b];
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = 0.0;
    for (std::size_t a = 0; a < p; ++a) pred += X[i][a] * fit.coef[a];
    rss += (y[i] - pred) * (y[i] - pred);
  }
  fit.dof = static_cast<int>(n) - static_cast<int>(p);
  const double s2 = fit.dof > 0 ? rss / fit.dof : 0.0;
  fit.stderr_.assign(p, 0.0);
  for (std::size_t a = 0; a < p; ++a) fit.stderr_[a] = std::sqrt(s2 * inv[a][a]);
  return fit;
}

inline Report run_experiment(const ExperimentConfig& cfg) {
  const int total = static_cast<int>(cfg.cells.size()) * cfg.trials;
  std::vector<TrialRow> rows(static_cast<std::size_t>(total));
  std::optional<json> bundle;
  std::mutex bundle_mu;
  std::atomic<int> next{0};
  std::atomic<bool> stop{false};

  const auto worker = [&] {
    while (!stop.load()) {
      const int idx = next.fetch_add(1);
      if (idx >= total) return;
      const int cell_idx = idx / cfg.trials;
      const int trial_idx = idx % cfg.trials;
      std::optional<json> local_bundle;
      rows[static_cast<std::size_t>(idx)] = run_trial(cfg, cell_idx, trial_idx, &local_bundle);
      if (local_bundle) {
        std::lock_guard<std::mutex> lock(bundle_mu);
        if (!bundle) bundle = std::move(local_bundle);
        stop.store(true);
      }
    }
  };
  if (cfg.threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < cfg.threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  if (bundle) {
    const std::string path = cfg.bundle_dir + "/failure_bundle.json";
    save_json_file(path, *bundle);
    throw HarnessError("verification failed; replay bundle written to " + path);
  }

  Report report;
  report.rows = std::move(rows);

  // Aggregates, recomputable from the rows.
  json agg;
  json cells = json::array();
  for (std::size_t ci = 0; ci < cfg.cells.size(); ++ci) {
    long long fallbacks = 0, verified = 0;
    double mean_q = 0.0;
    for (const TrialRow& r : report.rows) {
      if (static_cast<std::size_t>(r.cell) != ci) continue;
      if (r.path == "fallback") ++fallbacks;
      if (r.verified) ++verified;
      mean_q += r.mean_distinct_q;
    }
    const double trials = static_cast<double>(cfg.trials);
    const double rate = static_cast<double>(fallbacks) / trials;
    json cj;
    cj["cell"] = ci;
    cj["sigma"] = cfg.cells[ci].sigma;
    cj["k"] = cfg.cells[ci].k;
    cj["m"] = cfg.cells[ci].m;
    cj["n"] = cfg.cells[ci].n;
    cj["placement"] = cfg.cells[ci].placement;
    cj["fallback_rate"] = rate;
    cj["fallback_se"] = std::sqrt(std::max(0.0, rate * (1.0 - rate) / trials));
    cj["verified"] = verified;
    cj["mean_distinct_q"] = mean_q / trials;
    cells.push_back(std::move(cj));
  }
  agg["cells"] = std::move(cells);

  // Two-factor fit of mean queries against log(sigma k) and log m, over
  // guessed-path rows (the query claims concern that path).
  {
    std::vector<std::vector<double>> X;
    std::vector<double> y;
    for (const TrialRow& r : report.rows) {
      if (cfg.pipeline == "pjr" && r.path != "guessed") continue;
      X.push_back({1.0, std::log2(static_cast<double>(r.sigma) * r.k),
                   std::log2(static_cast<double>(r.m))});
      y.push_back(r.mean_distinct_q);
    }
    if (X.size() >= 4) {
      bool varied = false;
      for (std::size_t i = 1; i < X.size(); ++i)
        if (X[i][1] != X[0][1] && X[i][2] != X[0][2]) varied = true;
      try {
        const OlsFit fit = ols(X, y);
        json fj;
        fj["rows"] = X.size();
        fj["intercept"] = fit.coef[0];
        fj["slope_log_sigma_k"] = fit.coef[1];
        fj["se_log_sigma_k"] = fit.stderr_[1];
        fj["slope_log_m"] = fit.coef[2];
        fj["se_log_m"] = fit.stderr_[2];
        agg["query_fit"] = std::move(fj);
        (void)varied;
      } catch (const HarnessError&) {
        // Degenerate design (single cell); no fit to report.
      }
    }
  }
  report.aggregates = std::move(agg);

  if (!cfg.out_csv.empty()) {
    std::ofstream out(cfg.out_csv);
    if (!out) throw HarnessError("cannot write " + cfg.out_csv);
    write_csv(out, report.rows);
  }
  if (!cfg.out_json.empty()) save_json_file(cfg.out_json, report.aggregates);
  return report;
}

}  // namespace riv
