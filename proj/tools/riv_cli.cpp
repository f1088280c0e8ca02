// Command-line front end: model validation, voter sampling, preference
// elicitation, committee selection with verification, axiom checks, and
// batch experiments. Exit codes: 0 success, 1 verification failure, 2 usage
// or validation error.

#include <cstdint>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "riv/committee.hpp"
#include "riv/elicit.hpp"
#include "riv/harness.hpp"
#include "riv/io.hpp"
#include "riv/model.hpp"
#include "riv/oracle.hpp"
#include "riv/rng.hpp"
#include "riv/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerificationFailure = 1;
constexpr int kExitUsage = 2;

struct RunInputs {
  riv::RivModel model = riv::RivModel::make_uniform({1.0});
  riv::CandidateSet candidates;
  riv::PositionMap map;            // original <-> uniform coordinates
  std::vector<double> original;    // candidate positions before uniformization
};

// Loads a model plus candidates and rebases both onto the uniform layout.
RunInputs prepare_inputs(const std::string& model_path, const std::string& candidates_path,
                         int m, const std::string& placement, riv::SplitStream rng) {
  const riv::RivModel raw = riv::load_model(model_path);
  std::vector<double> positions;
  if (!candidates_path.empty()) {
    positions = riv::candidates_from_json(riv::load_json_file(candidates_path));
  } else {
    if (m <= 0) throw riv::IoError("either --candidates or --m is required");
    if (raw.kind() != riv::ModelKind::uniform)
      throw riv::IoError("generated placements need a uniform model; pass --candidates instead");
    positions = riv::place_candidates(raw, m, placement, rng);
  }
  RunInputs in;
  const riv::CandidateSet raw_set(std::move(positions), raw);
  riv::Uniformized uni = riv::uniformize(raw, raw_set);
  in.original = raw_set.positions();
  in.model = std::move(uni.model);
  in.candidates = std::move(uni.candidates);
  in.map = std::move(uni.map);
  return in;
}

int cmd_model_validate(const std::string& path) {
  try {
    const riv::RivModel m = riv::load_model(path);
    std::cout << riv::json{{"valid", true}, {"sigma", m.sigma()}}.dump(2) << '\n';
    return kExitOk;
  } catch (const std::exception& ex) {
    std::cout << riv::json{{"valid", false}, {"error", ex.what()}}.dump(2) << '\n';
    return kExitUsage;
  }
}

int cmd_sample(const std::string& model_path, long long n, std::uint64_t seed,
               const std::string& out_path) {
  const riv::RivModel model = riv::load_model(model_path);
  riv::SplitStream rng(seed);
  riv::json voters = riv::json::array();
  for (long long v = 0; v < n; ++v) {
    riv::SplitStream vs = rng.split(static_cast<std::uint64_t>(v));
    const riv::VoterInterval iv = riv::sample_voter(model, vs);
    voters.push_back({{"voter_id", v}, {"segment", iv.segment}, {"a", iv.a}, {"b", iv.b}});
  }
  const riv::json out{{"seed", seed}, {"voters", voters}};
  if (out_path.empty())
    std::cout << out.dump(2) << '\n';
  else
    riv::save_json_file(out_path, out);
  return kExitOk;
}

int cmd_elicit_full(const std::string& model_path, const std::string& candidates_path, int m,
                    const std::string& placement, long long n, std::uint64_t seed,
                    const std::string& dialogues_path) {
  riv::SplitStream rng(seed);
  const RunInputs in = prepare_inputs(model_path, candidates_path, m, placement, rng.split(1));
  auto universe = std::make_shared<const riv::QueryUniverse>(in.candidates, in.model);
  riv::SplitStream voters = rng.split(2);
  riv::Election elicited;
  elicited.positions = in.candidates.positions();
  elicited.k = 0;
  long long mismatches = 0;
  double total_queries = 0;
  std::ofstream dialogues;
  if (!dialogues_path.empty()) dialogues.open(dialogues_path);
  for (long long v = 0; v < n; ++v) {
    riv::SplitStream vs = voters.split(static_cast<std::uint64_t>(v));
    riv::VoterOracle oracle(static_cast<int>(v), riv::sample_voter(in.model, vs), universe);
    const std::vector<double> approved = riv::elicit_full(oracle, in.model, in.candidates);
    std::vector<int> ballot;
    for (double p : approved) ballot.push_back(static_cast<int>(*in.candidates.index_of(p)));
    elicited.ballots.push_back(std::move(ballot));
    // Self-check against the hidden interval.
    const riv::VoterInterval& h = oracle.hidden();
    std::vector<double> truth;
    for (double p : in.candidates.positions())
      if (h.a <= p && p <= h.b) truth.push_back(p);
    if (truth != approved) ++mismatches;
    total_queries += static_cast<double>(oracle.stats().total);
    if (dialogues.is_open()) riv::write_dialogues(dialogues, oracle.log());
  }
  riv::json out;
  out["n"] = n;
  out["m"] = in.candidates.size();
  out["mean_distinct_queries"] = n > 0 ? total_queries / static_cast<double>(n) : 0.0;
  out["mismatches"] = mismatches;
  out["election"] = riv::election_to_json(elicited);
  std::cout << out.dump(2) << '\n';
  return mismatches == 0 ? kExitOk : kExitVerificationFailure;
}

int cmd_run_pjr(const std::string& model_path, const std::string& candidates_path, int m,
                const std::string& placement, int k, long long n, std::uint64_t seed,
                const std::string& report_path) {
  riv::SplitStream rng(seed);
  const RunInputs in = prepare_inputs(model_path, candidates_path, m, placement, rng.split(1));
  auto universe = std::make_shared<const riv::QueryUniverse>(in.candidates, in.model);
  riv::SplitStream voter_rng = rng.split(2);
  std::vector<riv::VoterOracle> oracles;
  for (long long v = 0; v < n; ++v) {
    riv::SplitStream vs = voter_rng.split(static_cast<std::uint64_t>(v));
    oracles.emplace_back(static_cast<int>(v), riv::sample_voter(in.model, vs), universe);
  }
  riv::PipelineResult res = riv::pjr_pipeline(in.model, in.candidates, k, oracles);

  const riv::Election truth = riv::true_election(in.candidates, oracles, k);
  std::vector<int> W;
  for (double p : res.committee) W.push_back(static_cast<int>(*in.candidates.index_of(p)));
  const auto witness = riv::check_pjr_plus_ci(truth, W);

  double mean_q = 0, mean_gross = 0;
  std::int64_t max_q = 0;
  riv::json hist = riv::json::array();
  std::vector<long long> hist_counts;
  for (const riv::VoterQueryStats& st : res.voter_stats) {
    mean_q += static_cast<double>(st.total_distinct);
    mean_gross += static_cast<double>(st.total_gross);
    max_q = std::max(max_q, st.total_distinct);
    if (static_cast<std::size_t>(st.total_distinct) + 1 > hist_counts.size())
      hist_counts.resize(static_cast<std::size_t>(st.total_distinct) + 1, 0);
    ++hist_counts[static_cast<std::size_t>(st.total_distinct)];
  }
  for (long long h : hist_counts) hist.push_back(h);

  riv::json report;
  report["path"] = res.path == riv::PipelinePath::guessed ? "guessed" : "fallback";
  std::vector<double> committee_original;
  for (int c : W) committee_original.push_back(in.original[static_cast<std::size_t>(c)]);
  report["committee"] = committee_original;
  report["committee_indices"] = W;
  report["verified"] = !witness.has_value();
  if (witness) report["witness"] = riv::witness_to_json(*witness);
  report["u"] = res.tally.unlocated;
  report["max_tally"] = res.tally.max_count;
  report["mean_distinct_queries"] = mean_q / static_cast<double>(n);
  report["mean_gross_queries"] = mean_gross / static_cast<double>(n);
  report["max_distinct_queries"] = max_q;
  report["query_histogram"] = hist;
  if (report_path.empty())
    std::cout << report.dump(2) << '\n';
  else
    riv::save_json_file(report_path, report);
  return witness ? kExitVerificationFailure : kExitOk;
}

int cmd_check(const std::string& which, const std::string& election_path,
              const std::string& committee_path) {
  const riv::Election e = riv::election_from_json(riv::load_json_file(election_path));
  const std::vector<int> W = riv::committee_from_json(riv::load_json_file(committee_path), e);
  std::optional<riv::Witness> witness;
  if (which == "pjr-plus")
    witness = riv::check_pjr_plus_ci(e, W);
  else if (which == "pjr-plus-bf")
    witness = riv::check_pjr_plus_bruteforce(e, W);
  else if (which == "core-bf")
    witness = riv::check_core_bruteforce(e, W);
  else
    throw riv::IoError("unknown checker " + which);
  if (!witness) {
    std::cout << riv::json{{"satisfied", true}}.dump(2) << '\n';
    return kExitOk;
  }
  std::cout << riv::json{{"satisfied", false}, {"witness", riv::witness_to_json(*witness)}}.dump(2)
            << '\n';
  return kExitVerificationFailure;
}

int cmd_experiment(const std::string& config_path) {
  const riv::ExperimentConfig cfg = riv::config_from_json(riv::load_json_file(config_path));
  try {
    const riv::Report report = riv::run_experiment(cfg);
    std::cout << report.aggregates.dump(2) << '\n';
    if (cfg.out_csv.empty()) {
      std::cerr << "note: no out_csv configured; per-trial rows were not written\n";
    }
    return kExitOk;
  } catch (const riv::HarnessError& ex) {
    std::cerr << "experiment aborted: " << ex.what() << '\n';
    return kExitVerificationFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation harness for interval-voter elections"};
  app.require_subcommand(1);

  // model validate <file>
  auto* model_cmd = app.add_subcommand("model", "Model file utilities");
  model_cmd->require_subcommand(1);
  std::string model_file;
  auto* validate_cmd = model_cmd->add_subcommand("validate", "Validate a model file");
  validate_cmd->add_option("file", model_file, "Model JSON file")->required();

  // sample
  std::string sample_model, sample_out;
  long long sample_n = 1;
  std::uint64_t sample_seed = 0;
  auto* sample_cmd = app.add_subcommand("sample", "Sample voters from a model");
  sample_cmd->add_option("--model", sample_model)->required();
  sample_cmd->add_option("--n", sample_n)->required();
  sample_cmd->add_option("--seed", sample_seed)->required();
  sample_cmd->add_option("--out", sample_out);

  // elicit-full
  std::string ef_model, ef_candidates, ef_placement = "iid_uniform", ef_dialogues;
  int ef_m = 0;
  long long ef_n = 1;
  std::uint64_t ef_seed = 0;
  auto* ef_cmd = app.add_subcommand("elicit-full", "Elicit complete ballots for sampled voters");
  ef_cmd->add_option("--model", ef_model)->required();
  ef_cmd->add_option("--candidates", ef_candidates);
  ef_cmd->add_option("--m", ef_m);
  ef_cmd->add_option("--placement", ef_placement);
  ef_cmd->add_option("--n", ef_n)->required();
  ef_cmd->add_option("--seed", ef_seed)->required();
  ef_cmd->add_option("--dialogues", ef_dialogues);

  // run-pjr
  std::string rp_model, rp_candidates, rp_placement = "iid_uniform", rp_report;
  int rp_m = 0, rp_k = 1;
  long long rp_n = 1;
  std::uint64_t rp_seed = 0;
  auto* rp_cmd = app.add_subcommand("run-pjr", "Select and verify a proportional committee");
  rp_cmd->add_option("--model", rp_model)->required();
  rp_cmd->add_option("--candidates", rp_candidates);
  rp_cmd->add_option("--m", rp_m);
  rp_cmd->add_option("--placement", rp_placement);
  rp_cmd->add_option("--k", rp_k)->required();
  rp_cmd->add_option("--n", rp_n)->required();
  rp_cmd->add_option("--seed", rp_seed)->required();
  rp_cmd->add_option("--report", rp_report);

  // check <which>
  std::string check_which, check_election, check_committee;
  auto* check_cmd = app.add_subcommand("check", "Run an axiom checker");
  check_cmd->add_option("which", check_which, "pjr-plus | pjr-plus-bf | core-bf")->required();
  check_cmd->add_option("--election", check_election)->required();
  check_cmd->add_option("--committee", check_committee)->required();

  // experiment
  std::string exp_config;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a batch experiment from a config file");
  exp_cmd->add_option("--config", exp_config)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (validate_cmd->parsed()) return cmd_model_validate(model_file);
    if (sample_cmd->parsed()) return cmd_sample(sample_model, sample_n, sample_seed, sample_out);
    if (ef_cmd->parsed())
      return cmd_elicit_full(ef_model, ef_candidates, ef_m, ef_placement, ef_n, ef_seed,
                             ef_dialogues);
    if (rp_cmd->parsed())
      return cmd_run_pjr(rp_model, rp_candidates, rp_m, rp_placement, rp_k, rp_n, rp_seed,
                         rp_report);
    if (check_cmd->parsed()) return cmd_check(check_which, check_election, check_committee);
    if (exp_cmd->parsed()) return cmd_experiment(exp_config);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
