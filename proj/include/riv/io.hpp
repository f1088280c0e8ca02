#pragma once

// File formats. Everything is JSON (or JSON lines for dialogues); doubles
// round-trip bit-exactly through the serializer, which replay tests rely on.

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "riv/committee.hpp"
#include "riv/model.hpp"
#include "riv/oracle.hpp"
#include "riv/verify.hpp"

namespace riv {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw IoError(path + ": " + ex.what());
  }
  return j;
}

inline void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
}

// ---- model ----------------------------------------------------------------
//
// Uniform models only need weights:
//   {"kind": "uniform", "weights": [0.5, 0.5]}
// General models list per-segment geometry:
//   {"kind": "general", "segments": [{"z_minus": .., "z_plus": .., "p": ..,
//                                     "cdf_breakpoints": [[x, F], ...]}, ...]}

inline RivModel model_from_json(const json& j) {
  const std::string kind = j.value("kind", "uniform");
  if (kind == "uniform") {
    if (!j.contains("weights")) throw ModelError("model: uniform kind needs a weights array");
    return RivModel::make_uniform(j.at("weights").get<std::vector<double>>());
  }
  if (kind != "general") throw ModelError("model: kind must be \"uniform\" or \"general\"");
  std::vector<Segment> segs;
  for (const json& sj : j.at("segments")) {
    Segment s;
    s.z_minus = sj.at("z_minus").get<double>();
    s.z_plus = sj.at("z_plus").get<double>();
    s.weight = sj.at("p").get<double>();
    std::vector<double> xs, us;
    for (const json& row : sj.at("cdf_breakpoints")) {
      xs.push_back(row.at(0).get<double>());
      us.push_back(row.at(1).get<double>());
    }
    s.cdf = PiecewiseLinearCdf(std::move(xs), std::move(us));
    segs.push_back(std::move(s));
  }
  return RivModel::make_general(std::move(segs));
}

inline json model_to_json(const RivModel& model) {
  json j;
  if (model.kind() == ModelKind::uniform) {
    j["kind"] = "uniform";
    std::vector<double> w;
    for (const Segment& s : model.segments()) w.push_back(s.weight);
    j["weights"] = w;
    return j;
  }
  j["kind"] = "general";
  json segs = json::array();
  for (const Segment& s : model.segments()) {
    json sj;
    sj["z_minus"] = s.z_minus;
    sj["z_plus"] = s.z_plus;
    sj["p"] = s.weight;
    json bp = json::array();
    for (std::size_t i = 0; i < s.cdf.xs().size(); ++i)
      bp.push_back(json::array({s.cdf.xs()[i], s.cdf.us()[i]}));
    sj["cdf_breakpoints"] = bp;
    segs.push_back(std::move(sj));
  }
  j["segments"] = std::move(segs);
  return j;
}

inline RivModel load_model(const std::string& path) { return model_from_json(load_json_file(path)); }

// ---- candidates -----------------------------------------------------------

inline std::vector<double> candidates_from_json(const json& j) {
  return j.at("positions").get<std::vector<double>>();
}

inline json candidates_to_json(const std::vector<double>& positions) {
  return json{{"positions", positions}};
}

// ---- elections ------------------------------------------------------------
//
// Ballots are stored either as explicit index lists ("ballots") or, when
// every ballot is consecutive, as inclusive [first, last] index pairs
// ("ballots_ci", [] for an empty ballot).

inline Election election_from_json(const json& j) {
  Election e;
  e.positions = j.at("positions").get<std::vector<double>>();
  e.k = j.at("k").get<int>();
  if (j.contains("ballots_ci")) {
    for (const json& bj : j.at("ballots_ci")) {
      std::vector<int> ballot;
      if (!bj.empty()) {
        const int first = bj.at(0).get<int>();
        const int last = bj.at(1).get<int>();
        for (int c = first; c <= last; ++c) ballot.push_back(c);
      }
      e.ballots.push_back(std::move(ballot));
    }
  } else {
    for (const json& bj : j.at("ballots"))
      e.ballots.push_back(bj.get<std::vector<int>>());
  }
  e.validate();
  return e;
}

inline json election_to_json(const Election& e) {
  json j;
  j["positions"] = e.positions;
  j["k"] = e.k;
  if (e.ballots_consecutive()) {
    json ballots = json::array();
    for (const auto& b : e.ballots) {
      if (b.empty())
        ballots.push_back(json::array());
      else
        ballots.push_back(json::array({b.front(), b.back()}));
    }
    j["ballots_ci"] = std::move(ballots);
  } else {
    j["ballots"] = e.ballots;
  }
  return j;
}

// ---- committees -----------------------------------------------------------

inline json committee_to_json(const Election& e, const std::vector<int>& committee) {
  std::vector<double> positions;
  for (int c : committee) positions.push_back(e.positions.at(static_cast<std::size_t>(c)));
  return json{{"indices", committee}, {"positions", positions}};
}

inline std::vector<int> committee_from_json(const json& j, const Election& e) {
  std::vector<int> committee;
  if (j.contains("indices")) {
    committee = j.at("indices").get<std::vector<int>>();
  } else {
    for (double p : j.at("positions").get<std::vector<double>>()) {
      const auto it = std::lower_bound(e.positions.begin(), e.positions.end(), p);
      if (it == e.positions.end() || *it != p)
        throw IoError("committee: position " + std::to_string(p) + " is not a candidate");
      committee.push_back(static_cast<int>(it - e.positions.begin()));
    }
  }
  std::sort(committee.begin(), committee.end());
  return committee;
}

// ---- witnesses ------------------------------------------------------------

inline json witness_to_json(const Witness& w) {
  json j;
  j["axiom"] = w.axiom == Witness::Axiom::pjr_plus ? "pjr_plus" : "core";
  j["ell"] = w.ell;
  if (w.candidate) j["candidate"] = *w.candidate;
  if (!w.deviating_set.empty()) j["deviating_set"] = w.deviating_set;
  j["group"] = w.group;
  return j;
}

inline Witness witness_from_json(const json& j) {
  Witness w;
  w.axiom = j.at("axiom").get<std::string>() == "core" ? Witness::Axiom::core
                                                       : Witness::Axiom::pjr_plus;
  w.ell = j.at("ell").get<int>();
  if (j.contains("candidate")) w.candidate = j.at("candidate").get<int>();
  if (j.contains("deviating_set")) w.deviating_set = j.at("deviating_set").get<std::vector<int>>();
  w.group = j.at("group").get<std::vector<int>>();
  return w;
}

// ---- dialogues ------------------------------------------------------------
//
// Line-delimited records, one per dialogue entry:
//   {"seq": .., "voter_id": .., "kind": "point"|"interval",
//    "positions": [x] or [x, y], "answer": true|false}

inline json dialogue_entry_to_json(const DialogueEntry& e) {
  json j;
  j["seq"] = e.seq;
  j["voter_id"] = e.voter_id;
  j["kind"] = e.kind == QueryKind::point ? "point" : "interval";
  if (e.kind == QueryKind::point)
    j["positions"] = json::array({e.x});
  else
    j["positions"] = json::array({e.x, e.y});
  j["answer"] = e.answer;
  return j;
}

inline DialogueEntry dialogue_entry_from_json(const json& j) {
  DialogueEntry e;
  e.seq = j.at("seq").get<std::int64_t>();
  e.voter_id = j.at("voter_id").get<int>();
  e.kind = j.at("kind").get<std::string>() == "point" ? QueryKind::point : QueryKind::interval;
  const auto pos = j.at("positions").get<std::vector<double>>();
  e.x = pos.at(0);
  e.y = e.kind == QueryKind::point ? pos.at(0) : pos.at(1);
  e.answer = j.at("answer").get<bool>();
  return e;
}

inline void write_dialogues(std::ostream& out, const std::vector<DialogueEntry>& log) {
  for (const DialogueEntry& e : log) out << dialogue_entry_to_json(e).dump() << '\n';
}

inline std::vector<DialogueEntry> read_dialogues(std::istream& in) {
  std::vector<DialogueEntry> log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    log.push_back(dialogue_entry_from_json(json::parse(line)));
  }
  return log;
}

// Per-voter elicitation trace in the same stream format.
inline json trace_record_to_json(int voter_id, const ResolveOutcome& out) {
  static constexpr const char* names[] = {"resolved_nonempty", "resolved_empty_certificate",
                                          "resolved_by_fallback", "no_point_approved",
                                          "segment_not_found"};
  json j;
  j["kind"] = "trace";
  j["voter_id"] = voter_id;
  j["status"] = names[static_cast<int>(out.status)];
  j["round"] = out.rounds_entered;
  if (out.segment) j["segment"] = *out.segment;
  j["approved"] = out.approved;
  j["log_begin"] = out.log_begin;
  j["log_end"] = out.log_end;
  return j;
}

}  // namespace riv
