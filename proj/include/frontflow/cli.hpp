#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "frontflow/analytic.hpp"
#include "frontflow/errors.hpp"
#include "frontflow/faces.hpp"
#include "frontflow/flow.hpp"
#include "frontflow/params.hpp"
#include "frontflow/sim.hpp"
#include "frontflow/stats.hpp"

// Configuration parsing, subcommands and deterministic artifact emission.
// All artifact bodies are reproducible byte for byte from the config alone.

namespace frontflow {

enum class OutputFormat { Csv, Json };

struct RunConfig {
  SystemParams params;
  std::uint64_t seed = 1;
  StopRule stop = StopRule::collisions(100000);
  int checkpoints = 200;
  std::optional<PairMatrix> x0;
  OutputFormat format = OutputFormat::Csv;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed) ok = ok || it.key() == key;
    if (!ok) throw SchemaError("unknown key \"" + it.key() + "\" in " + where);
  }
}

inline double require_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw SchemaError("missing key \"" + std::string(key) + "\" in " + where);
  if (!obj[key].is_number()) throw SchemaError("\"" + std::string(key) + "\" must be a number in " + where);
  return obj[key].get<double>();
}

inline SpacingSpec parse_spacing(const json& j, const std::string& where) {
  if (!j.is_object()) throw SchemaError("\"spacing\" must be an object in " + where);
  reject_unknown_keys(j, {"family", "shape"}, where + ".spacing");
  if (!j.contains("family") || !j["family"].is_string())
    throw SchemaError("spacing needs a \"family\" string in " + where);
  const std::string fam = j["family"].get<std::string>();
  SpacingSpec spec;
  if (fam == "exponential") {
    spec.family = SpacingFamily::Exponential;
  } else if (fam == "uniform") {
    spec.family = SpacingFamily::Uniform;
  } else if (fam == "gamma") {
    spec.family = SpacingFamily::Gamma;
    spec.shape = require_number(j, "shape", where + ".spacing");
  } else {
    throw SchemaError("unknown spacing family \"" + fam + "\" in " + where);
  }
  if (fam != "gamma" && j.contains("shape"))
    throw SchemaError("\"shape\" is only valid for gamma spacing in " + where);
  return spec;
}

inline std::vector<TypeSpec> parse_side(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.empty())
    throw SchemaError("\"" + where + "\" must be a non-empty array");
  std::vector<TypeSpec> out;
  int idx = 1;
  for (const json& j : arr) {
    const std::string at = where + "[" + std::to_string(idx++) + "]";
    if (!j.is_object()) throw SchemaError(at + " must be an object");
    reject_unknown_keys(j, {"v", "rho", "spacing"}, at);
    TypeSpec t;
    t.velocity = require_number(j, "v", at);
    t.density = require_number(j, "rho", at);
    if (j.contains("spacing")) t.spacing = parse_spacing(j["spacing"], at);
    out.push_back(t);
  }
  return out;
}

inline const char* family_name(SpacingFamily f) {
  switch (f) {
    case SpacingFamily::Exponential: return "exponential";
    case SpacingFamily::Uniform: return "uniform";
    case SpacingFamily::Gamma: return "gamma";
  }
  return "?";
}

inline json side_to_json(const std::vector<TypeSpec>& side) {
  json arr = json::array();
  for (const TypeSpec& t : side) {
    json spacing{{"family", family_name(t.spacing.family)}};
    if (t.spacing.family == SpacingFamily::Gamma) spacing["shape"] = t.spacing.shape;
    arr.push_back({{"v", t.velocity}, {"rho", t.density}, {"spacing", spacing}});
  }
  return arr;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw SchemaError("config root must be an object");
  detail::reject_unknown_keys(
      root, {"minus", "plus", "seed", "stop", "checkpoints", "x0", "format"}, "config");

  RunConfig cfg;
  if (!root.contains("minus") || !root.contains("plus"))
    throw SchemaError("config needs \"minus\" and \"plus\" arrays");
  cfg.params.minus = detail::parse_side(root["minus"], "minus");
  cfg.params.plus = detail::parse_side(root["plus"], "plus");

  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) throw SchemaError("\"seed\" must be unsigned");
    cfg.seed = root["seed"].get<std::uint64_t>();
  }

  if (!root.contains("stop")) throw SchemaError("config needs a \"stop\" rule");
  const nlohmann::json& stop = root["stop"];
  if (!stop.is_object()) throw SchemaError("\"stop\" must be an object");
  detail::reject_unknown_keys(stop, {"collisions", "time"}, "stop");
  if (stop.contains("collisions") == stop.contains("time"))
    throw SchemaError("\"stop\" needs exactly one of \"collisions\" or \"time\"");
  if (stop.contains("collisions")) {
    if (!stop["collisions"].is_number_unsigned())
      throw SchemaError("\"stop.collisions\" must be unsigned");
    cfg.stop = StopRule::collisions(stop["collisions"].get<std::uint64_t>());
  } else {
    cfg.stop = StopRule::time(detail::require_number(stop, "time", "stop"));
  }

  if (root.contains("checkpoints")) {
    if (!root["checkpoints"].is_number_unsigned())
      throw SchemaError("\"checkpoints\" must be unsigned");
    cfg.checkpoints = root["checkpoints"].get<int>();
  }

  if (root.contains("format")) {
    const std::string f = root["format"].is_string() ? root["format"].get<std::string>() : "";
    if (f == "csv")
      cfg.format = OutputFormat::Csv;
    else if (f == "json")
      cfg.format = OutputFormat::Json;
    else
      throw SchemaError("\"format\" must be \"csv\" or \"json\"");
  }

  const int L = int(cfg.params.minus.size()), K = int(cfg.params.plus.size());
  if (root.contains("x0")) {
    const nlohmann::json& x0 = root["x0"];
    if (!x0.is_array() || int(x0.size()) != L)
      throw SchemaError("\"x0\" must be an array of L rows");
    PairMatrix m(L, K);
    for (int i = 0; i < L; ++i) {
      if (!x0[i].is_array() || int(x0[i].size()) != K)
        throw SchemaError("\"x0\" rows must have K entries");
      for (int k = 0; k < K; ++k) {
        if (!x0[i][k].is_number()) throw SchemaError("\"x0\" entries must be numbers");
        m.at(i, k) = x0[i][k].get<double>();
        if (m.at(i, k) < 0.0) throw SchemaError("\"x0\" entries must be nonnegative");
      }
    }
    if (!on_manifold(m)) throw SchemaError("\"x0\" violates the conservation laws");
    cfg.x0 = std::move(m);
  }

  validate_params(cfg.params);  // surfaces parameter errors at parse time
  return cfg;
}

// Canonical serialization: defaults materialized, keys sorted.  Parsing the
// result reproduces the same RunConfig and the same bytes.
inline std::string canonical_config_json(const RunConfig& cfg) {
  nlohmann::json root;
  root["minus"] = detail::side_to_json(cfg.params.minus);
  root["plus"] = detail::side_to_json(cfg.params.plus);
  root["seed"] = cfg.seed;
  if (cfg.stop.kind == StopRule::Kind::Collisions)
    root["stop"] = {{"collisions", std::uint64_t(cfg.stop.value)}};
  else
    root["stop"] = {{"time", cfg.stop.value}};
  root["checkpoints"] = std::uint64_t(cfg.checkpoints);
  root["format"] = cfg.format == OutputFormat::Csv ? "csv" : "json";
  if (cfg.x0) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < cfg.x0->L(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int k = 0; k < cfg.x0->K(); ++k) row.push_back(cfg.x0->at(i, k));
      rows.push_back(row);
    }
    root["x0"] = rows;
  }
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Artifact writers
// ---------------------------------------------------------------------------
namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << body;
}

inline json face_to_json(const Face& f, int L, int K) {
  json j;
  json bm = json::array(), bp = json::array(), pos = json::array();
  for (int i = 0; i < L; ++i)
    if (set_has(f.blocked_minus(), i)) bm.push_back(i + 1);
  for (int k = 0; k < K; ++k)
    if (set_has(f.blocked_plus(), k)) bp.push_back(k + 1);
  for (int i = 0; i < L; ++i)
    for (int k = 0; k < K; ++k)
      if (!f.pair_blocked(i, k)) pos.push_back(json::array({i + 1, k + 1}));
  j["blocked_minus"] = bm;
  j["blocked_plus"] = bp;
  j["positive_pairs"] = pos;
  return j;
}

inline std::uint64_t face_bitmask(const Face& f, int L, int K) {
  std::uint64_t bits = 0;
  for (int i = 0; i < L; ++i)
    for (int k = 0; k < K; ++k)
      if (!f.pair_blocked(i, k)) bits |= std::uint64_t{1} << (i * K + k);
  return bits;
}

inline json matrix_to_json(const PairMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.L(); ++i) {
    json row = json::array();
    for (int k = 0; k < m.K(); ++k) row.push_back(m.at(i, k));
    rows.push_back(row);
  }
  return rows;
}

// Classification of every appropriate face: ergodic or not, the drift along
// it, and the escape face where there is one.
inline json face_table_json(const ValidatedParams& p, std::size_t cap = 4096) {
  json table = json::array();
  std::size_t listed = 0;
  bool truncated = false;
  for (TypeSet jm = 0; jm < (TypeSet{1} << p.L()) && !truncated; ++jm)
    for (TypeSet jp = 0; jp < (TypeSet{1} << p.K()); ++jp) {
      if ((jm == 0) != (jp == 0)) continue;
      if (listed == cap) {
        truncated = true;
        break;
      }
      const Face f = Face::from_blocked(jm, jp);
      json entry = face_to_json(f, p.L(), p.K());
      const bool erg = is_ergodic_face(p, f);
      entry["ergodic"] = erg;
      if (f.is_interior() || erg)
        entry["velocity"] = matrix_to_json(induced_vector(p, f));
      else
        entry["outgoing"] =
            face_to_json(minimal_outgoing_face(p, f), p.L(), p.K());
      table.push_back(std::move(entry));
      ++listed;
    }
  json j;
  j["faces"] = table;
  j["truncated"] = truncated;
  return j;
}

inline json analysis_json(const ValidatedParams& p) {
  const RegimeReport rep = boundary_velocity(p);
  const Chain chain = build_chain(p);
  const FinalFace fin = final_face(p);
  const GenericityReport gen = genericity_check(p);

  json j;
  j["V"] = rep.V;
  j["W"] = rep.W;
  j["L1"] = rep.L1;
  j["K1"] = rep.K1;
  j["regime"] = regime_name(rep.regime);

  json steps = json::array();
  for (const ChainStep& s : chain.steps) {
    const char* move = s.move == ChainMove::Start ? "start"
                       : s.move == ChainMove::AddPlus ? "add_plus"
                                                      : "add_minus";
    steps.push_back({{"minus_prefix", s.b}, {"plus_prefix", s.a}, {"V", s.V}, {"move", move}});
  }
  j["chain"] = steps;

  json ff;
  ff["at_origin"] = fin.at_origin;
  if (!fin.at_origin) ff.update(face_to_json(fin.face, p.L(), p.K()));
  j["final_face"] = ff;

  json g;
  g["mode"] = gen.mode == GenericityMode::Exhaustive ? "exhaustive" : "prefix_only";
  g["checked_pairs"] = gen.checked_pairs;
  json viols = json::array();
  for (const GenericityViolation& v : gen.violations) {
    json minus = json::array(), plus = json::array();
    for (int i : set_indices(v.group.minus)) minus.push_back(i + 1);
    for (int k : set_indices(v.group.plus)) plus.push_back(k + 1);
    viols.push_back({{"minus", minus},
                     {"plus", plus},
                     {"group_velocity", v.group_velocity},
                     {"offending_velocity", v.offending_velocity},
                     {"gap", v.gap}});
  }
  g["violations"] = viols;
  j["genericity"] = g;
  return j;
}

inline void write_sim_artifacts(const std::filesystem::path& dir, const SimOutput& out,
                                OutputFormat format) {
  const int L = out.nu.L(), K = out.nu.K();
  if (format == OutputFormat::Csv) {
    std::string b = "t,beta\n";
    for (const BoundarySample& s : out.boundary)
      b += fmt(s.t) + "," + fmt(s.beta) + "\n";
    write_file(dir / "boundary.csv", b);

    std::string c = "i,k,count\n";
    for (int i = 0; i < L; ++i)
      for (int k = 0; k < K; ++k)
        c += std::to_string(i + 1) + "," + std::to_string(k + 1) + "," +
             std::to_string(std::uint64_t(out.nu.at(i, k))) + "\n";
    write_file(dir / "collisions.csv", c);

    std::string d = "t";
    for (int i = 0; i < L; ++i)
      for (int k = 0; k < K; ++k)
        d += ",d_{" + std::to_string(i + 1) + "," + std::to_string(k + 1) + "}";
    d += "\n";
    for (const DistanceSample& s : out.distances) {
      d += fmt(s.t);
      for (int i = 0; i < L; ++i)
        for (int k = 0; k < K; ++k) d += "," + fmt(s.d.at(i, k));
      d += "\n";
    }
    write_file(dir / "distances.csv", d);
  } else {
    json b;
    b["samples"] = json::array();
    for (const BoundarySample& s : out.boundary)
      b["samples"].push_back({{"t", s.t}, {"beta", s.beta}});
    write_file(dir / "boundary.json", b.dump(2) + "\n");

    json c;
    c["counts"] = json::array();
    for (int i = 0; i < L; ++i)
      for (int k = 0; k < K; ++k)
        c["counts"].push_back(
            {{"i", i + 1}, {"k", k + 1}, {"count", std::uint64_t(out.nu.at(i, k))}});
    write_file(dir / "collisions.json", c.dump(2) + "\n");

    json d;
    d["samples"] = json::array();
    for (const DistanceSample& s : out.distances) {
      json rows = json::array();
      for (int i = 0; i < L; ++i) {
        json row = json::array();
        for (int k = 0; k < K; ++k) row.push_back(s.d.at(i, k));
        rows.push_back(row);
      }
      d["samples"].push_back({{"t", s.t}, {"d", rows}});
    }
    write_file(dir / "distances.json", d.dump(2) + "\n");
  }
}

inline json report_json(const ComparisonReport& cmp) {
  json j;
  j["W_theory"] = cmp.W_theory;
  j["W_hat"] = cmp.W_hat;
  j["W_stderr"] = cmp.W_stderr;
  j["regime"] = regime_name(cmp.regime);
  j["rate_checks"] = json::array();
  for (const RateCheck& c : cmp.rate_checks)
    j["rate_checks"].push_back({{"name", c.name},
                                {"observed", c.observed},
                                {"expected", c.expected},
                                {"tolerance", c.tolerance},
                                {"pass", c.pass}});
  j["pass"] = cmp.pass;
  return j;
}

inline void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj,
                             int L, int K, OutputFormat format) {
  if (format == OutputFormat::Csv) {
    if (L * K > 64)
      throw SchemaError("the CSV face bitmask holds at most 64 pairs; use --format json");
    std::string body = "t_start,duration,face";
    for (int i = 0; i < L; ++i)
      for (int k = 0; k < K; ++k)
        body += ",v_{" + std::to_string(i + 1) + "," + std::to_string(k + 1) + "}";
    body += "\n";
    for (const FlowSegment& s : traj.segments) {
      body += fmt(s.t_start) + "," + fmt(s.duration) + "," +
              std::to_string(face_bitmask(s.face, L, K));
      for (int i = 0; i < L; ++i)
        for (int k = 0; k < K; ++k) body += "," + fmt(s.velocity.at(i, k));
      body += "\n";
    }
    write_file(dir / "trajectory.csv", body);
  } else {
    json j;
    j["status"] = flow_status_name(traj.status);
    j["final_time"] = traj.final_time;
    j["chain_hit_times"] = json::array();
    for (double t : traj.chain_hit_times)
      j["chain_hit_times"].push_back(std::isnan(t) ? json(nullptr) : json(t));
    j["segments"] = json::array();
    for (const FlowSegment& s : traj.segments) {
      json rows = json::array(), start = json::array();
      for (int i = 0; i < L; ++i) {
        json vrow = json::array(), srow = json::array();
        for (int k = 0; k < K; ++k) {
          vrow.push_back(s.velocity.at(i, k));
          srow.push_back(s.start.at(i, k));
        }
        rows.push_back(vrow);
        start.push_back(srow);
      }
      j["segments"].push_back({{"t_start", s.t_start},
                               {"duration", std::isfinite(s.duration)
                                                ? json(s.duration)
                                                : json(nullptr)},
                               {"face", face_to_json(s.face, L, K)},
                               {"velocity", rows},
                               {"start", start}});
    }
    write_file(dir / "trajectory.json", j.dump(2) + "\n");
  }
}

// Default initial point for validate runs without an explicit x0: a strictly
// positive additive profile, which satisfies the conservation laws.
inline PairMatrix default_x0(int L, int K) {
  PairMatrix x(L, K);
  for (int i = 0; i < L; ++i)
    for (int k = 0; k < K; ++k) x.at(i, k) = 1.0 + 0.5 * i + 0.25 * k;
  return x;
}

}  // namespace detail

enum class Command { Analyze, Simulate, Flow, Validate };

inline std::optional<Command> command_from_name(const std::string& name) {
  if (name == "analyze") return Command::Analyze;
  if (name == "simulate") return Command::Simulate;
  if (name == "flow") return Command::Flow;
  if (name == "validate") return Command::Validate;
  return std::nullopt;
}

// Runs one subcommand, writing artifacts into out_dir.  face_table extends
// `analyze` output with the per-face classification.
// Exit codes: 0 pass, 1 fail, 2 usage/config error, 3 degenerate parameters.
inline int run_command(Command cmd, const RunConfig& cfg, const std::string& out_dir,
                       std::ostream& diag = std::cerr, bool face_table = false) {
  namespace fs = std::filesystem;
  try {
    const ValidatedParams p = validate_params(cfg.params);
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    switch (cmd) {
      case Command::Analyze: {
        nlohmann::json analysis = detail::analysis_json(p);
        if (face_table) analysis.update(detail::face_table_json(p));
        detail::write_file(dir / "analysis.json", analysis.dump(2) + "\n");
        return 0;
      }
      case Command::Simulate: {
        SimOptions opt;
        opt.seed = cfg.seed;
        opt.stop = cfg.stop;
        opt.checkpoints = cfg.checkpoints;
        const SimOutput out = simulate(p, opt);
        detail::write_sim_artifacts(dir, out, cfg.format);
        const ComparisonReport cmp = compare_to_theory(p, out);
        detail::write_file(dir / "report.json", detail::report_json(cmp).dump(2) + "\n");
        return cmp.pass ? 0 : 1;
      }
      case Command::Flow: {
        if (!cfg.x0) {
          diag << "flow requires \"x0\" in the config\n";
          return 2;
        }
        const Trajectory traj = integrate_flow(p, *cfg.x0);
        detail::write_trajectory(dir, traj, p.L(), p.K(), cfg.format);
        return traj.status == FlowStatus::BudgetExhausted ? 1 : 0;
      }
      case Command::Validate: {
        const nlohmann::json analysis = detail::analysis_json(p);
        detail::write_file(dir / "analysis.json", analysis.dump(2) + "\n");
        if (!analysis["genericity"]["violations"].empty()) {
          diag << "parameters violate the genericity condition\n";
          return 3;
        }

        SimOptions opt;
        opt.seed = cfg.seed;
        opt.stop = cfg.stop;
        opt.checkpoints = cfg.checkpoints;
        const SimOutput out = simulate(p, opt);
        detail::write_sim_artifacts(dir, out, cfg.format);
        const ComparisonReport cmp = compare_to_theory(p, out);
        detail::write_file(dir / "report.json", detail::report_json(cmp).dump(2) + "\n");

        // Fluid-limit check: the rescaled distance process must approach the
        // integrated trajectory as the scale grows.
        const PairMatrix x0 = cfg.x0 ? *cfg.x0 : detail::default_x0(p.L(), p.K());
        const Trajectory traj = integrate_flow(p, x0);
        const double t_base = traj.final_time > 0.0 ? traj.final_time : 1.0;
        const std::vector<double> grid{0.3 * t_base, 0.6 * t_base, t_base, 1.5 * t_base};

        std::vector<double> devs;
        for (double M : {1e2, 1e3, 1e4}) {
          const auto path =
              scaled_distance_path(p, x0, M, grid, cfg.seed + std::uint64_t(M));
          double dev = 0.0;
          for (const ScaledPathPoint& pt : path) {
            const PairMatrix ref = flow_point_at(traj, pt.t);
            for (int j = 0; j < ref.size(); ++j)
              dev = std::max(dev, std::abs(pt.d.data()[j] - ref.data()[j]));
          }
          devs.push_back(dev);
        }
        const double band = 0.05 * (1.0 + x0.max_abs());
        const bool fluid_pass = devs[2] <= band && devs[2] <= devs[0];

        nlohmann::json v;
        v["sim_pass"] = cmp.pass;
        v["fluid"] = {{"scales", {1e2, 1e3, 1e4}},
                      {"sup_deviation", devs},
                      {"band", band},
                      {"pass", fluid_pass}};
        v["pass"] = cmp.pass && fluid_pass;
        detail::write_file(dir / "validate.json", v.dump(2) + "\n");
        return (cmp.pass && fluid_pass) ? 0 : 1;
      }
    }
    return 2;
  } catch (const DegenerateParameters& e) {
    diag << "degenerate parameters: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    diag << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace frontflow
