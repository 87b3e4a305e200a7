#pragma once

// Experiment configs, dispatch to the verification suites, and report output.
//
// Config (JSON):
//   mode        af_convergence | af_certificates | comm_repair | comm_ball_haus | triple_check
//   tower       fixture name ("car", "t2", "t2_extended", "lineage"), a .json path or a tower object
//   beta        array, default 1/n! with M+1 values
//   ideals      [{"top_support":[...]}, ...]             af_certificates, default the full ideal
//   levels      recovery levels, default 1..M            af_certificates
//   sequence    [{"top_support":[...]}, ...]             af_convergence
//   limit       {"top_support":[...]}                    af_convergence
//   space       fixture name ("two_point", "line3"), a .json path or a space object   comm_*
//   F1, F2      label lists                              comm_ball_haus with a space
//   Fn, F, f, eps                                        comm_repair with a space
//   trials      random instances, default 500            comm_* without a space
//   max_points  default 12
//   samples, seed, tol, tuples
//
// Reports are deterministic in (config, seed); the runtime is kept in memory
// only and never emitted, so re-emission is byte-identical.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "qmlab/af_ideals.hpp"
#include "qmlab/af_metric.hpp"
#include "qmlab/comm_ball.hpp"
#include "qmlab/commutative.hpp"
#include "qmlab/fixtures.hpp"
#include "qmlab/json_io.hpp"
#include "qmlab/parallel.hpp"
#include "qmlab/tower.hpp"

namespace qmlab {

using OrderedJson = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "qmlab.report/1";

enum class Mode { af_convergence, af_certificates, comm_repair, comm_ball_haus, triple_check };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::af_convergence: return "af_convergence";
    case Mode::af_certificates: return "af_certificates";
    case Mode::comm_repair: return "comm_repair";
    case Mode::comm_ball_haus: return "comm_ball_haus";
    case Mode::triple_check: return "triple_check";
  }
  return "?";
}

struct ExperimentConfig {
  Json raw;
  Mode mode = Mode::triple_check;
  std::uint64_t seed = 0;
  int samples = 1;
  double tol = 1e-6;
  long tuples = 10000;
  int trials = 500;
  int max_points = 12;
};

namespace detail {
inline bool is_af(Mode m) { return m == Mode::af_convergence || m == Mode::af_certificates; }
inline bool is_comm(Mode m) { return m == Mode::comm_repair || m == Mode::comm_ball_haus; }

inline Tower tower_from_config(const Json& j) {
  const Json& t = j.at("tower");
  return Tower(t.is_string() ? fixtures::by_name(t.get<std::string>()) : tower_spec_from_json(t));
}

inline BetaSequence beta_from_config(const Json& j, const Tower& t) {
  if (j.contains("beta")) return BetaSequence(j.at("beta").get<std::vector<double>>());
  if (j.at("tower").is_object())
    if (auto b = beta_from_json(j.at("tower"))) return *b;
  return BetaSequence::factorial(t.top() + 1);
}

inline FiniteMetricSpace space_from_config(const Json& j) {
  const Json& s = j.at("space");
  if (s.is_string()) {
    const auto name = s.get<std::string>();
    if (name == "two_point") return fixtures::two_point();
    if (name == "line3") return fixtures::line3();
    throw InputError("unknown space fixture '" + name + "'");
  }
  return space_from_json(s);
}
}  // namespace detail

/// Parses and validates; throws ConfigError naming every bad field. String
/// "tower" and "space" values ending in .json are read relative to base_dir.
inline ExperimentConfig parse_config(Json j, const std::filesystem::path& base_dir = {}) {
  std::vector<std::string> bad;
  ExperimentConfig cfg;
  if (!j.is_object()) throw ConfigError({"<root>: must be an object"});
  for (const char* key : {"tower", "space"}) {
    if (!j.contains(key) || !j.at(key).is_string()) continue;
    const auto ref = j.at(key).get<std::string>();
    if (!ref.ends_with(".json")) continue;
    try {
      j[key] = read_json_file((base_dir / ref).string());
    } catch (const std::exception& e) {
      bad.push_back(std::string(key) + ": " + e.what());
    }
  }
  if (!bad.empty()) throw ConfigError(bad);
  cfg.raw = j;

  if (!j.contains("mode") || !j.at("mode").is_string()) {
    bad.push_back("mode: missing");
  } else {
    const auto m = j.at("mode").get<std::string>();
    bool found = false;
    for (Mode cand : {Mode::af_convergence, Mode::af_certificates, Mode::comm_repair, Mode::comm_ball_haus,
                      Mode::triple_check})
      if (m == mode_name(cand)) {
        cfg.mode = cand;
        found = true;
      }
    if (!found) bad.push_back("mode: unknown '" + m + "'");
  }
  if (!bad.empty()) throw ConfigError(bad);

  auto read_num = [&](const char* key, auto& field, double min_exclusive) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    if (!v.is_number() || !(v.get<double>() > min_exclusive)) {
      bad.push_back(std::string(key) + ": must be a number > " + std::to_string(min_exclusive));
      return;
    }
    field = v.get<std::remove_reference_t<decltype(field)>>();
  };
  if (j.contains("seed")) {
    const Json& s = j.at("seed");
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) bad.push_back("seed: must be a nonnegative integer");
    else cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  read_num("samples", cfg.samples, 0.5);
  read_num("tol", cfg.tol, 0.0);
  read_num("tuples", cfg.tuples, 0.5);
  read_num("trials", cfg.trials, 0.5);
  read_num("max_points", cfg.max_points, 1.5);

  if (detail::is_af(cfg.mode)) {
    if (!j.contains("tower")) {
      bad.push_back("tower: missing");
    } else {
      try {
        const Tower t = detail::tower_from_config(j);
        const BetaSequence beta = detail::beta_from_config(j, t);
        if (beta.size() < t.top() + 1) bad.push_back("beta: needs M+1 = " + std::to_string(t.top() + 1) + " values");
      } catch (const std::exception& e) {
        bad.push_back(std::string("tower: ") + e.what());
      }
    }
    if (cfg.mode == Mode::af_convergence) {
      if (!j.contains("sequence") || !j.at("sequence").is_array()) bad.push_back("sequence: missing");
      if (!j.contains("limit")) bad.push_back("limit: missing");
    }
  }
  if (detail::is_comm(cfg.mode) && j.contains("space")) {
    try {
      const auto X = detail::space_from_config(j);
      const std::vector<const char*> keys = cfg.mode == Mode::comm_ball_haus ? std::vector<const char*>{"F1", "F2"}
                                                                             : std::vector<const char*>{"Fn", "F", "f", "eps"};
      for (const char* k : keys)
        if (!j.contains(k)) bad.push_back(std::string(k) + ": missing (required with an explicit space)");
    } catch (const std::exception& e) {
      bad.push_back(std::string("space: ") + e.what());
    }
  }
  if (!bad.empty()) throw ConfigError(bad);
  return cfg;
}

struct Report {
  std::string mode;
  std::vector<std::string> columns;
  std::vector<OrderedJson> rows;  // one object per row, keys in column order
  double max_violation = 0.0;     // max over rows of (measured - bound)
  bool passed = true;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::string> notes;
  double runtime_ms = 0.0;  // not emitted

  int failures() const {
    int f = 0;
    for (const auto& r : rows) f += r.at("pass").get<bool>() ? 0 : 1;
    return f;
  }
};

inline std::string config_hash(const Json& j) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

namespace detail {

inline OrderedJson opt(const std::optional<double>& v) { return v ? OrderedJson(*v) : OrderedJson(nullptr); }

inline void add_row(Report& r, OrderedJson row, double violation) {
  r.max_violation = r.rows.empty() ? violation : std::max(r.max_violation, violation);
  r.passed = r.passed && row.at("pass").get<bool>();
  r.rows.push_back(std::move(row));
}

inline std::vector<IdealSupport> ideals_from(const Tower& t, const Json& list) {
  std::vector<IdealSupport> out;
  for (const auto& e : list) out.push_back(derive_supports(t, ideal_support_from_json(e)));
  return out;
}

inline void run_af_convergence(const ExperimentConfig& cfg, Report& r) {
  const Tower t = tower_from_config(cfg.raw);
  const BetaSequence beta = beta_from_config(cfg.raw, t);
  const auto seq = ideals_from(t, cfg.raw.at("sequence"));
  const IdealSupport limit = derive_supports(t, ideal_support_from_json(cfg.raw.at("limit")));
  r.columns = {"k", "N_k", "beta_N", "x_N", "bound", "surrogate_distance", "note", "pass"};
  const auto rows = fell_to_propinquity_table(beta, seq, limit);
  for (const auto& row : rows) {
    // A row passes when its bound matches the closed form and does not exceed
    // the bound of any row with a smaller agreement level.
    bool ok = true;
    double violation = 0.0;
    if (row.bound) {
      const double expect = 2.0 * std::max(beta(*row.agreement_level), xn_factors(beta, *row.agreement_level).x - 1.0);
      ok = *row.bound == expect;
      for (const auto& other : rows)
        if (other.bound && *other.agreement_level < *row.agreement_level) {
          violation = std::max(violation, *row.bound - *other.bound);
          ok = ok && *row.bound <= *other.bound;
        }
    }
    OrderedJson o;
    o["k"] = row.k;
    o["N_k"] = row.agreement_level ? OrderedJson(*row.agreement_level) : OrderedJson(nullptr);
    o["beta_N"] = opt(row.beta_n);
    o["x_N"] = opt(row.x_n);
    o["bound"] = opt(row.bound);
    o["surrogate_distance"] = row.surrogate_distance;
    o["note"] = row.note;
    o["pass"] = ok;
    add_row(r, std::move(o), violation);
  }
  r.notes.push_back("surrogate_distance is a level-agreement surrogate for the Fell topology");
}

inline void run_af_certificates(const ExperimentConfig& cfg, Report& r) {
  const Tower t = tower_from_config(cfg.raw);
  const BetaSequence beta = beta_from_config(cfg.raw, t);
  std::vector<int> all(static_cast<std::size_t>(t.top_shape().block_count()));
  std::iota(all.begin(), all.end(), 0);
  const Json ideal_list = cfg.raw.contains("ideals") ? cfg.raw.at("ideals") : Json::array({Json{{"top_support", all}}});
  const auto ideals = ideals_from(t, ideal_list);
  std::vector<int> levels;
  if (cfg.raw.contains("levels")) levels = cfg.raw.at("levels").get<std::vector<int>>();
  else
    for (int n = 1; n <= t.top(); ++n) levels.push_back(n);

  r.columns = {"k", "N_k", "beta_N", "x_N", "bound", "imprint_estimate", "imprint_bound", "certificate_failures",
               "pass"};
  for (std::size_t k = 0; k < ideals.size(); ++k) {
    const std::uint64_t ideal_seed = stream_seed(cfg.seed, "af_certificates", k);
    const auto top = ball_sample(beta, ideals[k], t.top(), cfg.samples, ideal_seed);
    for (int n : levels) {
      const auto inner = ball_sample(beta, ideals[k], n, cfg.samples, stream_seed(ideal_seed, "level", static_cast<std::uint64_t>(n)));
      const BridgeReport br = imprint_estimate(beta, ideals[k], n, inner, top);
      OrderedJson o;
      o["k"] = k;
      o["N_k"] = n;
      o["beta_N"] = beta(n);
      o["x_N"] = xn_factors(beta, n).x;
      o["bound"] = br.lambda_bound;
      o["imprint_estimate"] = br.imprint_estimate;
      o["imprint_bound"] = br.imprint_bound;
      o["certificate_failures"] = br.certificate_failures;
      o["pass"] = br.passed();
      add_row(r, std::move(o), br.imprint_estimate - br.imprint_bound);
    }
  }
  r.notes.push_back("imprint_estimate is a sampled operator-norm directed Hausdorff distance");
}

// Draws (X, F_n, F, eps, f) with Haus(F_n, F) < eps^2 and f in the unit
// D-ball of I_{F_n}.
struct RepairInstance {
  FiniteMetricSpace X;
  PointSet Fn, F;
  double eps = 0.5;
  LipFunction f;
};

inline RepairInstance random_repair_instance(Rng& rng, int max_points) {
  RepairInstance in;
  in.X = random_space(rng, max_points);
  const int n = in.X.size();
  in.F = random_subset(rng, n);
  // Move each point of F to a random near neighbour (or keep it).
  for (int p : in.F) {
    int best = p;
    double best_d = std::numeric_limits<double>::infinity();
    for (int q = 0; q < n; ++q)
      if (q != p && in.X.d(p, q) < best_d) {
        best = q;
        best_d = in.X.d(p, q);
      }
    in.Fn.push_back(uniform_int(rng, 0, 1) == 1 ? best : p);
  }
  in.Fn = normalize_set(in.X, in.Fn);
  double H = hausdorff_sets(in.X, in.Fn, in.F);
  if (H >= kMaxEps * kMaxEps) {
    in.Fn = in.F;
    H = 0.0;
  }
  const double root = std::sqrt(H);
  in.eps = root + (kMaxEps - root) * uniform(rng, 0.001, 0.999);
  if (!(H < in.eps * in.eps)) in.eps = std::min(kMaxEps, std::nextafter(root * (1.0 + 1e-9), 2.0));
  in.f = random_ball_function(in.X, in.Fn, rng);
  return in;
}

inline void repair_row(Report& r, int trial, const FiniteMetricSpace& X, const RepairResult& res) {
  const auto& c = res.certificate;
  OrderedJson o;
  o["trial"] = trial;
  o["points"] = X.size();
  o["hausdorff"] = res.hausdorff;
  o["eps"] = res.eps;
  o["distance"] = c.distance;
  o["bound"] = c.distance_bound;
  o["lip_re"] = c.lip_re;
  o["lip_im"] = c.lip_im;
  o["sup_norm"] = c.sup_norm;
  o["failures"] = c.failures();
  o["pass"] = c.passed();
  add_row(r, std::move(o), c.distance - c.distance_bound);
}

inline void run_comm_repair(const ExperimentConfig& cfg, Report& r) {
  r.columns = {"trial", "points", "hausdorff", "eps", "distance", "bound", "lip_re", "lip_im", "sup_norm", "failures",
               "pass"};
  if (cfg.raw.contains("space")) {
    const auto X = space_from_config(cfg.raw);
    const auto res = repair(X, subset_from_json(X, cfg.raw.at("Fn")), subset_from_json(X, cfg.raw.at("F")),
                            function_from_json(cfg.raw.at("f")), cfg.raw.at("eps").get<double>());
    if (!res.note.empty()) r.notes.push_back(res.note);
    repair_row(r, 0, X, res);
    return;
  }
  std::vector<RepairInstance> inst(static_cast<std::size_t>(cfg.trials));
  std::vector<RepairResult> out(inst.size());
  parallel_for(inst.size(), [&](std::size_t i) {
    Rng rng = make_stream(cfg.seed, "comm_repair", i);
    inst[i] = random_repair_instance(rng, cfg.max_points);
    out[i] = repair(inst[i].X, inst[i].Fn, inst[i].F, inst[i].f, inst[i].eps);
  });
  for (std::size_t i = 0; i < inst.size(); ++i) repair_row(r, static_cast<int>(i), inst[i].X, out[i]);
}

inline void ball_row(Report& r, int fixture, int points, const BallHausdorffResult& b) {
  OrderedJson o;
  o["fixture"] = fixture;
  o["points"] = points;
  o["set_hausdorff"] = b.set_hausdorff;
  o["estimate"] = b.estimate;
  o["bound"] = b.bound;
  o["pass"] = b.passed;
  add_row(r, std::move(o), b.estimate - b.bound);
}

inline void run_comm_ball_haus(const ExperimentConfig& cfg, Report& r) {
  r.columns = {"fixture", "points", "set_hausdorff", "estimate", "bound", "pass"};
  if (cfg.raw.contains("space")) {
    const auto X = space_from_config(cfg.raw);
    const auto b = ball_hausdorff(X, subset_from_json(X, cfg.raw.at("F1")), subset_from_json(X, cfg.raw.at("F2")),
                                  cfg.samples, cfg.seed, cfg.tol);
    ball_row(r, 0, X.size(), b);
    return;
  }
  for (int i = 0; i < cfg.trials; ++i) {
    Rng rng = make_stream(cfg.seed, "comm_ball_haus", static_cast<std::uint64_t>(i));
    const RepairInstance in = random_repair_instance(rng, cfg.max_points);
    const auto b = ball_hausdorff(in.X, in.Fn, in.F, cfg.samples, stream_seed(cfg.seed, "comm_ball_haus/samples", static_cast<std::uint64_t>(i)), cfg.tol);
    ball_row(r, i, in.X.size(), b);
  }
}

inline void run_triple_check(const ExperimentConfig& cfg, Report& r) {
  r.columns = {"case", "tuples", "failures", "bound", "pass"};
  for (TripleCase c : {TripleCase::af, TripleCase::commutative}) {
    Rng rng = make_stream(cfg.seed, "triple_check", c == TripleCase::af ? 0 : 1);
    const auto res = check_triple(AdmissibleTriple{c}, cfg.tuples, rng);
    OrderedJson o;
    o["case"] = c == TripleCase::af ? "af" : "commutative";
    o["tuples"] = res.tuples;
    o["failures"] = res.failures;
    o["bound"] = "x1x4+x2x3<=F; (x+y)z<=G; 2xy<=H; monotone";
    o["pass"] = res.failures == 0;
    add_row(r, std::move(o), static_cast<double>(res.failures));
  }
}

}  // namespace detail

inline Report run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  Report r;
  r.mode = mode_name(cfg.mode);
  r.seed = cfg.seed;
  r.config_hash = config_hash(cfg.raw);
  switch (cfg.mode) {
    case Mode::af_convergence: detail::run_af_convergence(cfg, r); break;
    case Mode::af_certificates: detail::run_af_certificates(cfg, r); break;
    case Mode::comm_repair: detail::run_comm_repair(cfg, r); break;
    case Mode::comm_ball_haus: detail::run_comm_ball_haus(cfg, r); break;
    case Mode::triple_check: detail::run_triple_check(cfg, r); break;
  }
  r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline Report run_experiment(const Json& j) { return run_experiment(parse_config(j)); }

enum class ReportFormat { json, csv };

namespace detail {
inline std::string csv_cell(const OrderedJson& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return v.dump();
}
}  // namespace detail

/// JSON (schema qmlab.report/1) or CSV with the report's fixed column order.
inline std::string render_report(const Report& r, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::string out;
    for (std::size_t c = 0; c < r.columns.size(); ++c) out += (c ? "," : "") + r.columns[c];
    out += "\n";
    for (const auto& row : r.rows) {
      for (std::size_t c = 0; c < r.columns.size(); ++c) {
        if (c) out += ",";
        out += detail::csv_cell(row.contains(r.columns[c]) ? row.at(r.columns[c]) : OrderedJson(nullptr));
      }
      out += "\n";
    }
    return out;
  }
  OrderedJson j;
  j["schema"] = kReportSchema;
  j["mode"] = r.mode;
  j["provenance"] = {{"config_hash", r.config_hash}, {"seed", r.seed}};
  j["summary"] = {{"passed", r.passed},
                  {"rows", r.rows.size()},
                  {"failures", r.failures()},
                  {"max_violation", r.rows.empty() ? OrderedJson(nullptr) : OrderedJson(r.max_violation)}};
  j["columns"] = r.columns;
  j["rows"] = r.rows;
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

inline void emit_report(const Report& r, ReportFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("emit_report: cannot write " + path);
  out << render_report(r, format);
  if (!out) throw InputError("emit_report: write failed for " + path);
}

}  // namespace qmlab
