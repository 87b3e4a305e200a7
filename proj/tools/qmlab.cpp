// qmlab command line: validate towers, evaluate seminorms and bounds, and run
// the verification suites. Exit code 0 iff every check passes.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qmlab/qmlab.hpp"

namespace {

using qmlab::Json;

struct Common {
  std::uint64_t seed = 7;
  int samples = 1000;
  double tol = 1e-6;
  std::string format = "json";
  std::string out;
};

// "car" or a path to a tower json.
Json tower_ref(const std::string& ref) {
  if (ref.ends_with(".json")) return qmlab::read_json_file(ref);
  return qmlab::tower_to_json(qmlab::fixtures::by_name(ref));
}

Json space_ref(const std::string& ref) {
  if (ref.ends_with(".json")) return qmlab::read_json_file(ref);
  if (ref == "two_point") return qmlab::space_to_json(qmlab::fixtures::two_point());
  if (ref == "line3") return qmlab::space_to_json(qmlab::fixtures::line3());
  throw qmlab::InputError("unknown space '" + ref + "'");
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ','))
    if (!tok.empty()) out.push_back(std::stoi(tok));
  return out;
}

std::vector<std::string> parse_labels(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

qmlab::BetaSequence beta_for(const std::vector<double>& values, int count) {
  return values.empty() ? qmlab::BetaSequence::factorial(count) : qmlab::BetaSequence(values);
}

void print_json(const Json& j) { std::cout << j.dump(2) << "\n"; }

int emit(const qmlab::Report& r, const Common& c) {
  const auto fmt = c.format == "csv" ? qmlab::ReportFormat::csv : qmlab::ReportFormat::json;
  std::string path = c.out;
  if (path.empty())
    if (const char* dir = std::getenv("QMLAB_OUT_DIR"))
      path = (std::filesystem::path(dir) / (r.mode + (c.format == "csv" ? ".csv" : ".json"))).string();
  if (path.empty()) std::cout << qmlab::render_report(r, fmt);
  else qmlab::emit_report(r, fmt, path);
  std::fprintf(stderr, "%s: %s (%zu rows, %d failures, %.0f ms)\n", r.mode.c_str(), r.passed ? "PASS" : "FAIL",
               r.rows.size(), r.failures(), r.runtime_ms);
  return r.passed ? 0 : 1;
}

Json with_common(Json cfg, const Common& c) {
  cfg["seed"] = c.seed;
  cfg["samples"] = c.samples;
  cfg["tol"] = c.tol;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qmlab: quantum metric laboratory for AF towers and finite metric spaces"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--seed", common.seed, "root seed")->capture_default_str();
  app.add_option("--samples", common.samples, "samples per level / candidates per ball")->capture_default_str();
  app.add_option("--tol", common.tol, "tolerance for ball distances")->capture_default_str();
  app.add_option("--format", common.format, "report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  app.add_option("--out", common.out, "report path (default stdout or $QMLAB_OUT_DIR)");

  int rc = 0;

  auto* tower = app.add_subcommand("tower", "tower utilities")->require_subcommand(1);
  std::string tower_arg;
  auto* validate = tower->add_subcommand("validate", "check the diagram invariants");
  validate->add_option("tower", tower_arg, "fixture name or json path")->required();
  validate->callback([&] {
    const auto report = qmlab::validate_tower(qmlab::tower_spec_from_json(tower_ref(tower_arg)));
    Json checks = Json::array();
    for (const auto& c : report.checks) checks.push_back({{"check", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    print_json({{"ok", report.ok()}, {"checks", checks}});
    rc = report.ok() ? 0 : 1;
  });

  auto* af = app.add_subcommand("af", "AF tower computations")->require_subcommand(1);
  std::vector<double> beta_values;
  std::string element_path;
  auto* lsemi = af->add_subcommand("lseminorm", "L_beta of a top-level element");
  lsemi->add_option("--tower", tower_arg, "fixture name or json path")->required();
  lsemi->add_option("--element", element_path, "element json (any level; lifted to the top)")->required();
  lsemi->add_option("--beta", beta_values, "beta values (default 1/n!)");
  lsemi->callback([&] {
    const qmlab::Tower t(qmlab::tower_spec_from_json(tower_ref(tower_arg)));
    const auto beta = beta_for(beta_values, t.top() + 1);
    qmlab::Element a = qmlab::element_from_json(qmlab::read_json_file(element_path));
    int level = -1;
    for (int n = 0; n <= t.top(); ++n)
      if (t.shape(n) == a.shape()) level = n;
    if (level < 0) throw qmlab::InputError("element shape matches no level of the tower");
    a = t.lift_to_top(level, a);
    print_json({{"level", level}, {"terms", qmlab::l_seminorm_terms(t, beta, a)}, {"value", qmlab::l_seminorm(t, beta, a)}});
  });

  int level = 1;
  int max_level = 10;
  auto* bound = af->add_subcommand("bound", "x_n factors and propinquity bounds");
  bound->add_option("--level", level, "level n >= 1")->capture_default_str();
  bound->add_option("--beta", beta_values, "beta values (default 1/n! up to --max-level)");
  bound->add_option("--max-level", max_level, "length of the default beta")->capture_default_str();
  bound->callback([&] {
    const auto beta = beta_for(beta_values, max_level + 1);
    const auto xf = qmlab::xn_factors(beta, level);
    const auto pb = qmlab::af_propinquity_bound(beta, level);
    print_json({{"level", level},
                {"beta_n", beta(level)},
                {"x_prime_n", xf.x_prime},
                {"x_n", xf.x},
                {"bound_n", xf.bound},
                {"propinquity_bound", pb.value},
                {"propinquity_kind", qmlab::PropinquityBound::kind},
                {"imprint_bound", (xf.x - 1.0) + 2.0 * beta(level)}});
  });

  std::string ideals_arg;
  std::string levels_arg;
  auto* certify = af->add_subcommand("certify", "recovery certificates and sampled imprint");
  certify->add_option("--tower", tower_arg, "fixture name or json path")->required();
  certify->add_option("--ideals", ideals_arg, "top supports separated by ';', e.g. \"0;0,1\" (default full)");
  certify->add_option("--levels", levels_arg, "levels, e.g. 1,2,3 (default 1..M)");
  certify->add_option("--beta", beta_values, "beta values (default 1/n!)");
  certify->callback([&] {
    Json cfg{{"mode", "af_certificates"}, {"tower", tower_ref(tower_arg)}};
    if (!beta_values.empty()) cfg["beta"] = beta_values;
    if (!ideals_arg.empty()) {
      Json list = Json::array();
      std::stringstream in(ideals_arg);
      std::string part;
      while (std::getline(in, part, ';')) list.push_back({{"top_support", parse_ints(part)}});
      cfg["ideals"] = list;
    }
    if (!levels_arg.empty()) cfg["levels"] = parse_ints(levels_arg);
    rc = emit(qmlab::run_experiment(with_common(cfg, common)), common);
  });

  std::string sequence_arg;
  std::string limit_arg;
  auto* converge = af->add_subcommand("converge", "agreement levels and bounds for a sequence of ideals");
  converge->add_option("--tower", tower_arg, "fixture name or json path")->required();
  converge->add_option("--sequence", sequence_arg, "top supports separated by ';'")->required();
  converge->add_option("--limit", limit_arg, "top support of the limit ideal")->required();
  converge->add_option("--beta", beta_values, "beta values (default 1/n!)");
  converge->callback([&] {
    Json cfg{{"mode", "af_convergence"}, {"tower", tower_ref(tower_arg)}};
    if (!beta_values.empty()) cfg["beta"] = beta_values;
    Json list = Json::array();
    std::stringstream in(sequence_arg);
    std::string part;
    while (std::getline(in, part, ';')) list.push_back({{"top_support", parse_ints(part)}});
    cfg["sequence"] = list;
    cfg["limit"] = {{"top_support", parse_ints(limit_arg)}};
    rc = emit(qmlab::run_experiment(with_common(cfg, common)), common);
  });

  auto* comm = app.add_subcommand("comm", "finite metric space computations")->require_subcommand(1);
  std::string space_arg, fn_arg, f_set_arg, f1_arg, f2_arg, function_arg;
  double eps = 0.5;
  int trials = 500;
  int max_points = 12;
  auto* rep = comm->add_subcommand("repair", "repair a ball function after moving its zero set");
  rep->add_option("--space", space_arg, "fixture name or json path (omit for a random sweep)");
  rep->add_option("--Fn", fn_arg, "labels of F_n, comma separated");
  rep->add_option("--F", f_set_arg, "labels of F, comma separated");
  rep->add_option("--f", function_arg, "function json path ([[re,im],...] or reals)");
  rep->add_option("--eps", eps, "epsilon")->capture_default_str();
  rep->add_option("--trials", trials, "random instances when no space is given")->capture_default_str();
  rep->add_option("--max-points", max_points, "largest random space")->capture_default_str();
  rep->callback([&] {
    if (!space_arg.empty()) {
      const auto X = qmlab::space_from_json(space_ref(space_arg));
      const auto f = qmlab::function_from_json(qmlab::read_json_file(function_arg));
      const auto r = qmlab::repair(X, qmlab::subset_from_json(X, parse_labels(fn_arg)),
                                   qmlab::subset_from_json(X, parse_labels(f_set_arg)), f, eps);
      print_json(qmlab::repair_report_json(X, r, f));
      rc = r.certificate.passed() ? 0 : 1;
      return;
    }
    Json cfg{{"mode", "comm_repair"}, {"trials", trials}, {"max_points", max_points}};
    rc = emit(qmlab::run_experiment(with_common(cfg, common)), common);
  });

  auto* bh = comm->add_subcommand("ball-haus", "sampled Hausdorff distance between ideal unit balls");
  bh->add_option("--space", space_arg, "fixture name or json path (omit for random fixtures)");
  bh->add_option("--F1", f1_arg, "labels, comma separated");
  bh->add_option("--F2", f2_arg, "labels, comma separated");
  bh->add_option("--trials", trials, "random fixtures when no space is given")->capture_default_str();
  bh->add_option("--max-points", max_points, "largest random space")->capture_default_str();
  bh->callback([&] {
    Json cfg{{"mode", "comm_ball_haus"}};
    if (!space_arg.empty()) {
      cfg["space"] = space_ref(space_arg);
      cfg["F1"] = parse_labels(f1_arg);
      cfg["F2"] = parse_labels(f2_arg);
    } else {
      cfg["trials"] = trials;
      cfg["max_points"] = max_points;
    }
    rc = emit(qmlab::run_experiment(with_common(cfg, common)), common);
  });

  auto* triples = app.add_subcommand("triples", "admissible function checks")->require_subcommand(1);
  long tuples = 10000;
  auto* tcheck = triples->add_subcommand("check", "monotonicity and lower bounds on random tuples");
  tcheck->add_option("--tuples", tuples, "tuples per case")->capture_default_str();
  tcheck->callback([&] {
    Json cfg{{"mode", "triple_check"}, {"tuples", tuples}};
    rc = emit(qmlab::run_experiment(with_common(cfg, common)), common);
  });

  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "config json")->required()->check(CLI::ExistingFile);
  run->callback([&] {
    Json cfg = qmlab::read_json_file(config_path);
    // Command-line flags override the file only when given explicitly.
    if (app.count("--seed")) cfg["seed"] = common.seed;
    if (app.count("--samples")) cfg["samples"] = common.samples;
    if (app.count("--tol")) cfg["tol"] = common.tol;
    const auto parsed = qmlab::parse_config(cfg, std::filesystem::path(config_path).parent_path());
    rc = emit(qmlab::run_experiment(parsed), common);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const qmlab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return rc;
}
