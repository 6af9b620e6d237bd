#include <CLI11.hpp>

#include <filesystem>
#include <future>
#include <iostream>

#include "suites.hpp"

namespace fs = std::filesystem;
using namespace hypertest;
using namespace hypertest::cli;

namespace {

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  std::optional<std::uint64_t> guard_enumeration;
  std::optional<std::uint64_t> guard_edit_radius;
  std::optional<std::uint64_t> guard_search_nodes;
};

using Sections = std::map<std::string, std::map<std::string, std::string>>;

struct RunPlan {
  std::vector<std::string> suites;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::string format = "json";
  std::string out_dir;
  Guards guards;
  std::vector<Params> params;
};

Sections load_config(const std::string& path) {
  if (path.size() > 5 && path.ends_with(".json")) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open '" + path + "'");
    Json rep;
    try {
      rep = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw UsageError(path + ": " + e.what());
    }
    if (!rep.contains("config") || !rep["config"].is_object()) throw UsageError(path + ": report has no config");
    Sections out;
    for (const auto& [section, body] : rep["config"].items())
      for (const auto& [key, value] : body.items()) out[section][key] = value.get<std::string>();
    return out;
  }
  return read_ini(path);
}

RunPlan make_plan(const Sections& config, const GlobalFlags& g) {
  Params run_sec("run", {{"suites", ""}, {"seed", "1"}, {"jobs", "1"}, {"format", "json"}, {"out_dir", ""}});
  Params guard_sec("guards", {{"enumeration", std::to_string(default_guards().enumeration)},
                              {"edit_radius", std::to_string(default_guards().edit_radius)},
                              {"search_nodes", std::to_string(default_guards().search_nodes)}});
  auto overlay = [](Params& base, const std::map<std::string, std::string>& given) {
    auto v = base.values();
    for (const auto& [k, val] : given) {
      if (!v.count(k)) throw UsageError(base.section() + "." + k + ": unknown setting");
      v[k] = val;
    }
    base = Params(base.section(), std::move(v));
  };
  for (const auto& [section, body] : config) {
    if (section == "run") overlay(run_sec, body);
    else if (section == "guards") overlay(guard_sec, body);
    else suite_by_name(section);
  }
  RunPlan plan;
  plan.suites = run_sec.list("suites");
  plan.seed = g.seed ? *g.seed : run_sec.u64("seed");
  plan.jobs = std::max<std::size_t>(1, g.jobs ? *g.jobs : run_sec.size("jobs"));
  plan.format = g.format ? *g.format : run_sec.choice("format", {"json", "csv"});
  plan.out_dir = g.out_dir ? *g.out_dir : run_sec.str("out_dir");
  plan.guards.enumeration = g.guard_enumeration ? *g.guard_enumeration : guard_sec.u64("enumeration");
  plan.guards.edit_radius = g.guard_edit_radius ? *g.guard_edit_radius : guard_sec.u64("edit_radius");
  plan.guards.search_nodes = g.guard_search_nodes ? *g.guard_search_nodes : guard_sec.u64("search_nodes");
  for (std::size_t i = 0; i < plan.suites.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (plan.suites[i] == plan.suites[j]) throw UsageError("suite '" + plan.suites[i] + "' listed twice");
  for (const auto& name : plan.suites) {
    auto it = config.find(name);
    plan.params.push_back(resolve(suite_by_name(name), it == config.end() ? std::map<std::string, std::string>{}
                                                                          : it->second));
  }
  return plan;
}

Json plan_config(const RunPlan& plan) {
  Json c;
  std::string names;
  for (const auto& s : plan.suites) names += (names.empty() ? "" : ", ") + s;
  c["run"] = {{"suites", names},
              {"seed", std::to_string(plan.seed)},
              {"jobs", std::to_string(plan.jobs)},
              {"format", plan.format},
              {"out_dir", plan.out_dir}};
  c["guards"] = {{"enumeration", std::to_string(plan.guards.enumeration)},
                 {"edit_radius", std::to_string(plan.guards.edit_radius)},
                 {"search_nodes", std::to_string(plan.guards.search_nodes)}};
  for (const auto& p : plan.params) {
    Json sec = Json::object();
    for (const auto& [k, v] : p.values()) sec[k] = v;
    c[p.section()] = std::move(sec);
  }
  return c;
}

SuiteRun execute(const Params& p, const RunPlan& plan) {
  SuiteRun run;
  run.name = p.section();
  run.seed = derive_seed(plan.seed, name_hash(run.name));
  run.jobs = plan.jobs;
  run.guards = plan.guards;
  try {
    suite_by_name(run.name).run(p, run);
  } catch (const UsageError& e) {
    const std::string msg = e.what();
    if (msg.starts_with(run.name + ":") || msg.starts_with(run.name + ".")) throw;
    throw UsageError(run.name + ": " + msg);
  } catch (const hypertest::Error& e) {
    throw UsageError(run.name + ": " + e.what());
  }
  return run;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  out << text;
}

/// Runs the plan, writes the report and returns the exit code. With
/// `to_stdout` and no output directory the report goes to stdout.
int run_plan(const RunPlan& plan, const std::string& command, bool to_stdout) {
  std::vector<SuiteRun> runs(plan.params.size());
  // experiments run concurrently, at most `jobs` at a time; suites keep
  // their own seeds so the outcome does not depend on scheduling
  const std::size_t outer = plan.params.size() > 1 ? plan.jobs : 1;
  for (std::size_t start = 0; start < plan.params.size(); start += outer) {
    std::vector<std::future<SuiteRun>> batch;
    for (std::size_t i = start; i < std::min(plan.params.size(), start + outer); ++i)
      batch.push_back(std::async(outer > 1 ? std::launch::async : std::launch::deferred, execute,
                                 std::cref(plan.params[i]), std::cref(plan)));
    for (std::size_t i = 0; i < batch.size(); ++i) runs[start + i] = batch[i].get();
  }

  Json rep;
  rep["tool"] = kToolName;
  rep["version"] = kVersion;
  rep["command"] = command;
  rep["seed"] = plan.seed;
  rep["config"] = plan_config(plan);
  Json inputs = Json::array();
  std::vector<std::string> seen;
  for (const auto& r : runs)
    for (const auto& [path, hash] : r.inputs)
      if (std::find(seen.begin(), seen.end(), path) == seen.end()) {
        seen.push_back(path);
        inputs.push_back({{"path", path}, {"sha256", hash}});
      }
  rep["inputs"] = std::move(inputs);
  Json suites_json = Json::array();
  Json failures = Json::array();
  for (const auto& r : runs) {
    suites_json.push_back(suite_json(r));
    for (const auto& c : r.checks)
      if (!c.passed) failures.push_back(r.name + "/" + c.name);
  }
  rep["suites"] = std::move(suites_json);
  rep["passed"] = failures.empty();
  rep["failures"] = failures;
  rep["generated_at"] = utc_timestamp();

  if (plan.out_dir.empty() && to_stdout) {
    std::cout << rep.dump(2) << '\n';
  } else {
    const fs::path dir = plan.out_dir.empty() ? fs::path(".") : fs::path(plan.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw UsageError("cannot create '" + dir.string() + "': " + ec.message());
    write_file(dir / "report.json", rep.dump(2) + "\n");
    for (const auto& r : runs) {
      if (plan.format == "csv" && !r.table.header.empty()) write_file(dir / (r.name + ".csv"), table_csv(r.table));
      for (const auto& [name, text] : r.artifacts) write_file(dir / name, text);
    }
    for (const auto& r : runs) {
      std::cout << (r.passed() ? "PASS " : "FAIL ") << r.name << '\n';
      for (const auto& c : r.checks)
        if (!c.passed) std::cout << "  failed: " << c.name << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
    }
    std::cout << "report: " << (dir / "report.json").string() << '\n';
  }
  for (const auto& f : failures) std::cerr << "check failed: " << f.get<std::string>() << '\n';
  return failures.empty() ? 0 : 1;
}

struct GenFlags {
  std::string kind;
  std::size_t r = 2, n = 10, t = 3, k = 2, parts = 2, m = 2;
  std::string p = "1/2", q = "1/10";
  std::string graph;
  bool signed_values = false;
  std::string output;
};

int run_gen(const GenFlags& f, std::uint64_t seed) {
  Rng rng(seed);
  auto prob = [](const std::string& s, const char* what) {
    Rational x;
    try {
      x = parse_rational(s);
    } catch (const std::exception&) {
      throw UsageError(std::string(what) + ": expected a number, got '" + s + "'");
    }
    if (x < 0 || x > 1) throw UsageError(std::string(what) + ": must lie in [0, 1]");
    return x.get_d();
  };
  std::string text;
  if (f.kind == "random-hypergraph") {
    if (f.k > 2) {
      ColoredHypergraph g(f.r, f.n, f.k);
      for (std::size_t i = 0; i < g.slot_count(); ++i) g.set_color_at(i, static_cast<Color>(uniform_index(rng, f.k)));
      text = to_text(g);
    } else {
      text = to_text(random_hypergraph(rng, f.r, f.n, prob(f.p, "--p")).colored());
    }
  } else if (f.kind == "random-kernel") {
    text = f.k == 1 ? kernel_text(random_plain_kernel(rng, f.r, f.t, f.signed_values))
                    : kernel_text(random_kernel(rng, f.r, f.t, f.k));
  } else if (f.kind == "blowup") {
    if (f.graph.empty()) throw UsageError("blowup needs --graph");
    Hypergraph g(2, 1);
    try {
      g = load_hypergraph(f.graph);
    } catch (const ParseError& e) {
      throw UsageError(f.graph + ": " + e.what());
    }
    text = to_text(blowup(g, f.m).colored());
  } else if (f.kind == "planted-partition") {
    if (f.parts == 0 || f.parts > f.n) throw UsageError("--parts must lie in [1, n]");
    text = to_text(planted_partition(rng, f.r, f.n, f.parts, prob(f.p, "--p"), prob(f.q, "--q")).colored());
  } else {
    throw UsageError("unknown kind '" + f.kind + "'");
  }
  if (f.output.empty()) {
    std::cout << text;
  } else {
    write_file(f.output, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling, regularity and non-deterministic testing experiments on hypergraphs and kernels",
               "hypertest"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  GlobalFlags g;
  auto add_globals = [&](CLI::App* sub) {
    sub->add_option("--seed", g.seed, "base seed");
    sub->add_option("--jobs", g.jobs, "parallel workers")->check(CLI::PositiveNumber);
    sub->add_option("--out-dir", g.out_dir, "directory for report.json, CSV tables and artifacts");
    sub->add_option("--format", g.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--guard-enumeration", g.guard_enumeration, "largest exhaustive enumeration");
    sub->add_option("--guard-edit-radius", g.guard_edit_radius, "largest exact edit search radius");
    sub->add_option("--guard-search-nodes", g.guard_search_nodes, "largest tensor search");
  };

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run the suites named in a configuration file");
  run_cmd->add_option("--config", config_path, "INI configuration, or a report.json to replay")->required();
  add_globals(run_cmd);

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen", "write a generated instance in the canonical text format");
  gen_cmd->add_option("kind", gen.kind, "random-hypergraph|random-kernel|blowup|planted-partition")
      ->required()
      ->check(CLI::IsMember({"random-hypergraph", "random-kernel", "blowup", "planted-partition"}));
  gen_cmd->add_option("--r", gen.r, "uniformity")->check(CLI::Range(1, 8));
  gen_cmd->add_option("--n", gen.n, "vertices")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--t", gen.t, "kernel classes")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--k", gen.k, "colours")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--p", gen.p, "edge probability (across parts for planted-partition)");
  gen_cmd->add_option("--q", gen.q, "edge probability inside a part (planted-partition)");
  gen_cmd->add_option("--parts", gen.parts, "planted parts");
  gen_cmd->add_option("--graph", gen.graph, "input graph for blowup");
  gen_cmd->add_option("--m", gen.m, "blow-up factor");
  gen_cmd->add_flag("--signed", gen.signed_values, "plain kernel values in [-1, 1] instead of [0, 1]");
  gen_cmd->add_option("-o,--output", gen.output, "output file (stdout when absent)");
  gen_cmd->add_option("--seed", g.seed, "seed");

  std::map<std::string, std::map<std::string, std::string>> direct;
  std::map<std::string, CLI::App*> suite_cmds;
  for (const auto& s : suites()) {
    auto* sub = app.add_subcommand(s.name, s.help);
    for (const auto& ps : s.params) {
      auto* opt = sub->add_option_function<std::string>(
          "--" + ps.key, [&direct, name = s.name, key = ps.key](const std::string& v) { direct[name][key] = v; },
          ps.help);
      if (!ps.fallback.empty()) opt->default_str(ps.fallback);
    }
    add_globals(sub);
    suite_cmds[s.name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen_cmd) return run_gen(gen, g.seed.value_or(1));
    if (*run_cmd) return run_plan(make_plan(load_config(config_path), g), "run", false);
    for (const auto& [name, sub] : suite_cmds) {
      if (!*sub) continue;
      Sections config;
      config["run"]["suites"] = name;
      config[name] = direct[name];
      return run_plan(make_plan(config, g), name, true);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const hypertest::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const hypertest::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
