#pragma once

#include "srl/envs/registry.hpp"
#include "srl/eval/online_planning.hpp"
#include "srl/eval/report.hpp"
#include "srl/eval/sweep.hpp"
#include "srl/trainer/trainer.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace srl::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Directory under which `train` creates run directories when --out is absent.
inline constexpr const char* kRunRootVariable = "SRL_RUN_ROOT";

class MissingCheckpoint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline fs::path run_root() {
  const char* v = std::getenv(kRunRootVariable);
  return (v && *v) ? fs::path(v) : fs::path("runs");
}

/// Short policy label used in tables: "SAC", "SRL-4", "SRL-4-latent".
inline std::string agent_label(const TrainConfig& c) {
  if (c.algo == Algorithm::sac) return "SAC";
  return "SRL-" + std::to_string(c.J) + (c.latent ? "-latent" : "");
}

/// A trained agent restored from disk together with its run metadata.
struct LoadedRun {
  fs::path run_dir;         // directory holding run.json, if any
  fs::path checkpoint_dir;  // directory holding manifest.json and tensors
  TrainConfig config;
  std::unique_ptr<trainer::Agent> agent;
  std::string label;
};

/// Accepts a run directory (containing checkpoint/) or a checkpoint directory.
inline fs::path resolve_checkpoint(const fs::path& path) {
  if (fs::exists(path / "checkpoint" / "manifest.json")) return path / "checkpoint";
  if (fs::exists(path / "manifest.json")) return path;
  throw MissingCheckpoint("no checkpoint found at " + path.string());
}

inline LoadedRun load_run(const fs::path& path, const std::optional<std::string>& env_override = std::nullopt) {
  LoadedRun run;
  run.checkpoint_dir = resolve_checkpoint(path);
  run.run_dir = run.checkpoint_dir.filename() == "checkpoint" ? run.checkpoint_dir.parent_path() : run.checkpoint_dir;
  const auto manifest = eval::read_json(run.checkpoint_dir / "manifest.json");
  run.config = manifest.at("config").get<TrainConfig>();
  if (env_override) run.config.env = *env_override;
  const auto env = envs::make_environment(run.config.env);
  run.agent = std::make_unique<trainer::Agent>(run.config, env->spec(), 0);
  run.agent->load(run.checkpoint_dir);
  run.label = agent_label(run.config);
  return run;
}

/// SAC agents are evaluated by action repetition, sequence agents by unrolling.
inline eval::SweepMode resolve_mode(const std::string& mode, const TrainConfig& c) {
  if (mode == "sequence") return eval::SweepMode::sequence;
  if (mode == "repeat") return eval::SweepMode::repeat;
  return c.algo == Algorithm::sac ? eval::SweepMode::repeat : eval::SweepMode::sequence;
}

inline std::string mode_name(eval::SweepMode m) { return m == eval::SweepMode::sequence ? "sequence" : "repeat"; }

/// Everything written by the commands lands here; tests capture both streams.
struct Streams {
  std::ostream& out;
  std::ostream& err;
};

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::optional<std::string> algo, env, config_path, out;
  std::optional<int> J;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> steps;
  std::vector<std::string> overrides;
  bool force = false;
  bool quiet = false;
};

/// Builds the configuration: file, then explicit flags, then --set overrides.
inline TrainConfig build_config(const TrainArgs& a, bool* j_given = nullptr) {
  TrainConfig c;
  bool j_set = false;
  if (a.config_path) {
    std::ifstream is(*a.config_path);
    if (!is) throw ConfigError("config", "cannot read " + *a.config_path);
    const auto j = nlohmann::json::parse(is, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config", "malformed JSON in " + *a.config_path);
    from_json(j, c);
    j_set = j.contains("J");
  }
  if (a.algo) apply_config_key(c, "algo", *a.algo);
  if (a.env) c.env = *a.env;
  if (a.J) {
    c.J = *a.J;
    j_set = true;
  }
  if (a.seed) c.seed = *a.seed;
  if (a.steps) c.max_steps = *a.steps;
  for (const auto& o : a.overrides) {
    apply_override(c, o);
    if (o.rfind("J=", 0) == 0) j_set = true;
  }
  c.validate();
  if (j_given) *j_given = j_set;
  return c;
}

inline fs::path default_run_dir(const TrainConfig& c) {
  std::string name = agent_label(c) + "-s" + std::to_string(c.seed);
  std::string env = c.env;
  for (char& ch : env) {
    if (ch == '/' || ch == ' ' || ch == ':') ch = '_';
  }
  return run_root() / env / name;
}

inline int cmd_train(const TrainArgs& a, Streams io) {
  bool j_given = false;
  const TrainConfig config = build_config(a, &j_given);
  if (config.algo == Algorithm::sac && j_given && config.J != 1) {
    io.err << "warning: J=" << config.J << " is ignored for --algo sac (sequence length 1)\n";
  }
  const fs::path dir = a.out ? fs::path(*a.out) : default_run_dir(config);
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!a.force) throw std::runtime_error("run directory " + dir.string() + " is not empty (use --force)");
    fs::remove_all(dir);
  }
  auto env = envs::make_environment(config.env);
  trainer::TrainOptions options;
  options.run_dir = dir;
  options.log = a.quiet ? nullptr : &io.err;
  if (config.algo == Algorithm::sac) trainer::sac_train(config, *env, options);
  else trainer::srl_train(config, *env, options);
  io.out << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval / sweep

struct EvalArgs {
  std::string run;
  std::optional<std::string> env;
  std::string mode = "auto";
  std::optional<int> J;
  int episodes = 10;
  std::optional<std::uint64_t> seed;
  bool stochastic = false;
  int max_k = 16;
};

inline std::uint64_t eval_seed(const std::optional<std::uint64_t>& s, const TrainConfig& c) {
  return s ? *s : derive_seed(c.seed, 6);
}

inline int cmd_eval(const EvalArgs& a, Streams io) {
  const auto run = load_run(a.run, a.env);
  auto env = envs::make_environment(run.config.env);
  const auto mode = resolve_mode(a.mode, run.config);
  const auto seed = eval_seed(a.seed, run.config);
  nlohmann::json j = {{"policy", run.label}, {"env", run.config.env}, {"mode", mode_name(mode)},
                      {"episodes", a.episodes}, {"seed", seed}};
  trainer::EpisodeStats stats;
  if (a.stochastic) {
    const auto r = eval::stochastic_timestep_eval(*run.agent, *env, a.episodes, seed, mode, a.max_k);
    stats = r.stats;
    j["protocol"] = "stochastic";
    j["max_k"] = a.max_k;
    j["k_histogram"] = r.k_histogram;
  } else {
    const int k = a.J.value_or(run.config.evaluation_length());
    stats = trainer::run_episodes(*env, eval::controller_for(*run.agent, mode), trainer::fixed_schedule(k),
                                  a.episodes, seed);
    j["protocol"] = "fixed";
    j["asl"] = k;
  }
  j["mean_return"] = stats.mean();
  j["std_error"] = stats.standard_error();
  j["returns"] = stats.returns;
  io.out << j.dump(2) << "\n";
  return kExitOk;
}

/// Parses "1,2,4,8"; empty means the default grid.
inline std::vector<int> parse_grid(const std::string& text) {
  if (text.empty()) return eval::default_asl_grid();
  std::vector<int> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int k = std::stoi(item, &used);
      if (used != item.size() || k < 1) throw std::invalid_argument(item);
      grid.push_back(k);
    } catch (const std::exception&) {
      throw ConfigError("grid", "invalid ASL value '" + item + "'");
    }
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] <= grid[i - 1]) throw ConfigError("grid", "values must be strictly increasing");
  }
  if (grid.empty()) throw ConfigError("grid", "empty grid");
  return grid;
}

struct SweepArgs {
  std::string run;
  std::optional<std::string> env, out;
  std::string mode = "auto";
  std::string grid;
  int episodes = 10;
  std::optional<std::uint64_t> seed;
};

inline int cmd_sweep(const SweepArgs& a, Streams io) {
  const auto run = load_run(a.run, a.env);
  auto env = envs::make_environment(run.config.env);
  const auto mode = resolve_mode(a.mode, run.config);
  const auto curve = eval::asl_sweep(*run.agent, *env, parse_grid(a.grid), a.episodes, mode,
                                     eval_seed(a.seed, run.config));
  const fs::path out = a.out ? fs::path(*a.out) : run.run_dir / ("sweep_" + mode_name(mode));
  fs::create_directories(out);
  eval::write_curve_csv(out / "curve.csv", curve);
  eval::write_json(out / "curve.json", {{"policy", run.label}, {"env", run.config.env},
                                        {"mode", mode_name(mode)}, {"curve", curve}});
  io.out << out.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- fas

struct FasArgs {
  std::vector<std::string> runs;
  std::optional<std::string> env, out;
  std::string mode = "auto";
  std::string grid;
  std::string axis = "asl";
  int episodes = 10;
  int random_episodes = 1000;
  std::optional<double> min_score, max_score;
  std::optional<std::uint64_t> seed;
};

struct FasOutcome {
  std::string label;
  std::string env;
  std::string mode;
  fs::path source;
  eval::FASReport report;
};

/// Sweeps every run on a shared grid and normalizes with shared anchors:
/// the random-policy mean (min) and the best grid point across runs (max).
inline std::vector<FasOutcome> compute_fas(const FasArgs& a, std::string* warnings = nullptr) {
  if (a.runs.empty()) throw ConfigError("runs", "at least one run is required");
  const auto grid = parse_grid(a.grid);
  const auto axis = a.axis == "frequency" ? eval::FasAxis::frequency : eval::FasAxis::asl;
  std::vector<FasOutcome> out;
  std::vector<eval::ScoreCurve> curves;
  std::string env_name;
  for (const auto& path : a.runs) {
    const auto run = load_run(path, a.env);
    if (env_name.empty()) env_name = run.config.env;
    if (run.config.env != env_name) {
      throw ConfigError("env", "runs span several environments (" + env_name + ", " + run.config.env + ")");
    }
    auto env = envs::make_environment(run.config.env);
    const auto mode = resolve_mode(a.mode, run.config);
    const std::uint64_t seed = a.seed ? *a.seed : 0;
    curves.push_back(eval::asl_sweep(*run.agent, *env, grid, a.episodes, mode, derive_seed(seed, 6)));
    out.push_back({run.label, run.config.env, mode_name(mode), fs::path(path), {}});
  }
  double lo = 0, hi = 0;
  if (a.min_score) lo = *a.min_score;
  else {
    auto env = envs::make_environment(env_name);
    lo = eval::random_policy_stats(*env, a.random_episodes, derive_seed(a.seed.value_or(0), 7)).mean();
  }
  if (a.max_score) hi = *a.max_score;
  else {
    hi = -std::numeric_limits<double>::infinity();
    for (const auto& c : curves) hi = std::max(hi, c.best());
  }
  if (!(hi > lo) && !a.max_score) {
    // No policy beats random anywhere on the grid: every score normalizes to 0.
    if (warnings) *warnings += "warning: no policy beats the random-policy anchor; FAS is 0 for all runs\n";
    hi = lo + std::max(1.0, std::abs(lo)) * 1e-9;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].report = eval::fas(curves[i], lo, hi, axis);
  return out;
}

inline nlohmann::json fas_json(const FasOutcome& o) {
  nlohmann::json j = o.report;
  j["policy"] = o.label;
  j["env"] = o.env;
  j["mode"] = o.mode;
  j["source"] = o.source.string();
  return j;
}

inline int cmd_fas(const FasArgs& a, Streams io) {
  std::string warnings;
  const auto results = compute_fas(a, &warnings);
  io.err << warnings;
  nlohmann::json all = nlohmann::json::array();
  std::vector<eval::FasEntry> entries;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    const fs::path dir = a.out ? fs::path(*a.out) / (std::to_string(i) + "_" + r.label)
                               : resolve_checkpoint(r.source).parent_path() / "fas";
    fs::create_directories(dir);
    eval::write_curve_csv(dir / "curve.csv", r.report.curve);
    eval::write_json(dir / "fas.json", fas_json(r));
    all.push_back(fas_json(r));
    entries.push_back({r.env, r.label, r.report.fas});
  }
  if (a.out) eval::write_json(fs::path(*a.out) / "fas_summary.json", all);
  io.out << "min_score " << results.front().report.min_score << "  max_score " << results.front().report.max_score
         << "\n";
  for (const auto& r : results) {
    io.out << r.label << " (" << r.mode << ") " << r.source.string() << "  FAS " << eval::format_fixed(r.report.fas, 4)
           << "\n";
  }
  io.out << "\n" << eval::fas_table_markdown(entries);
  return kExitOk;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
  std::vector<std::string> runs;
  std::optional<std::string> pairs, out;
  std::string grid;
  int episodes = 10;
  int stochastic_episodes = 10;
  int random_episodes = 1000;
  int max_k = 16;
  std::optional<std::uint64_t> seed;
};

/// Reads "policy,fas,stochastic_return" rows (header optional; an optional
/// env column may follow the policy name).
inline std::vector<eval::PolicySummary> read_pairs(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::vector<eval::PolicySummary> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 3 && cells.size() != 4) throw ConfigError("pairs", "expected 3 or 4 columns: " + line);
    eval::PolicySummary s;
    s.name = cells[0];
    std::size_t i = 1;
    if (cells.size() == 4) s.env = cells[i++];
    try {
      s.fas = std::stod(cells[i]);
      s.stochastic_return = std::stod(cells[i + 1]);
    } catch (const std::exception&) {
      if (rows.empty()) continue;  // header
      throw ConfigError("pairs", "non-numeric row: " + line);
    }
    rows.push_back(s);
  }
  return rows;
}

inline int cmd_compare(const CompareArgs& a, Streams io) {
  std::vector<eval::PolicySummary> rows;
  if (a.pairs) rows = read_pairs(*a.pairs);
  if (!a.runs.empty()) {
    FasArgs f;
    f.runs = a.runs;
    f.grid = a.grid;
    f.episodes = a.episodes;
    f.random_episodes = a.random_episodes;
    f.seed = a.seed;
    std::string warnings;
    const auto fas = compute_fas(f, &warnings);
    io.err << warnings;
    for (std::size_t i = 0; i < fas.size(); ++i) {
      const auto run = load_run(a.runs[i]);
      auto env = envs::make_environment(run.config.env);
      const auto r = eval::stochastic_timestep_eval(*run.agent, *env, a.stochastic_episodes,
                                                    derive_seed(a.seed.value_or(0), 8),
                                                    resolve_mode("auto", run.config), a.max_k);
      rows.push_back({fas[i].label + " " + a.runs[i], run.config.env, fas[i].report.fas, r.mean()});
    }
  }
  if (rows.empty()) throw ConfigError("runs", "nothing to compare: pass run directories or --pairs");
  const auto c = eval::compare(rows);
  if (a.out) {
    const fs::path dir(*a.out);
    fs::create_directories(dir);
    std::ofstream(dir / "comparison.md") << eval::comparison_markdown(c);
    std::ofstream(dir / "comparison.csv") << eval::comparison_csv(c);
    nlohmann::json j = {{"pearson_r", c.pearson_r ? nlohmann::json(*c.pearson_r) : nlohmann::json(nullptr)},
                        {"notice", c.notice},
                        {"rows", nlohmann::json::array()}};
    for (const auto& r : c.rows) {
      j["rows"].push_back({{"policy", r.name}, {"env", r.env}, {"fas", r.fas},
                           {"stochastic_return", r.stochastic_return}});
    }
    eval::write_json(dir / "comparison.json", j);
  }
  if (!c.notice.empty()) io.err << "notice: " << c.notice << "\n";
  io.out << eval::comparison_markdown(c);
  if (c.pearson_r) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "r=%.17g\n", *c.pearson_r);
    io.out << buf;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::vector<std::string> inputs;
  std::optional<std::string> out;
};

/// Collects fas.json files: given directly, inside a fas/ directory, or
/// anywhere below a directory.
inline std::vector<fs::path> collect_fas_files(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_regular_file(p)) files.push_back(p);
    else if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        if (e.is_regular_file() && e.path().filename() == "fas.json") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      throw std::runtime_error("no such file or directory: " + in);
    }
  }
  if (files.empty()) throw std::runtime_error("report: no fas.json files found");
  return files;
}

inline int cmd_report(const ReportArgs& a, Streams io) {
  std::vector<eval::FasEntry> entries;
  for (const auto& f : collect_fas_files(a.inputs)) {
    const auto j = eval::read_json(f);
    entries.push_back({j.value("env", std::string("?")), j.value("policy", std::string("?")), j.at("fas").get<double>()});
  }
  const std::string table = eval::fas_table_markdown(entries);
  if (a.out) std::ofstream(*a.out) << table;
  io.out << table;
  return kExitOk;
}

// ---------------------------------------------------------------- plan

struct PlanArgs {
  std::string run;
  std::optional<std::string> out;
  std::string grid;
  int episodes = 10;
  bool ground_truth = false;
  std::optional<std::uint64_t> seed;
};

/// Online planning with the one-step policy and the live model (or the exact
/// environment dynamics).
inline int cmd_plan(const PlanArgs& a, Streams io) {
  const auto run = load_run(a.run);
  auto env = envs::make_environment(run.config.env);
  std::unique_ptr<eval::StepModel> model;
  if (a.ground_truth) model = std::make_unique<eval::GroundTruthStepModel>(*env);
  else {
    if (!run.agent->has_model() || run.agent->latent()) {
      throw ConfigError("run", "online planning needs a state-space dynamics model (train SRL with J > 1)");
    }
    model = std::make_unique<eval::LearnedStepModel>(run.agent->model());
  }
  const auto r = eval::online_planning_eval(*run.agent, *model, *env, parse_grid(a.grid), a.episodes,
                                            eval_seed(a.seed, run.config));
  for (const auto& d : r.aborted) io.err << "aborted episode: " << d << "\n";
  nlohmann::json j = {{"policy", run.label}, {"env", run.config.env}, {"ground_truth", a.ground_truth},
                      {"curve", r.curve}, {"model_calls", r.model_calls}, {"decisions", r.decisions},
                      {"aborted", r.aborted}};
  if (a.out) {
    fs::create_directories(*a.out);
    eval::write_curve_csv(fs::path(*a.out) / "curve.csv", r.curve);
    eval::write_json(fs::path(*a.out) / "planning.json", j);
  }
  io.out << j.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- entry point

/// Parses arguments and dispatches. Returns the process exit code:
/// 0 success, 2 configuration or usage error, 3 runtime failure.
inline int run(int argc, const char* const* argv, Streams io) {
  CLI::App app{"Sequence reinforcement learning: train, evaluate and compare frequency robustness"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train an agent into a fresh run directory");
  t->add_option("--algo", train.algo, "srl or sac")->check(CLI::IsMember({"srl", "sac"}));
  t->add_option("--env", train.env, "pendulum, linear, reacher-point or external:<command>");
  t->add_option("--J", train.J, "Action sequence length (ignored for sac)");
  t->add_option("--seed", train.seed, "Run seed");
  t->add_option("--steps", train.steps, "Primitive environment steps (max_steps)");
  t->add_option("--config", train.config_path, "Flat JSON config file");
  t->add_option("--set", train.overrides, "Override a config key: key=value (repeatable)");
  t->add_option("--out", train.out, "Run directory (default: $SRL_RUN_ROOT/<env>/<label>-s<seed>)");
  t->add_flag("--force", train.force, "Replace a non-empty run directory");
  t->add_flag("--quiet", train.quiet, "No progress lines");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint at one ASL or under random timesteps");
  e->add_option("run", ev.run, "Run or checkpoint directory")->required();
  e->add_option("--env", ev.env, "Evaluate on another environment");
  e->add_option("--mode", ev.mode, "auto, sequence or repeat")->check(CLI::IsMember({"auto", "sequence", "repeat"}));
  e->add_option("--J", ev.J, "Actions per observation (default: training J)");
  e->add_option("--episodes", ev.episodes)->check(CLI::PositiveNumber);
  e->add_option("--seed", ev.seed);
  e->add_flag("--stochastic", ev.stochastic, "Draw k ~ U{1..max-k} after every decision");
  e->add_option("--max-k", ev.max_k)->check(CLI::PositiveNumber);

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "Mean return at every ASL of a grid");
  s->add_option("run", sw.run)->required();
  s->add_option("--env", sw.env);
  s->add_option("--mode", sw.mode)->check(CLI::IsMember({"auto", "sequence", "repeat"}));
  s->add_option("--grid", sw.grid, "Comma-separated ASL values (default 1,2,4,8,12,16,20,24,30)");
  s->add_option("--episodes", sw.episodes)->check(CLI::PositiveNumber);
  s->add_option("--seed", sw.seed);
  s->add_option("--out", sw.out);

  FasArgs fa;
  auto* f = app.add_subcommand("fas", "Frequency-averaged score of one or more checkpoints");
  f->add_option("runs", fa.runs, "Run or checkpoint directories (same environment)")->required();
  f->add_option("--env", fa.env);
  f->add_option("--mode", fa.mode, "auto (sac: repeat, srl: sequence), sequence or repeat")
      ->check(CLI::IsMember({"auto", "sequence", "repeat"}));
  f->add_option("--grid", fa.grid);
  f->add_option("--axis", fa.axis)->check(CLI::IsMember({"asl", "frequency"}));
  f->add_option("--episodes", fa.episodes)->check(CLI::PositiveNumber);
  f->add_option("--random-episodes", fa.random_episodes, "Episodes for the random-policy anchor")
      ->check(CLI::PositiveNumber);
  f->add_option("--min", fa.min_score, "Fixed lower anchor");
  f->add_option("--max", fa.max_score, "Fixed upper anchor");
  f->add_option("--seed", fa.seed);
  f->add_option("--out", fa.out, "Output directory (default: <run>/fas)");

  CompareArgs co;
  auto* c = app.add_subcommand("compare", "FAS vs stochastic-timestep return across policies");
  c->add_option("runs", co.runs);
  c->add_option("--pairs", co.pairs, "CSV of policy,fas,stochastic_return rows");
  c->add_option("--grid", co.grid);
  c->add_option("--episodes", co.episodes)->check(CLI::PositiveNumber);
  c->add_option("--stochastic-episodes", co.stochastic_episodes)->check(CLI::PositiveNumber);
  c->add_option("--random-episodes", co.random_episodes)->check(CLI::PositiveNumber);
  c->add_option("--max-k", co.max_k)->check(CLI::PositiveNumber);
  c->add_option("--seed", co.seed);
  c->add_option("--out", co.out);

  ReportArgs re;
  auto* r = app.add_subcommand("report", "Per-environment FAS table from fas.json files");
  r->add_option("inputs", re.inputs, "fas.json files or directories to search")->required();
  r->add_option("--out", re.out, "Write the markdown table here too");

  PlanArgs pl;
  auto* p = app.add_subcommand("plan", "Online planning with the one-step policy and a model");
  p->add_option("run", pl.run)->required();
  p->add_option("--grid", pl.grid);
  p->add_option("--episodes", pl.episodes)->check(CLI::PositiveNumber);
  p->add_flag("--ground-truth", pl.ground_truth, "Use the exact environment dynamics");
  p->add_option("--seed", pl.seed);
  p->add_option("--out", pl.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    io.out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    io.out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& err) {
    io.err << "error: " << err.what() << "\n";
    return kExitConfig;
  }

  try {
    if (*t) return cmd_train(train, io);
    if (*e) return cmd_eval(ev, io);
    if (*s) return cmd_sweep(sw, io);
    if (*f) return cmd_fas(fa, io);
    if (*c) return cmd_compare(co, io);
    if (*r) return cmd_report(re, io);
    if (*p) return cmd_plan(pl, io);
  } catch (const ConfigError& err) {
    io.err << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const envs::UnknownEnvironment& err) {
    io.err << "config error: env: " << err.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& err) {
    io.err << "error: " << err.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace srl::cli
