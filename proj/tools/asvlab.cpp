// asvlab: command-line front end for scenario generation, training,
// evaluation, replay, trend fitting and the pooling benchmark.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.
// ASV_LOG (error | warn | info | debug) sets the stderr verbosity.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "asv/checkpoint.hpp"
#include "asv/config.hpp"
#include "asv/errors.hpp"
#include "asv/eval.hpp"
#include "asv/io.hpp"
#include "asv/scenario.hpp"
#include "asv/sensing.hpp"
#include "asv/trainer.hpp"

namespace fs = std::filesystem;
using namespace asv;

namespace {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level log_level() {
  static const Level level = [] {
    const char* v = std::getenv("ASV_LOG");
    if (!v) return Level::Info;
    const std::string s(v);
    if (s == "error") return Level::Error;
    if (s == "warn") return Level::Warn;
    if (s == "debug") return Level::Debug;
    return Level::Info;
  }();
  return level;
}

void log(Level level, const std::string& msg) {
  if (level > log_level()) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

// Bad invocation: missing input files, invalid option values.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw UsageError(what + " not found: " + path);
}

RunConfig base_config(const std::string& config_path) {
  if (config_path.empty()) return RunConfig{};
  require_file(config_path, "config");
  return load_run_config(config_path);
}

void finalize_config(RunConfig& cfg) {
  try {
    cfg.finalize();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

const std::vector<double> kDefaultLambdas = {1.0, 0.9, 0.5, 0.1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::uint64_t seed = 1;
  std::string out;
  std::string config;
  std::string builtin;
  std::optional<int> n_obstacles, waypoints_min, waypoints_max;
  std::optional<double> path_length, mean_radius, offset_std;
};

int cmd_generate(const GenerateArgs& a) {
  Scenario sc;
  if (!a.builtin.empty()) {
    auto found = find_builtin_scenario(a.builtin);
    if (!found) throw UsageError("unknown built-in scenario '" + a.builtin + "' (A, B, C or D)");
    sc = *found;
  } else {
    RunConfig cfg = base_config(a.config);
    GenParams& g = cfg.env.gen;
    if (a.n_obstacles) g.n_obstacles = *a.n_obstacles;
    if (a.waypoints_min) g.n_waypoints_min = *a.waypoints_min;
    if (a.waypoints_max) g.n_waypoints_max = *a.waypoints_max;
    if (a.path_length) g.path_length = *a.path_length;
    if (a.mean_radius) g.mean_radius = *a.mean_radius;
    if (a.offset_std) g.offset_std = *a.offset_std;
    try {
      g.validate();
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
    sc = generate_scenario(g, a.seed);
  }
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  save_scenario(sc, a.out);
  log(Level::Info, "wrote scenario with " + std::to_string(sc.obstacles.size()) +
                       " obstacles to " + a.out);
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> steps;
  std::optional<int> workers, rollout_steps, checkpoint_every;
  std::string resume;
  bool serial = false;
};

int cmd_train(const TrainArgs& a) {
  RunConfig cfg = base_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.steps) cfg.ppo.total_steps = *a.steps;
  if (a.workers) cfg.ppo.workers = *a.workers;
  if (a.rollout_steps) cfg.ppo.rollout_steps = *a.rollout_steps;
  if (a.checkpoint_every) cfg.checkpoint_every = *a.checkpoint_every;
  if (!a.out.empty()) cfg.output_dir = a.out;
  finalize_config(cfg);

  TrainOptions opt;
  opt.ppo = cfg.ppo;
  opt.seed = cfg.seed;
  opt.scaling = default_feature_scaling(cfg.env.vessel.max_speed, cfg.cross_track_scale);
  opt.out_dir = cfg.output_dir;
  opt.checkpoint_every = cfg.checkpoint_every;
  opt.parallel = !a.serial;
  const VesselParams& vp = cfg.env.vessel;
  opt.initial_action_mean = {0.5 * (vp.thrust_limits[0] + vp.thrust_limits[1]),
                             0.5 * (vp.yaw_moment_limits[0] + vp.yaw_moment_limits[1])};
  if (!a.resume.empty()) {
    require_file(a.resume, "checkpoint");
    opt.resume = load_checkpoint(a.resume);
    log(Level::Info, "resuming from " + a.resume + " at step " +
                         std::to_string(opt.resume->total_steps));
  }

  fs::create_directories(fs::path(cfg.output_dir) / "checkpoints");
  write_file_atomic(fs::path(cfg.output_dir) / "config.json", run_config_to_json(cfg));
  write_file_atomic(fs::path(cfg.output_dir) / "vessel_params.json",
                    vessel_params_to_json(cfg.env.vessel));

  const EnvConfig env_cfg = cfg.env;
  EnvFactory factory = [env_cfg](int, std::uint64_t seed) {
    return std::make_unique<PathFollowingEnv>(env_cfg, seed);
  };
  const auto t0 = std::chrono::steady_clock::now();
  opt.on_iteration = [&](const IterationMetrics& m) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream os;
    os << "iter " << m.iteration << " steps " << m.steps << " episodes " << m.episodes
       << " mean_reward " << format_double(m.mean_reward) << " success "
       << format_double(m.success_rate) << " entropy " << format_double(m.entropy) << " ("
       << secs << " s)";
    log(Level::Info, os.str());
  };
  const TrainResult res = train(factory, opt);
  log(Level::Info, "final checkpoint: " +
                       (fs::path(cfg.output_dir) / "checkpoint_final.bin").string() + " after " +
                       std::to_string(res.checkpoint.total_steps) + " steps");
  return 0;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string checkpoint;
  std::string config;
  std::vector<double> lambdas;
  int episodes = 100;
  std::uint64_t seed = 12345;
  std::string out;
  std::optional<int> threads;
};

int cmd_evaluate(const EvaluateArgs& a) {
  require_file(a.checkpoint, "checkpoint");
  RunConfig cfg = base_config(a.config);
  if (a.threads) cfg.eval_threads = *a.threads;
  finalize_config(cfg);
  if (a.episodes < 1) throw UsageError("--episodes must be >= 1");
  const std::vector<double> lambdas = a.lambdas.empty() ? kDefaultLambdas : a.lambdas;
  for (double l : lambdas)
    if (!(l > 0.0 && l <= 1.0)) throw UsageError("--lambda values must lie in (0, 1]");

  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  std::vector<EvalReport> reports;
  for (double l : lambdas) {
    reports.push_back(run_eval(ckpt.net, cfg.env, l, a.episodes, a.seed, cfg.eval_threads));
    const EvalReport& r = reports.back();
    log(Level::Info, "lambda " + format_double(l) + ": success " +
                         format_double(r.success_rate) + ", avg cte " +
                         format_double(r.avg_cross_track_error) + " m, avg length " +
                         format_double(r.avg_episode_length) + " s");
  }
  const std::string csv = eval_report_csv(reports);
  if (!a.out.empty()) {
    const fs::path dir(a.out);
    emit_sweep_plots(dir, reports, cfg.env.step_size);
    write_file_atomic(dir / "report.csv", csv);
    RunConfig echo = cfg;
    echo.seed = a.seed;
    echo.output_dir = a.out;
    write_file_atomic(dir / "config.json", run_config_to_json(echo));
    log(Level::Info, "wrote " + (dir / "report.csv").string());
  }
  std::cout << csv;
  return 0;
}

// ---------------------------------------------------------------------------

struct ReplayArgs {
  std::string checkpoint;
  std::string scenario;
  std::string config;
  double lambda = 1.0;
  std::string trace_out;
  std::string plots_dir;
};

int cmd_replay(const ReplayArgs& a) {
  require_file(a.checkpoint, "checkpoint");
  std::optional<Scenario> sc = find_builtin_scenario(a.scenario);
  if (!sc) {
    require_file(a.scenario, "scenario");
    sc = load_scenario(a.scenario);
  }
  if (!(a.lambda > 0.0 && a.lambda <= 1.0)) throw UsageError("--lambda must lie in (0, 1]");
  RunConfig cfg = base_config(a.config);
  finalize_config(cfg);

  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  PathFollowingEnv env(cfg.env, cfg.seed);
  env.set_trace(true);
  env.reset(*sc, a.lambda);
  const EpisodeRecord rec = run_episode(ckpt.net, env);
  if (!a.trace_out.empty()) {
    if (fs::path(a.trace_out).has_parent_path())
      fs::create_directories(fs::path(a.trace_out).parent_path());
    write_file_atomic(a.trace_out, trace_csv(env.trace()));
  }
  if (!a.plots_dir.empty()) emit_trajectory_plots(a.plots_dir, *sc, env.trace());
  std::cout << "reason " << to_string(rec.reason) << " steps " << rec.steps << " length_s "
            << format_double(rec.steps * cfg.env.step_size) << " mean_abs_cte_m "
            << format_double(rec.steps ? rec.sum_abs_cross_track / rec.steps : 0.0)
            << " total_reward " << format_double(rec.total_reward) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string report;
  std::vector<std::string> models;
  std::vector<double> exclude;
  std::string out;
  std::string curve_dir;
};

int cmd_fit(const FitArgs& a) {
  require_file(a.report, "report");
  std::vector<FitModel> models;
  try {
    for (const auto& m : a.models) models.push_back(parse_fit_model(m));
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  if (models.empty())
    models = {FitModel::LogisticSuccess, FitModel::PowerCte, FitModel::LoglinearLength};

  const auto points = parse_eval_report_csv(read_file(a.report), a.report);
  std::vector<double> x, success, cte, len;
  std::vector<std::uint8_t> mask;
  for (const auto& p : points) {
    x.push_back(p.lambda);
    success.push_back(p.success_rate);
    cte.push_back(p.avg_cte_m);
    len.push_back(p.avg_len_s);
    bool drop = false;
    for (double e : a.exclude)
      if (std::fabs(p.lambda - e) <= 1e-9 * std::max(std::fabs(e), 1e-300)) drop = true;
    mask.push_back(drop ? 1 : 0);
  }
  for (double e : a.exclude) {
    bool found = false;
    for (const auto& p : points)
      if (std::fabs(p.lambda - e) <= 1e-9 * std::max(std::fabs(e), 1e-300)) found = true;
    if (!found) throw UsageError("--exclude " + format_double(e) + " matches no report row");
  }

  std::vector<FitResult> fits;
  for (FitModel m : models) {
    const std::vector<double>& y = m == FitModel::LogisticSuccess ? success
                                   : m == FitModel::PowerCte      ? cte
                                                                  : len;
    std::vector<std::uint8_t> use = mask;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (!std::isfinite(y[i])) use[i] = 1;
    try {
      fits.push_back(lm_fit(m, x, y, use));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(to_string(m) + ": " + e.what());
    }
  }
  const std::string csv = fit_result_csv(fits);
  if (!a.out.empty()) {
    if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
    write_file_atomic(a.out, csv);
  }
  if (!a.curve_dir.empty()) {
    fs::create_directories(a.curve_dir);
    double lo = *std::min_element(x.begin(), x.end());
    double hi = *std::max_element(x.begin(), x.end());
    for (const FitResult& f : fits)
      write_file_atomic(fs::path(a.curve_dir) / ("curve_" + to_string(f.model) + ".csv"),
                        fit_curve_csv(f, lo, hi));
  }
  std::cout << csv;
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::vector<int> ns;
  std::vector<std::string> methods;
  int samples = 2000;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  const std::vector<int> ns = a.ns.empty() ? std::vector<int>{3, 5, 9, 15, 25, 45, 75} : a.ns;
  std::vector<PoolingMethod> methods;
  try {
    for (const auto& m : a.methods) methods.push_back(parse_pooling_method(m));
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  if (methods.empty())
    methods = {PoolingMethod::Min, PoolingMethod::Max, PoolingMethod::Feasibility};
  for (int n : ns)
    if (n < 1) throw UsageError("--n values must be >= 1");
  if (a.samples < 2) throw UsageError("--samples must be >= 2");

  const SensorConfig cfg;
  std::vector<PoolingBenchResult> results;
  for (PoolingMethod m : methods)
    for (int n : ns) results.push_back(pooling_bench(n, m, a.samples, cfg, a.seed));
  const std::string csv = pooling_bench_csv(results);
  if (!a.out.empty()) {
    if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
    write_file_atomic(a.out, csv);
  }
  std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reinforcement-learning guidance laboratory for an autonomous surface vessel"};
  app.require_subcommand(1);
  std::function<int()> action;

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate-scenario", "Generate a random scenario file");
  g->add_option("--seed", gen.seed, "Scenario seed");
  g->add_option("--out", gen.out, "Output scenario file")->required();
  g->add_option("--config", gen.config, "Run config (JSON) supplying generator parameters");
  g->add_option("--builtin", gen.builtin, "Write built-in scenario A, B, C or D instead");
  g->add_option("--n-obstacles", gen.n_obstacles, "Number of obstacles");
  g->add_option("--waypoints-min", gen.waypoints_min, "Minimum intermediate waypoints");
  g->add_option("--waypoints-max", gen.waypoints_max, "Maximum intermediate waypoints");
  g->add_option("--path-length", gen.path_length, "Start-to-goal distance (m)");
  g->add_option("--mean-radius", gen.mean_radius, "Mean obstacle radius (m)");
  g->add_option("--offset-std", gen.offset_std, "Lateral obstacle offset std (m)");
  g->callback([&] { action = [&] { return cmd_generate(gen); }; });

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a PPO agent");
  t->add_option("--config", tr.config, "Run config (JSON)");
  t->add_option("--out", tr.out, "Output directory");
  t->add_option("--seed", tr.seed, "Master seed");
  t->add_option("--steps", tr.steps, "Total environment steps");
  t->add_option("--workers", tr.workers, "Parallel rollout workers");
  t->add_option("--rollout-steps", tr.rollout_steps, "Steps per worker per iteration");
  t->add_option("--checkpoint-every", tr.checkpoint_every, "Checkpoint period in iterations");
  t->add_option("--resume", tr.resume, "Checkpoint to resume from");
  t->add_flag("--serial", tr.serial, "Collect rollouts on one thread");
  t->callback([&] { action = [&] { return cmd_train(tr); }; });

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Evaluate a checkpoint over a lambda sweep");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  e->add_option("--config", ev.config, "Run config (JSON) for the environment");
  e->add_option("--lambda", ev.lambdas, "Lambda values")->delimiter(',');
  e->add_option("--episodes", ev.episodes, "Episodes per lambda");
  e->add_option("--seed", ev.seed, "Evaluation seed");
  e->add_option("--out", ev.out, "Output directory for report.csv and plot data");
  e->add_option("--threads", ev.threads, "Worker threads (0 = all cores)");
  e->callback([&] { action = [&] { return cmd_evaluate(ev); }; });

  ReplayArgs rp;
  auto* r = app.add_subcommand("replay", "Run one episode and write its trajectory");
  r->add_option("--checkpoint", rp.checkpoint, "Checkpoint file")->required();
  r->add_option("--scenario", rp.scenario, "Scenario file or built-in name A-D")->required();
  r->add_option("--config", rp.config, "Run config (JSON) for the environment");
  r->add_option("--lambda", rp.lambda, "Trade-off parameter lambda");
  r->add_option("--trace-out", rp.trace_out, "Trajectory CSV output");
  r->add_option("--plots-dir", rp.plots_dir, "Directory for trajectory/path/obstacle CSVs");
  r->callback([&] { action = [&] { return cmd_replay(rp); }; });

  FitArgs fa;
  auto* f = app.add_subcommand("fit-curves", "Fit trend models to an evaluation report");
  f->add_option("--report", fa.report, "Report CSV from evaluate")->required();
  f->add_option("--model", fa.models, "logistic-success, power-cte, loglinear-length")
      ->delimiter(',');
  f->add_option("--exclude", fa.exclude, "Lambda values to leave out")->delimiter(',');
  f->add_option("--out", fa.out, "Fit result CSV output");
  f->add_option("--curve-dir", fa.curve_dir, "Directory for sampled fit curves");
  f->callback([&] { action = [&] { return cmd_fit(fa); }; });

  BenchArgs bn;
  auto* b = app.add_subcommand("pooling-bench", "Time the sector pooling methods");
  b->add_option("--n", bn.ns, "Rays per sector")->delimiter(',');
  b->add_option("--methods", bn.methods, "min, max, feasibility")->delimiter(',');
  b->add_option("--samples", bn.samples, "Timing samples per point");
  b->add_option("--seed", bn.seed, "Input seed");
  b->add_option("--out", bn.out, "CSV output");
  b->callback([&] { action = [&] { return cmd_bench(bn); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 2;
  }

  try {
    return action();
  } catch (const UsageError& ex) {
    log(Level::Error, ex.what());
    return 2;
  } catch (const std::exception& ex) {
    log(Level::Error, ex.what());
    return 1;
  }
}
