// Acceptance suite: one PASS/FAIL line per criterion. With arguments, runs
// only the listed criterion numbers. Exit status is nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "asv/config.hpp"
#include "asv/dynamics.hpp"
#include "asv/env.hpp"
#include "asv/eval.hpp"
#include "asv/io.hpp"
#include "asv/ppo.hpp"
#include "asv/scenario.hpp"
#include "asv/sensing.hpp"
#include "asv/trainer.hpp"
#include "fit_recovery.hpp"
#include "oracles.hpp"

using namespace asv;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 1;

struct Verdict {
  bool pass;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string fmt(double x, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

std::vector<double> random_sector(Rng& rng, int n) {
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform(0.0, 150.0);
  return x;
}

Verdict feasibility_oracle() {
  const SensorConfig cfg;
  Rng rng(kSeed, 1);
  Stopwatch sw;
  long mismatches = 0;
  for (int i = 0; i < 100'000; ++i) {
    const std::vector<double> x = random_sector(rng, 9);
    const double got = feasibility_pool(x, cfg);
    const double want = oracle::feasibility(x, cfg.ray_spacing(), cfg.width, cfg.range);
    mismatches += got != want;
  }
  const double t = sw.seconds();
  return {mismatches == 0 && t < 30.0,
          std::to_string(mismatches) + " mismatches in 1e5 sectors, " + fmt(t, 3) + " s"};
}

Verdict pooling_order() {
  const SensorConfig cfg;
  Rng rng(kSeed, 2);
  long violations = 0;
  for (int i = 0; i < 100'000; ++i) {
    const std::vector<double> x = random_sector(rng, 9);
    const double f = feasibility_pool(x, cfg);
    violations += !(min_pool(x) <= f && f <= max_pool(x));
  }
  return {violations == 0, std::to_string(violations) + " violations of min <= feasibility <= max"};
}

Verdict gradient_check() {
  Rng rng(kSeed, 3);
  const PPOConfig cfg;
  Stopwatch sw;
  double worst = 0.0;
  for (int b = 0; b < 10; ++b) {
    PolicyValueNet net;
    net.initialize(rng);
    net.params() += 0.05 * Eigen::VectorXd::NullaryExpr(net.params().size(),
                                                        [&] { return rng.gaussian(0, 1); });
    net.params().segment<2>(PolicyValueNet::kLogStd) << rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5);
    const Minibatch mb = oracle::random_minibatch(net, cfg.minibatch_size, rng);
    Eigen::VectorXd grad;
    ppo_loss(net, mb, cfg, &grad);
    PolicyValueNet p = net;
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
      const double x0 = net.params()[i];
      p.params()[i] = x0 + h;
      const double up = ppo_loss(p, mb, cfg, nullptr).total;
      p.params()[i] = x0 - h;
      const double dn = ppo_loss(p, mb, cfg, nullptr).total;
      p.params()[i] = x0;
      const double fd = (up - dn) / (2 * h);
      // Floor keeps rounding noise on near-zero entries from dominating.
      worst = std::max(worst, std::fabs(fd - grad[i]) / std::max({std::fabs(fd), std::fabs(grad[i]), 1e-5}));
    }
  }
  const double t = sw.seconds();
  return {worst < 1e-4 && t < 120.0,
          "max relative error " + fmt(worst, 3) + " over 10 x " +
              std::to_string(PolicyValueNet::kNumParams) + " parameters, " + fmt(t, 3) + " s"};
}

Verdict gae_oracle() {
  Rng rng(kSeed, 4);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 100));
    std::vector<double> r(n), v(n + 1);
    std::vector<std::uint8_t> d(n);
    for (int t = 0; t < n; ++t) {
      r[t] = rng.gaussian(0.0, 1.0);
      v[t] = rng.gaussian(0.0, 1.0);
      d[t] = rng.uniform01() < 0.1;
    }
    v[n] = rng.gaussian(0.0, 1.0);
    const GaeResult g = compute_gae(r, v, d, 0.999, 0.95);
    const auto ref = oracle::gae_double_sum(r, v, d, 0.999, 0.95);
    for (int t = 0; t < n; ++t) worst = std::max(worst, std::fabs(g.advantages[t] - ref[t]));
  }
  return {worst < 1e-10, "max abs error " + fmt(worst, 3) + " over 1000 trajectories"};
}

Verdict dynamics() {
  // Order on y' = A y, A a damped rotation with closed-form solution.
  const double a = -0.3, w = 2.0, T = 2.0;
  Eigen::Matrix2d A;
  A << a, -w, w, a;
  const Eigen::Vector2d y0(1.0, 0.5);
  const Eigen::Vector2d exact = std::exp(a * T) *
                                (Eigen::Matrix2d() << std::cos(w * T), -std::sin(w * T),
                                 std::sin(w * T), std::cos(w * T)).finished() * y0;
  std::vector<double> errs;
  for (double h : {0.2, 0.1, 0.05}) {
    Eigen::Vector2d y = y0;
    for (int k = 0, n = static_cast<int>(std::lround(T / h)); k < n; ++k)
      y = rkf45::step([&](const Eigen::Vector2d& z) -> Eigen::Vector2d { return A * z; }, y, h);
    errs.push_back((y - exact).norm());
  }
  const double order = std::min(std::log2(errs[0] / errs[1]), std::log2(errs[1] / errs[2]));

  VesselParams p = load_vessel_params(fs::path(ASV_SOURCE_DIR) / "config/vessel_default.json");
  p.linear_damping.setZero();
  p.quadratic_damping.setZero();
  p.finalize();
  VesselState s{0, 0, 0, 1.0, 0.1, 0.05};
  const double e0 = p.kinetic_energy(s.nu());
  double drift = 0.0;
  for (int k = 0; k < 100; ++k) {
    s = step_rkf45(s, {}, p, 0.14);
    drift = std::max(drift, std::fabs(p.kinetic_energy(s.nu()) - e0));
  }
  return {order >= 4.5 && drift < 1e-8,
          "empirical order " + fmt(order) + ", kinetic-energy drift " + fmt(drift, 3) + " J"};
}

Verdict calibration() {
  RewardParams p;
  Rng rng(kSeed, 6);
  double worst = 0.0;
  const double umax = EnvConfig{}.vessel.max_speed;
  for (int i = 0; i < 100; ++i) {
    p.lambda = std::pow(10.0, rng.uniform(-6.0, 0.0));
    worst = std::max(worst, std::fabs(p.lambda * reward_pf(p.alpha_r * umax, 0, 0, 0, umax, p) +
                                      reward_exists(p)));
  }
  const double at_max = reward_pf(umax, 0, 0, 0, umax, p);
  const double at_rest = reward_pf(0, 0, 0, 0, umax, p);
  return {worst < 1e-12 && at_max == 3.0 && at_rest == 1.0,
          "max identity residual " + fmt(worst, 3) + ", r_pf(U_max)=" + fmt(at_max, 17) +
              ", r_pf(0)=" + fmt(at_rest, 17)};
}

Verdict scenario_stats() {
  const GenParams g;
  double r_sum = 0.0, off_sum = 0.0, off_sq = 0.0;
  long n = 0, bad_count = 0, bad_start = 0;
  double start_dev = 0.0;
  // A continuous heading cannot land every start on a double exactly 200 from
  // the origin; the norm must agree to one ulp.
  const double ulp = std::nextafter(200.0, 400.0) - 200.0;
  for (std::uint64_t seed = 0; seed < 10'000; ++seed) {
    const GeneratedScenario gs = generate_scenario_traced(g, seed);
    bad_count += gs.scenario.obstacles.size() != 20;
    const double dev = std::fabs(gs.scenario.start.norm() - 200.0);
    start_dev = std::max(start_dev, dev);
    bad_start += dev > ulp;
    for (std::size_t i = 0; i < gs.scenario.obstacles.size(); ++i) {
      r_sum += gs.scenario.obstacles[i].radius;
      off_sum += gs.placements[i].offset;
      off_sq += gs.placements[i].offset * gs.placements[i].offset;
      ++n;
    }
  }
  const double mean_r = r_sum / n;
  const double off_mean = off_sum / n;
  const double off_std = std::sqrt(off_sq / n - off_mean * off_mean);
  return {bad_count == 0 && bad_start == 0 && std::fabs(mean_r - 30.0) <= 1.0 &&
              std::fabs(off_std - 150.0) <= 3.0,
          std::to_string(bad_count) + " wrong counts, " + std::to_string(bad_start) +
              " start norms off by more than 1 ulp (max " + fmt(start_dev, 3) + " m), mean radius " + fmt(mean_r) + ", offset std " + fmt(off_std)};
}

Verdict lambda_sampling() {
  const RewardParams p;
  Rng rng(kSeed, 8);
  double sum = 0.0;
  for (int i = 0; i < 1'000'000; ++i) sum -= std::log10(sample_lambda(rng, p));
  const double mean = sum / 1e6;
  return {std::fabs(mean - 0.5) <= 0.005, "mean -log10(lambda) " + fmt(mean, 5)};
}

RunConfig reduced_config() {
  return load_run_config(fs::path(ASV_SOURCE_DIR) / "config/reduced.json");
}

Verdict desk_training() {
  RunConfig cfg = reduced_config();
  cfg.seed = kSeed;
  cfg.ppo.total_steps = 200'000;
  cfg.finalize();
  Stopwatch sw;
  TrainOptions opt;
  opt.ppo = cfg.ppo;
  opt.seed = cfg.seed;
  opt.scaling = default_feature_scaling(cfg.env.vessel.max_speed, cfg.cross_track_scale);
  const VesselParams& vp = cfg.env.vessel;
  opt.initial_action_mean = {0.5 * (vp.thrust_limits[0] + vp.thrust_limits[1]),
                             0.5 * (vp.yaw_moment_limits[0] + vp.yaw_moment_limits[1])};
  const EnvConfig env = cfg.env;
  const TrainResult res = train(
      [env](int, std::uint64_t seed) { return std::make_unique<PathFollowingEnv>(env, seed); }, opt);

  std::vector<EvalReport> rep;
  std::string detail;
  for (double lam : {1.0, 1e-2, 1e-4}) {
    rep.push_back(run_eval(res.checkpoint.net, env, lam, 50, 12345, cfg.eval_threads));
    detail += "lambda " + fmt(lam) + ": success " + fmt(rep.back().success_rate) + ", avg cte " +
              fmt(rep.back().avg_cross_track_error) + " m; ";
  }
  const bool success_ok = rep[2].success_rate >= rep[0].success_rate - 0.05;
  const bool cte_ok = rep[2].avg_cross_track_error >= rep[0].avg_cross_track_error;
  detail += fmt(res.checkpoint.total_steps, 8) + " steps, " + fmt(sw.seconds(), 4) + " s";
  return {success_ok && cte_ok, detail};
}

Verdict lm_recovery() {
  double noiseless = 0.0, noisy = 0.0;
  std::string detail;
  const std::vector<double> x = recovery::lambda_grid(13);
  for (const recovery::Family& f : recovery::reference_families()) {
    std::vector<double> y;
    for (double xi : x) y.push_back(fit_model_eval(f.model, f.params, xi));
    noiseless = std::max(noiseless, recovery::max_rel_error(lm_fit(f.model, x, y).params, f.params));
    const recovery::NoisyOutcome o = recovery::noisy_recovery(f, 100, 0.01, kSeed);
    noisy = std::max(noisy, o.median_estimate_error);
    detail += to_string(f.model) + " noisy " + fmt(o.median_estimate_error, 3) + "; ";
  }
  detail += "noiseless max " + fmt(noiseless, 3);
  return {noiseless < 1e-6 && noisy < 0.05, detail};
}

int run_asvlab(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string("\"") + ASVLAB_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path work_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "asv_acceptance" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

Verdict determinism() {
  const fs::path d = work_dir("determinism");
  int codes = 0;
  for (const char* run : {"a", "b"})
    codes += run_asvlab("train --steps 20000 --seed 7 --checkpoint-every 1 --out " + (d / run).string(),
                        d / (std::string(run) + ".log"));
  if (codes != 0) return {false, "train exited nonzero"};
  std::vector<fs::path> files = {"metrics.csv", "checkpoint_final.bin"};
  for (const auto& e : fs::directory_iterator(d / "a" / "checkpoints"))
    files.push_back(fs::path("checkpoints") / e.path().filename());
  int differ = 0;
  for (const fs::path& f : files) differ += read_file(d / "a" / f) != read_file(d / "b" / f);
  return {differ == 0, std::to_string(files.size()) + " files compared, " + std::to_string(differ) +
                           " differ"};
}

Verdict smoke() {
  const fs::path d = work_dir("smoke");
  const fs::path log = d / "log.txt";
  Stopwatch sw;
  const std::string ckpt = (d / "run" / "checkpoint_final.bin").string();
  const std::vector<std::pair<std::string, std::string>> steps = {
      {"generate-scenario", "generate-scenario --seed 3 --out " + (d / "scenario.txt").string()},
      {"train", "train --steps 5000 --out " + (d / "run").string()},
      {"evaluate", "evaluate --checkpoint " + ckpt + " --episodes 5 --out " + (d / "eval").string()},
      {"replay", "replay --checkpoint " + ckpt + " --scenario " + (d / "scenario.txt").string() +
                     " --trace-out " + (d / "trace.csv").string()},
      {"fit-curves", "fit-curves --report " + (d / "eval" / "report.csv").string() + " --out " +
                         (d / "fits.csv").string()},
  };
  std::string detail;
  bool ok = true;
  for (const auto& [name, args] : steps) {
    const int code = run_asvlab(args, log);
    detail += name + "=" + std::to_string(code) + " ";
    if (code != 0) {
      ok = false;
      break;
    }
  }
  const double t = sw.seconds();
  return {ok && t < 600.0, detail + "in " + fmt(t, 3) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"feasibility pooling equals the brute-force oracle", feasibility_oracle},
      {"min <= feasibility <= max pooling", pooling_order},
      {"PPO loss gradient vs central differences", gradient_check},
      {"GAE vs double-sum oracle", gae_oracle},
      {"RKF45 order and kinetic-energy drift", dynamics},
      {"reward calibration identity", calibration},
      {"scenario generator statistics", scenario_stats},
      {"lambda sampling mean", lambda_sampling},
      {"desk-scale training trade-off", desk_training},
      {"LM fit recovery", lm_recovery},
      {"training determinism", determinism},
      {"end-to-end CLI smoke", smoke},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);

  int failed = 0;
  for (int k : selected) {
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::cerr << "unknown criterion " << k << '\n';
      return 2;
    }
    const auto& [name, fn] = criteria[k - 1];
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << "criterion " << k << ": " << (v.pass ? "PASS" : "FAIL") << "  " << name << "  ("
              << v.detail << ")" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
