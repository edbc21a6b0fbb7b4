#include "asv/eval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "asv/errors.hpp"
#include "asv/io.hpp"

namespace asv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where + ": invalid number '" + s + "'");
  }
}

}  // namespace

std::pair<double, double> wilson_interval(int successes, int trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = trials;
  const double p = successes / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

EpisodeRecord run_episode(const PolicyValueNet& net, PathFollowingEnv& env) {
  EpisodeRecord rec;
  Observation obs = env.reset(env.scenario(), env.lambda());
  while (true) {
    const Eigen::Vector2d mean = net.policy_mean(obs);
    const StepResult res = env.step({mean[0], mean[1]});
    rec.sum_abs_cross_track += std::fabs(res.info.cross_track);
    ++rec.steps;
    if (res.done) {
      rec.reason = res.reason;
      break;
    }
    obs = res.observation;
  }
  rec.total_reward = env.cumulative_reward();
  rec.seed = env.scenario().seed;
  return rec;
}

EvalReport summarize(double lambda, std::vector<EpisodeRecord> records, double step_size) {
  EvalReport rep;
  rep.lambda = lambda;
  rep.episodes = static_cast<int>(records.size());
  long long steps = 0, success_steps = 0;
  double cte = 0.0, success_cte = 0.0;
  int successes = 0;
  for (const EpisodeRecord& r : records) {
    steps += r.steps;
    cte += r.sum_abs_cross_track;
    if (r.reason == Termination::Goal) {
      ++successes;
      success_steps += r.steps;
      success_cte += r.sum_abs_cross_track;
    }
  }
  if (rep.episodes > 0) {
    rep.success_rate = static_cast<double>(successes) / rep.episodes;
    rep.avg_episode_length = static_cast<double>(steps) / rep.episodes * step_size;
  }
  rep.avg_cross_track_error = steps ? cte / static_cast<double>(steps) : kNaN;
  rep.avg_cross_track_error_success =
      success_steps ? success_cte / static_cast<double>(success_steps) : kNaN;
  std::tie(rep.success_ci_low, rep.success_ci_high) = wilson_interval(successes, rep.episodes);
  rep.records = std::move(records);
  return rep;
}

EvalReport run_eval(const PolicyValueNet& net, const EnvConfig& config, double lambda,
                    int episodes, std::uint64_t seed, int threads) {
  if (episodes < 0) throw ConfigError("eval: episodes must be >= 0");
  EnvConfig cfg = config;
  cfg.fixed_lambda = lambda;
  cfg.validate();
  std::vector<EpisodeRecord> records(static_cast<std::size_t>(episodes));
  auto run_one = [&](int i) {
    const std::uint64_t env_seed = mix64(seed ^ mix64(0xE7A1ull + static_cast<std::uint64_t>(i)));
    PathFollowingEnv env(cfg, env_seed);
    env.reset();
    records[static_cast<std::size_t>(i)] = run_episode(net, env);
  };

  int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::clamp(n_threads, 1, std::max(1, episodes));
  if (n_threads == 1) {
    for (int i = 0; i < episodes; ++i) run_one(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (int i = t; i < episodes; i += n_threads) run_one(i);
        } catch (...) {
          errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return summarize(lambda, std::move(records), cfg.step_size);
}

std::string eval_report_csv_header() {
  return "lambda,episodes,success_rate,avg_cte_m,avg_len_s,avg_cte_success_m,success_ci_low,"
         "success_ci_high\n";
}

std::string eval_report_csv(std::span<const EvalReport> reports) {
  std::ostringstream os;
  os << eval_report_csv_header();
  for (const EvalReport& r : reports)
    os << format_double(r.lambda) << ',' << r.episodes << ',' << format_double(r.success_rate)
       << ',' << format_double(r.avg_cross_track_error) << ','
       << format_double(r.avg_episode_length) << ','
       << format_double(r.avg_cross_track_error_success) << ','
       << format_double(r.success_ci_low) << ',' << format_double(r.success_ci_high) << '\n';
  return os.str();
}

std::string episodes_csv(const EvalReport& report, double step_size) {
  std::ostringstream os;
  os << "episode,seed,reason,steps,length_s,mean_abs_cte_m,total_reward\n";
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const EpisodeRecord& r = report.records[i];
    os << i << ',' << r.seed << ',' << to_string(r.reason) << ',' << r.steps << ','
       << format_double(r.steps * step_size) << ','
       << format_double(r.steps ? r.sum_abs_cross_track / r.steps : 0.0) << ','
       << format_double(r.total_reward) << '\n';
  }
  return os.str();
}

std::vector<SweepPoint> parse_eval_report_csv(const std::string& text,
                                              const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source + ": empty report");
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(source + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_lambda = column("lambda"), c_success = column("success_rate"),
                    c_cte = column("avg_cte_m"), c_len = column("avg_len_s");
  std::vector<SweepPoint> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    const std::string where = source + ":" + std::to_string(lineno);
    if (cells.size() != header.size()) throw ParseError(where + ": wrong number of columns");
    out.push_back({parse_number(cells[c_lambda], where), parse_number(cells[c_success], where),
                   parse_number(cells[c_cte], where), parse_number(cells[c_len], where)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Built-in scenarios. Straight 200 m path along +x; coordinates in metres.

namespace {

Scenario straight_scenario(std::vector<Obstacle> obstacles) {
  Scenario s;
  s.waypoints = {{-100.0, 0.0}, {-50.0, 0.0}, {0.0, 0.0}, {50.0, 0.0}, {100.0, 0.0}};
  s.start = s.waypoints.front();
  s.end = s.waypoints.back();
  s.seed = 0;
  s.gen_params.path_length = 200.0;
  s.gen_params.n_obstacles = static_cast<int>(obstacles.size());
  s.obstacles = std::move(obstacles);
  return s;
}

}  // namespace

std::vector<NamedScenario> builtin_scenarios() {
  std::vector<NamedScenario> out;
  out.push_back({"A", straight_scenario({{{0.0, 0.5}, 15.0}})});
  out.push_back({"B", straight_scenario({{{-20.0, 45.0}, 10.0},
                                         {{5.0, 60.0}, 12.0},
                                         {{30.0, 42.0}, 8.0},
                                         {{-5.0, -50.0}, 10.0},
                                         {{25.0, -65.0}, 14.0}})});
  // Wall at x = 20 from y = -100 to 100, gap between y = 18 and y = 42.
  std::vector<Obstacle> wall;
  for (double y = -96.0; y <= 10.0 + 1e-9; y += 8.0) wall.push_back({{20.0, y}, 5.0});
  for (double y = 50.0; y <= 98.0 + 1e-9; y += 8.0) wall.push_back({{20.0, y}, 5.0});
  out.push_back({"C", straight_scenario(wall)});
  // Pocket open towards the start: back wall at x = 40, side walls at y = +-30.
  std::vector<Obstacle> pocket;
  for (double y = -30.0; y <= 30.0 + 1e-9; y += 7.5) pocket.push_back({{40.0, y}, 5.0});
  for (double x = -5.0; x <= 32.5 + 1e-9; x += 7.5) {
    pocket.push_back({{x, 30.0}, 5.0});
    pocket.push_back({{x, -30.0}, 5.0});
  }
  out.push_back({"D", straight_scenario(pocket)});
  return out;
}

std::optional<Scenario> find_builtin_scenario(const std::string& name) {
  for (auto& ns : builtin_scenarios())
    if (ns.name == name) return ns.scenario;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Trend fits.

std::string to_string(FitModel m) {
  switch (m) {
    case FitModel::LogisticSuccess: return "logistic-success";
    case FitModel::PowerCte: return "power-cte";
    case FitModel::LoglinearLength: return "loglinear-length";
  }
  return "?";
}

FitModel parse_fit_model(const std::string& s) {
  if (s == "logistic-success") return FitModel::LogisticSuccess;
  if (s == "power-cte") return FitModel::PowerCte;
  if (s == "loglinear-length") return FitModel::LoglinearLength;
  throw ConfigError("unknown fit model '" + s +
                    "' (expected logistic-success, power-cte or loglinear-length)");
}

int fit_model_num_params(FitModel m) { return m == FitModel::PowerCte ? 3 : 2; }

double fit_model_eval(FitModel m, std::span<const double> p, double x) {
  switch (m) {
    case FitModel::LogisticSuccess: return p[0] + (1.0 - p[0]) / (1.0 + std::pow(x, p[1]));
    case FitModel::PowerCte: return p[0] + p[1] * std::pow(x, -p[2]);
    case FitModel::LoglinearLength: return p[0] - p[1] * std::log10(x);
  }
  return kNaN;
}

std::vector<double> fit_model_jacobian(FitModel m, std::span<const double> p, double x) {
  switch (m) {
    case FitModel::LogisticSuccess: {
      const double xb = std::pow(x, p[1]);
      const double q = 1.0 / (1.0 + xb);
      return {1.0 - q, -(1.0 - p[0]) * xb * std::log(x) * q * q};
    }
    case FitModel::PowerCte: {
      const double xc = std::pow(x, -p[2]);
      return {1.0, xc, -p[1] * xc * std::log(x)};
    }
    case FitModel::LoglinearLength: return {1.0, -std::log10(x)};
  }
  return {};
}

namespace {

struct Points {
  std::vector<double> x, y;
};

Points select_points(std::span<const double> x, std::span<const double> y,
                     std::span<const std::uint8_t> exclude) {
  if (x.size() != y.size()) throw std::invalid_argument("lm_fit: x and y differ in length");
  if (!exclude.empty() && exclude.size() != x.size())
    throw std::invalid_argument("lm_fit: exclusion mask has the wrong length");
  Points pts;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!exclude.empty() && exclude[i]) continue;
    if (!(x[i] > 0.0 && std::isfinite(y[i])))
      throw std::invalid_argument("lm_fit: x must be positive and y finite");
    pts.x.push_back(x[i]);
    pts.y.push_back(y[i]);
  }
  return pts;
}

double sum_sq(const Eigen::VectorXd& r) { return r.squaredNorm(); }

Eigen::VectorXd residuals(FitModel m, const std::vector<double>& p, const Points& pts) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(pts.x.size()));
  for (std::size_t i = 0; i < pts.x.size(); ++i)
    r[static_cast<Eigen::Index>(i)] = fit_model_eval(m, p, pts.x[i]) - pts.y[i];
  return r;
}

// Least squares for y ~ basis * coeffs.
Eigen::VectorXd linear_lsq(const Eigen::MatrixXd& basis, const Eigen::VectorXd& y) {
  return basis.colPivHouseholderQr().solve(y);
}

}  // namespace

std::vector<double> default_initial_guess(FitModel m, std::span<const double> x,
                                          std::span<const double> y,
                                          std::span<const std::uint8_t> exclude) {
  const Points pts = select_points(x, y, exclude);
  const auto n = static_cast<Eigen::Index>(pts.x.size());
  const Eigen::Map<const Eigen::VectorXd> yv(pts.y.data(), n);
  if (m == FitModel::LoglinearLength) return {n ? yv.mean() : 0.0, 0.0};

  std::vector<double> best;
  double best_cost = std::numeric_limits<double>::infinity();
  const int grid = 121;
  for (int k = 0; k < grid; ++k) {
    // Nonlinear exponent on a log grid over [1e-3, 10].
    const double e = std::pow(10.0, -3.0 + 4.0 * k / (grid - 1));
    std::vector<double> p;
    if (m == FitModel::LogisticSuccess) {
      // y - q = a (1 - q) with q = 1 / (1 + x^b).
      Eigen::MatrixXd basis(n, 1);
      Eigen::VectorXd rhs(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double q = 1.0 / (1.0 + std::pow(pts.x[static_cast<std::size_t>(i)], e));
        basis(i, 0) = 1.0 - q;
        rhs[i] = yv[i] - q;
      }
      p = {linear_lsq(basis, rhs)[0], e};
    } else {
      Eigen::MatrixXd basis(n, 2);
      for (Eigen::Index i = 0; i < n; ++i) {
        basis(i, 0) = 1.0;
        basis(i, 1) = std::pow(pts.x[static_cast<std::size_t>(i)], -e);
      }
      const Eigen::VectorXd c = linear_lsq(basis, yv);
      p = {c[0], c[1], e};
    }
    const double cost = sum_sq(residuals(m, p, pts));
    if (std::isfinite(cost) && cost < best_cost) {
      best_cost = cost;
      best = p;
    }
  }
  if (best.empty()) best.assign(static_cast<std::size_t>(fit_model_num_params(m)), 0.5);
  return best;
}

FitResult lm_fit(FitModel m, std::span<const double> x, std::span<const double> y,
                 std::span<const std::uint8_t> exclude,
                 std::optional<std::vector<double>> initial, const LmOptions& options) {
  const Points pts = select_points(x, y, exclude);
  const int np = fit_model_num_params(m);
  if (static_cast<int>(pts.x.size()) < np)
    throw std::invalid_argument("lm_fit: " + to_string(m) + " needs at least " +
                                std::to_string(np) + " points");
  FitResult res;
  res.model = m;
  res.points_used = static_cast<int>(pts.x.size());
  res.params = initial ? *initial : default_initial_guess(m, x, y, exclude);
  if (static_cast<int>(res.params.size()) != np)
    throw std::invalid_argument("lm_fit: initial guess has the wrong number of parameters");

  const auto n = static_cast<Eigen::Index>(pts.x.size());
  Eigen::VectorXd r = residuals(m, res.params, pts);
  double cost = sum_sq(r);
  double mu = 0.0;  // first attempt is a plain Gauss-Newton step

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Eigen::MatrixXd J(n, np);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto g = fit_model_jacobian(m, res.params, pts.x[static_cast<std::size_t>(i)]);
      for (int j = 0; j < np; ++j) J(i, j) = g[static_cast<std::size_t>(j)];
    }
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd grad = J.transpose() * r;
    if (grad.norm() < options.gradient_tol) {
      res.converged = true;
      break;
    }

    bool accepted = false;
    Eigen::VectorXd step;
    while (!accepted) {
      const Eigen::MatrixXd damped = A + mu * Eigen::MatrixXd::Identity(np, np);
      step = damped.ldlt().solve(-grad);
      std::vector<double> trial(res.params);
      for (int j = 0; j < np; ++j) trial[static_cast<std::size_t>(j)] += step[j];
      const Eigen::VectorXd r_new = residuals(m, trial, pts);
      const double c_new = sum_sq(r_new);
      if (step.allFinite() && std::isfinite(c_new) && c_new < cost) {
        res.params = std::move(trial);
        r = r_new;
        cost = c_new;
        mu /= 10.0;
        accepted = true;
      } else {
        mu = std::max(10.0 * mu, 1e-3 * A.diagonal().maxCoeff());
        if (!(mu < 1e30)) break;
      }
    }
    if (!accepted) {
      // No step lowers the cost at working precision: a minimum for all
      // practical purposes, even if the absolute gradient test never fired.
      res.converged = true;
      break;
    }
    res.iterations = iter + 1;
    const Eigen::Map<const Eigen::VectorXd> p(res.params.data(), np);
    if (step.norm() < options.step_tol * (p.norm() + options.step_tol)) {
      res.converged = true;
      break;
    }
  }
  res.residual_norm = std::sqrt(cost);
  return res;
}

std::string fit_result_csv(std::span<const FitResult> fits) {
  std::ostringstream os;
  os << "model,a,b,c,residual_norm,iterations,converged,points\n";
  for (const FitResult& f : fits) {
    os << to_string(f.model);
    for (int j = 0; j < 3; ++j) {
      os << ',';
      if (j < static_cast<int>(f.params.size())) os << format_double(f.params[static_cast<std::size_t>(j)]);
    }
    os << ',' << format_double(f.residual_norm) << ',' << f.iterations << ','
       << (f.converged ? 1 : 0) << ',' << f.points_used << '\n';
  }
  return os.str();
}

std::string fit_curve_csv(const FitResult& fit, double x_min, double x_max, int samples) {
  if (!(x_min > 0.0 && x_max >= x_min) || samples < 2)
    throw std::invalid_argument("fit_curve_csv: need 0 < x_min <= x_max and samples >= 2");
  std::ostringstream os;
  os << "lambda,value\n";
  const double l0 = std::log10(x_min), l1 = std::log10(x_max);
  for (int k = 0; k < samples; ++k) {
    const double x = std::pow(10.0, l0 + (l1 - l0) * k / (samples - 1));
    os << format_double(x) << ',' << format_double(fit_model_eval(fit.model, fit.params, x))
       << '\n';
  }
  return os.str();
}

void emit_sweep_plots(const std::filesystem::path& dir, std::span<const EvalReport> reports,
                      double step_size) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "sweep.csv", eval_report_csv(reports));
  for (std::size_t i = 0; i < reports.size(); ++i)
    write_file_atomic(dir / ("episodes_" + std::to_string(i) + ".csv"),
                      episodes_csv(reports[i], step_size));
}

void emit_trajectory_plots(const std::filesystem::path& dir, const Scenario& scenario,
                           const std::vector<TraceRow>& trace) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "trajectory.csv", trace_csv(trace));
  const Path path = scenario.path();
  std::ostringstream ps;
  ps << "s,x,y\n";
  const int samples = std::max(2, static_cast<int>(std::ceil(path.length())) + 1);
  for (int k = 0; k < samples; ++k) {
    const double s = path.length() * k / (samples - 1);
    const Vec2 p = path.point(s);
    ps << format_double(s) << ',' << format_double(p.x()) << ',' << format_double(p.y()) << '\n';
  }
  write_file_atomic(dir / "path.csv", ps.str());
  std::ostringstream os;
  os << "x,y,radius\n";
  for (const Obstacle& o : scenario.obstacles)
    os << format_double(o.center.x()) << ',' << format_double(o.center.y()) << ','
       << format_double(o.radius) << '\n';
  write_file_atomic(dir / "obstacles.csv", os.str());
}

}  // namespace asv
