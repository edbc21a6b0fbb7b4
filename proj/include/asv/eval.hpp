#pragma once

// Evaluation: lambda sweeps with a deterministic policy, the four built-in
// qualitative scenarios, Levenberg-Marquardt trend fits and plot-data files.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asv/env.hpp"
#include "asv/policy.hpp"
#include "asv/scenario.hpp"

namespace asv {

struct EpisodeRecord {
  std::uint64_t seed = 0;
  Termination reason = Termination::None;
  int steps = 0;
  double sum_abs_cross_track = 0.0;  // m, summed over steps
  double total_reward = 0.0;
};

struct EvalReport {
  double lambda = 1.0;
  int episodes = 0;
  double success_rate = 0.0;
  double avg_cross_track_error = 0.0;          // m, over all steps of all episodes
  double avg_cross_track_error_success = 0.0;  // m, successful episodes only (NaN if none)
  double avg_episode_length = 0.0;             // s
  double success_ci_low = 0.0;                 // 95% Wilson interval
  double success_ci_high = 0.0;
  std::vector<EpisodeRecord> records;
};

std::pair<double, double> wilson_interval(int successes, int trials, double z = 1.959963984540054);

// Restarts the environment's current scenario at its current lambda and runs
// the mean action until termination.
EpisodeRecord run_episode(const PolicyValueNet& net, PathFollowingEnv& env);

// `episodes` randomized scenarios from the configured generator, lambda
// pinned. Episode i always uses the same scenario for a given seed,
// independent of `threads`.
EvalReport run_eval(const PolicyValueNet& net, const EnvConfig& config, double lambda,
                    int episodes, std::uint64_t seed, int threads = 0);

EvalReport summarize(double lambda, std::vector<EpisodeRecord> records, double step_size);

std::string eval_report_csv_header();
std::string eval_report_csv(std::span<const EvalReport> reports);
std::string episodes_csv(const EvalReport& report, double step_size);

struct SweepPoint {
  double lambda;
  double success_rate;
  double avg_cte_m;
  double avg_len_s;
};
std::vector<SweepPoint> parse_eval_report_csv(const std::string& text,
                                              const std::string& source = "<memory>");

// Built-in qualitative scenarios, frozen for a given version tag.
inline constexpr int kBuiltinScenarioVersion = 1;

struct NamedScenario {
  std::string name;
  Scenario scenario;
};
// A: obstacle on the path; B: obstacle cluster off the path; C: wall across the
// path with one gap; D: dead-end pocket around the path.
std::vector<NamedScenario> builtin_scenarios();
std::optional<Scenario> find_builtin_scenario(const std::string& name);

// Trend models fitted against lambda.
enum class FitModel { LogisticSuccess, PowerCte, LoglinearLength };
std::string to_string(FitModel m);
FitModel parse_fit_model(const std::string& s);
int fit_model_num_params(FitModel m);
// logistic-success: a + (1 - a) / (1 + x^b)
// power-cte:        a + b * x^(-c)
// loglinear-length: a - b * log10(x)
double fit_model_eval(FitModel m, std::span<const double> p, double x);
// Gradient of the model value with respect to the parameters.
std::vector<double> fit_model_jacobian(FitModel m, std::span<const double> p, double x);

struct FitResult {
  FitModel model = FitModel::LogisticSuccess;
  std::vector<double> params;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  int points_used = 0;
};

struct LmOptions {
  int max_iterations = 500;
  double gradient_tol = 1e-8;
  double step_tol = 1e-10;
};

// Starting point: a coarse grid over the nonlinear parameter with the linear
// ones solved exactly; loglinear starts from (mean y, 0).
std::vector<double> default_initial_guess(FitModel m, std::span<const double> x,
                                          std::span<const double> y,
                                          std::span<const std::uint8_t> exclude = {});

// Levenberg-Marquardt. exclude[i] != 0 drops point i.
FitResult lm_fit(FitModel m, std::span<const double> x, std::span<const double> y,
                 std::span<const std::uint8_t> exclude = {},
                 std::optional<std::vector<double>> initial = std::nullopt,
                 const LmOptions& options = {});

std::string fit_result_csv(std::span<const FitResult> fits);
// Fitted curve sampled on `samples` log-spaced points over [x_min, x_max].
std::string fit_curve_csv(const FitResult& fit, double x_min, double x_max, int samples = 121);

// Plot-data files for a sweep: sweep.csv and one episodes_<i>.csv per report.
void emit_sweep_plots(const std::filesystem::path& dir, std::span<const EvalReport> reports,
                      double step_size);
// Plot-data files for one trajectory: trajectory.csv, path.csv, obstacles.csv.
void emit_trajectory_plots(const std::filesystem::path& dir, const Scenario& scenario,
                           const std::vector<TraceRow>& trace);

}  // namespace asv
