#include "readout/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "readout/errors.hpp"

namespace readout::mc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Empirical two-outcome distribution from `shots` measurements.
std::vector<double> sample_binary(double p_target, std::uint64_t shots, Rng& rng) {
  const double p = std::clamp(p_target, 0.0, 1.0);
  std::binomial_distribution<std::uint64_t> draw(shots, p);
  const std::uint64_t hits = draw(rng);
  const double f = static_cast<double>(hits) / static_cast<double>(shots);
  return {f, static_cast<double>(shots - hits) / static_cast<double>(shots)};
}

ProbTable sample_rows(const ProbTable& exact, std::uint64_t shots, Rng& rng) {
  ProbTable out(2, 2);
  for (std::size_t a = 0; a < 2; ++a) {
    const auto row = sample_binary(exact.at(a, qaa::kTarget), shots, rng);
    out.at(a, qaa::kTarget) = row[0];
    out.at(a, qaa::kRest) = row[1];
  }
  return out;
}

unsigned resolve_threads(unsigned requested, std::size_t work) {
  unsigned n = requested != 0 ? requested : std::max(1U, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(1, work)));
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

ReadoutModel readout_model(const QaaParams& params, const ExperimentPlan& plan) {
  const qaa::Unitary2 g = qaa::grover_full_matrix(params);
  const auto k = static_cast<std::uint64_t>(plan.step_power());
  ReadoutModel model;
  model.steps = static_cast<std::size_t>(plan.steps());
  model.step_matrix = qaa::transition_probabilities(qaa::matrix_power(g, k));
  model.end_to_end = qaa::transition_probabilities(qaa::matrix_power(g, static_cast<std::uint64_t>(plan.n_d())));
  const qaa::TwoLevelState psi0 = qaa::initial_state(params);
  model.marginals.reserve(model.steps + 1);
  for (std::size_t j = 0; j <= model.steps; ++j) {
    const auto psi = qaa::apply_power(psi0, g, k * j);
    model.marginals.push_back({psi.probability(qaa::kTarget), psi.probability(qaa::kRest)});
  }
  return model;
}

ReadoutStats exact_readout_stats(const ReadoutModel& model) {
  ReadoutStats stats(model.steps, 2);
  stats.set_marginal(0, model.marginals[0]);
  for (std::size_t j = 1; j <= model.steps; ++j) {
    stats.set_marginal(j, model.marginals[j]);
    stats.set_joint(j - 1, j, joint_from_conditional(model.marginals[j - 1], model.step_matrix));
  }
  if (model.steps > 1) {
    stats.set_joint(0, model.steps, joint_from_conditional(model.marginals[0], model.end_to_end));
  }
  return stats;
}

ReadoutStats exact_readout_stats(const QaaParams& params, const ExperimentPlan& plan) {
  return exact_readout_stats(readout_model(params, plan));
}

senm::ImitationTarget imitation_target(const QaaParams& params, const ExperimentPlan& plan) {
  const ReadoutModel model = readout_model(params, plan);
  senm::ImitationTarget target;
  target.step_conditionals.assign(model.steps, model.step_matrix);
  target.end_to_end = model.end_to_end;
  target.initial_marginal = model.marginals.front();
  target.final_marginal = model.marginals.back();
  return target;
}

ReadoutStats sample_conditionals(const ReadoutModel& model, std::uint64_t shots, Rng& rng) {
  if (shots == 0) throw ConfigError("shots per step must be positive");
  ReadoutStats stats(model.steps, 2);
  std::vector<double> previous = sample_binary(model.marginals[0][qaa::kTarget], shots, rng);
  stats.set_marginal(0, previous);
  for (std::size_t j = 1; j <= model.steps; ++j) {
    const ProbTable conditional = sample_rows(model.step_matrix, shots, rng);
    stats.set_joint(j - 1, j, joint_from_conditional(previous, conditional));
    if (j < model.steps) {
      previous = sample_binary(model.marginals[j][qaa::kTarget], shots, rng);
      stats.set_marginal(j, previous);
    }
  }
  if (model.steps > 1) {
    const ProbTable conditional = sample_rows(model.end_to_end, shots, rng);
    stats.set_joint(0, model.steps, joint_from_conditional(stats.marginal(0), conditional));
  }
  return stats;
}

ReadoutStats sample_conditionals(const QaaParams& params, const ExperimentPlan& plan,
                                 std::uint64_t shots, Rng& rng) {
  return sample_conditionals(readout_model(params, plan), shots, rng);
}

bool McResult::within_sigma(double k) const {
  return std::abs(d_mean - theory_d) <= k * d_std;
}

McResult estimate_d(const McConfig& config) {
  if (config.trials == 0) throw ConfigError("trials must be positive");
  if (config.shots_per_step == 0) throw ConfigError("shots per step must be positive");
  const ReadoutModel model = readout_model(config.params, config.plan);

  McResult result;
  result.per_trial_d.assign(config.trials, 0.0);
  const unsigned workers = resolve_threads(config.threads, config.trials);
  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      Rng rng(substream_seed(config.seed, t));
      const auto stats = sample_conditionals(model, config.shots_per_step, rng);
      result.per_trial_d[t] = entropy::evaluate_inequality(stats).d_value;
    }
  };
  if (workers == 1) {
    run_range(0, config.trials);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (config.trials + workers - 1) / workers;
    for (std::size_t begin = 0; begin < config.trials; begin += chunk) {
      pool.emplace_back(run_range, begin, std::min(config.trials, begin + chunk));
    }
  }

  // Reduction in trial order so the result does not depend on the thread count.
  double sum = 0.0;
  for (double d : result.per_trial_d) sum += d;
  const auto n = static_cast<double>(config.trials);
  result.d_mean = sum / n;
  if (config.trials > 1) {
    double ss = 0.0;
    for (double d : result.per_trial_d) ss += (d - result.d_mean) * (d - result.d_mean);
    result.d_std = std::sqrt(ss / (n - 1.0));
  }
  result.d_stderr = result.d_std / std::sqrt(n);
  result.theory_d = entropy::closed_form_d(config.params.theta(), config.plan);
  result.exact_d = entropy::evaluate_inequality(exact_readout_stats(model)).d_value;
  return result;
}

// ---------------------------------------------------------------------------
// Landscape

ExperimentPlan snap_to_plan(double beta, double alpha, std::int64_t n_c, std::optional<int> gamma) {
  if (n_c < 1) throw PlanError("n_c must be positive");
  if (!(alpha >= 0.0 && alpha <= beta && beta <= 1.0)) {
    throw PlanError("grid point must satisfy 0 <= alpha <= beta <= 1");
  }
  const double nc = static_cast<double>(n_c);
  const std::int64_t n_d =
      std::clamp<std::int64_t>(static_cast<std::int64_t>(std::round(std::pow(nc, beta))), 1, n_c);
  const double wanted = std::log(std::pow(nc, alpha));
  std::int64_t best = 1;
  double best_dist = std::abs(wanted);
  for (std::int64_t l = 2; l <= n_d; ++l) {
    if (n_d % l != 0) continue;
    const double dist = std::abs(std::log(static_cast<double>(l)) - wanted);
    if (dist < best_dist) {
      best = l;
      best_dist = dist;
    }
  }
  return ExperimentPlan::make(best, n_d, n_c, gamma);
}

const LandscapeCell& Landscape::minimum() const {
  if (cells.empty()) throw PlanError("landscape has no cells");
  return *std::min_element(cells.begin(), cells.end(),
                           [](const auto& a, const auto& b) { return a.d < b.d; });
}

namespace {

LandscapeCell evaluate_cell(const LandscapeOptions& options, const ExperimentPlan& plan,
                            double beta, double alpha, std::uint64_t stream) {
  LandscapeCell cell{beta, alpha, plan.steps(), plan.n_d(), 0.0, 0.0};
  if (options.mode == LandscapeMode::kExact) {
    cell.d = options.params.phase_matched()
                 ? entropy::closed_form_d(options.params.theta(), plan)
                 : entropy::evaluate_inequality(exact_readout_stats(options.params, plan)).d_value;
    return cell;
  }
  McConfig config{options.params, plan, options.shots_per_step, options.trials,
                  substream_seed(options.seed, stream), 1};
  const McResult r = estimate_d(config);
  cell.d = r.d_mean;
  cell.d_std = r.d_std;
  return cell;
}

}  // namespace

Landscape landscape_scan(const LandscapeOptions& options) {
  if (options.resolution == 0) throw PlanError("landscape resolution must be positive");
  const std::int64_t n_c = options.params.n_c();
  if (n_c < 1) throw PlanError("landscape needs a non-degenerate problem (n_c >= 1)");

  struct Job {
    double beta;
    double alpha;
    ExperimentPlan plan;
    bool slice;
  };
  std::vector<Job> jobs;
  const auto res = static_cast<double>(options.resolution);
  for (std::size_t b = 0; b <= options.resolution; ++b) {
    for (std::size_t a = 0; a <= b; ++a) {
      const double beta = static_cast<double>(b) / res;
      const double alpha = static_cast<double>(a) / res;
      jobs.push_back({beta, alpha, snap_to_plan(beta, alpha, n_c, options.gamma), false});
    }
  }
  if (jobs.empty()) throw PlanError("landscape grid has no feasible cells");

  std::vector<std::int64_t> slice_steps = {2, 3, 4};
  const double theta = options.params.theta();
  if (theta > 0.0 && theta < std::numbers::pi / 4.0) {
    slice_steps.push_back(qaa::closest_integer(std::numbers::pi / (4.0 * theta)));
  }
  std::sort(slice_steps.begin(), slice_steps.end());
  slice_steps.erase(std::unique(slice_steps.begin(), slice_steps.end()), slice_steps.end());
  for (std::int64_t l : slice_steps) {
    for (std::int64_t n_d = l; n_d <= n_c; n_d += l) {
      const auto plan = ExperimentPlan::make(l, n_d, n_c, options.gamma);
      jobs.push_back({plan.beta(), plan.alpha(), plan, true});
    }
  }

  std::vector<LandscapeCell> evaluated(jobs.size());
  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      evaluated[i] = evaluate_cell(options, jobs[i].plan, jobs[i].beta, jobs[i].alpha, i);
    }
  };
  const unsigned workers =
      options.mode == LandscapeMode::kExact ? 1 : resolve_threads(options.threads, jobs.size());
  if (workers == 1) {
    run_range(0, jobs.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (jobs.size() + workers - 1) / workers;
    for (std::size_t begin = 0; begin < jobs.size(); begin += chunk) {
      pool.emplace_back(run_range, begin, std::min(jobs.size(), begin + chunk));
    }
  }

  Landscape out;
  out.n_c = n_c;
  out.mode = options.mode;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    (jobs[i].slice ? out.slices : out.cells).push_back(evaluated[i]);
  }
  return out;
}

Landscape landscape_scan(int gamma, std::size_t resolution, LandscapeMode mode) {
  LandscapeOptions options{QaaParams::from_gamma(gamma), gamma, resolution, mode};
  return landscape_scan(options);
}

}  // namespace readout::mc
