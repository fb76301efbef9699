#pragma once

// Finite-shot reproduction of the inequality test on amplitude amplification:
// each step's statistics come from fresh preparations measured `shots` times,
// and D is estimated per trial from the empirical tables.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "readout/entropy.hpp"
#include "readout/qaa.hpp"
#include "readout/senm.hpp"

namespace readout::mc {

using entropy::ExperimentPlan;
using entropy::ReadoutStats;
using qaa::QaaParams;

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultShots = 10'000;
inline constexpr std::size_t kDefaultTrials = 1'000;

// Seed of the independent stream `stream` derived from a base seed.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream);

// Exact outcome probabilities behind every measurement of a plan.
struct ReadoutModel {
  std::size_t steps = 0;
  ProbTable step_matrix;                     // P(m_j | m_{j-1}) for n_d/L iterations
  ProbTable end_to_end;                      // P(m_L | m_0) for n_d iterations
  std::vector<std::vector<double>> marginals;  // P(m_j) from psi_0, j = 0..L
};

ReadoutModel readout_model(const QaaParams& params, const ExperimentPlan& plan);

// Stats a measurement with infinitely many shots would give. Joints are
// P(m_{j-1}) P(m_j | m_{j-1}), so they need not be marginals of any single
// distribution over sequences.
ReadoutStats exact_readout_stats(const ReadoutModel& model);
ReadoutStats exact_readout_stats(const QaaParams& params, const ExperimentPlan& plan);

// Step matrices, end-to-end conditional and marginals a classical ensemble
// would need to reproduce.
senm::ImitationTarget imitation_target(const QaaParams& params, const ExperimentPlan& plan);

// One finite-shot pass: empirical conditionals per step and conditioning
// symbol, empirical marginals from fresh evolutions of psi_0. For L = 1 the
// step-1 table doubles as the (0, L) table.
ReadoutStats sample_conditionals(const ReadoutModel& model, std::uint64_t shots, Rng& rng);
ReadoutStats sample_conditionals(const QaaParams& params, const ExperimentPlan& plan,
                                 std::uint64_t shots, Rng& rng);

struct McConfig {
  QaaParams params;
  ExperimentPlan plan;
  std::uint64_t shots_per_step = kDefaultShots;
  std::size_t trials = kDefaultTrials;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct McResult {
  double d_mean = 0.0;
  double d_std = 0.0;     // sample standard deviation across trials
  double d_stderr = 0.0;  // d_std / sqrt(trials)
  std::vector<double> per_trial_d;
  double theory_d = 0.0;  // closed form for the plan
  double exact_d = 0.0;   // infinite-shot value from the same model

  // |d_mean - theory_d| <= k * d_std
  bool within_sigma(double k) const;
};

McResult estimate_d(const McConfig& config);

// Nearest plan with L | n_d to (beta, alpha): n_d = CI(n_c^beta), then the
// divisor of n_d closest to n_c^alpha on a log scale.
ExperimentPlan snap_to_plan(double beta, double alpha, std::int64_t n_c,
                            std::optional<int> gamma = std::nullopt);

enum class LandscapeMode { kExact, kSampled };

struct LandscapeOptions {
  QaaParams params;
  std::optional<int> gamma;
  std::size_t resolution = 20;
  LandscapeMode mode = LandscapeMode::kExact;
  std::uint64_t shots_per_step = kDefaultShots;
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct LandscapeCell {
  double beta = 0.0;
  double alpha = 0.0;
  std::int64_t steps = 0;
  std::int64_t n_d = 0;
  double d = 0.0;
  double d_std = 0.0;  // 0 in exact mode
};

struct Landscape {
  std::int64_t n_c = 0;
  LandscapeMode mode = LandscapeMode::kExact;
  std::vector<LandscapeCell> cells;   // grid over 0 <= alpha <= beta <= 1
  std::vector<LandscapeCell> slices;  // L in {2, 3, 4, CI(pi/(4 theta))}, n_d sweeping multiples of L

  const LandscapeCell& minimum() const;
};

Landscape landscape_scan(const LandscapeOptions& options);
Landscape landscape_scan(int gamma, std::size_t resolution, LandscapeMode mode);

}  // namespace readout::mc
