#pragma once

// Stochastic ensemble machine: an ensemble of classical probabilistic copies
// whose joint configuration (a "state collection") evolves under a possibly
// history-dependent kernel. Readouts see only symbol frequencies across the
// copies. Everything here is exact enumeration.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "readout/entropy.hpp"
#include "readout/prob_table.hpp"

namespace readout::senm {

using entropy::GrandJoint;
using entropy::ReadoutStats;

inline constexpr std::size_t kDefaultTrajectoryCap = 1'000'000;
// Enumerated ensembles larger than this must be given as labelled
// collections instead.
inline constexpr std::size_t kEnumeratedCollectionCap = 4096;
inline constexpr double kKernelTolerance = 1e-12;

class EnsembleSpec {
 public:
  // Collections are all tuples of copy states, indexed with copy 0 as the most
  // significant digit.
  static EnsembleSpec enumerated(std::size_t num_copies, std::size_t num_states,
                                 std::size_t num_symbols, std::vector<std::size_t> readout_map,
                                 std::vector<double> initial_dist);
  // Collections are opaque labels carrying their own readout distribution
  // (the large-ensemble limit of the copy frequencies).
  static EnsembleSpec labelled(std::size_t num_symbols,
                               std::vector<std::vector<double>> collection_readouts,
                               std::vector<double> initial_dist);

  bool is_enumerated() const { return enumerated_; }
  std::size_t num_copies() const { return num_copies_; }
  std::size_t num_states() const { return num_states_; }
  std::size_t num_symbols() const { return num_symbols_; }
  std::size_t num_collections() const { return readouts_.size(); }
  const std::vector<std::size_t>& readout_map() const { return readout_map_; }
  const std::vector<double>& initial_dist() const { return initial_dist_; }

  // Copy states of an enumerated collection.
  std::vector<std::size_t> copy_states(std::size_t collection) const;
  const std::vector<double>& readout(std::size_t collection) const;

 private:
  EnsembleSpec() = default;

  bool enumerated_ = true;
  std::size_t num_copies_ = 0;
  std::size_t num_states_ = 0;
  std::size_t num_symbols_ = 0;
  std::vector<std::size_t> readout_map_;
  std::vector<double> initial_dist_;
  std::vector<std::vector<double>> readouts_;
};

// C(s_j | s_{j-1}, ..., s_0). Histories are passed most recent first. An
// order-d kernel conditions on the last min(j, d) collections; order
// kFullHistory conditions on the entire past. A step-dependent kernel keeps
// separate tables per step j (the step that is being produced).
class TransitionKernel {
 public:
  static constexpr std::size_t kFullHistory = 0;

  explicit TransitionKernel(std::size_t order, bool step_dependent = false);

  std::size_t order() const { return order_; }
  bool step_dependent() const { return step_dependent_; }
  bool full_history() const { return order_ == kFullHistory; }
  // Number of past collections consulted when producing step j.
  std::size_t history_length(std::size_t step) const;

  // `step` is required for step-dependent kernels and ignored otherwise.
  void set(std::vector<std::size_t> history, std::vector<double> next,
           std::optional<std::size_t> step = std::nullopt);

  // Throws IncompleteKernelError if no table exists for this history.
  const std::vector<double>& next(std::size_t step, std::span<const std::size_t> history) const;

  struct Entry {
    std::optional<std::size_t> step;
    std::vector<std::size_t> history;
    std::vector<double> next;
  };
  std::vector<Entry> entries() const;

 private:
  std::vector<std::size_t> key(std::size_t step, std::span<const std::size_t> history) const;

  std::size_t order_;
  bool step_dependent_;
  std::map<std::vector<std::size_t>, std::vector<double>> tables_;
};

// Dense distribution over collection trajectories (s_0, ..., s_L), s_0 most
// significant.
struct TrajectoryDistribution {
  std::size_t steps = 0;
  std::size_t num_collections = 0;
  std::vector<double> probs;

  std::vector<std::size_t> decode(std::size_t index) const;
  // P(s_j) for each step.
  std::vector<std::vector<double>> step_marginals() const;
};

// Product C(s_L|...) ... C(s_1|s_0) P(s_0) for every trajectory. Throws
// TractabilityError when num_collections^(L+1) exceeds `cap` and
// IncompleteKernelError when a reachable history has no table.
TrajectoryDistribution joint_state_distribution(const EnsembleSpec& spec,
                                                const TransitionKernel& kernel, std::size_t steps,
                                                std::size_t cap = kDefaultTrajectoryCap);

// Per-step collection marginals by propagating a distribution over histories
// forward, independent of the trajectory enumeration.
std::vector<std::vector<double>> forward_marginals(const EnsembleSpec& spec,
                                                   const TransitionKernel& kernel,
                                                   std::size_t steps);

// Symbol frequencies across the copies of a collection.
std::vector<double> readout_distribution(const EnsembleSpec& spec, std::size_t collection);
std::vector<double> readout_distribution(const EnsembleSpec& spec,
                                         std::span<const std::size_t> copy_states);

GrandJoint grand_joint(const EnsembleSpec& spec, const TransitionKernel& kernel, std::size_t steps,
                       std::size_t cap = kDefaultTrajectoryCap);

// Every pairwise joint and marginal of the grand joint; conditionals on
// zero-probability symbols come back undefined from ReadoutStats.
ReadoutStats conditional_readouts(const GrandJoint& grand);

// Spec + kernel + step count, as loaded from a spec file or generated.
struct SenmModel {
  EnsembleSpec spec;
  TransitionKernel kernel;
  std::size_t steps;
};

struct RandomSpecOptions {
  std::size_t max_copies = 2;
  std::size_t max_states = 3;
  std::size_t max_symbols = 3;
  std::size_t max_steps = 4;
  std::size_t max_labelled_collections = 4;
  // Upper bound on num_collections^(L+1) for generated models.
  std::size_t trajectory_budget = 4096;
  double labelled_probability = 0.3;
  // Chance that a kernel entry is forced to zero.
  double sparsity = 0.2;
};

// Random model mixing Markov, order-2 and full-history kernels, enumerated and
// labelled collections, and step-dependent tables.
SenmModel random_model(std::mt19937_64& rng, const RandomSpecOptions& options = {});

struct SenmCheck {
  entropy::ViolationReport report;
  std::size_t trajectories = 0;
};

SenmCheck check_model(const SenmModel& model, std::size_t cap = kDefaultTrajectoryCap);

// Quantum (or any) per-step conditionals an ensemble should reproduce.
struct ImitationTarget {
  std::vector<ProbTable> step_conditionals;   // P(m_j | m_{j-1}), j = 1..L
  ProbTable end_to_end;                       // P(m_L | m_0) to compare against
  std::vector<double> initial_marginal;       // P(m_0)
  std::optional<std::vector<double>> final_marginal;  // P(m_L), if known
};

struct ImitationResult {
  SenmModel model;
  ReadoutStats classical_stats;
  double max_step_error = 0.0;
  ProbTable classical_end_to_end;
  ProbTable target_end_to_end;
  double end_to_end_gap = 0.0;   // max entrywise |classical - target|
  std::vector<double> classical_final_marginal;
  std::optional<double> final_marginal_gap;
  entropy::ViolationReport classical_report;
};

// Builds the Markov ensemble whose kernel is the target step matrices and
// reports how far its composed end-to-end conditional lands from the target.
ImitationResult fit_imitation(const ImitationTarget& target);

}  // namespace readout::senm
