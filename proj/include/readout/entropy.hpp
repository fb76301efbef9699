#pragma once

// Shannon-entropy side of the readout inequality
//   H(M_L | M_0) <= sum_{j=1..L} H(M_j | M_{j-1})
// All entropies are in bits and use 0 log 0 = 0.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "readout/prob_table.hpp"

namespace readout::entropy {

inline constexpr double kDistributionTolerance = 1e-9;
inline constexpr double kViolationThreshold = 1e-9;

// Binary entropy of sin^2(x).
double h(double x);

// Shannon entropy of a distribution.
double shannon(std::span<const double> p);

// Throws InvalidDistributionError unless entries are non-negative and sum to
// one within kDistributionTolerance. `what` names the offender in the message.
void validate_distribution(std::span<const double> p, const char* what);

// H(B | A) = -sum P(a, b) log2 P(b | a) for a joint table with rows a.
double conditional_entropy(const ProbTable& joint);

// Structure of a cut experiment: L steps of n_d / L iterations each, out of a
// critical count n_c. Invariants: 1 <= L <= n_d <= n_c and L | n_d.
class ExperimentPlan {
 public:
  // Throws PlanError with an actionable message when an invariant fails.
  static ExperimentPlan make(std::int64_t steps, std::int64_t n_d, std::int64_t n_c,
                             std::optional<int> gamma = std::nullopt);
  // L = n_d = CI(pi / (4 theta)), the largest violation.
  static ExperimentPlan max_violation(double theta, std::int64_t n_c,
                                      std::optional<int> gamma = std::nullopt);

  std::int64_t steps() const { return steps_; }
  std::int64_t n_d() const { return n_d_; }
  std::int64_t n_c() const { return n_c_; }
  std::int64_t step_power() const { return n_d_ / steps_; }
  // log_{n_c} L and log_{n_c} n_d; both 0 when n_c == 1.
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  std::optional<int> gamma() const { return gamma_; }

  bool operator==(const ExperimentPlan&) const = default;

 private:
  ExperimentPlan(std::int64_t steps, std::int64_t n_d, std::int64_t n_c, std::optional<int> gamma);

  std::int64_t steps_;
  std::int64_t n_d_;
  std::int64_t n_c_;
  double alpha_;
  double beta_;
  std::optional<int> gamma_;
};

// Joint/marginal readout tables over steps 0..L. Only the pairs that were
// supplied are present; evaluate_inequality needs (j-1, j) for every j and
// (0, L).
class ReadoutStats {
 public:
  ReadoutStats(std::size_t steps, std::size_t num_symbols);

  std::size_t steps() const { return steps_; }
  std::size_t num_symbols() const { return num_symbols_; }

  // Validated on insert: non-negative, unit mass within 1e-9, and consistent
  // with the conditioning-side marginal where both are known.
  void set_marginal(std::size_t step, std::vector<double> dist);
  void set_joint(std::size_t from, std::size_t to, ProbTable joint);

  bool has_marginal(std::size_t step) const;
  bool has_joint(std::size_t from, std::size_t to) const;
  // Throw IncompleteStatsError when absent.
  const std::vector<double>& marginal(std::size_t step) const;
  const ProbTable& joint(std::size_t from, std::size_t to) const;

  // P(m_to = b | m_from = a); nullopt when P(m_from = a) == 0.
  std::optional<double> conditional(std::size_t from, std::size_t to, std::size_t a,
                                    std::size_t b) const;

  const std::map<std::pair<std::size_t, std::size_t>, ProbTable>& joints() const { return joints_; }

 private:
  void check_step(std::size_t step) const;
  void check_consistency(std::size_t from, const ProbTable& joint) const;

  std::size_t steps_;
  std::size_t num_symbols_;
  std::vector<std::optional<std::vector<double>>> marginals_;
  std::map<std::pair<std::size_t, std::size_t>, ProbTable> joints_;
};

struct ViolationReport {
  std::optional<ExperimentPlan> plan;
  std::size_t steps = 0;
  double lhs = 0.0;     // H(M_L | M_0)
  double rhs = 0.0;     // sum_j H(M_j | M_{j-1})
  double d_value = 0.0; // rhs - lhs
  bool violated = false;
  std::vector<double> step_entropies;  // H(M_j | M_{j-1}), j = 1..L
};

// Throws IncompleteStatsError if a required pair is missing.
ViolationReport evaluate_inequality(const ReadoutStats& stats,
                                    std::optional<ExperimentPlan> plan = std::nullopt);

// D = L h((n_d / L) theta) - h(n_d theta), valid for phase-matched rotations.
double closed_form_d(double theta, const ExperimentPlan& plan);
double closed_form_d(double theta, std::int64_t steps, std::int64_t n_d);

// CI(pi/(4 theta)) h(theta) - h(CI(pi/(4 theta)) theta); theta in (0, pi/4).
double d_min_theoretical(double theta);

// Distribution over readout sequences (m_0, ..., m_L), stored densely with
// m_0 as the most significant digit.
class GrandJoint {
 public:
  // Validates non-negativity and unit mass within 1e-9.
  GrandJoint(std::size_t steps, std::size_t num_symbols, std::vector<double> probs);

  std::size_t steps() const { return steps_; }
  std::size_t num_symbols() const { return num_symbols_; }
  std::size_t num_sequences() const { return probs_.size(); }
  std::span<const double> probs() const { return probs_; }

  double probability(std::span<const std::size_t> sequence) const;
  std::vector<std::size_t> decode(std::size_t index) const;

  // Marginal over the listed steps (in the given order), densely indexed with
  // the first listed step most significant.
  std::vector<double> marginal(std::span<const std::size_t> keep) const;
  ProbTable pair_joint(std::size_t from, std::size_t to) const;

 private:
  std::size_t steps_;
  std::size_t num_symbols_;
  std::vector<double> probs_;
};

// Every pairwise joint (l < l') and every per-step marginal of a grand joint.
ReadoutStats pairwise_stats(const GrandJoint& grand);

struct ChainRuleAudit {
  double joint_entropy = 0.0;                 // H(M_0, ..., M_L)
  std::vector<double> history_conditionals;   // H(M_j | M_0..M_{j-1}); [0] = H(M_0)
  double chain_rule_sum = 0.0;
  double chain_rule_error = 0.0;
  std::vector<double> markov_gaps;            // H(M_j|M_{j-1}) - H(M_j|M_0..M_{j-1}) >= 0
  std::vector<double> monotonicity_gaps;      // H(M_0..M_j) - H(M_0, M_j) >= 0
  ViolationReport inequality;
  bool chain_rule_holds = false;
  bool information_inequalities_hold = false;
  bool readout_inequality_holds = false;

  bool all_hold() const {
    return chain_rule_holds && information_inequalities_hold && readout_inequality_holds;
  }
};

// Checks the chain rule for the joint entropy, the two information
// inequalities it is combined with, and the readout inequality that follows.
ChainRuleAudit chain_rule_audit(const GrandJoint& grand, double tolerance = kDistributionTolerance);

}  // namespace readout::entropy
