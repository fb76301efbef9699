#include "readout/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "readout/errors.hpp"

namespace readout::entropy {

namespace {

double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

std::int64_t closest_integer(double x) { return static_cast<std::int64_t>(std::round(x)); }

}  // namespace

double h(double x) {
  const double s = std::sin(x);
  const double c = std::cos(x);
  return -plogp(c * c) - plogp(s * s);
}

double shannon(std::span<const double> p) {
  double acc = 0.0;
  for (double v : p) acc -= plogp(v);
  return acc;
}

void validate_distribution(std::span<const double> p, const char* what) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) {
      std::ostringstream os;
      os << what << " has a negative or NaN entry (" << v << ")";
      throw InvalidDistributionError(os.str());
    }
    total += v;
  }
  if (!(std::abs(total - 1.0) <= kDistributionTolerance)) {
    std::ostringstream os;
    os << what << " sums to " << total << ", not 1";
    throw InvalidDistributionError(os.str());
  }
}

double conditional_entropy(const ProbTable& joint) {
  validate_distribution(joint.values(), "joint table");
  double acc = 0.0;
  for (std::size_t a = 0; a < joint.rows(); ++a) {
    double row_mass = 0.0;
    for (double v : joint.row(a)) row_mass += v;
    if (row_mass <= 0.0) continue;
    for (double v : joint.row(a)) {
      if (v > 0.0) acc -= v * std::log2(v / row_mass);
    }
  }
  return acc;
}

// ---------------------------------------------------------------------------
// ExperimentPlan

ExperimentPlan::ExperimentPlan(std::int64_t steps, std::int64_t n_d, std::int64_t n_c,
                               std::optional<int> gamma)
    : steps_(steps), n_d_(n_d), n_c_(n_c), gamma_(gamma) {
  if (n_c_ > 1) {
    const double base = std::log(static_cast<double>(n_c_));
    alpha_ = std::log(static_cast<double>(steps_)) / base;
    beta_ = std::log(static_cast<double>(n_d_)) / base;
  } else {
    alpha_ = 0.0;
    beta_ = 0.0;
  }
}

ExperimentPlan ExperimentPlan::make(std::int64_t steps, std::int64_t n_d, std::int64_t n_c,
                                    std::optional<int> gamma) {
  std::ostringstream os;
  if (steps < 1) {
    os << "L must be at least 1 (got " << steps << ")";
  } else if (n_d < steps) {
    os << "n_d must be at least L (got n_d=" << n_d << ", L=" << steps << ")";
  } else if (n_d > n_c) {
    os << "n_d must not exceed n_c (got n_d=" << n_d << ", n_c=" << n_c << ")";
  } else if (n_d % steps != 0) {
    os << "n_d must be a multiple of L (got n_d=" << n_d << ", L=" << steps
       << "; nearest valid n_d values are " << (n_d / steps) * steps << " and "
       << (n_d / steps + 1) * steps << ")";
  }
  const auto message = os.str();
  if (!message.empty()) throw PlanError(message);
  return ExperimentPlan(steps, n_d, n_c, gamma);
}

ExperimentPlan ExperimentPlan::max_violation(double theta, std::int64_t n_c,
                                             std::optional<int> gamma) {
  if (!(theta > 0.0)) throw PlanError("theta must be positive");
  const std::int64_t n = std::max<std::int64_t>(1, closest_integer(std::numbers::pi / (4.0 * theta)));
  return make(n, n, n_c, gamma);
}

// ---------------------------------------------------------------------------
// ReadoutStats

ReadoutStats::ReadoutStats(std::size_t steps, std::size_t num_symbols)
    : steps_(steps), num_symbols_(num_symbols), marginals_(steps + 1) {
  if (steps == 0) throw IncompleteStatsError("readout statistics need at least one step");
  if (num_symbols == 0) throw InvalidDistributionError("symbol alphabet is empty");
}

void ReadoutStats::check_step(std::size_t step) const {
  if (step > steps_) {
    std::ostringstream os;
    os << "step " << step << " is outside 0.." << steps_;
    throw IncompleteStatsError(os.str());
  }
}

void ReadoutStats::check_consistency(std::size_t from, const ProbTable& joint) const {
  if (!marginals_[from]) return;
  const auto sums = joint.row_sums();
  const auto& m = *marginals_[from];
  for (std::size_t a = 0; a < num_symbols_; ++a) {
    if (std::abs(sums[a] - m[a]) > kDistributionTolerance) {
      std::ostringstream os;
      os << "joint table for step " << from << " disagrees with its marginal at symbol " << a
         << " (" << sums[a] << " vs " << m[a] << ")";
      throw InvalidDistributionError(os.str());
    }
  }
}

void ReadoutStats::set_marginal(std::size_t step, std::vector<double> dist) {
  check_step(step);
  if (dist.size() != num_symbols_) throw InvalidDistributionError("marginal has wrong alphabet size");
  validate_distribution(dist, "marginal");
  marginals_[step] = std::move(dist);
  for (const auto& [key, table] : joints_) {
    if (key.first == step) check_consistency(step, table);
  }
}

void ReadoutStats::set_joint(std::size_t from, std::size_t to, ProbTable joint) {
  check_step(from);
  check_step(to);
  if (from >= to) throw IncompleteStatsError("joint pairs must satisfy from < to");
  if (joint.rows() != num_symbols_ || joint.cols() != num_symbols_) {
    throw InvalidDistributionError("joint table has wrong alphabet size");
  }
  validate_distribution(joint.values(), "joint table");
  check_consistency(from, joint);
  joints_.insert_or_assign({from, to}, std::move(joint));
}

bool ReadoutStats::has_marginal(std::size_t step) const {
  return step <= steps_ && marginals_[step].has_value();
}

bool ReadoutStats::has_joint(std::size_t from, std::size_t to) const {
  return joints_.contains({from, to});
}

const std::vector<double>& ReadoutStats::marginal(std::size_t step) const {
  check_step(step);
  if (!marginals_[step]) {
    std::ostringstream os;
    os << "no marginal recorded for step " << step;
    throw IncompleteStatsError(os.str());
  }
  return *marginals_[step];
}

const ProbTable& ReadoutStats::joint(std::size_t from, std::size_t to) const {
  const auto it = joints_.find({from, to});
  if (it == joints_.end()) {
    std::ostringstream os;
    os << "no joint table recorded for steps (" << from << ", " << to << ")";
    throw IncompleteStatsError(os.str());
  }
  return it->second;
}

std::optional<double> ReadoutStats::conditional(std::size_t from, std::size_t to, std::size_t a,
                                                std::size_t b) const {
  const ProbTable& j = joint(from, to);
  double mass = 0.0;
  for (double v : j.row(a)) mass += v;
  if (mass <= 0.0) return std::nullopt;
  return j.at(a, b) / mass;
}

// ---------------------------------------------------------------------------
// Inequality

ViolationReport evaluate_inequality(const ReadoutStats& stats, std::optional<ExperimentPlan> plan) {
  if (plan && static_cast<std::size_t>(plan->steps()) != stats.steps()) {
    throw PlanError("plan step count does not match the statistics");
  }
  ViolationReport report;
  report.plan = plan;
  report.steps = stats.steps();
  report.step_entropies.reserve(stats.steps());
  for (std::size_t j = 1; j <= stats.steps(); ++j) {
    const double hj = conditional_entropy(stats.joint(j - 1, j));
    report.step_entropies.push_back(hj);
    report.rhs += hj;
  }
  report.lhs = conditional_entropy(stats.joint(0, stats.steps()));
  report.d_value = report.rhs - report.lhs;
  report.violated = report.d_value < -kViolationThreshold;
  return report;
}

double closed_form_d(double theta, std::int64_t steps, std::int64_t n_d) {
  const auto step_power = static_cast<double>(n_d / steps);
  return static_cast<double>(steps) * h(step_power * theta) - h(static_cast<double>(n_d) * theta);
}

double closed_form_d(double theta, const ExperimentPlan& plan) {
  return closed_form_d(theta, plan.steps(), plan.n_d());
}

double d_min_theoretical(double theta) {
  if (!(theta > 0.0 && theta < std::numbers::pi / 4.0)) {
    throw PlanError("d_min_theoretical needs theta in (0, pi/4)");
  }
  const auto n = closest_integer(std::numbers::pi / (4.0 * theta));
  return static_cast<double>(n) * h(theta) - h(static_cast<double>(n) * theta);
}

// ---------------------------------------------------------------------------
// GrandJoint

GrandJoint::GrandJoint(std::size_t steps, std::size_t num_symbols, std::vector<double> probs)
    : steps_(steps), num_symbols_(num_symbols), probs_(std::move(probs)) {
  if (num_symbols_ == 0) throw InvalidDistributionError("symbol alphabet is empty");
  std::size_t expected = 1;
  for (std::size_t j = 0; j <= steps_; ++j) expected *= num_symbols_;
  if (probs_.size() != expected) {
    std::ostringstream os;
    os << "grand joint needs " << expected << " entries, got " << probs_.size();
    throw InvalidDistributionError(os.str());
  }
  validate_distribution(probs_, "grand joint");
}

std::vector<std::size_t> GrandJoint::decode(std::size_t index) const {
  std::vector<std::size_t> seq(steps_ + 1);
  for (std::size_t j = steps_ + 1; j-- > 0;) {
    seq[j] = index % num_symbols_;
    index /= num_symbols_;
  }
  return seq;
}

double GrandJoint::probability(std::span<const std::size_t> sequence) const {
  if (sequence.size() != steps_ + 1) throw InvalidDistributionError("sequence length mismatch");
  std::size_t index = 0;
  for (std::size_t m : sequence) index = index * num_symbols_ + m;
  return probs_[index];
}

std::vector<double> GrandJoint::marginal(std::span<const std::size_t> keep) const {
  std::size_t out_size = 1;
  for (std::size_t k : keep) {
    if (k > steps_) throw IncompleteStatsError("marginal step out of range");
    out_size *= num_symbols_;
  }
  std::vector<double> out(out_size, 0.0);
  std::vector<std::size_t> seq(steps_ + 1, 0);
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    // seq tracks decode(i) incrementally (last digit fastest).
    if (probs_[i] != 0.0) {
      std::size_t idx = 0;
      for (std::size_t k : keep) idx = idx * num_symbols_ + seq[k];
      out[idx] += probs_[i];
    }
    for (std::size_t j = steps_ + 1; j-- > 0;) {
      if (++seq[j] < num_symbols_) break;
      seq[j] = 0;
    }
  }
  return out;
}

ProbTable GrandJoint::pair_joint(std::size_t from, std::size_t to) const {
  const std::size_t keep[] = {from, to};
  const auto flat = marginal(keep);
  ProbTable table(num_symbols_, num_symbols_);
  for (std::size_t a = 0; a < num_symbols_; ++a) {
    for (std::size_t b = 0; b < num_symbols_; ++b) table.at(a, b) = flat[a * num_symbols_ + b];
  }
  return table;
}

ReadoutStats pairwise_stats(const GrandJoint& grand) {
  if (grand.steps() == 0) throw IncompleteStatsError("grand joint has no steps");
  ReadoutStats stats(grand.steps(), grand.num_symbols());
  for (std::size_t l = 0; l <= grand.steps(); ++l) {
    const std::size_t keep[] = {l};
    stats.set_marginal(l, grand.marginal(keep));
  }
  for (std::size_t l = 0; l < grand.steps(); ++l) {
    for (std::size_t l2 = l + 1; l2 <= grand.steps(); ++l2) {
      stats.set_joint(l, l2, grand.pair_joint(l, l2));
    }
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Chain-rule audit

ChainRuleAudit chain_rule_audit(const GrandJoint& grand, double tolerance) {
  ChainRuleAudit audit;
  const std::size_t steps = grand.steps();
  const std::size_t m = grand.num_symbols();
  audit.joint_entropy = shannon(grand.probs());

  // prefix[j] = P(m_0..m_j), the last listed digit least significant.
  std::vector<std::vector<double>> prefix(steps + 1);
  prefix[steps].assign(grand.probs().begin(), grand.probs().end());
  for (std::size_t j = steps; j-- > 0;) {
    const auto& longer = prefix[j + 1];
    prefix[j].assign(longer.size() / m, 0.0);
    for (std::size_t i = 0; i < longer.size(); ++i) prefix[j][i / m] += longer[i];
  }

  audit.history_conditionals.push_back(shannon(prefix[0]));
  for (std::size_t j = 1; j <= steps; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < prefix[j].size(); ++i) {
      const double p = prefix[j][i];
      const double given = prefix[j - 1][i / m];
      if (p > 0.0) acc -= p * std::log2(p / given);
    }
    audit.history_conditionals.push_back(acc);
  }
  for (double v : audit.history_conditionals) audit.chain_rule_sum += v;
  audit.chain_rule_error = std::abs(audit.chain_rule_sum - audit.joint_entropy);
  audit.chain_rule_holds = audit.chain_rule_error <= tolerance;

  audit.information_inequalities_hold = true;
  for (std::size_t j = 1; j <= steps; ++j) {
    const double markov = conditional_entropy(grand.pair_joint(j - 1, j));
    audit.markov_gaps.push_back(markov - audit.history_conditionals[j]);
    const auto pair = grand.pair_joint(0, j);
    audit.monotonicity_gaps.push_back(shannon(prefix[j]) - shannon(pair.values()));
    if (audit.markov_gaps.back() < -tolerance || audit.monotonicity_gaps.back() < -tolerance) {
      audit.information_inequalities_hold = false;
    }
  }

  if (steps > 0) {
    audit.inequality = evaluate_inequality(pairwise_stats(grand));
    audit.readout_inequality_holds = audit.inequality.d_value >= -tolerance;
  } else {
    audit.readout_inequality_holds = true;
  }
  return audit;
}

}  // namespace readout::entropy
