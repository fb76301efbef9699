#include "readout/senm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "readout/errors.hpp"

namespace readout::senm {

namespace {

void validate_exact(std::span<const double> p, const char* what) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) {
      std::ostringstream os;
      os << what << " has a negative or NaN entry (" << v << ")";
      throw InvalidDistributionError(os.str());
    }
    total += v;
  }
  if (!(std::abs(total - 1.0) <= kKernelTolerance)) {
    std::ostringstream os;
    os << what << " sums to " << total << ", not 1 (tolerance " << kKernelTolerance << ")";
    throw InvalidDistributionError(os.str());
  }
}

// base^exponent, or nullopt if it exceeds `limit`.
std::optional<std::size_t> bounded_power(std::size_t base, std::size_t exponent, std::size_t limit) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (base != 0 && out > limit / base) return std::nullopt;
    out *= base;
  }
  return out <= limit ? std::optional<std::size_t>(out) : std::nullopt;
}

std::string describe_history(std::size_t step, std::span<const std::size_t> history) {
  std::ostringstream os;
  os << "step " << step << ", history (";
  for (std::size_t i = 0; i < history.size(); ++i) os << (i ? "," : "") << history[i];
  os << ")";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// EnsembleSpec

EnsembleSpec EnsembleSpec::enumerated(std::size_t num_copies, std::size_t num_states,
                                      std::size_t num_symbols,
                                      std::vector<std::size_t> readout_map,
                                      std::vector<double> initial_dist) {
  if (num_copies == 0 || num_states == 0 || num_symbols == 0) {
    throw ConfigError("ensemble needs at least one copy, state and symbol");
  }
  if (readout_map.size() != num_states) {
    throw ConfigError("readout map must assign a symbol to every state");
  }
  for (std::size_t m : readout_map) {
    if (m >= num_symbols) throw ConfigError("readout map refers to an unknown symbol");
  }
  const auto collections = bounded_power(num_states, num_copies, kEnumeratedCollectionCap);
  if (!collections) {
    std::ostringstream os;
    os << num_states << "^" << num_copies << " collections exceed the enumeration cap of "
       << kEnumeratedCollectionCap << "; use labelled collections";
    throw TractabilityError(os.str());
  }
  if (initial_dist.size() != *collections) {
    std::ostringstream os;
    os << "initial distribution needs " << *collections << " entries, got " << initial_dist.size();
    throw ConfigError(os.str());
  }
  validate_exact(initial_dist, "initial distribution");

  EnsembleSpec spec;
  spec.enumerated_ = true;
  spec.num_copies_ = num_copies;
  spec.num_states_ = num_states;
  spec.num_symbols_ = num_symbols;
  spec.readout_map_ = std::move(readout_map);
  spec.initial_dist_ = std::move(initial_dist);
  spec.readouts_.reserve(*collections);
  for (std::size_t c = 0; c < *collections; ++c) {
    spec.readouts_.push_back(readout_distribution(spec, spec.copy_states(c)));
  }
  return spec;
}

EnsembleSpec EnsembleSpec::labelled(std::size_t num_symbols,
                                    std::vector<std::vector<double>> collection_readouts,
                                    std::vector<double> initial_dist) {
  if (num_symbols == 0) throw ConfigError("ensemble needs at least one symbol");
  if (collection_readouts.empty()) throw ConfigError("ensemble needs at least one collection");
  for (const auto& r : collection_readouts) {
    if (r.size() != num_symbols) throw ConfigError("collection readout has wrong alphabet size");
    validate_exact(r, "collection readout");
  }
  if (initial_dist.size() != collection_readouts.size()) {
    throw ConfigError("initial distribution size does not match the collection count");
  }
  validate_exact(initial_dist, "initial distribution");

  EnsembleSpec spec;
  spec.enumerated_ = false;
  spec.num_symbols_ = num_symbols;
  spec.readouts_ = std::move(collection_readouts);
  spec.initial_dist_ = std::move(initial_dist);
  return spec;
}

std::vector<std::size_t> EnsembleSpec::copy_states(std::size_t collection) const {
  if (!enumerated_) throw ConfigError("labelled collections have no copy states");
  std::vector<std::size_t> states(num_copies_);
  for (std::size_t k = num_copies_; k-- > 0;) {
    states[k] = collection % num_states_;
    collection /= num_states_;
  }
  return states;
}

const std::vector<double>& EnsembleSpec::readout(std::size_t collection) const {
  if (collection >= readouts_.size()) throw ConfigError("collection index out of range");
  return readouts_[collection];
}

std::vector<double> readout_distribution(const EnsembleSpec& spec,
                                         std::span<const std::size_t> copy_states) {
  if (!spec.is_enumerated()) throw ConfigError("labelled collections have no copy states");
  if (copy_states.size() != spec.num_copies()) throw ConfigError("wrong number of copies");
  std::vector<std::size_t> counts(spec.num_symbols(), 0);
  for (std::size_t s : copy_states) {
    if (s >= spec.num_states()) throw ConfigError("copy state out of range");
    ++counts[spec.readout_map()[s]];
  }
  std::vector<double> out(spec.num_symbols());
  const auto n = static_cast<double>(copy_states.size());
  for (std::size_t m = 0; m < out.size(); ++m) out[m] = static_cast<double>(counts[m]) / n;
  return out;
}

std::vector<double> readout_distribution(const EnsembleSpec& spec, std::size_t collection) {
  return spec.readout(collection);
}

// ---------------------------------------------------------------------------
// TransitionKernel

TransitionKernel::TransitionKernel(std::size_t order, bool step_dependent)
    : order_(order), step_dependent_(step_dependent) {}

std::size_t TransitionKernel::history_length(std::size_t step) const {
  return full_history() ? step : std::min(step, order_);
}

std::vector<std::size_t> TransitionKernel::key(std::size_t step,
                                               std::span<const std::size_t> history) const {
  std::vector<std::size_t> k;
  k.reserve(history.size() + 1);
  if (step_dependent_) k.push_back(step);
  k.insert(k.end(), history.begin(), history.end());
  return k;
}

void TransitionKernel::set(std::vector<std::size_t> history, std::vector<double> next,
                           std::optional<std::size_t> step) {
  if (history.empty()) throw ConfigError("kernel histories must contain at least s_0");
  if (!full_history() && history.size() > order_) {
    throw ConfigError("kernel history is longer than the kernel order");
  }
  if (step_dependent_ && !step) throw ConfigError("step-dependent kernel entries need a step");
  if (step && *step == 0) throw ConfigError("kernel steps start at 1");
  validate_exact(next, "kernel table");
  const std::size_t s = step_dependent_ ? *step : 0;
  tables_.insert_or_assign(key(s, history), std::move(next));
}

const std::vector<double>& TransitionKernel::next(std::size_t step,
                                                  std::span<const std::size_t> history) const {
  const auto it = tables_.find(key(step, history));
  if (it == tables_.end()) {
    throw IncompleteKernelError("no kernel table for reachable " + describe_history(step, history));
  }
  return it->second;
}

std::vector<TransitionKernel::Entry> TransitionKernel::entries() const {
  std::vector<Entry> out;
  out.reserve(tables_.size());
  for (const auto& [k, next] : tables_) {
    Entry e;
    auto first = k.begin();
    if (step_dependent_) e.step = *first++;
    e.history.assign(first, k.end());
    e.next = next;
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enumeration

std::vector<std::size_t> TrajectoryDistribution::decode(std::size_t index) const {
  std::vector<std::size_t> traj(steps + 1);
  for (std::size_t j = steps + 1; j-- > 0;) {
    traj[j] = index % num_collections;
    index /= num_collections;
  }
  return traj;
}

std::vector<std::vector<double>> TrajectoryDistribution::step_marginals() const {
  std::vector<std::vector<double>> out(steps + 1, std::vector<double>(num_collections, 0.0));
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] == 0.0) continue;
    const auto traj = decode(i);
    for (std::size_t j = 0; j <= steps; ++j) out[j][traj[j]] += probs[i];
  }
  return out;
}

TrajectoryDistribution joint_state_distribution(const EnsembleSpec& spec,
                                                const TransitionKernel& kernel, std::size_t steps,
                                                std::size_t cap) {
  const std::size_t c = spec.num_collections();
  const auto total = bounded_power(c, steps + 1, cap);
  if (!total) {
    std::ostringstream os;
    os << c << "^" << (steps + 1) << " trajectories exceed the enumeration cap of " << cap;
    throw TractabilityError(os.str());
  }

  TrajectoryDistribution out;
  out.steps = steps;
  out.num_collections = c;
  out.probs.assign(*total, 0.0);

  std::vector<std::size_t> traj;
  traj.reserve(steps + 1);
  std::vector<std::size_t> history;

  std::function<void(double, std::size_t)> extend = [&](double prob, std::size_t index) {
    const std::size_t j = traj.size();
    if (j == steps + 1) {
      out.probs[index] = prob;
      return;
    }
    const std::size_t len = kernel.history_length(j);
    history.assign(traj.rbegin(), traj.rbegin() + static_cast<std::ptrdiff_t>(len));
    const std::vector<double>& next = kernel.next(j, history);
    if (next.size() != c) {
      throw IncompleteKernelError("kernel table size does not match the collection count at " +
                                  describe_history(j, history));
    }
    for (std::size_t s = 0; s < c; ++s) {
      if (next[s] == 0.0) continue;
      traj.push_back(s);
      extend(prob * next[s], index * c + s);
      traj.pop_back();
    }
  };

  const auto& init = spec.initial_dist();
  for (std::size_t s0 = 0; s0 < c; ++s0) {
    if (init[s0] == 0.0) continue;
    traj.assign(1, s0);
    extend(init[s0], s0);
  }
  return out;
}

std::vector<std::vector<double>> forward_marginals(const EnsembleSpec& spec,
                                                   const TransitionKernel& kernel,
                                                   std::size_t steps) {
  const std::size_t c = spec.num_collections();
  // Histories most recent first, truncated to what the kernel can still see.
  std::map<std::vector<std::size_t>, double> frontier;
  for (std::size_t s = 0; s < c; ++s) {
    if (spec.initial_dist()[s] > 0.0) frontier[{s}] += spec.initial_dist()[s];
  }
  std::vector<std::vector<double>> marginals;
  marginals.push_back(spec.initial_dist());

  for (std::size_t j = 1; j <= steps; ++j) {
    const std::size_t len = kernel.history_length(j);
    const std::size_t keep = kernel.full_history() ? j + 1 : kernel.order();
    std::map<std::vector<std::size_t>, double> next_frontier;
    std::vector<double> marginal(c, 0.0);
    for (const auto& [hist, p] : frontier) {
      const std::span<const std::size_t> visible(hist.data(), len);
      const auto& next = kernel.next(j, visible);
      for (std::size_t s = 0; s < c; ++s) {
        if (next[s] == 0.0) continue;
        std::vector<std::size_t> h2;
        h2.reserve(keep);
        h2.push_back(s);
        for (std::size_t i = 0; i < hist.size() && h2.size() < keep; ++i) h2.push_back(hist[i]);
        next_frontier[h2] += p * next[s];
        marginal[s] += p * next[s];
      }
    }
    frontier = std::move(next_frontier);
    marginals.push_back(std::move(marginal));
  }
  return marginals;
}

GrandJoint grand_joint(const EnsembleSpec& spec, const TransitionKernel& kernel, std::size_t steps,
                       std::size_t cap) {
  const TrajectoryDistribution traj = joint_state_distribution(spec, kernel, steps, cap);
  const std::size_t c = spec.num_collections();
  const std::size_t m = spec.num_symbols();

  // Contract each collection axis with its readout matrix in turn; axes
  // already visited carry symbols.
  std::vector<double> tensor = traj.probs;
  std::size_t inner = 1;
  for (std::size_t k = 0; k < steps; ++k) inner *= c;
  std::size_t outer = 1;
  for (std::size_t k = 0; k <= steps; ++k) {
    std::vector<double> next(outer * m * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t s = 0; s < c; ++s) {
        const auto& r = spec.readout(s);
        const double* src = tensor.data() + (o * c + s) * inner;
        for (std::size_t i = 0; i < inner; ++i) {
          const double v = src[i];
          if (v == 0.0) continue;
          for (std::size_t sym = 0; sym < m; ++sym) {
            if (r[sym] != 0.0) next[(o * m + sym) * inner + i] += v * r[sym];
          }
        }
      }
    }
    tensor = std::move(next);
    outer *= m;
    if (k < steps) inner /= c;
  }
  return GrandJoint(steps, m, std::move(tensor));
}

ReadoutStats conditional_readouts(const GrandJoint& grand) { return entropy::pairwise_stats(grand); }

SenmCheck check_model(const SenmModel& model, std::size_t cap) {
  const auto traj = joint_state_distribution(model.spec, model.kernel, model.steps, cap);
  SenmCheck out;
  for (double p : traj.probs) {
    if (p > 0.0) ++out.trajectories;
  }
  const GrandJoint grand = grand_joint(model.spec, model.kernel, model.steps, cap);
  out.report = entropy::evaluate_inequality(conditional_readouts(grand));
  return out;
}

// ---------------------------------------------------------------------------
// Random models

namespace {

std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n, double sparsity) {
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::bernoulli_distribution drop(sparsity);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> p(n, 0.0);
  const std::size_t forced = pick(rng);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i != forced && drop(rng)) continue;
    p[i] = gamma(rng);
    total += p[i];
  }
  if (total <= 0.0) {
    p[forced] = 1.0;
    return p;
  }
  for (double& v : p) v /= total;
  return p;
}

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

SenmModel random_model(std::mt19937_64& rng, const RandomSpecOptions& options) {
  const std::size_t num_symbols = uniform(rng, 2, std::max<std::size_t>(2, options.max_symbols));
  const bool labelled = std::bernoulli_distribution(options.labelled_probability)(rng);

  std::optional<EnsembleSpec> spec;
  if (labelled) {
    const std::size_t n = uniform(rng, 1, std::max<std::size_t>(1, options.max_labelled_collections));
    std::vector<std::vector<double>> readouts;
    for (std::size_t i = 0; i < n; ++i) {
      readouts.push_back(random_distribution(rng, num_symbols, options.sparsity));
    }
    spec = EnsembleSpec::labelled(num_symbols, std::move(readouts),
                                  random_distribution(rng, n, options.sparsity));
  } else {
    const std::size_t copies = uniform(rng, 1, std::max<std::size_t>(1, options.max_copies));
    const std::size_t states = uniform(rng, 1, std::max<std::size_t>(1, options.max_states));
    std::vector<std::size_t> readout_map(states);
    for (auto& m : readout_map) m = uniform(rng, 0, num_symbols - 1);
    std::size_t n = 1;
    for (std::size_t k = 0; k < copies; ++k) n *= states;
    spec = EnsembleSpec::enumerated(copies, states, num_symbols, std::move(readout_map),
                                    random_distribution(rng, n, options.sparsity));
  }

  const std::size_t c = spec->num_collections();
  std::size_t steps = uniform(rng, 1, std::max<std::size_t>(1, options.max_steps));
  while (steps > 1 && !bounded_power(c, steps + 1, options.trajectory_budget)) --steps;

  const std::size_t order_pick = uniform(rng, 0, 2);
  const std::size_t order = order_pick == 0 ? TransitionKernel::kFullHistory : order_pick;
  const bool step_dependent = order != TransitionKernel::kFullHistory &&
                              std::bernoulli_distribution(0.5)(rng);
  TransitionKernel kernel(order, step_dependent);

  for (std::size_t j = 1; j <= steps; ++j) {
    const std::size_t len = kernel.history_length(j);
    // Homogeneous kernels reuse tables across steps with the same history
    // length; only fill each length once.
    if (!step_dependent && j > 1 && kernel.history_length(j - 1) == len) continue;
    std::vector<std::size_t> history(len, 0);
    while (true) {
      kernel.set(history, random_distribution(rng, c, options.sparsity),
                 step_dependent ? std::optional<std::size_t>(j) : std::nullopt);
      std::size_t pos = 0;
      while (pos < len && ++history[pos] == c) history[pos++] = 0;
      if (pos == len) break;
    }
  }
  return SenmModel{std::move(*spec), std::move(kernel), steps};
}

// ---------------------------------------------------------------------------
// Imitation

ImitationResult fit_imitation(const ImitationTarget& target) {
  const std::size_t steps = target.step_conditionals.size();
  if (steps == 0) throw ConfigError("imitation needs at least one step");
  const std::size_t m = target.initial_marginal.size();
  entropy::validate_distribution(target.initial_marginal, "initial marginal");
  for (const auto& t : target.step_conditionals) {
    if (t.rows() != m || t.cols() != m) throw ConfigError("step matrix has wrong alphabet size");
    for (std::size_t a = 0; a < m; ++a) entropy::validate_distribution(t.row(a), "step matrix row");
  }
  if (target.end_to_end.rows() != m || target.end_to_end.cols() != m) {
    throw ConfigError("end-to-end target has wrong alphabet size");
  }

  // One copy per symbol state, identity readout, step-dependent Markov kernel
  // equal to the target matrices.
  std::vector<std::size_t> identity(m);
  for (std::size_t i = 0; i < m; ++i) identity[i] = i;
  auto spec = EnsembleSpec::enumerated(1, m, m, identity, target.initial_marginal);
  TransitionKernel kernel(1, true);
  for (std::size_t j = 1; j <= steps; ++j) {
    const auto& t = target.step_conditionals[j - 1];
    for (std::size_t a = 0; a < m; ++a) {
      kernel.set({a}, std::vector<double>(t.row(a).begin(), t.row(a).end()), j);
    }
  }

  // Exact forward propagation; the chain is Markov so pairwise tables follow
  // from the step marginals.
  const auto marginals = forward_marginals(spec, kernel, steps);
  ReadoutStats stats(steps, m);
  for (std::size_t j = 0; j <= steps; ++j) stats.set_marginal(j, marginals[j]);
  ProbTable composed = target.step_conditionals.front();
  for (std::size_t j = 1; j <= steps; ++j) {
    const auto& t = target.step_conditionals[j - 1];
    stats.set_joint(j - 1, j, joint_from_conditional(marginals[j - 1], t));
    if (j > 1) composed = composed.compose(t);
  }
  if (steps > 1) stats.set_joint(0, steps, joint_from_conditional(marginals[0], composed));

  ImitationResult result{SenmModel{std::move(spec), std::move(kernel), steps},
                         std::move(stats),
                         0.0,
                         composed,
                         target.end_to_end,
                         composed.max_abs_diff(target.end_to_end),
                         marginals[steps],
                         std::nullopt,
                         {}};

  for (std::size_t j = 1; j <= steps; ++j) {
    const auto& t = target.step_conditionals[j - 1];
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        const auto got = result.classical_stats.conditional(j - 1, j, a, b);
        if (got) result.max_step_error = std::max(result.max_step_error, std::abs(*got - t.at(a, b)));
      }
    }
  }
  if (target.final_marginal) {
    if (target.final_marginal->size() != m) throw ConfigError("final marginal has wrong size");
    double gap = 0.0;
    for (std::size_t b = 0; b < m; ++b) {
      gap = std::max(gap, std::abs(result.classical_final_marginal[b] - (*target.final_marginal)[b]));
    }
    result.final_marginal_gap = gap;
  }
  result.classical_report = entropy::evaluate_inequality(result.classical_stats);
  return result;
}

}  // namespace readout::senm
