#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "readout/cli.hpp"
#include "readout/entropy.hpp"
#include "readout/errors.hpp"
#include "readout/montecarlo.hpp"
#include "readout/qaa.hpp"
#include "readout/senm.hpp"
#include "readout/senm_io.hpp"

namespace readout::cli {

using nlohmann::json;

namespace {

struct ProblemOptions {
  std::optional<int> gamma;
  std::optional<double> theta;
  double phi = std::numbers::pi;
  double phi_tau = std::numbers::pi;
};

struct PlanOptions {
  std::optional<std::int64_t> steps;
  std::optional<std::int64_t> n_d;
};

struct SeedInfo {
  std::uint64_t seed = 0;
  std::string source;
};

void add_problem_options(CLI::App* sub, ProblemOptions& p) {
  auto* g = sub->add_option("--gamma", p.gamma, "Problem scale: theta = sqrt(10^-gamma)");
  auto* t = sub->add_option("--theta", p.theta, "Rotation angle per iteration (radians)");
  g->excludes(t);
  t->excludes(g);
  sub->add_option("--phi", p.phi, "Householder reflection phase in (0, pi]")->capture_default_str();
  sub->add_option("--phi-tau", p.phi_tau, "Oracle phase in (0, pi]")->capture_default_str();
}

void add_plan_options(CLI::App* sub, PlanOptions& p) {
  sub->add_option("--L", p.steps, "Number of inequality steps");
  sub->add_option("--nd", p.n_d, "Total iterations n_d (a multiple of L)");
}

qaa::QaaParams resolve_params(const ProblemOptions& p, std::ostream& err) {
  if (!p.gamma && !p.theta) throw ConfigError("give the problem scale with --gamma or --theta");
  std::optional<qaa::QaaParams> params;
  if (p.gamma && p.phi == std::numbers::pi && p.phi_tau == std::numbers::pi) {
    params = qaa::QaaParams::from_gamma(*p.gamma);
  } else {
    if (p.gamma && *p.gamma <= 0) throw ConfigError("gamma must be a positive integer");
    const double theta = p.gamma ? std::sqrt(std::pow(10.0, -*p.gamma)) : *p.theta;
    params = qaa::QaaParams::from_theta(theta, p.phi, p.phi_tau);
  }
  if (params->n_c() < 1) throw ConfigError("degenerate problem: n_c would be 0");
  if (!params->small_p0_regime()) {
    err << "warning: p0 = " << params->p0()
        << " exceeds 1e-2; the two-reflection plane reduction is only first-order accurate here\n";
  }
  if (!params->phase_matched()) {
    err << "warning: phases are not matched (xi = " << params->xi()
        << "); the closed form for D does not apply\n";
  }
  return *params;
}

entropy::ExperimentPlan resolve_plan(const PlanOptions& p, const qaa::QaaParams& params,
                                     std::optional<int> gamma) {
  if (p.steps.has_value() != p.n_d.has_value()) {
    throw PlanError("give both --L and --nd, or neither for the maximum-violation plan");
  }
  if (!p.steps) return entropy::ExperimentPlan::max_violation(params.theta(), params.n_c(), gamma);
  return entropy::ExperimentPlan::make(*p.steps, *p.n_d, params.n_c(), gamma);
}

SeedInfo resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return {*flag, "flag"};
  if (const char* env = std::getenv(kSeedEnvVar); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const auto value = std::stoull(env, &used);
      if (used == std::string(env).size()) return {value, std::string("env:") + kSeedEnvVar};
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string(kSeedEnvVar) + " must be an unsigned integer");
  }
  return {0, "default"};
}

json params_json(const qaa::QaaParams& params, std::optional<int> gamma) {
  json j{{"theta", params.theta()},   {"p0", params.p0()},
         {"phi", params.phi()},       {"phi_tau", params.phi_tau()},
         {"xi", params.xi()},         {"n_c", params.n_c()},
         {"phase_matched", params.phase_matched()}};
  j["gamma"] = gamma ? json(*gamma) : json(nullptr);
  return j;
}

json plan_json(const entropy::ExperimentPlan& plan) {
  return {{"L", plan.steps()},   {"n_d", plan.n_d()},     {"n_c", plan.n_c()},
          {"alpha", plan.alpha()}, {"beta", plan.beta()}, {"step_power", plan.step_power()}};
}

json report_json(const entropy::ViolationReport& r) {
  return {{"lhs", r.lhs}, {"rhs", r.rhs}, {"d", r.d_value}, {"violated", r.violated}};
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open output file " + path);
  f << content;
  if (!f) throw ConfigError("failed writing output file " + path);
}

void write_json(const std::string& path, const json& doc) { write_file(path, doc.dump(2) + "\n"); }

json envelope(const char* command) {
  return {{"schema_version", kOutputSchemaVersion}, {"command", command}};
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  ProblemOptions problem;
  PlanOptions plan;
  bool sweep = false;
  std::string out;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  const auto params = resolve_params(a.problem, err);
  json doc = envelope("analyze");
  doc["config"]["problem"] = params_json(params, a.problem.gamma);

  if (a.sweep) {
    if (!a.plan.steps) throw PlanError("--sweep needs --L");
    const std::int64_t steps = *a.plan.steps;
    if (steps < 1 || steps > params.n_c()) throw PlanError("--L must lie in [1, n_c]");
    out << "sweep over n_d for L = " << steps << " (n_c = " << params.n_c() << ")\n";
    out << std::setw(8) << "n_d" << std::setw(12) << "beta" << std::setw(14) << "D" << "\n";
    json rows = json::array();
    std::optional<std::pair<std::int64_t, double>> best;
    for (std::int64_t n_d = steps; n_d <= params.n_c(); n_d += steps) {
      const auto plan = entropy::ExperimentPlan::make(steps, n_d, params.n_c(), a.problem.gamma);
      const auto report = entropy::evaluate_inequality(mc::exact_readout_stats(params, plan), plan);
      out << std::setw(8) << n_d << std::setw(12) << fmt(plan.beta(), 4) << std::setw(14)
          << fmt(report.d_value) << "\n";
      rows.push_back({{"n_d", n_d},
                      {"beta", plan.beta()},
                      {"alpha", plan.alpha()},
                      {"d", report.d_value},
                      {"closed_form_d", entropy::closed_form_d(params.theta(), plan)}});
      if (!best || report.d_value < best->second) best = {n_d, report.d_value};
    }
    out << "minimum D = " << fmt(best->second) << " at n_d = " << best->first << "\n";
    doc["config"]["L"] = steps;
    doc["sweep"] = rows;
    doc["result"] = {{"min_d", best->second}, {"argmin_n_d", best->first}};
  } else {
    const auto plan = resolve_plan(a.plan, params, a.problem.gamma);
    const auto report = entropy::evaluate_inequality(mc::exact_readout_stats(params, plan), plan);
    const double closed = entropy::closed_form_d(params.theta(), plan);
    doc["config"]["plan"] = plan_json(plan);
    doc["result"] = report_json(report);
    doc["result"]["closed_form_d"] = closed;
    out << "theta = " << params.theta() << ", p0 = " << params.p0() << ", n_c = " << params.n_c()
        << "\n";
    out << "L = " << plan.steps() << ", n_d = " << plan.n_d() << ", alpha = " << fmt(plan.alpha(), 4)
        << ", beta = " << fmt(plan.beta(), 4) << "\n";
    out << "H(M_L|M_0)          = " << fmt(report.lhs) << "\n";
    out << "sum H(M_j|M_{j-1})  = " << fmt(report.rhs) << "\n";
    out << "D                   = " << fmt(report.d_value) << "\n";
    out << "D (closed form)     = " << fmt(closed) << "\n";
    if (params.theta() < std::numbers::pi / 4.0) {
      const double dmin = entropy::d_min_theoretical(params.theta());
      doc["result"]["d_min_theoretical"] = dmin;
      out << "D_min (theory)      = " << fmt(dmin) << "\n";
    }
    out << "violated            = " << (report.violated ? "yes" : "no") << "\n";
  }
  if (!a.out.empty()) write_json(a.out, doc);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct MonteCarloArgs {
  ProblemOptions problem;
  PlanOptions plan;
  std::uint64_t shots = mc::kDefaultShots;
  std::size_t trials = mc::kDefaultTrials;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out;
};

int cmd_montecarlo(const MonteCarloArgs& a, std::ostream& out, std::ostream& err) {
  const auto params = resolve_params(a.problem, err);
  const auto plan = resolve_plan(a.plan, params, a.problem.gamma);
  const SeedInfo seed = resolve_seed(a.seed);
  if (a.shots == 0 || a.trials == 0) throw ConfigError("--shots and --trials must be positive");

  const mc::McConfig config{params, plan, a.shots, a.trials, seed.seed, a.threads};
  const mc::McResult r = mc::estimate_d(config);

  out << "L = " << plan.steps() << ", n_d = " << plan.n_d() << ", n_c = " << plan.n_c()
      << ", shots/step = " << a.shots << ", trials = " << a.trials << ", seed = " << seed.seed
      << " (" << seed.source << ")\n";
  out << "D (simulated) = " << fmt(r.d_mean) << " +/- " << fmt(r.d_std) << "  (std error "
      << fmt(r.d_stderr) << ")\n";
  out << "D (theory)    = " << fmt(r.theory_d) << "\n";
  out << "within 3 sigma: " << (r.within_sigma(3.0) ? "yes" : "no") << "\n";

  if (!a.out.empty()) {
    json doc = envelope("montecarlo");
    doc["config"] = {{"problem", params_json(params, a.problem.gamma)},
                     {"plan", plan_json(plan)},
                     {"shots_per_step", a.shots},
                     {"trials", a.trials},
                     {"seed", seed.seed},
                     {"seed_source", seed.source}};
    doc["result"] = {{"d_mean", r.d_mean},     {"d_std", r.d_std},     {"d_stderr", r.d_stderr},
                     {"theory_d", r.theory_d}, {"exact_d", r.exact_d}, {"per_trial_d", r.per_trial_d}};
    write_json(a.out, doc);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct LandscapeArgs {
  ProblemOptions problem;
  std::size_t resolution = 20;
  std::string mode = "exact";
  std::uint64_t shots = mc::kDefaultShots;
  std::size_t trials = 20;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out;
  std::string slices_out;
};

std::string landscape_csv(const std::vector<mc::LandscapeCell>& cells, bool sampled, bool slice) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << (slice ? "L,n_d,beta,alpha,D" : "beta,alpha,L,n_d,D") << (sampled ? ",D_std" : "") << "\n";
  for (const auto& c : cells) {
    if (slice) {
      os << c.steps << "," << c.n_d << "," << c.beta << "," << c.alpha << "," << c.d;
    } else {
      os << c.beta << "," << c.alpha << "," << c.steps << "," << c.n_d << "," << c.d;
    }
    if (sampled) os << "," << c.d_std;
    os << "\n";
  }
  return os.str();
}

int cmd_landscape(const LandscapeArgs& a, std::ostream& out, std::ostream& err) {
  const auto params = resolve_params(a.problem, err);
  const SeedInfo seed = resolve_seed(a.seed);
  const bool sampled = a.mode == "sampled";
  mc::LandscapeOptions options{params,
                               a.problem.gamma,
                               a.resolution,
                               sampled ? mc::LandscapeMode::kSampled : mc::LandscapeMode::kExact,
                               a.shots,
                               a.trials,
                               seed.seed,
                               a.threads};
  const mc::Landscape land = mc::landscape_scan(options);
  const std::string cells_csv = landscape_csv(land.cells, sampled, false);
  const std::string slices_csv = landscape_csv(land.slices, sampled, true);

  const auto& best = land.minimum();
  if (a.out.empty()) {
    out << cells_csv;
  } else {
    write_file(a.out, cells_csv);
  }
  if (!a.slices_out.empty()) write_file(a.slices_out, slices_csv);
  err << "landscape (" << a.mode << "): n_c = " << land.n_c << ", " << land.cells.size()
      << " cells, minimum D = " << fmt(best.d) << " at L = " << best.steps << ", n_d = " << best.n_d
      << " (beta = " << fmt(best.beta, 3) << ", alpha = " << fmt(best.alpha, 3) << ")";
  if (sampled) err << ", seed = " << seed.seed << " (" << seed.source << ")";
  err << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SenmCheckArgs {
  std::string spec;
  std::optional<std::size_t> random;
  std::optional<std::uint64_t> seed;
  std::size_t cap = senm::kDefaultTrajectoryCap;
  bool imitate = false;
  ProblemOptions problem;
  PlanOptions plan;
  std::string out;
};

json matrix_json(const ProbTable& t) {
  json rows = json::array();
  for (std::size_t r = 0; r < t.rows(); ++r) {
    rows.push_back(std::vector<double>(t.row(r).begin(), t.row(r).end()));
  }
  return rows;
}

int cmd_senm_check(const SenmCheckArgs& a, std::ostream& out, std::ostream& err) {
  const bool have_models = !a.spec.empty() || a.random.has_value();
  if (!have_models && !a.imitate) {
    throw ConfigError("senm-check needs --spec FILE, --random N or --imitate");
  }
  json doc = envelope("senm-check");
  int status = kExitOk;

  if (have_models) {
    const SeedInfo seed = resolve_seed(a.seed);
    std::vector<senm::SenmModel> models;
    if (!a.spec.empty()) {
      models.push_back(senm::load_model(a.spec));
      doc["config"]["spec"] = a.spec;
    } else {
      if (*a.random == 0) throw ConfigError("--random needs a positive count");
      for (std::size_t i = 0; i < *a.random; ++i) {
        mc::Rng rng(mc::substream_seed(seed.seed, i));
        models.push_back(senm::random_model(rng));
      }
      doc["config"]["random"] = *a.random;
      doc["config"]["seed"] = seed.seed;
      doc["config"]["seed_source"] = seed.source;
    }
    doc["config"]["cap"] = a.cap;

    double min_d = std::numeric_limits<double>::infinity();
    std::size_t violations = 0;
    std::size_t non_markov = 0;
    for (const auto& m : models) {
      const auto check = senm::check_model(m, a.cap);
      min_d = std::min(min_d, check.report.d_value);
      if (check.report.violated) ++violations;
      if (m.kernel.order() != 1) ++non_markov;
      if (models.size() == 1) {
        doc["result"]["report"] = report_json(check.report);
        doc["result"]["trajectories"] = check.trajectories;
        out << "H(M_L|M_0) = " << fmt(check.report.lhs) << ", sum H(M_j|M_{j-1}) = "
            << fmt(check.report.rhs) << ", D = " << fmt(check.report.d_value, 9) << "\n";
      }
    }
    out << "checked " << models.size() << " ensemble model(s), " << non_markov
        << " with non-Markov kernels; minimum D = " << std::scientific << std::setprecision(3)
        << min_d << std::defaultfloat << "; violations: " << violations << "\n";
    doc["result"]["models"] = models.size();
    doc["result"]["non_markov_models"] = non_markov;
    doc["result"]["min_d"] = min_d;
    doc["result"]["violations"] = violations;
    if (violations > 0) status = kExitCheckFailed;
  }

  if (a.imitate) {
    const auto params = resolve_params(a.problem, err);
    const auto plan = resolve_plan(a.plan, params, a.problem.gamma);
    const auto imitation = senm::fit_imitation(mc::imitation_target(params, plan));
    const auto quantum = entropy::evaluate_inequality(mc::exact_readout_stats(params, plan), plan);

    out << "imitation of L = " << plan.steps() << ", n_d = " << plan.n_d() << " (n_c = "
        << plan.n_c() << ")\n";
    out << "  max adjacent conditional error = " << std::scientific << std::setprecision(3)
        << imitation.max_step_error << std::defaultfloat << "\n";
    out << "  P(m_L=tau | m_0=rest): classical " << fmt(imitation.classical_end_to_end.at(1, 0))
        << ", quantum " << fmt(imitation.target_end_to_end.at(1, 0)) << "\n";
    out << "  end-to-end conditional gap = " << fmt(imitation.end_to_end_gap) << "\n";
    if (imitation.final_marginal_gap) {
      out << "  P(m_L=tau) gap              = " << fmt(*imitation.final_marginal_gap) << "\n";
    }
    out << "  classical D = " << fmt(imitation.classical_report.d_value) << ", quantum D = "
        << fmt(quantum.d_value) << "\n";

    json im;
    im["problem"] = params_json(params, a.problem.gamma);
    im["plan"] = plan_json(plan);
    im["max_step_error"] = imitation.max_step_error;
    im["classical_end_to_end"] = matrix_json(imitation.classical_end_to_end);
    im["quantum_end_to_end"] = matrix_json(imitation.target_end_to_end);
    im["end_to_end_gap"] = imitation.end_to_end_gap;
    im["final_marginal_gap"] =
        imitation.final_marginal_gap ? json(*imitation.final_marginal_gap) : json(nullptr);
    im["classical"] = report_json(imitation.classical_report);
    im["quantum"] = report_json(quantum);
    doc["imitation"] = im;
    if (imitation.classical_report.violated) status = kExitCheckFailed;
  }

  if (!a.out.empty()) write_json(a.out, doc);
  return status;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Readout-inequality simulations for amplitude amplification and stochastic ensembles",
               "readout"};
  app.require_subcommand(1);
  // Subcommand options live under [analyze], [montecarlo], ... in the file.
  app.set_config("--config", "", "Read options from a TOML/INI file with one section per command");
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "Exact D for a plan (or a sweep over n_d)");
  add_problem_options(an, analyze.problem);
  add_plan_options(an, analyze.plan);
  an->add_flag("--sweep", analyze.sweep, "Sweep n_d over multiples of L up to n_c");
  an->add_option("--out", analyze.out, "Write JSON here");

  MonteCarloArgs mcargs;
  auto* mcc = app.add_subcommand("montecarlo", "Finite-shot estimate of D over many trials");
  add_problem_options(mcc, mcargs.problem);
  add_plan_options(mcc, mcargs.plan);
  mcc->add_option("--shots", mcargs.shots, "Measurements per step and conditioning symbol")
      ->capture_default_str();
  mcc->add_option("--trials", mcargs.trials, "Independent inequality tests")->capture_default_str();
  mcc->add_option("--seed", mcargs.seed, std::string("RNG seed (default: $") + kSeedEnvVar + " or 0)");
  mcc->add_option("--threads", mcargs.threads, "Worker threads (0 = all cores)");
  mcc->add_option("--out", mcargs.out, "Write JSON here");

  LandscapeArgs land;
  auto* la = app.add_subcommand("landscape", "D over the (beta, alpha) plane, plus L slices");
  add_problem_options(la, land.problem);
  la->add_option("--resolution", land.resolution, "Grid points per unit of beta/alpha")
      ->capture_default_str();
  la->add_option("--mode", land.mode, "exact or sampled")
      ->check(CLI::IsMember({"exact", "sampled"}))
      ->capture_default_str();
  la->add_option("--shots", land.shots, "Sampled mode: shots per step")->capture_default_str();
  la->add_option("--trials", land.trials, "Sampled mode: trials per cell")->capture_default_str();
  la->add_option("--seed", land.seed, std::string("RNG seed (default: $") + kSeedEnvVar + " or 0)");
  la->add_option("--threads", land.threads, "Worker threads (0 = all cores)");
  la->add_option("--out", land.out, "Write the grid CSV here (default: stdout)");
  la->add_option("--slices-out", land.slices_out, "Write the L-slice CSV here");

  SenmCheckArgs sc;
  auto* se = app.add_subcommand("senm-check", "Exhaustive readout-inequality check for ensembles");
  auto* spec_opt = se->add_option("--spec", sc.spec, "Ensemble model JSON file");
  auto* rand_opt = se->add_option("--random", sc.random, "Check N random models");
  spec_opt->excludes(rand_opt);
  rand_opt->excludes(spec_opt);
  se->add_option("--seed", sc.seed, std::string("RNG seed (default: $") + kSeedEnvVar + " or 0)");
  se->add_option("--cap", sc.cap, "Maximum trajectories per enumeration")->capture_default_str();
  se->add_flag("--imitate", sc.imitate, "Fit a classical ensemble to the quantum step statistics");
  add_problem_options(se, sc.problem);
  add_plan_options(se, sc.plan);
  se->add_option("--out", sc.out, "Write JSON here");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& s : args) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*an) return cmd_analyze(analyze, out, err);
    if (*mcc) return cmd_montecarlo(mcargs, out, err);
    if (*la) return cmd_landscape(land, out, err);
    if (*se) return cmd_senm_check(sc, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumericalError;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumericalError;
  }
  return kExitConfigError;
}

}  // namespace readout::cli
