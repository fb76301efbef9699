#include "readout/qaa.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "readout/errors.hpp"

namespace readout::qaa {

namespace {

constexpr double kNormTolerance = 1e-12;
constexpr double kDriftTolerance = 1e-9;
constexpr Complex kI{0.0, 1.0};

void check_phase(double value, const char* name) {
  if (!(value > 0.0 && value <= kPi)) {
    std::ostringstream os;
    os << name << " must lie in (0, pi], got " << value;
    throw ConfigError(os.str());
  }
}

// exp(i a sigma_x) = cos(a) I + i sin(a) sigma_x
Unitary2 exp_i_sigma_x(double a) {
  const Complex c{std::cos(a)};
  const Complex s = kI * std::sin(a);
  return {c, s, s, c};
}

}  // namespace

std::int64_t closest_integer(double x) { return static_cast<std::int64_t>(std::round(x)); }

TwoLevelState::TwoLevelState(Complex target, Complex perp) : target_(target), perp_(perp) {
  const double drift = std::abs(norm2() - 1.0);
  if (!(drift <= kNormTolerance)) {
    std::ostringstream os;
    os << "two-level state is not normalized (|norm^2 - 1| = " << drift << ")";
    throw NumericalInstabilityError(os.str());
  }
}

TwoLevelState TwoLevelState::basis(std::size_t index) {
  return index == kTarget ? TwoLevelState{1.0, 0.0} : TwoLevelState{0.0, 1.0};
}

Unitary2 Unitary2::operator*(const Unitary2& rhs) const {
  const auto& a = m_;
  const auto& b = rhs.m_;
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

Unitary2 Unitary2::operator+(const Unitary2& rhs) const {
  return {m_[0] + rhs.m_[0], m_[1] + rhs.m_[1], m_[2] + rhs.m_[2], m_[3] + rhs.m_[3]};
}

Unitary2 Unitary2::operator-(const Unitary2& rhs) const {
  return {m_[0] - rhs.m_[0], m_[1] - rhs.m_[1], m_[2] - rhs.m_[2], m_[3] - rhs.m_[3]};
}

Unitary2 Unitary2::scaled(Complex s) const {
  return {m_[0] * s, m_[1] * s, m_[2] * s, m_[3] * s};
}

Unitary2 Unitary2::adjoint() const {
  return {std::conj(m_[0]), std::conj(m_[2]), std::conj(m_[1]), std::conj(m_[3])};
}

double Unitary2::unitarity_error() const {
  return (*this * adjoint()).max_abs_diff(identity());
}

double Unitary2::max_abs_diff(const Unitary2& other) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(m_[i] - other.m_[i]));
  return worst;
}

double Unitary2::max_probability_diff(const Unitary2& other) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    worst = std::max(worst, std::abs(std::norm(m_[i]) - std::norm(other.m_[i])));
  }
  return worst;
}

QaaParams::QaaParams(double p0, double phi, double phi_tau, double phase_tolerance)
    : p0_(p0), phi_(phi), phi_tau_(phi_tau), phase_tolerance_(phase_tolerance) {
  if (!(p0 >= 0.0 && p0 <= 1.0)) {
    std::ostringstream os;
    os << "initial success probability must lie in [0, 1], got " << p0;
    throw ConfigError(os.str());
  }
  check_phase(phi, "phi");
  check_phase(phi_tau, "phi_tau");
  if (!(phase_tolerance >= 0.0)) throw ConfigError("phase tolerance must be non-negative");
  theta_ = 2.0 * std::sqrt(p0_) * std::sin(phi_ / 2.0);
  xi_ = phi_ - phi_tau_;
  // n_c is left at 0 for the degenerate p0 = 0 problem.
  n_c_ = theta_ > 0.0 ? critical_iterations(*this) : 0;
}

QaaParams QaaParams::from_probability(double p0, double phi, double phi_tau,
                                      double phase_tolerance) {
  return QaaParams(p0, phi, phi_tau, phase_tolerance);
}

QaaParams QaaParams::from_theta(double theta, double phi, double phi_tau,
                                double phase_tolerance) {
  if (!(theta > 0.0)) throw ConfigError("theta must be positive");
  check_phase(phi, "phi");
  const double amp = theta / (2.0 * std::sin(phi / 2.0));
  return QaaParams(amp * amp, phi, phi_tau, phase_tolerance);
}

QaaParams QaaParams::from_gamma(int gamma) {
  if (gamma <= 0) throw ConfigError("gamma must be a positive integer");
  return from_theta(std::sqrt(std::pow(10.0, -gamma)));
}

QaaParams QaaParams::grover(double n_items) {
  if (!(n_items >= 1.0)) throw ConfigError("item count must be at least 1");
  return from_probability(1.0 / n_items);
}

bool QaaParams::phase_matched() const { return std::abs(xi_) < phase_tolerance_ || xi_ == 0.0; }

Unitary2 grover_first_order_matrix(const QaaParams& params) {
  const Complex e_phi = std::polar(1.0, params.phi());
  const Complex e_tau = std::polar(1.0, params.phi_tau());
  const double amp = std::sqrt(params.p0());
  return {-e_tau, (1.0 - e_phi) * amp, (1.0 - e_phi) * e_tau * amp, -e_phi};
}

Unitary2 grover_full_matrix(const QaaParams& params) {
  if (params.p0() == 0.0) {
    throw DegenerateProblemError("p0 = 0: there is no target amplitude to amplify");
  }
  const double theta = params.theta();
  const double c = std::cos(theta);
  const double off = std::sin(theta) / theta;
  const Unitary2 first = grover_first_order_matrix(params);
  return {first(0, 0) * c, first(0, 1) * off, first(1, 0) * off, first(1, 1) * c};
}

Unitary2 grover_rotation(double theta) {
  if (!(theta >= 0.0 && theta <= kPi / 2.0)) {
    std::ostringstream os;
    os << "rotation angle must lie in [0, pi/2], got " << theta;
    throw PlanError(os.str());
  }
  return exp_i_sigma_x(theta).scaled(-1.0);
}

TwoLevelState initial_state(const QaaParams& params) {
  const double p0 = params.p0();
  const Complex perp_phase = -kI * std::polar(1.0, params.phi_tau() / 2.0);
  return {Complex{std::sqrt(p0)}, perp_phase * std::sqrt(1.0 - p0)};
}

TwoLevelState rotation_initial_state(double p0) {
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw ConfigError("p0 must lie in [0, 1]");
  return {Complex{std::sqrt(p0)}, -kI * std::sqrt(1.0 - p0)};
}

Unitary2 matrix_power(const Unitary2& u, std::uint64_t k) {
  Unitary2 result = Unitary2::identity();
  Unitary2 base = u;
  while (k > 0) {
    if (k & 1U) result = result * base;
    k >>= 1U;
    if (k > 0) base = base * base;
  }
  return result;
}

TwoLevelState apply_power(const TwoLevelState& state, const Unitary2& u, std::uint64_t k) {
  if (k == 0) return state;
  const Unitary2 p = matrix_power(u, k);
  const Complex t = p(0, 0) * state.target() + p(0, 1) * state.perp();
  const Complex r = p(1, 0) * state.target() + p(1, 1) * state.perp();
  const double n2 = std::norm(t) + std::norm(r);
  const double drift = std::abs(n2 - 1.0);
  if (!(drift <= kDriftTolerance)) {
    std::ostringstream os;
    os << "norm drift " << drift << " after " << k << " applications exceeds "
       << kDriftTolerance;
    throw NumericalInstabilityError(os.str());
  }
  const double scale = 1.0 / std::sqrt(n2);
  return {t * scale, r * scale};
}

double gamma_product(double xi, unsigned m) {
  double g = 1.0;
  double angle = xi / 2.0;
  for (unsigned j = 0; j < m; ++j) {
    g *= std::cos(angle);
    angle *= 2.0;
  }
  return g;
}

double gamma_sine_ratio(double xi, unsigned m) {
  const double denom = std::sin(xi / 2.0);
  if (denom == 0.0) return 1.0;
  return std::sin(std::ldexp(xi / 2.0, static_cast<int>(m))) /
         (std::ldexp(1.0, static_cast<int>(m)) * denom);
}

PowerDecomposition power_decomposition(double theta, double xi, unsigned m) {
  if (m == 0) throw ConfigError("power decomposition needs m >= 1");
  PowerDecomposition out;
  // Each squaring doubles the diagonal phase and multiplies the coupling by
  // 2 cos(current half-phase).
  double coupling = theta;
  double half_phase = xi / 2.0;
  double gamma = 1.0;
  for (unsigned level = 0; level < m; ++level) {
    gamma *= std::cos(half_phase);
    coupling *= 2.0 * std::cos(half_phase);
    half_phase *= 2.0;
  }
  out.gamma = gamma;
  out.gamma_sine_ratio = gamma_sine_ratio(xi, m);
  out.main_term = exp_i_sigma_x(coupling);
  out.error_term = Unitary2::diagonal(std::polar(1.0, half_phase) - 1.0,
                                      std::polar(1.0, -half_phase) - 1.0);
  out.op = out.main_term + out.error_term;
  return out;
}

ProbTable transition_probabilities(const Unitary2& u) {
  ProbTable table(2, 2);
  for (std::size_t from = 0; from < 2; ++from) {
    const double p_target = std::norm(u(kTarget, from));
    const double p_rest = std::norm(u(kRest, from));
    const double total = p_target + p_rest;
    if (!(std::abs(total - 1.0) <= kDriftTolerance)) {
      std::ostringstream os;
      os << "transition column " << from << " has norm^2 " << total;
      throw NumericalInstabilityError(os.str());
    }
    table.at(from, kTarget) = p_target / total;
    table.at(from, kRest) = p_rest / total;
  }
  return table;
}

ProbTable step_conditional_probs(const QaaParams& params, std::int64_t step_power) {
  if (step_power <= 0) throw PlanError("step power n_d/L must be a positive integer");
  const Unitary2 step = matrix_power(grover_full_matrix(params), static_cast<std::uint64_t>(step_power));
  return transition_probabilities(step);
}

std::int64_t critical_iterations(const QaaParams& params) {
  if (!(params.theta() > 0.0)) {
    throw DegenerateProblemError("critical iteration count needs theta > 0");
  }
  const double raw = (kPi / 2.0 - std::sqrt(params.p0())) / params.theta();
  return std::max<std::int64_t>(1, closest_integer(raw));
}

}  // namespace readout::qaa
