#pragma once

// Quantum amplitude amplification on the two-dimensional plane spanned by the
// target |tau> and its complement |tau_perp>. Basis index 0 is |tau>, index 1
// is |tau_perp>.

#include <array>
#include <complex>
#include <cstdint>
#include <numbers>

#include "readout/prob_table.hpp"

namespace readout::qaa {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr std::size_t kTarget = 0;
inline constexpr std::size_t kRest = 1;

// Closest integer with halves rounded away from zero.
std::int64_t closest_integer(double x);

class TwoLevelState {
 public:
  // Throws NumericalInstabilityError if the amplitudes are not normalized
  // within 1e-12.
  TwoLevelState(Complex target, Complex perp);

  static TwoLevelState basis(std::size_t index);

  Complex target() const { return target_; }
  Complex perp() const { return perp_; }
  Complex amplitude(std::size_t index) const { return index == kTarget ? target_ : perp_; }

  double target_probability() const { return std::norm(target_); }
  double probability(std::size_t index) const { return std::norm(amplitude(index)); }
  double norm2() const { return std::norm(target_) + std::norm(perp_); }

 private:
  Complex target_;
  Complex perp_;
};

// 2x2 complex matrix. The name reflects its use; unitarity is a checked
// property rather than a construction invariant so that first-order
// approximations (and deliberately broken inputs) can be represented.
class Unitary2 {
 public:
  Unitary2() : m_{Complex{1.0}, Complex{0.0}, Complex{0.0}, Complex{1.0}} {}
  Unitary2(Complex a00, Complex a01, Complex a10, Complex a11) : m_{a00, a01, a10, a11} {}

  static Unitary2 identity() { return {}; }
  static Unitary2 diagonal(Complex d0, Complex d1) { return {d0, Complex{}, Complex{}, d1}; }
  static Unitary2 sigma_x() { return {Complex{}, Complex{1.0}, Complex{1.0}, Complex{}}; }

  Complex operator()(std::size_t r, std::size_t c) const { return m_[r * 2 + c]; }

  Unitary2 operator*(const Unitary2& rhs) const;
  Unitary2 operator+(const Unitary2& rhs) const;
  Unitary2 operator-(const Unitary2& rhs) const;
  Unitary2 scaled(Complex s) const;
  Unitary2 adjoint() const;

  // max_ij |(U U^dagger - I)_ij|
  double unitarity_error() const;
  // max_ij |a_ij - b_ij|
  double max_abs_diff(const Unitary2& other) const;
  // max_ij | |a_ij|^2 - |b_ij|^2 |, insensitive to phase conventions.
  double max_probability_diff(const Unitary2& other) const;

 private:
  std::array<Complex, 4> m_;
};

class QaaParams {
 public:
  static constexpr double kDefaultPhaseTolerance = 1e-12;
  static constexpr double kSmallP0Limit = 1e-2;

  // p0 = P_Q(m0 = tau | psi0); phases in (0, pi].
  static QaaParams from_probability(double p0, double phi = kPi, double phi_tau = kPi,
                                    double phase_tolerance = kDefaultPhaseTolerance);
  // Picks p0 so that 2 sqrt(p0) sin(phi/2) == theta.
  static QaaParams from_theta(double theta, double phi = kPi, double phi_tau = kPi,
                              double phase_tolerance = kDefaultPhaseTolerance);
  // Problem scale gamma: theta = sqrt(10^-gamma), phi = phi_tau = pi.
  static QaaParams from_gamma(int gamma);
  // Textbook search over N items with a single marked one.
  static QaaParams grover(double n_items);

  double p0() const { return p0_; }
  double phi() const { return phi_; }
  double phi_tau() const { return phi_tau_; }
  double theta() const { return theta_; }
  double xi() const { return xi_; }
  std::int64_t n_c() const { return n_c_; }
  double phase_tolerance() const { return phase_tolerance_; }

  bool phase_matched() const;
  // False when p0 is large enough that the first-order plane reduction is
  // questionable; callers surface this as a warning.
  bool small_p0_regime() const { return p0_ <= kSmallP0Limit; }

 private:
  QaaParams(double p0, double phi, double phi_tau, double phase_tolerance);

  double p0_;
  double phi_;
  double phi_tau_;
  double theta_;
  double xi_;
  std::int64_t n_c_;
  double phase_tolerance_;
};

struct MeasurementSetting {
  Unitary2 projector_target = Unitary2::diagonal(1.0, 0.0);
  Unitary2 projector_rest = Unitary2::diagonal(0.0, 1.0);

  // Observable Pi_rest - Pi_target.
  Unitary2 observable() const { return projector_rest - projector_target; }
};

// One amplification step on the plane. Agrees with the first-order
// two-reflection matrix
//   [ -e^{i phi_tau}                     (1 - e^{i phi}) sqrt(p0) ]
//   [ (1 - e^{i phi}) e^{i phi_tau} sqrt(p0)       -e^{i phi}     ]
// up to O(p0), and is exactly unitary: diagonal entries carry cos(theta) and
// off-diagonal entries carry sin(theta)/theta.
Unitary2 grover_full_matrix(const QaaParams& params);

// The literal first-order matrix above. Not unitary for p0 > 0.
Unitary2 grover_first_order_matrix(const QaaParams& params);

// -exp(i theta sigma_x). Throws PlanError if theta is outside [0, pi/2].
Unitary2 grover_rotation(double theta);

// psi_0 in the frame of grover_full_matrix.
TwoLevelState initial_state(const QaaParams& params);
// psi_0 in the frame of grover_rotation.
TwoLevelState rotation_initial_state(double p0);

// u^k by repeated squaring.
Unitary2 matrix_power(const Unitary2& u, std::uint64_t k);

// u^k |state>. Drift of the norm up to 1e-9 is renormalized away; anything
// larger throws NumericalInstabilityError.
TwoLevelState apply_power(const TwoLevelState& state, const Unitary2& u, std::uint64_t k);

struct PowerDecomposition {
  Unitary2 op;          // H^{2^m} = main + error
  Unitary2 main_term;   // exp(i 2^m gamma theta sigma_x)
  Unitary2 error_term;  // diag(e^{i 2^m xi/2} - 1, e^{-i 2^m xi/2} - 1)
  double gamma = 1.0;              // product of cos(2^j xi / 2)
  double gamma_sine_ratio = 1.0;   // sin(2^m xi/2) / (2^m sin(xi/2))
};

// Power 2^m of H = diag(e^{i xi/2}, e^{-i xi/2}) + i theta sigma_x in the
// main-plus-error form. Requires m >= 1.
PowerDecomposition power_decomposition(double theta, double xi, unsigned m);

// Gamma by the cosine product and by the sine ratio (limit 1 at xi = 0).
double gamma_product(double xi, unsigned m);
double gamma_sine_ratio(double xi, unsigned m);

// P(m_j | m_{j-1}) for one inequality step of step_power iterations; rows
// index the conditioning symbol, columns the outcome (0 = tau).
ProbTable step_conditional_probs(const QaaParams& params, std::int64_t step_power);

// Stochastic matrix |<b|u|a>|^2 with rows a.
ProbTable transition_probabilities(const Unitary2& u);

// CI[(pi/2 - sqrt(p0)) / theta], at least 1.
std::int64_t critical_iterations(const QaaParams& params);

}  // namespace readout::qaa
