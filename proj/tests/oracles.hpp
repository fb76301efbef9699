#pragma once

// Reference computations for the tests. Nothing here calls into the library;
// everything is recomputed from first principles in long double.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using ld = long double;
using cld = std::complex<long double>;

inline ld entropy_bits(const std::vector<ld>& p) {
  ld s = 0;
  for (ld v : p) {
    if (v > 0) s -= v * std::log2(v);
  }
  return s;
}

// Binary entropy of sin^2(x).
inline ld h_sin2(ld x) {
  const ld p = std::sin(x) * std::sin(x);
  return entropy_bits({p, 1 - p});
}

// H(B|A) as H(A,B) - H(A) for a row-major joint with rows a.
inline ld conditional_entropy(const std::vector<ld>& joint, std::size_t rows, std::size_t cols) {
  std::vector<ld> row_mass(rows, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) row_mass[r] += joint[r * cols + c];
  }
  return entropy_bits(joint) - entropy_bits(row_mass);
}

inline std::int64_t round_half_away(ld x) {
  const ld f = std::floor(std::fabs(x) + 0.5L);
  return static_cast<std::int64_t>(x < 0 ? -f : f);
}

inline ld theta_of_gamma(int gamma) { return std::sqrt(std::pow(10.0L, -gamma)); }

inline ld d_value(ld theta, std::int64_t steps, std::int64_t n_d) {
  return steps * h_sin2(static_cast<ld>(n_d / steps) * theta) - h_sin2(n_d * theta);
}

inline std::int64_t quarter_count(ld theta) {
  return round_half_away(std::numbers::pi_v<long double> / (4 * theta));
}

inline ld d_min(ld theta) {
  const auto k = quarter_count(theta);
  return k * h_sin2(theta) - h_sin2(k * theta);
}

// Search over N items with one marked item: explicit N-dimensional state,
// explicit reflections S_psi = I - (1 - e^{i phi}) |psi><psi| and
// S_tau = I - (1 - e^{i phi_tau}) |tau><tau|, iterate G = -S_psi S_tau.
// Returns P(tau) after each iteration, index k = 0..iterations.
inline std::vector<ld> grover_target_probabilities(std::size_t n_items, std::size_t iterations,
                                                   ld phi = std::numbers::pi_v<long double>,
                                                   ld phi_tau = std::numbers::pi_v<long double>) {
  const ld amp = 1 / std::sqrt(static_cast<ld>(n_items));
  std::vector<cld> psi0(n_items, cld(amp, 0));
  std::vector<cld> state = psi0;
  const cld f_phi = cld(1, 0) - std::polar<ld>(1, phi);
  const cld f_tau = cld(1, 0) - std::polar<ld>(1, phi_tau);
  std::vector<ld> out{std::norm(state[0])};
  for (std::size_t k = 0; k < iterations; ++k) {
    state[0] -= f_tau * state[0];
    cld overlap = 0;
    for (std::size_t i = 0; i < n_items; ++i) overlap += std::conj(psi0[i]) * state[i];
    for (std::size_t i = 0; i < n_items; ++i) state[i] = -(state[i] - f_phi * overlap * psi0[i]);
    out.push_back(std::norm(state[0]));
  }
  return out;
}

inline ld rotation_target_probability(ld theta, ld p0, std::int64_t k) {
  const ld s = std::sin(k * theta + std::asin(std::sqrt(p0)));
  return s * s;
}

struct M2 {
  cld a, b, c, d;
  M2 operator*(const M2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
};

inline M2 naive_power(const M2& m, std::uint64_t k) {
  M2 r{1, 0, 0, 1};
  for (std::uint64_t i = 0; i < k; ++i) r = r * m;
  return r;
}

// -exp(i theta sigma_x)
inline M2 rotation(ld theta) {
  const cld c(std::cos(theta), 0);
  const cld s(0, std::sin(theta));
  return {-c, -s, -s, -c};
}

inline ld gamma_product(ld xi, unsigned m) {
  ld g = 1;
  for (unsigned j = 0; j < m; ++j) g *= std::cos(std::ldexp(xi, static_cast<int>(j)) / 2);
  return g;
}

inline ld gamma_sine_ratio(ld xi, unsigned m) {
  const ld den = std::ldexp(std::sin(xi / 2), static_cast<int>(m));
  if (den == 0) return 1;
  return std::sin(std::ldexp(xi, static_cast<int>(m)) / 2) / den;
}

// 2x2 stochastic matrix composed with itself by plain loops.
inline std::vector<ld> compose_power(const std::vector<ld>& t, std::int64_t times) {
  std::vector<ld> r{1, 0, 0, 1};
  for (std::int64_t i = 0; i < times; ++i) {
    std::vector<ld> n(4, 0);
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        for (int c = 0; c < 2; ++c) n[a * 2 + b] += r[a * 2 + c] * t[c * 2 + b];
      }
    }
    r = n;
  }
  return r;
}

// Random distribution with a share of exact zeros.
template <class Rng>
std::vector<double> random_distribution(Rng& rng, std::size_t n, double zero_share = 0.2) {
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution zero(zero_share);
  std::vector<double> p(n);
  double total = 0;
  for (auto& v : p) {
    v = zero(rng) ? 0.0 : expo(rng);
    total += v;
  }
  if (total == 0) {
    p[0] = 1.0;
    return p;
  }
  for (auto& v : p) v /= total;
  return p;
}

}  // namespace oracle
