#pragma once

#include "misti/idlaw.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

namespace misti {

/// Linear death process with immigration: birth rate lambda*theta, death
/// rate lambda*j. Stationary law Po(theta).
struct PoissonBD {
  double theta;
  double lambda;
};

/// Linear birth-death process with immigration: birth rate
/// lambda*(alpha+j)*(1-p)/p, death rate lambda*j/p. Stationary law NB(alpha, p).
struct NegBinomialBD {
  double alpha;
  double p;
  double lambda;
};

using BDModel = std::variant<PoissonBD, NegBinomialBD>;

void validate(const BDModel& model);

struct BDRates {
  double birth;
  double death;
};

BDRates bd_rates(const BDModel& model, int state);

double bd_lambda(const BDModel& model);

/// Same model with lambda = 1. The stationary law does not depend on lambda.
BDModel with_unit_rate(const BDModel& model);

/// Piecewise-constant path stored as change points: state `states[i]` holds
/// on [times[i], times[i+1]) and the last one until `horizon`.
struct EventPath {
  std::vector<double> times;
  std::vector<int> states;
  double horizon = 0.0;

  int state_at(double t) const;
  /// States on the grid start, start+step, ... below the horizon.
  std::vector<int> sample_grid(double start, double step) const;
};

/// Event-driven simulation on [0, horizon] from x0.
template <class Rng>
EventPath gillespie(const BDModel& model, int x0, double horizon, Rng& rng) {
  validate(model);
  if (!(horizon > 0.0)) throw std::invalid_argument("gillespie: horizon must be > 0");
  if (x0 < 0) throw std::invalid_argument("gillespie: initial state must be >= 0");
  EventPath path;
  path.horizon = horizon;
  path.times.push_back(0.0);
  path.states.push_back(x0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double t = 0.0;
  int x = x0;
  for (;;) {
    const auto [birth, death] = bd_rates(model, x);
    const double total = birth + death;
    if (total <= 0.0) break;
    t += std::exponential_distribution<double>(total)(rng);
    if (t >= horizon) break;
    x += unif(rng) * total < birth ? 1 : -1;
    path.times.push_back(t);
    path.states.push_back(x);
  }
  return path;
}

namespace detail {

/// Unnormalized detailed-balance weights w_0 = 1, w_{i+1} = w_i beta_i / delta_{i+1},
/// extended past K until the remaining tail is negligible.
template <typename Scalar>
std::vector<Scalar> bd_weights(const BDModel& model, int max_state) {
  validate(model);
  if (max_state < 0) throw std::invalid_argument("stationary_bd: K must be >= 0");
  const BDModel unit = with_unit_rate(model);
  std::vector<Scalar> w{Scalar(1)};
  Scalar norm = 1;
  for (int j = 0;; ++j) {
    const auto r = bd_rates(unit, j);
    const auto r1 = bd_rates(unit, j + 1);
    const Scalar next = w.back() * Scalar(r.birth) / Scalar(r1.death);
    w.push_back(next);
    norm += next;
    const bool past_k = j + 1 >= max_state;
    const bool shrinking = Scalar(r.birth) < Scalar(r1.death);
    if (past_k && shrinking && next < norm * Scalar(1e-22)) break;
    if (j > 1000000) throw std::runtime_error("stationary_bd: normalizer did not converge");
  }
  return w;
}

}  // namespace detail

/// Stationary pmf pi_0..pi_K from the detailed-balance product
///   pi_i proportional to prod_{0<=j<i} beta_j / delta_{j+1},
/// normalized over 0..K. The mass the untruncated law puts beyond K is
/// stationary_bd_tail.
template <typename Scalar = double>
Vector<Scalar> stationary_bd(const BDModel& model, int max_state) {
  const auto w = detail::bd_weights<Scalar>(model, max_state);
  Vector<Scalar> pi(max_state + 1);
  for (int i = 0; i <= max_state; ++i) pi(i) = w[static_cast<std::size_t>(i)];
  return pi / pi.sum();
}

/// P[X > K] under the untruncated stationary law.
template <typename Scalar = double>
Scalar stationary_bd_tail(const BDModel& model, int max_state) {
  const auto w = detail::bd_weights<Scalar>(model, max_state);
  Scalar head = 0, tail = 0;
  for (std::size_t i = 0; i < w.size(); ++i) (static_cast<int>(i) <= max_state ? head : tail) += w[i];
  return tail / (head + tail);
}

/// Generator restricted to {0..K}. The birth out of state K is dropped from
/// the off-diagonal but kept on the diagonal, so rows leak rather than being
/// silently renormalized.
template <typename Scalar = double>
Matrix<Scalar> generator_matrix(const BDModel& model, int max_state) {
  validate(model);
  Matrix<Scalar> Q = Matrix<Scalar>::Zero(max_state + 1, max_state + 1);
  for (int j = 0; j <= max_state; ++j) {
    const auto [birth, death] = bd_rates(model, j);
    if (j < max_state) Q(j, j + 1) = birth;
    if (j > 0) Q(j, j - 1) = death;
    Q(j, j) = -(birth + death);
  }
  return Q;
}

struct GeneratorResidual {
  double interior;  ///< max_j |(pi Q)_j| over j < K
  double boundary;  ///< |(pi Q)_K|, affected by truncation
};

template <typename Scalar>
GeneratorResidual generator_residual(const BDModel& model, const Vector<Scalar>& pmf) {
  const int K = static_cast<int>(pmf.size()) - 1;
  if (K < 0) throw std::invalid_argument("generator_residual: empty pmf");
  const Matrix<Scalar> Q = generator_matrix<Scalar>(model, K);
  const Vector<Scalar> flux = Q.transpose() * pmf;
  GeneratorResidual res{0.0, static_cast<double>(std::abs(flux(K)))};
  for (int j = 0; j < K; ++j) res.interior = std::max(res.interior, static_cast<double>(std::abs(flux(j))));
  return res;
}

/// exp(tQ) on {0..K} by uniformization: with Lambda = max_j (beta_j+delta_j)
/// and P = I + Q/Lambda,  exp(tQ) = sum_n Po(Lambda t)(n) P^n, summed until the
/// remaining Poisson tail is below `tail_eps`.
template <typename Scalar = double>
Matrix<Scalar> transition_uniformized(const BDModel& model, double t, int max_state, double tail_eps = 1e-12) {
  if (!(t >= 0.0)) throw std::invalid_argument("transition_uniformized: t must be >= 0");
  const int n = max_state + 1;
  const Matrix<Scalar> Q = generator_matrix<Scalar>(model, max_state);
  Scalar rate = 0;
  for (int j = 0; j < n; ++j) rate = std::max(rate, -Q(j, j));
  if (t == 0.0 || rate == Scalar(0)) return Matrix<Scalar>::Identity(n, n);

  const Matrix<Scalar> P = Matrix<Scalar>::Identity(n, n) + Q / rate;
  const Scalar mean = rate * Scalar(t);
  // Poisson weights in log space; e^{-mean} underflows for large Lambda t.
  Matrix<Scalar> result = Matrix<Scalar>::Zero(n, n);
  Matrix<Scalar> power = Matrix<Scalar>::Identity(n, n);
  Scalar cumulative = 0;
  const long cap = static_cast<long>(mean + 40.0 * std::sqrt(static_cast<double>(mean)) + 100.0);
  for (long k = 0; k <= cap; ++k) {
    const Scalar logw = -mean + Scalar(k) * std::log(mean) - std::lgamma(Scalar(k) + Scalar(1));
    const Scalar w = std::exp(logw);
    result += w * power;
    cumulative += w;
    if (Scalar(k) > mean && Scalar(1) - cumulative < Scalar(tail_eps)) break;
    power = power * P;
  }
  return result;
}

}  // namespace misti
