#pragma once

#include "misti/idlaw.hpp"
#include "misti/joint_pmf.hpp"
#include "misti/process_spec.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace misti {

/// Discrete-time path X_{t0}, X_{t0+1}, ...
struct Trajectory {
  int t0 = 0;
  std::vector<int> values;
};

namespace detail {

template <typename Scalar>
Scalar log_choose(int n, int k) {
  return std::lgamma(Scalar(n + 1)) - std::lgamma(Scalar(k + 1)) - std::lgamma(Scalar(n - k + 1));
}

template <typename Scalar>
Scalar log_beta(Scalar a, Scalar b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

template <typename Scalar>
Vector<Scalar> binomial_pmf(int n, Scalar prob) {
  Vector<Scalar> out = Vector<Scalar>::Zero(n + 1);
  if (prob <= Scalar(0)) {
    out(0) = 1;
    return out;
  }
  if (prob >= Scalar(1)) {
    out(n) = 1;
    return out;
  }
  const Scalar lp = std::log(prob), lq = std::log1p(-prob);
  for (int k = 0; k <= n; ++k) out(k) = std::exp(log_choose<Scalar>(n, k) + Scalar(k) * lp + Scalar(n - k) * lq);
  return out;
}

/// NB(shape, p) pmf on {0..K} by the ratio recursion.
template <typename Scalar>
Vector<Scalar> nb_pmf(Scalar shape, Scalar p, int max_value) {
  Vector<Scalar> out = Vector<Scalar>::Zero(max_value + 1);
  if (shape <= Scalar(0)) {
    out(0) = 1;
    return out;
  }
  const Scalar q = Scalar(1) - p;
  out(0) = std::pow(p, shape);
  for (int k = 1; k <= max_value; ++k) out(k) = out(k - 1) * (shape + Scalar(k - 1)) * q / Scalar(k);
  return out;
}

template <typename Scalar>
Vector<Scalar> convolve_truncated(const Vector<Scalar>& a, const Vector<Scalar>& b, int max_value) {
  Vector<Scalar> out = Vector<Scalar>::Zero(max_value + 1);
  for (int i = 0; i < a.size() && i <= max_value; ++i) {
    if (a(i) == Scalar(0)) continue;
    for (int j = 0; j < b.size() && i + j <= max_value; ++j) out(i + j) += a(i) * b(j);
  }
  return out;
}

inline void require_rho_open(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie strictly inside (0,1)");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Thinning construction

/// Law of the retained part xi in X = xi + eta, xi ~ mu^{rho theta},
/// eta ~ mu^{(1-rho) theta}, conditional on X = x. Entry k is P[xi = k | X = x].
/// Poisson gives Binomial(x, rho); the negative binomial gives the
/// beta-binomial BB(x; theta rho, theta (1-rho)).
template <typename Scalar = double>
Vector<Scalar> thinning_conditional(const IdLaw& law, double theta, double rho, int x) {
  detail::require_scale(theta);
  detail::require_rho_open(rho);
  if (x < 0) throw std::invalid_argument("thinning_conditional: x must be >= 0");
  if (theta == 0.0) {
    if (x != 0) throw std::domain_error("thinning_conditional: conditioning value has zero probability");
    return Vector<Scalar>::Ones(1);
  }
  const Scalar th = theta, r = rho;
  if (law.is_poisson()) return detail::binomial_pmf<Scalar>(x, r);
  if (law.is_negative_binomial()) {
    const Scalar a = th * r, b = th * (Scalar(1) - r);
    Vector<Scalar> out(x + 1);
    const Scalar norm = detail::log_beta(a, b);
    for (int k = 0; k <= x; ++k)
      out(k) = std::exp(detail::log_choose<Scalar>(x, k) + detail::log_beta(Scalar(k) + a, Scalar(x - k) + b) - norm);
    return out;
  }
  const auto whole = id_pmf<Scalar>(law, theta, x);
  if (!(whole(x) > Scalar(0))) throw std::domain_error("thinning_conditional: conditioning value has zero probability");
  const auto kept = id_pmf<Scalar>(law, rho * theta, x);
  const auto dropped = id_pmf<Scalar>(law, (1.0 - rho) * theta, x);
  Vector<Scalar> out(x + 1);
  for (int k = 0; k <= x; ++k) out(k) = kept(k) * dropped(x - k) / whole(x);
  return out;
}

/// One-step transition probability q(y | x) of the thinning chain.
template <typename Scalar = double>
Scalar thinning_transition(const IdLaw& law, double theta, double rho, int x, int y) {
  if (y < 0) return Scalar(0);
  const auto cond = thinning_conditional<Scalar>(law, theta, rho, x);
  const auto innov = id_pmf<Scalar>(law, (1.0 - rho) * theta, y);
  Scalar acc = 0;
  for (int k = 0; k <= std::min(x, y); ++k) acc += cond(k) * innov(y - k);
  return acc;
}

/// Transition matrix of the thinning chain restricted to {0..K}; rows of
/// zero-probability states are left at zero.
template <typename Scalar = double>
Matrix<Scalar> thinning_transition_matrix(const IdLaw& law, double theta, double rho, int max_state) {
  Matrix<Scalar> T = Matrix<Scalar>::Zero(max_state + 1, max_state + 1);
  const auto marginal = id_pmf<Scalar>(law, theta, max_state);
  const auto innov = id_pmf<Scalar>(law, (1.0 - rho) * theta, max_state);
  for (int x = 0; x <= max_state; ++x) {
    if (!(marginal(x) > Scalar(0))) continue;
    const auto cond = thinning_conditional<Scalar>(law, theta, rho, x);
    T.row(x) = detail::convolve_truncated<Scalar>(cond, innov, max_state).transpose();
  }
  return T;
}

/// Binomial(x, rho) survivors plus Po(theta (1-rho)) immigrants, on {0..K}.
template <typename Scalar = double>
Matrix<Scalar> branching_poisson_transition_matrix(double theta, double rho, int max_state) {
  Matrix<Scalar> T(max_state + 1, max_state + 1);
  const auto innov = id_pmf<Scalar>(IdLaw::poisson(), theta * (1.0 - rho), max_state);
  for (int x = 0; x <= max_state; ++x)
    T.row(x) = detail::convolve_truncated<Scalar>(detail::binomial_pmf<Scalar>(x, Scalar(rho)), innov, max_state).transpose();
  return T;
}

/// Y ~ Binomial(x, rho p / (1 - rho q)) then NB(alpha + Y, p / (1 - rho q)), on {0..K}.
template <typename Scalar = double>
Matrix<Scalar> branching_nb_transition_matrix(double alpha, double p, double rho, int max_state) {
  const Scalar q = Scalar(1) - Scalar(p);
  const Scalar denom = Scalar(1) - Scalar(rho) * q;
  const Scalar survive = Scalar(rho) * Scalar(p) / denom;
  const Scalar success = Scalar(p) / denom;
  // nb_rows[k] = NB(alpha + k, success) on {0..K}
  std::vector<Vector<Scalar>> nb_rows;
  for (int k = 0; k <= max_state; ++k) nb_rows.push_back(detail::nb_pmf<Scalar>(Scalar(alpha) + Scalar(k), success, max_state));
  Matrix<Scalar> T = Matrix<Scalar>::Zero(max_state + 1, max_state + 1);
  for (int x = 0; x <= max_state; ++x) {
    const auto bin = detail::binomial_pmf<Scalar>(x, survive);
    for (int k = 0; k <= x; ++k)
      for (int y = k; y <= max_state; ++y) T(x, y) += bin(k) * nb_rows[static_cast<std::size_t>(k)](y - k);
  }
  return T;
}

template <class Rng>
int sample_thinned(const IdLaw& law, double theta, double rho, int x, Rng& rng) {
  if (x == 0) return 0;
  if (law.is_poisson()) return sample_binomial(x, rho, rng);
  if (law.is_negative_binomial()) return sample_beta_binomial(x, theta * rho, theta * (1.0 - rho), rng);
  const auto cond = thinning_conditional<double>(law, theta, rho, x);
  std::discrete_distribution<int> pick(cond.data(), cond.data() + cond.size());
  return pick(rng);
}

/// Thinning chain started from X_{t0} ~ mu^theta.
template <class Rng>
Trajectory simulate_thinning(const IdLaw& law, double theta, double rho, int t0, int steps, Rng& rng) {
  detail::require_scale(theta);
  detail::require_rho_open(rho);
  if (steps < 1) throw std::invalid_argument("simulate_thinning: need at least one step");
  Trajectory path{t0, {}};
  path.values.reserve(static_cast<std::size_t>(steps));
  int x = id_sample(law, theta, rng);
  path.values.push_back(x);
  for (int i = 1; i < steps; ++i) {
    x = sample_thinned(law, theta, rho, x, rng) + id_sample(law, (1.0 - rho) * theta, rng);
    path.values.push_back(x);
  }
  return path;
}

// ---------------------------------------------------------------------------
// Random-measure construction

/// One piece of the partition cut out by the sets G_{t_first}..G_{t_last}:
/// the points lying in exactly the sets with index in [first, last].
template <typename Scalar>
struct Cell {
  int first;
  int last;
  Scalar area;
};

template <typename Scalar = double>
struct CellDecomposition {
  std::vector<int> times;
  std::vector<Cell<Scalar>> cells;

  Scalar area(int first, int last) const {
    for (const auto& c : cells)
      if (c.first == first && c.last == last) return c.area;
    throw std::out_of_range("CellDecomposition: no such interval");
  }
};

/// Areas of the n(n+1)/2 interval cells for times t_1 < ... < t_n:
///   |cell[i..j]| = theta rho^{t_j - t_i} (1 - rho^{t_i - t_{i-1}}) (1 - rho^{t_{j+1} - t_j}),
/// where a factor is 1 when its neighbour index is out of range.
template <typename Scalar = double>
CellDecomposition<Scalar> cell_measures(const std::vector<int>& times, double theta, double rho) {
  detail::require_scale(theta);
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("cell_measures: rho must lie in (0,1]");
  if (times.empty()) throw std::invalid_argument("cell_measures: need at least one time");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] <= times[i - 1]) throw std::invalid_argument("cell_measures: times must be strictly increasing");
  const Scalar log_rho = std::log(Scalar(rho));
  // 1 - rho^d, computed without cancellation
  auto gap_factor = [&](int d) { return -std::expm1(Scalar(d) * log_rho); };
  CellDecomposition<Scalar> out{times, {}};
  const int n = static_cast<int>(times.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Scalar a = Scalar(theta) * std::exp(Scalar(times[j] - times[i]) * log_rho);
      if (i > 0) a *= gap_factor(times[i] - times[i - 1]);
      if (j + 1 < n) a *= gap_factor(times[j + 1] - times[j]);
      out.cells.push_back({i, j, a});
    }
  }
  return out;
}

/// Values X_{t_m} = sum over cells containing m of independent mu^{area} draws.
template <class Rng>
std::vector<int> rm_simulate(const IdLaw& law, double theta, double rho, const std::vector<int>& times, Rng& rng) {
  const auto cells = cell_measures<double>(times, theta, rho);
  std::vector<int> x(times.size(), 0);
  for (const auto& c : cells.cells) {
    if (c.area <= 0.0) continue;
    const int z = id_sample(law, c.area, rng);
    if (z == 0) continue;
    for (int m = c.first; m <= c.last; ++m) x[static_cast<std::size_t>(m)] += z;
  }
  return x;
}

/// Exact joint pmf of the random-measure process on {0..K}^n, by convolving
/// the cell variables one at a time into the table.
template <typename Scalar = double>
JointPmf<Scalar> rm_joint_pmf(const IdLaw& law, double theta, double rho, const std::vector<int>& times, int max_value) {
  const auto cells = cell_measures<Scalar>(times, theta, rho);
  JointPmf<Scalar> pmf(times, max_value);
  const int n = pmf.dims();
  const std::size_t side = static_cast<std::size_t>(max_value) + 1;
  std::vector<std::size_t> stride(static_cast<std::size_t>(n), 1);
  for (int m = n - 2; m >= 0; --m) stride[static_cast<std::size_t>(m)] = stride[static_cast<std::size_t>(m) + 1] * side;

  auto& table = pmf.table();
  table(0) = 1;
  Vector<Scalar> next(table.size());
  std::vector<int> x(static_cast<std::size_t>(n));
  for (const auto& c : cells.cells) {
    const auto f = id_pmf<Scalar>(law, static_cast<double>(c.area), max_value);
    std::size_t shift = 0;
    for (int m = c.first; m <= c.last; ++m) shift += stride[static_cast<std::size_t>(m)];
    next.setZero();
    std::fill(x.begin(), x.end(), 0);
    for (std::size_t idx = 0; idx < pmf.size(); ++idx) {
      const Scalar v = table(static_cast<Eigen::Index>(idx));
      if (v != Scalar(0)) {
        int top = 0;
        for (int m = c.first; m <= c.last; ++m) top = std::max(top, x[static_cast<std::size_t>(m)]);
        for (int k = 0; k <= max_value - top; ++k)
          next(static_cast<Eigen::Index>(idx + static_cast<std::size_t>(k) * shift)) += f(k) * v;
      }
      // odometer increment of x, last coordinate fastest
      for (int m = n - 1; m >= 0; --m) {
        if (++x[static_cast<std::size_t>(m)] <= max_value) break;
        x[static_cast<std::size_t>(m)] = 0;
      }
    }
    table.swap(next);
  }
  pmf.close_leak();
  return pmf;
}

// ---------------------------------------------------------------------------
// Branching chains

template <class Rng>
int branching_step_poisson(int x, double theta, double rho, Rng& rng) {
  if (x < 0) throw std::invalid_argument("branching_step_poisson: state must be >= 0");
  return sample_binomial(x, rho, rng) + sample_poisson(theta * (1.0 - rho), rng);
}

template <class Rng>
int branching_step_nb(int x, double alpha, double p, double rho, Rng& rng) {
  if (x < 0) throw std::invalid_argument("branching_step_nb: state must be >= 0");
  if (!(alpha > 0.0) || !(p > 0.0 && p < 1.0) || !(rho >= 0.0 && rho < 1.0))
    throw std::invalid_argument("branching_step_nb: parameter out of range");
  const double q = 1.0 - p;
  const double denom = 1.0 - rho * q;
  const int y = sample_binomial(x, rho * p / denom, rng);
  return y + sample_negative_binomial(alpha + y, p / denom, rng);
}

/// Discrete-time path of any discrete-time spec, started in stationarity.
/// Random-measure paths are drawn cell by cell and limited to
/// `kMaxRandomMeasureSteps` times.
inline constexpr int kMaxRandomMeasureSteps = 4096;

template <class Rng>
Trajectory simulate(const ProcessSpec& spec, int t0, int steps, Rng& rng) {
  validate(spec);
  if (steps < 1) throw std::invalid_argument("simulate: need at least one step");
  if (is_continuous_time(spec)) throw std::invalid_argument("simulate: continuous-time specs use gillespie");
  Trajectory path{t0, {}};
  auto& v = path.values;
  v.reserve(static_cast<std::size_t>(steps));
  if (const auto* s = std::get_if<ThinningSpec>(&spec)) return simulate_thinning(s->law, s->theta, s->rho, t0, steps, rng);
  if (const auto* s = std::get_if<RandomMeasureSpec>(&spec)) {
    if (steps > kMaxRandomMeasureSteps)
      throw BudgetExceeded("random-measure simulation is limited to " + std::to_string(kMaxRandomMeasureSteps) + " steps");
    std::vector<int> times(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) times[static_cast<std::size_t>(i)] = t0 + i;
    v = rm_simulate(s->law, s->theta, s->rho, times, rng);
    return path;
  }
  if (const auto* s = std::get_if<BranchingPoissonSpec>(&spec)) {
    int x = sample_poisson(s->theta, rng);
    v.push_back(x);
    for (int i = 1; i < steps; ++i) v.push_back(x = branching_step_poisson(x, s->theta, s->rho, rng));
    return path;
  }
  if (const auto* s = std::get_if<BranchingNBSpec>(&spec)) {
    int x = sample_negative_binomial(s->alpha, s->p, rng);
    v.push_back(x);
    for (int i = 1; i < steps; ++i) v.push_back(x = branching_step_nb(x, s->alpha, s->p, s->rho, rng));
    return path;
  }
  if (const auto* s = std::get_if<ConstantSpec>(&spec)) {
    v.assign(static_cast<std::size_t>(steps), id_sample(s->law, s->theta, rng));
    return path;
  }
  const auto& s = std::get<IidSpec>(spec);
  for (int i = 0; i < steps; ++i) v.push_back(id_sample(s.law, s.theta, rng));
  return path;
}

// ---------------------------------------------------------------------------
// Closed forms

/// E[s^{X_1} z^{X_2}] for the Poisson AR(1) chain.
template <typename Scalar = double>
Scalar pgf2_poisson(Scalar s, Scalar z, double theta, double rho) {
  const Scalar th = theta, r = rho;
  return std::exp(th * (Scalar(1) - r) * (s - Scalar(1)) + th * (Scalar(1) - r) * (z - Scalar(1)) + th * r * (s * z - Scalar(1)));
}

/// Branching negative binomial bivariate pgf
/// p^{2 alpha} [(1 - q rho) - q (1-rho)(s+z) + q (q - rho) s z]^{-alpha}.
template <typename Scalar = double>
Scalar pgf2_nb_branching(Scalar s, Scalar z, double alpha, double p, double rho) {
  const Scalar pp = p, q = Scalar(1) - pp, r = rho, a = alpha;
  const Scalar base = (Scalar(1) - q * r) - q * (Scalar(1) - r) * (s + z) + q * (q - r) * s * z;
  return std::pow(pp, Scalar(2) * a) * std::pow(base, -a);
}

/// Negative binomial thinning bivariate pgf
/// p^{theta(2-rho)} (1-qs)^{-theta(1-rho)} (1-qz)^{-theta(1-rho)} (1-qsz)^{-theta rho}.
template <typename Scalar = double>
Scalar pgf2_nb_thinning(Scalar s, Scalar z, double theta, double p, double rho) {
  const Scalar pp = p, q = Scalar(1) - pp, r = rho, th = theta;
  return std::pow(pp, th * (Scalar(2) - r)) * std::pow(Scalar(1) - q * s, -th * (Scalar(1) - r)) *
         std::pow(Scalar(1) - q * z, -th * (Scalar(1) - r)) * std::pow(Scalar(1) - q * s * z, -th * r);
}

/// Terminating Gauss hypergeometric 2F1(a, -n; c; w) = sum_{k<=n} (a)_k (-n)_k / ((c)_k k!) w^k.
template <typename Scalar = double>
Scalar hyp2f1_terminating(Scalar a, int n, Scalar c, Scalar w) {
  if (n < 0) throw std::invalid_argument("hyp2f1_terminating: n must be >= 0");
  Scalar term = 1, sum = 1;
  for (int k = 0; k < n; ++k) {
    term *= (a + Scalar(k)) * Scalar(k - n) / ((c + Scalar(k)) * Scalar(k + 1)) * w;
    sum += term;
  }
  return sum;
}

/// E[z^{X_t} | X_{t-1} = x] for negative binomial thinning:
/// (p / (1 - qz))^{theta(1-rho)} 2F1(theta rho, -x; theta; 1 - z).
template <typename Scalar = double>
Scalar cond_pgf_nb_thinning(Scalar z, int x, double theta, double p, double rho) {
  if (x < 0) throw std::invalid_argument("cond_pgf_nb_thinning: x must be >= 0");
  const Scalar pp = p, q = Scalar(1) - pp, th = theta, r = rho;
  return std::pow(pp / (Scalar(1) - q * z), th * (Scalar(1) - r)) *
         hyp2f1_terminating<Scalar>(th * r, x, th, Scalar(1) - z);
}

/// Negative trinomial pmf, the bivariate branching NB law when rho = q.
template <typename Scalar = double>
Scalar negtrinomial_pmf(int i, int j, double alpha, double q) {
  if (i < 0 || j < 0) return Scalar(0);
  if (!(q > 0.0 && q < 1.0) || !(alpha > 0.0)) throw std::invalid_argument("negtrinomial_pmf: need alpha > 0, q in (0,1)");
  const Scalar a = alpha, qq = q;
  const Scalar logp = std::lgamma(a + Scalar(i + j)) - std::lgamma(a) - std::lgamma(Scalar(i + 1)) - std::lgamma(Scalar(j + 1)) +
                      a * std::log((Scalar(1) - qq) / (Scalar(1) + qq)) + Scalar(i + j) * std::log(qq / (Scalar(1) + qq));
  return std::exp(logp);
}

/// P[X_1 = 0, X_3 = 0 | X_2 = 2] for the negative binomial thinning chain:
/// [p^{theta(1-rho)} (1-rho)]^2 [(1 + theta(1-rho)) / (1 + theta)]^2.
template <typename Scalar = double>
Scalar nb_thinning_cond020(double theta, double p, double rho) {
  const Scalar th = theta, r = rho;
  const Scalar lead = std::pow(Scalar(p), th * (Scalar(1) - r)) * (Scalar(1) - r);
  const Scalar ratio = (Scalar(1) + th * (Scalar(1) - r)) / (Scalar(1) + th);
  return lead * lead * ratio * ratio;
}

/// Same probability for the negative binomial random-measure process:
/// [p^{theta(1-rho)} (1-rho)]^2 (1 + theta(1-rho)^2) / (1 + theta).
template <typename Scalar = double>
Scalar nb_random_measure_cond020(double theta, double p, double rho) {
  const Scalar th = theta, r = rho;
  const Scalar lead = std::pow(Scalar(p), th * (Scalar(1) - r)) * (Scalar(1) - r);
  return lead * lead * (Scalar(1) + th * (Scalar(1) - r) * (Scalar(1) - r)) / (Scalar(1) + th);
}

// ---------------------------------------------------------------------------
// Classification of MISTI parameters

enum class MistiFamily { Constant, Iid, BranchingPoisson, BranchingNB };

std::string to_string(MistiFamily f);

struct MistiClass {
  MistiFamily family;
  /// Representative spec. For Constant and Iid the ID law is arbitrary with
  /// nu_1 = theta1; the representative uses Po(theta1).
  ProcessSpec spec;
  double theta1;
  double rho = 0.0;    ///< lag-one autocorrelation (0 for Iid, 1 for Constant)
  double q = 0.0;      ///< NB only
  double alpha = 0.0;  ///< NB only
};

/// Maps (r0, r1, r2, theta1) onto one of the four MISTI families.
/// Throws std::invalid_argument for out-of-range input and
/// std::domain_error for infeasible combinations (q >= 1, inconsistent r2).
MistiClass misti_classify(double r0, double r1, double r2, double theta1);

}  // namespace misti
