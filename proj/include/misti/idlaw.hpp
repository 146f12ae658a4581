#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace misti {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

struct PoissonFamily {};

/// Negative binomial with success probability p; the semigroup scale is the
/// shape, so mu^theta = NB(theta, p) has mean theta (1-p) / p.
struct NegBinomialFamily {
  double p;
};

/// Compound Poisson law given directly by its Levy masses nu_j (j >= 1).
struct GenericLevyFamily {
  std::map<int, double> nu;
};

/// An infinitely divisible convolution semigroup {mu^theta} on the
/// nonnegative integers. The scale theta is passed per call.
class IdLaw {
 public:
  using Family = std::variant<PoissonFamily, NegBinomialFamily, GenericLevyFamily>;

  static IdLaw poisson();
  static IdLaw negative_binomial(double p);
  static IdLaw generic_levy(std::map<int, double> nu);

  const Family& family() const { return family_; }
  bool is_poisson() const { return std::holds_alternative<PoissonFamily>(family_); }
  bool is_negative_binomial() const { return std::holds_alternative<NegBinomialFamily>(family_); }
  bool is_generic() const { return std::holds_alternative<GenericLevyFamily>(family_); }

  /// Success probability of the negative binomial family; throws otherwise.
  double nb_p() const;
  const std::map<int, double>& generic_masses() const;

  /// Levy mass of the whole semigroup at theta = 1.
  double unit_total_mass() const;

  std::string describe() const;

  friend bool operator==(const IdLaw& a, const IdLaw& b);

 private:
  explicit IdLaw(Family f) : family_(std::move(f)) {}
  Family family_;
};

bool operator==(const IdLaw& a, const IdLaw& b);

namespace detail {

inline void require_scale(double theta) {
  if (!(theta >= 0.0) || !std::isfinite(theta))
    throw std::invalid_argument("ID scale theta must be finite and >= 0");
}

}  // namespace detail

/// Smallest J with theta q^J / J below `eps`; bounds the negative binomial
/// Levy series.
int nb_levy_cutoff(double theta, double q, double eps = 1e-16);

/// Levy masses nu_1..nu_J of mu^theta (entry j-1 holds nu_j).
template <typename Scalar = double>
Vector<Scalar> levy_masses(const IdLaw& law, double theta, int max_jump) {
  detail::require_scale(theta);
  if (max_jump < 1) throw std::invalid_argument("levy_masses: max jump must be >= 1");
  Vector<Scalar> nu = Vector<Scalar>::Zero(max_jump);
  const Scalar th = theta;
  if (law.is_poisson()) {
    nu(0) = th;
  } else if (law.is_negative_binomial()) {
    const Scalar q = Scalar(1) - Scalar(law.nb_p());
    Scalar qj = 1;
    for (int j = 1; j <= max_jump; ++j) {
      qj *= q;
      nu(j - 1) = th * qj / Scalar(j);
    }
  } else {
    for (const auto& [j, mass] : law.generic_masses())
      if (j <= max_jump) nu(j - 1) = th * Scalar(mass);
  }
  return nu;
}

/// Total Levy mass nu_+ of mu^theta; P(0) = exp(-nu_+).
template <typename Scalar = double>
Scalar levy_total_mass(const IdLaw& law, double theta) {
  detail::require_scale(theta);
  if (law.is_negative_binomial()) return -Scalar(theta) * std::log(Scalar(law.nb_p()));
  return Scalar(theta) * Scalar(law.unit_total_mass());
}

/// Compound Poisson pmf on {0..K} from Levy masses by the recursion
///   P(0) = exp(-total),  k P(k) = sum_{j=1..k} j nu_j P(k-j).
/// Exact on the truncated support when `masses` covers jumps 1..K.
template <typename Scalar = double>
Vector<Scalar> compound_poisson_pmf(const Vector<Scalar>& masses, Scalar total, int max_value) {
  if (max_value < 0) throw std::invalid_argument("compound_poisson_pmf: K must be >= 0");
  Vector<Scalar> pmf = Vector<Scalar>::Zero(max_value + 1);
  pmf(0) = std::exp(-total);
  const int jmax = static_cast<int>(masses.size());
  for (int k = 1; k <= max_value; ++k) {
    Scalar acc = 0;
    for (int j = 1; j <= std::min(k, jmax); ++j) acc += Scalar(j) * masses(j - 1) * pmf(k - j);
    pmf(k) = acc / Scalar(k);
  }
  return pmf;
}

/// Probabilities mu^theta({0}), ..., mu^theta({K}).
template <typename Scalar = double>
Vector<Scalar> id_pmf(const IdLaw& law, double theta, int max_value) {
  if (max_value < 0) throw std::invalid_argument("id_pmf: K must be >= 0");
  detail::require_scale(theta);
  Vector<Scalar> pmf = Vector<Scalar>::Zero(max_value + 1);
  if (theta == 0.0) {
    pmf(0) = 1;
    return pmf;
  }
  const Scalar th = theta;
  if (law.is_poisson()) {
    pmf(0) = std::exp(-th);
    for (int k = 1; k <= max_value; ++k) pmf(k) = pmf(k - 1) * th / Scalar(k);
  } else if (law.is_negative_binomial()) {
    const Scalar p = law.nb_p();
    const Scalar q = Scalar(1) - p;
    pmf(0) = std::pow(p, th);
    for (int k = 1; k <= max_value; ++k) pmf(k) = pmf(k - 1) * (th + Scalar(k - 1)) * q / Scalar(k);
  } else {
    const int J = std::max(1, max_value);
    pmf = compound_poisson_pmf<Scalar>(levy_masses<Scalar>(law, theta, J),
                                       levy_total_mass<Scalar>(law, theta), max_value);
  }
  return pmf;
}

/// Probability generating function E[z^X] for X ~ mu^theta, 0 <= z <= 1.
template <typename Scalar = double>
Scalar id_pgf(const IdLaw& law, double theta, Scalar z) {
  detail::require_scale(theta);
  if (!(z >= Scalar(0) && z <= Scalar(1))) throw std::invalid_argument("id_pgf: z must lie in [0,1]");
  const Scalar th = theta;
  if (law.is_poisson()) return std::exp(th * (z - Scalar(1)));
  if (law.is_negative_binomial()) {
    const Scalar p = law.nb_p();
    return std::pow(p / (Scalar(1) - (Scalar(1) - p) * z), th);
  }
  Scalar expo = 0;
  for (const auto& [j, mass] : law.generic_masses())
    expo += (std::pow(z, j) - Scalar(1)) * Scalar(mass) * th;
  return std::exp(expo);
}

// ---------------------------------------------------------------------------
// Samplers. All take a caller-owned uniform random bit generator.

template <class Rng>
int sample_poisson(double mean, Rng& rng) {
  if (mean <= 0.0) return 0;
  return std::poisson_distribution<int>(mean)(rng);
}

template <class Rng>
int sample_binomial(int n, double prob, Rng& rng) {
  if (n <= 0 || prob <= 0.0) return 0;
  if (prob >= 1.0) return n;
  return std::binomial_distribution<int>(n, prob)(rng);
}

/// NB(shape, p) as a gamma-mixed Poisson.
template <class Rng>
int sample_negative_binomial(double shape, double p, Rng& rng) {
  if (shape <= 0.0 || p >= 1.0) return 0;
  const double rate = std::gamma_distribution<double>(shape, (1.0 - p) / p)(rng);
  return sample_poisson(rate, rng);
}

/// Beta-binomial BB(n; a, b) via a gamma-ratio beta draw.
template <class Rng>
int sample_beta_binomial(int n, double a, double b, Rng& rng) {
  if (n <= 0) return 0;
  if (a <= 0.0) return 0;
  if (b <= 0.0) return n;
  const double ga = std::gamma_distribution<double>(a, 1.0)(rng);
  const double gb = std::gamma_distribution<double>(b, 1.0)(rng);
  const double sum = ga + gb;
  const double prob = sum > 0.0 ? ga / sum : a / (a + b);
  return sample_binomial(n, prob, rng);
}

/// One draw from mu^theta. Generic laws are drawn as a Poisson number of
/// jumps with sizes distributed as nu / nu_+.
template <class Rng>
int id_sample(const IdLaw& law, double theta, Rng& rng) {
  detail::require_scale(theta);
  if (theta == 0.0) return 0;
  if (law.is_poisson()) return sample_poisson(theta, rng);
  if (law.is_negative_binomial()) return sample_negative_binomial(theta, law.nb_p(), rng);

  const auto& masses = law.generic_masses();
  const int jumps = sample_poisson(theta * law.unit_total_mass(), rng);
  if (jumps == 0) return 0;
  std::vector<int> sizes;
  std::vector<double> weights;
  for (const auto& [j, mass] : masses) {
    sizes.push_back(j);
    weights.push_back(mass);
  }
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  int total = 0;
  for (int i = 0; i < jumps; ++i) total += sizes[pick(rng)];
  return total;
}

}  // namespace misti
