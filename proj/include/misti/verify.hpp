#pragma once

#include "misti/ctmc.hpp"
#include "misti/discrete.hpp"
#include "misti/joint_pmf.hpp"
#include "misti/process_spec.hpp"
#include "misti/series.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace misti {

/// Outcome of one property check. pass holds exactly when violation <= tolerance.
struct VerifyReport {
  std::string name;
  double violation = 0.0;
  std::vector<int> witness;
  double tolerance = 0.0;
  bool pass = true;
  /// Lowest-total-degree lattice point whose violation exceeds the tolerance
  /// (ties broken lexicographically), when the check scans a lattice.
  std::optional<std::vector<int>> first_witness;
  std::map<std::string, double> details;
};

VerifyReport make_report(std::string name, double violation, std::vector<int> witness, double tolerance);

/// One JSON object per line: name, violation, witness, tolerance, pass and
/// any extra fields.
std::string to_json_line(const VerifyReport& report);

enum class Precision { Standard, Extended };

inline constexpr double kStationarityTol = 1e-9;
inline constexpr double kReversibilityTol = 1e-10;
inline constexpr double kMarkovTol = 1e-9;
inline constexpr double kMvidTolStandard = 1e-8;
inline constexpr double kMvidTolExtended = 1e-12;

/// Internal lattice used between observed times; keeps the marginal tail
/// far below any reported tolerance.
int internal_lattice(const ProcessSpec& spec, int max_value);

/// One-step transition matrix on {0..K} for the Markov specs (unit time for
/// continuous-time specs). Throws std::logic_error for the random-measure spec.
template <typename Scalar = double>
Matrix<Scalar> one_step_transition(const ProcessSpec& spec, int max_state) {
  validate(spec);
  const int n = max_state + 1;
  if (const auto* s = std::get_if<ThinningSpec>(&spec)) return thinning_transition_matrix<Scalar>(s->law, s->theta, s->rho, max_state);
  if (const auto* s = std::get_if<BranchingPoissonSpec>(&spec)) return branching_poisson_transition_matrix<Scalar>(s->theta, s->rho, max_state);
  if (const auto* s = std::get_if<BranchingNBSpec>(&spec)) return branching_nb_transition_matrix<Scalar>(s->alpha, s->p, s->rho, max_state);
  if (std::holds_alternative<ConstantSpec>(spec)) return Matrix<Scalar>::Identity(n, n);
  if (std::holds_alternative<IidSpec>(spec)) {
    const Vector<Scalar> pi = marginal_pmf<Scalar>(spec, max_state);
    return Vector<Scalar>::Ones(n) * pi.transpose();
  }
  if (const auto* s = std::get_if<PoissonBD>(&spec)) return transition_uniformized<Scalar>(BDModel{*s}, 1.0, max_state);
  if (const auto* s = std::get_if<NegBinomialBD>(&spec)) return transition_uniformized<Scalar>(BDModel{*s}, 1.0, max_state);
  throw std::logic_error("one_step_transition: the random-measure process is not Markov");
}

/// Exact joint pmf on {0..K}^n at the given times. Markov specs use forward
/// products of transition matrices over an internal lattice; the
/// random-measure spec uses the cell convolution. When `initial` is given the
/// chain starts at time 0 from that law (times must then be >= 0) instead of
/// from the stationary marginal.
template <typename Scalar = double>
JointPmf<Scalar> chain_joint_pmf(const ProcessSpec& spec, const std::vector<int>& times, int max_value,
                                 const Vector<Scalar>* initial = nullptr) {
  validate(spec);
  if (const auto* s = std::get_if<RandomMeasureSpec>(&spec)) {
    if (initial) throw std::invalid_argument("chain_joint_pmf: the random-measure process has no initial law");
    return rm_joint_pmf<Scalar>(s->law, s->theta, s->rho, times, max_value);
  }
  JointPmf<Scalar> pmf(times, max_value);
  const int kint = initial ? std::max(internal_lattice(spec, max_value), static_cast<int>(initial->size()) - 1)
                           : internal_lattice(spec, max_value);
  const Matrix<Scalar> step = one_step_transition<Scalar>(spec, kint);

  // Powers of the one-step matrix, cached by gap.
  std::map<int, Matrix<Scalar>> powers;
  auto power = [&](int g) -> const Matrix<Scalar>& {
    auto it = powers.find(g);
    if (it != powers.end()) return it->second;
    Matrix<Scalar> m = Matrix<Scalar>::Identity(kint + 1, kint + 1);
    for (int i = 0; i < g; ++i) m = m * step;
    return powers.emplace(g, std::move(m)).first->second;
  };

  Vector<Scalar> start;
  if (initial) {
    if (times.front() < 0) throw std::invalid_argument("chain_joint_pmf: times must be >= 0 with an initial law");
    Vector<Scalar> init = Vector<Scalar>::Zero(kint + 1);
    init.head(initial->size()) = *initial;
    start = (init.transpose() * power(times.front())).transpose();
  } else {
    start = marginal_pmf<Scalar>(spec, kint);
  }

  const int n = pmf.dims();
  std::vector<const Matrix<Scalar>*> links;
  for (int i = 1; i < n; ++i) links.push_back(&power(times[static_cast<std::size_t>(i)] - times[static_cast<std::size_t>(i) - 1]));
  auto& table = pmf.table();
  for (std::size_t idx = 0; idx < pmf.size(); ++idx) {
    const auto x = pmf.unflatten(idx);
    Scalar v = start(x[0]);
    for (int i = 1; i < n && v != Scalar(0); ++i) v *= (*links[static_cast<std::size_t>(i) - 1])(x[static_cast<std::size_t>(i) - 1], x[static_cast<std::size_t>(i)]);
    table(static_cast<Eigen::Index>(idx)) = v;
  }
  pmf.close_leak();
  return pmf;
}

/// Sup-norm distance between two tables on the same lattice.
template <typename Scalar>
VerifyReport compare_tables(std::string name, const JointPmf<Scalar>& a, const JointPmf<Scalar>& b, double tolerance) {
  if (a.size() != b.size() || a.dims() != b.dims()) throw std::invalid_argument("compare_tables: lattice mismatch");
  Eigen::Index where = 0;
  const double worst = static_cast<double>((a.table() - b.table()).cwiseAbs().maxCoeff(&where));
  return make_report(std::move(name), worst, a.unflatten(static_cast<std::size_t>(where)), tolerance);
}

/// mu_T against mu_{s+T} for T = {0..window-1} and s in {1, 2}.
VerifyReport check_stationarity(const ProcessSpec& spec, int window, int max_value,
                                const Vector<double>* initial = nullptr, double tolerance = kStationarityTol);

/// sup_{x,y} |p(x) q(y|x) - p(y) q(x|y)| for a marginal and transition matrix.
VerifyReport check_reversibility(const Vector<double>& marginal, const Matrix<double>& transition,
                                 double tolerance = kReversibilityTol, std::string name = "reversibility");

/// Detailed balance of the one-step law for Markov specs; for the
/// random-measure spec, the table at times {0,1,3} against the axis-reversed
/// table at {-3,-1,0}.
VerifyReport check_reversibility(const ProcessSpec& spec, int max_value, double tolerance = kReversibilityTol);

/// max over b with P[X_2 = b] > 1e-12 of sup_{a,c} |P[a,c|b] - P[a|b] P[c|b]|.
/// Rows are conditioned on the table's own row mass.
VerifyReport check_markov_triple(const JointPmf<double>& triple, double tolerance = kMarkovTol);

/// |P[a,c|b] - P[a|b] P[c|b]| at one lattice point of a trivariate table.
double markov_gap(const JointPmf<double>& triple, int a, int b, int c);

/// Multivariate infinite divisibility through the sign of the log-pgf
/// coefficients: builds the degree-D series of the table, takes its log and
/// reports the most negative non-constant coefficient. When K >= D every
/// coefficient is exact regardless of the leaked mass; otherwise the leak
/// must stay below 1e-9.
VerifyReport check_mvid(const JointPmf<double>& pmf, int max_degree, Precision precision = Precision::Standard,
                        std::optional<double> tolerance = std::nullopt);

/// Corr(X_0, X_lag) from the exact bivariate law on {0..K}^2. Non-integer
/// lags are allowed for continuous-time specs. Empty when the variance
/// vanishes.
std::optional<double> autocorr_exact(const ProcessSpec& spec, double lag, int max_value);

/// Sample autocorrelation at `lag`; empty when the sample variance vanishes.
std::optional<double> autocorr_mc(const std::vector<int>& values, int lag);

/// r0, r1, r2 and theta1 read off the bivariate log-pgf: r_i is the
/// coefficient of s^i z divided by the univariate Levy mass theta1 = nu_1.
struct MistiParams {
  double r0, r1, r2, theta1;
};
MistiParams read_misti_params(const ProcessSpec& spec, int max_value = 12);

/// Conditional pgfs phi_j(s) = E[s^{X_1} | X_2 = j] of a branching chain
/// satisfy phi_{j+1} phi_{j-1} = phi_j^2. Relative violation over j = 1..jmax-1
/// on an s-grid.
VerifyReport check_branching_product_form(const ProcessSpec& spec, int max_value, int jmax,
                                          const std::vector<double>& s_grid, double tolerance = 1e-6);

}  // namespace misti
