#include "misti/discrete.hpp"

#include <cmath>

namespace misti {

std::string to_string(MistiFamily f) {
  switch (f) {
    case MistiFamily::Constant: return "constant";
    case MistiFamily::Iid: return "iid";
    case MistiFamily::BranchingPoisson: return "branching-poisson";
    case MistiFamily::BranchingNB: return "branching-nb";
  }
  return "unknown";
}

MistiClass misti_classify(double r0, double r1, double r2, double theta1) {
  constexpr double tol = 1e-9;
  // Values read off a numerical log-pgf carry rounding noise around 0.
  for (double* r : {&r0, &r1, &r2})
    if (std::abs(*r) <= tol) *r = 0.0;
  if (!(r0 >= 0.0 && r1 >= 0.0 && r2 >= 0.0)) throw std::invalid_argument("misti_classify: r0, r1, r2 must be >= 0");
  if (r0 + r1 > 1.0 + tol) throw std::invalid_argument("misti_classify: r0 + r1 must not exceed 1");
  if (!(theta1 > 0.0) || !std::isfinite(theta1)) throw std::invalid_argument("misti_classify: theta1 must be > 0");

  if (r0 == 0.0) {
    // p(z) = z: every X_t is the same draw.
    if (std::abs(r1 - 1.0) > tol || r2 != 0.0) throw std::domain_error("misti_classify: r0 = 0 forces r1 = 1 and r2 = 0");
    return {MistiFamily::Constant, ConstantSpec{IdLaw::poisson(), theta1}, theta1, 1.0};
  }
  if (r1 == 0.0) {
    if (std::abs(r0 - 1.0) > tol || r2 != 0.0) throw std::domain_error("misti_classify: r1 = 0 forces r0 = 1 and r2 = 0");
    return {MistiFamily::Iid, IidSpec{IdLaw::poisson(), theta1}, theta1, 0.0};
  }
  if (r2 == 0.0) {
    // Poisson marginal with mean theta1 and autocorrelation r1.
    if (std::abs(r0 + r1 - 1.0) > tol) throw std::domain_error("misti_classify: r2 = 0 requires r0 + r1 = 1");
    if (!(r1 < 1.0)) throw std::domain_error("misti_classify: r1 = 1 with r0 > 0 is infeasible");
    return {MistiFamily::BranchingPoisson, BranchingPoissonSpec{theta1, r1}, theta1, r1};
  }

  const double q = (1.0 - r0 - r1) / (r0 * (1.0 - r0));
  if (!(q > 0.0)) throw std::domain_error("misti_classify: r2 > 0 needs r0 + r1 < 1");
  if (!(q < 1.0)) throw std::domain_error("misti_classify: q >= 1, the Levy masses alpha q^j / j are not summable");
  const double expected_r2 = r1 * q * r0;
  if (std::abs(r2 - expected_r2) > tol * std::max(1.0, expected_r2))
    throw std::domain_error("misti_classify: r2 is inconsistent with the geometric law r_i = r1 (q r0)^{i-1}");
  const double alpha = theta1 / q;
  const double rho = (1.0 - r0) * (1.0 - r0) / r1;
  if (!(rho > 0.0 && rho < 1.0)) throw std::domain_error("misti_classify: implied autocorrelation outside (0,1)");
  MistiClass out{MistiFamily::BranchingNB, BranchingNBSpec{alpha, 1.0 - q, rho}, theta1, rho};
  out.q = q;
  out.alpha = alpha;
  return out;
}

}  // namespace misti
