#include "misti/idlaw.hpp"

#include <sstream>

namespace misti {

IdLaw IdLaw::poisson() { return IdLaw(PoissonFamily{}); }

IdLaw IdLaw::negative_binomial(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("negative binomial p must lie in (0,1)");
  return IdLaw(NegBinomialFamily{p});
}

IdLaw IdLaw::generic_levy(std::map<int, double> nu) {
  for (const auto& [j, mass] : nu) {
    if (j < 1) throw std::invalid_argument("Levy jump sizes must be >= 1");
    if (!(mass >= 0.0) || !std::isfinite(mass))
      throw std::invalid_argument("Levy masses must be finite and nonnegative");
  }
  // An empty measure is the degenerate law at zero; otherwise mu({1}) > 0 is
  // required so that the support is all of N_0.
  if (!nu.empty()) {
    auto it = nu.find(1);
    if (it == nu.end() || it->second <= 0.0)
      throw std::invalid_argument("Levy measure must put positive mass on jump size 1");
  }
  std::erase_if(nu, [](const auto& kv) { return kv.second == 0.0; });
  return IdLaw(GenericLevyFamily{std::move(nu)});
}

double IdLaw::nb_p() const {
  if (const auto* nb = std::get_if<NegBinomialFamily>(&family_)) return nb->p;
  throw std::logic_error("nb_p() called on a non negative-binomial law");
}

const std::map<int, double>& IdLaw::generic_masses() const {
  if (const auto* g = std::get_if<GenericLevyFamily>(&family_)) return g->nu;
  throw std::logic_error("generic_masses() called on a named family");
}

double IdLaw::unit_total_mass() const {
  if (is_poisson()) return 1.0;
  if (is_negative_binomial()) return -std::log(nb_p());
  double total = 0.0;
  for (const auto& [j, mass] : generic_masses()) total += mass;
  return total;
}

std::string IdLaw::describe() const {
  std::ostringstream os;
  if (is_poisson()) {
    os << "poisson";
  } else if (is_negative_binomial()) {
    os << "negbin(p=" << nb_p() << ")";
  } else {
    os << "levy{";
    bool first = true;
    for (const auto& [j, mass] : generic_masses()) {
      os << (first ? "" : ",") << j << ":" << mass;
      first = false;
    }
    os << "}";
  }
  return os.str();
}

bool operator==(const IdLaw& a, const IdLaw& b) {
  if (a.family_.index() != b.family_.index()) return false;
  if (a.is_negative_binomial()) return a.nb_p() == b.nb_p();
  if (a.is_generic()) return a.generic_masses() == b.generic_masses();
  return true;
}

int nb_levy_cutoff(double theta, double q, double eps) {
  if (theta <= 0.0 || q <= 0.0) return 1;
  int j = 1;
  double term = theta * q;
  while (term / j >= eps && j < 100000) {
    ++j;
    term *= q;
  }
  return j;
}

}  // namespace misti
