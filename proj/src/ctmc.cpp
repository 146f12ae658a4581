#include "misti/ctmc.hpp"

#include <algorithm>

namespace misti {

void validate(const BDModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if (!(m.lambda >= 0.0) || !std::isfinite(m.lambda))
          throw std::invalid_argument("birth-death model: lambda must be finite and >= 0");
        if constexpr (std::is_same_v<T, PoissonBD>) {
          if (!(m.theta > 0.0) || !std::isfinite(m.theta))
            throw std::invalid_argument("Poisson birth-death model: theta must be > 0");
        } else {
          if (!(m.alpha > 0.0) || !std::isfinite(m.alpha))
            throw std::invalid_argument("negative binomial birth-death model: alpha must be > 0");
          if (!(m.p > 0.0 && m.p < 1.0))
            throw std::invalid_argument("negative binomial birth-death model: p must lie in (0,1)");
        }
      },
      model);
}

BDRates bd_rates(const BDModel& model, int state) {
  if (state < 0) throw std::invalid_argument("bd_rates: state must be >= 0");
  const double j = state;
  if (const auto* m = std::get_if<PoissonBD>(&model)) return {m->lambda * m->theta, m->lambda * j};
  const auto& m = std::get<NegBinomialBD>(model);
  return {m.lambda * (m.alpha + j) * (1.0 - m.p) / m.p, m.lambda * j / m.p};
}

double bd_lambda(const BDModel& model) {
  return std::visit([](const auto& m) { return m.lambda; }, model);
}

BDModel with_unit_rate(const BDModel& model) {
  BDModel out = model;
  std::visit([](auto& m) { m.lambda = 1.0; }, out);
  return out;
}

int EventPath::state_at(double t) const {
  if (t < 0.0 || t > horizon) throw std::out_of_range("EventPath: time outside [0, horizon]");
  auto it = std::upper_bound(times.begin(), times.end(), t);
  return states[static_cast<std::size_t>(std::distance(times.begin(), it)) - 1];
}

std::vector<int> EventPath::sample_grid(double start, double step) const {
  if (!(step > 0.0)) throw std::invalid_argument("EventPath: grid step must be > 0");
  std::vector<int> out;
  std::size_t cursor = 0;
  for (double t = start; t < horizon; t += step) {
    while (cursor + 1 < times.size() && times[cursor + 1] <= t) ++cursor;
    out.push_back(states[cursor]);
  }
  return out;
}

}  // namespace misti
