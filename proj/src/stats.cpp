#include "misti/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace misti {

ChiSquareResult chi_square_gof(const std::vector<long>& observed, const std::vector<double>& probs,
                               double min_expected) {
  if (observed.empty() || observed.size() != probs.size())
    throw std::invalid_argument("chi_square_gof: observed and probs must have equal nonzero length");
  const double n = static_cast<double>(std::accumulate(observed.begin(), observed.end(), 0L));
  if (n <= 0.0) throw std::invalid_argument("chi_square_gof: no observations");

  std::vector<double> expected(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) expected[i] = n * probs[i];
  const double head = std::accumulate(probs.begin(), probs.end(), 0.0);
  expected.back() += n * std::max(0.0, 1.0 - head);

  // Merge from the tail, then from the front, until every bin is large enough.
  std::vector<double> e;
  std::vector<double> o;
  double acc_e = 0.0, acc_o = 0.0;
  for (std::size_t i = probs.size(); i-- > 0;) {
    acc_e += expected[i];
    acc_o += static_cast<double>(observed[i]);
    if (acc_e >= min_expected) {
      e.push_back(acc_e);
      o.push_back(acc_o);
      acc_e = acc_o = 0.0;
    }
  }
  if (acc_e > 0.0 || acc_o > 0.0) {
    if (e.empty()) {
      e.push_back(acc_e);
      o.push_back(acc_o);
    } else {
      e.back() += acc_e;
      o.back() += acc_o;
    }
  }

  double stat = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) stat += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
  const int dof = static_cast<int>(e.size()) - 1;
  const double p = dof > 0 ? boost::math::gamma_q(0.5 * dof, 0.5 * stat) : 1.0;
  return {stat, dof, p, e.size()};
}

std::vector<long> histogram(const std::vector<int>& values, int max_value) {
  std::vector<long> h(static_cast<std::size_t>(max_value) + 1, 0);
  for (int v : values) {
    if (v < 0) throw std::invalid_argument("histogram: negative value");
    ++h[static_cast<std::size_t>(std::min(v, max_value))];
  }
  return h;
}

double sample_mean(const std::vector<int>& values) {
  if (values.empty()) throw std::invalid_argument("sample_mean: empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double mean_standard_error(const std::vector<int>& values) {
  if (values.size() < 2) throw std::invalid_argument("mean_standard_error: need two or more values");
  const double m = sample_mean(values);
  double ss = 0.0;
  for (int v : values) ss += (v - m) * (v - m);
  const double n = static_cast<double>(values.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

double ar1_autocorr_se(double rho, int lag, std::size_t n) {
  if (lag < 1 || n == 0) throw std::invalid_argument("ar1_autocorr_se: need lag >= 1 and n >= 1");
  const double r2 = rho * rho;
  const double r2k = std::pow(r2, lag);
  const double var = ((1.0 + r2) * (1.0 - r2k) / (1.0 - r2) - 2.0 * lag * r2k) / static_cast<double>(n);
  return std::sqrt(var);
}

}  // namespace misti
