#pragma once

#include <cstddef>
#include <vector>

namespace misti {

struct ChiSquareResult {
  double statistic;
  int dof;
  double p_value;
  std::size_t bins;  ///< after merging
};

/// Pearson goodness-of-fit of observed counts against model probabilities
/// p_0..p_K. Mass beyond K goes into the last bin; bins are merged from the
/// tail until every expected count reaches `min_expected`.
ChiSquareResult chi_square_gof(const std::vector<long>& observed, const std::vector<double>& probs,
                               double min_expected = 5.0);

/// Histogram of values on {0..K}; values above K land in bin K.
std::vector<long> histogram(const std::vector<int>& values, int max_value);

double sample_mean(const std::vector<int>& values);

/// Standard error of the mean assuming independent draws.
double mean_standard_error(const std::vector<int>& values);

/// Bartlett standard error of the lag-k sample autocorrelation of an AR(1)
/// series with coefficient rho, n observations.
double ar1_autocorr_se(double rho, int lag, std::size_t n);

}  // namespace misti
