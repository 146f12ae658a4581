#include "misti/verify.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace misti {

VerifyReport make_report(std::string name, double violation, std::vector<int> witness, double tolerance) {
  VerifyReport r;
  r.name = std::move(name);
  r.violation = violation;
  r.witness = std::move(witness);
  r.tolerance = tolerance;
  r.pass = violation <= tolerance;
  return r;
}

std::string to_json_line(const VerifyReport& report) {
  nlohmann::ordered_json j;
  j["name"] = report.name;
  j["violation"] = report.violation;
  j["witness"] = report.witness;
  j["tolerance"] = report.tolerance;
  j["pass"] = report.pass;
  if (report.first_witness) j["first_witness"] = *report.first_witness;
  for (const auto& [k, v] : report.details) j[k] = v;
  return j.dump();
}

int internal_lattice(const ProcessSpec& spec, int max_value) {
  if (std::holds_alternative<RandomMeasureSpec>(spec)) return max_value;
  return std::max(max_value, marginal_tail_bound(spec, 1e-15)) + 8;
}

namespace {

// Tracks the lowest-total-degree point over tolerance, ties broken
// lexicographically.
struct FirstWitness {
  std::optional<std::vector<int>> point;

  void offer(const std::vector<int>& x) {
    if (!point) {
      point = x;
      return;
    }
    const int dx = std::accumulate(x.begin(), x.end(), 0);
    const int dp = std::accumulate(point->begin(), point->end(), 0);
    if (dx < dp || (dx == dp && x < *point)) point = x;
  }
};

}  // namespace

VerifyReport check_stationarity(const ProcessSpec& spec, int window, int max_value, const Vector<double>* initial,
                                double tolerance) {
  if (window < 1) throw std::invalid_argument("check_stationarity: window must be >= 1");
  std::vector<int> base(static_cast<std::size_t>(window));
  std::iota(base.begin(), base.end(), 0);
  const auto ref = chain_joint_pmf<double>(spec, base, max_value, initial);
  VerifyReport worst = make_report("stationarity", 0.0, std::vector<int>(base.size(), 0), tolerance);
  for (int shift : {1, 2}) {
    std::vector<int> moved = base;
    for (int& t : moved) t += shift;
    const auto other = chain_joint_pmf<double>(spec, moved, max_value, initial);
    auto r = compare_tables("stationarity", ref, other, tolerance);
    if (r.violation > worst.violation || shift == 1) {
      worst = r;
      worst.details["shift"] = shift;
    }
  }
  worst.details["leaked"] = static_cast<double>(ref.leaked());
  return worst;
}

VerifyReport check_reversibility(const Vector<double>& marginal, const Matrix<double>& transition, double tolerance,
                                 std::string name) {
  const Eigen::Index n = marginal.size();
  if (transition.rows() != n || transition.cols() != n)
    throw std::invalid_argument("check_reversibility: transition must be square and match the marginal");
  const Matrix<double> flux = marginal.asDiagonal() * transition;
  Eigen::Index x = 0, y = 0;
  const double worst = (flux - flux.transpose()).cwiseAbs().maxCoeff(&x, &y);
  return make_report(std::move(name), worst, {static_cast<int>(x), static_cast<int>(y)}, tolerance);
}

VerifyReport check_reversibility(const ProcessSpec& spec, int max_value, double tolerance) {
  validate(spec);
  if (std::holds_alternative<RandomMeasureSpec>(spec)) {
    const auto fwd = chain_joint_pmf<double>(spec, {0, 1, 3}, max_value);
    const auto bwd = chain_joint_pmf<double>(spec, {-3, -1, 0}, max_value);
    double worst = 0.0;
    std::vector<int> witness(3, 0);
    for (std::size_t i = 0; i < fwd.size(); ++i) {
      const auto x = fwd.unflatten(i);
      const double gap = std::abs(fwd.table()(static_cast<Eigen::Index>(i)) - bwd.at({x[2], x[1], x[0]}));
      if (gap > worst) {
        worst = gap;
        witness = x;
      }
    }
    return make_report("reversibility", worst, witness, tolerance);
  }
  const int kint = internal_lattice(spec, max_value);
  const Matrix<double> T = one_step_transition<double>(spec, kint);
  const Vector<double> pi = marginal_pmf<double>(spec, kint);
  const int n = max_value + 1;
  return check_reversibility(pi.head(n), T.topLeftCorner(n, n), tolerance);
}

VerifyReport check_markov_triple(const JointPmf<double>& triple, double tolerance) {
  if (triple.dims() != 3) throw std::invalid_argument("check_markov_triple: need a table over three times");
  const int K = triple.lattice_bound();
  const int n = K + 1;
  double worst = 0.0;
  std::vector<int> witness{0, 0, 0};
  FirstWitness first;
  int skipped = 0;
  Matrix<double> slice(n, n);
  for (int b = 0; b <= K; ++b) {
    for (int a = 0; a <= K; ++a)
      for (int c = 0; c <= K; ++c) slice(a, c) = triple.at({a, b, c});
    const double row = slice.sum();
    if (row < 1e-12) {
      ++skipped;
      continue;
    }
    const Matrix<double> cond = slice / row;
    const Vector<double> left = cond.rowwise().sum();
    const Vector<double> right = cond.colwise().sum().transpose();
    const Matrix<double> gap = (cond - left * right.transpose()).cwiseAbs();
    for (int a = 0; a <= K; ++a)
      for (int c = 0; c <= K; ++c) {
        if (gap(a, c) > tolerance) first.offer({a, b, c});
        if (gap(a, c) > worst) {
          worst = gap(a, c);
          witness = {a, b, c};
        }
      }
  }
  auto report = make_report("markov", worst, witness, tolerance);
  report.first_witness = first.point;
  report.details["skipped_rows"] = skipped;
  return report;
}

double markov_gap(const JointPmf<double>& triple, int a, int b, int c) {
  if (triple.dims() != 3) throw std::invalid_argument("markov_gap: need a table over three times");
  const int K = triple.lattice_bound();
  double row = 0.0, left = 0.0, right = 0.0;
  for (int i = 0; i <= K; ++i)
    for (int k = 0; k <= K; ++k) {
      const double v = triple.at({i, b, k});
      row += v;
      if (i == a) left += v;
      if (k == c) right += v;
    }
  if (!(row > 0.0)) throw std::domain_error("markov_gap: conditioning row has zero mass");
  return std::abs(triple.at({a, b, c}) / row - (left / row) * (right / row));
}

namespace {

template <typename Scalar>
VerifyReport mvid_scan(const JointPmf<double>& pmf, int max_degree, double tolerance) {
  const auto series = from_joint_pmf<Scalar>(pmf, max_degree);
  if (!(series.coeffs()(0) > Scalar(0))) throw std::domain_error("check_mvid: constant term of the pgf is <= 0");
  const auto L = log(series);
  const auto& basis = L.basis();
  Scalar lowest = 0;
  std::size_t at = 0;
  FirstWitness first;
  for (std::size_t i = 1; i < basis.size(); ++i) {
    const Scalar c = L.coeffs()(static_cast<Eigen::Index>(i));
    const auto e = basis.exponents(i);
    if (c < Scalar(-tolerance)) first.offer(std::vector<int>(e.begin(), e.end()));
    if (at == 0 || c < lowest) {
      lowest = c;
      at = i;
    }
  }
  const auto e = basis.exponents(at);
  auto report = make_report("mvid", std::max(0.0, -static_cast<double>(lowest)), std::vector<int>(e.begin(), e.end()),
                            tolerance);
  report.first_witness = first.point;
  report.details["min_coefficient"] = static_cast<double>(lowest);
  report.details["leaked"] = pmf.leaked();
  report.details["degree"] = max_degree;
  return report;
}

}  // namespace

VerifyReport check_mvid(const JointPmf<double>& pmf, int max_degree, Precision precision,
                        std::optional<double> tolerance) {
  if (max_degree < 1) throw std::invalid_argument("check_mvid: degree must be >= 1");
  // Coefficients of degree <= D only involve lattice points with every
  // coordinate <= D, so they are exact when K >= D.
  if (pmf.lattice_bound() < max_degree && !(pmf.leaked() < 1e-9))
    throw std::invalid_argument("check_mvid: leaked mass must stay below 1e-9 when K < D");
  if (precision == Precision::Extended)
    return mvid_scan<long double>(pmf, max_degree, tolerance.value_or(kMvidTolExtended));
  return mvid_scan<double>(pmf, max_degree, tolerance.value_or(kMvidTolStandard));
}

namespace {

// pi(x) P_lag(x, y) on {0..K}^2.
Matrix<double> bivariate_table(const ProcessSpec& spec, double lag, int max_value) {
  const int n = max_value + 1;
  if (is_continuous_time(spec)) {
    const int kint = internal_lattice(spec, max_value);
    const BDModel model = std::holds_alternative<PoissonBD>(spec) ? BDModel{std::get<PoissonBD>(spec)}
                                                                   : BDModel{std::get<NegBinomialBD>(spec)};
    const Matrix<double> P = transition_uniformized<double>(model, lag, kint);
    const Vector<double> pi = marginal_pmf<double>(spec, kint);
    return (pi.asDiagonal() * P).topLeftCorner(n, n);
  }
  const double rounded = std::round(lag);
  if (rounded != lag) throw std::invalid_argument("autocorr_exact: discrete-time lags must be integers");
  const int L = static_cast<int>(rounded);
  if (L == 0) return Matrix<double>(marginal_pmf<double>(spec, max_value).asDiagonal());
  const auto j = chain_joint_pmf<double>(spec, {0, L}, max_value);
  Matrix<double> out(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) out(x, y) = j.at({x, y});
  return out;
}

}  // namespace

std::optional<double> autocorr_exact(const ProcessSpec& spec, double lag, int max_value) {
  validate(spec);
  if (!(lag >= 0.0)) throw std::invalid_argument("autocorr_exact: lag must be >= 0");
  const Matrix<double> joint = bivariate_table(spec, lag, max_value);
  const int n = max_value + 1;
  const Vector<double> k = Vector<double>::LinSpaced(n, 0.0, static_cast<double>(max_value));
  const Vector<double> px = joint.rowwise().sum();
  const Vector<double> py = joint.colwise().sum().transpose();
  const double mass = joint.sum();
  const double mx = px.dot(k) / mass, my = py.dot(k) / mass;
  const double vx = px.dot(k.cwiseProduct(k)) / mass - mx * mx;
  const double vy = py.dot(k.cwiseProduct(k)) / mass - my * my;
  if (vx < 1e-14 || vy < 1e-14) return std::nullopt;
  const double cov = k.dot(joint * k) / mass - mx * my;
  return cov / std::sqrt(vx * vy);
}

std::optional<double> autocorr_mc(const std::vector<int>& values, int lag) {
  if (lag < 0) throw std::invalid_argument("autocorr_mc: lag must be >= 0");
  const std::size_t n = values.size();
  if (n <= static_cast<std::size_t>(lag)) throw std::invalid_argument("autocorr_mc: trajectory shorter than lag");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double denom = 0.0, num = 0.0;
  for (std::size_t i = 0; i < n; ++i) denom += (values[i] - mean) * (values[i] - mean);
  if (denom <= 0.0) return std::nullopt;
  for (std::size_t i = 0; i + static_cast<std::size_t>(lag) < n; ++i)
    num += (values[i] - mean) * (values[i + static_cast<std::size_t>(lag)] - mean);
  return num / denom;
}

MistiParams read_misti_params(const ProcessSpec& spec, int max_value) {
  constexpr int D = 4;
  if (max_value < D) throw std::invalid_argument("read_misti_params: K must be >= 4");
  const auto pair = chain_joint_pmf<double>(spec, {0, 1}, max_value);
  const auto L = log(from_joint_pmf<double>(pair, D));
  const auto L1 = log(from_coefficients<double>(marginal_pmf<double>(spec, max_value), D));
  MistiParams out{};
  out.theta1 = L1.coeff({1});
  if (!(out.theta1 > 0.0)) throw std::domain_error("read_misti_params: nu_1 must be > 0");
  out.r0 = L.coeff({0, 1}) / out.theta1;
  out.r1 = L.coeff({1, 1}) / out.theta1;
  out.r2 = L.coeff({2, 1}) / out.theta1;
  return out;
}

VerifyReport check_branching_product_form(const ProcessSpec& spec, int max_value, int jmax,
                                          const std::vector<double>& s_grid, double tolerance) {
  if (jmax < 2 || jmax > max_value) throw std::invalid_argument("check_branching_product_form: need 2 <= jmax <= K");
  const auto pair = chain_joint_pmf<double>(spec, {1, 2}, max_value);
  auto phi = [&](int j, double s) {
    double num = 0.0, den = 0.0, pw = 1.0;
    for (int a = 0; a <= max_value; ++a, pw *= s) {
      const double p = pair.at({a, j});
      num += pw * p;
      den += p;
    }
    return num / den;
  };
  double worst = 0.0;
  std::vector<int> witness{1, 0};
  for (int j = 1; j < jmax; ++j)
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
      const double s = s_grid[i];
      const double mid = phi(j, s);
      const double gap = std::abs(phi(j + 1, s) * phi(j - 1, s) - mid * mid) / (mid * mid);
      if (gap > worst) {
        worst = gap;
        witness = {j, static_cast<int>(i)};
      }
    }
  return make_report("product-form", worst, witness, tolerance);
}

}  // namespace misti
