#include "misti/stats.hpp"
#include "misti/verify.hpp"
#include "oracles.hpp"

#include <doctest.h>
#include <json.hpp>

#include <random>

using namespace misti;

namespace {

const IdLaw kNb = IdLaw::negative_binomial(0.5);

int lattice_for(const ProcessSpec& spec) { return std::max(12, marginal_tail_bound(spec, 1e-13)); }

}  // namespace

TEST_CASE("joint tables of simple chains") {
  const ProcessSpec iid = IidSpec{IdLaw::poisson(), 1.5};
  const auto t = chain_joint_pmf(iid, {0, 1, 4}, 6);
  for (int a = 0; a <= 6; ++a)
    for (int b = 0; b <= 6; ++b)
      CHECK(std::abs(t.at({a, b, 2}) - oracle::poisson_pmf(1.5, a) * oracle::poisson_pmf(1.5, b) *
                                           oracle::poisson_pmf(1.5, 2)) <= 1e-15);

  const auto c = chain_joint_pmf(ProcessSpec{ConstantSpec{kNb, 2.0}}, {0, 3}, 8);
  for (int a = 0; a <= 8; ++a)
    for (int b = 0; b <= 8; ++b) CHECK(c.at({a, b}) == doctest::Approx(a == b ? oracle::nb_pmf(2.0, 0.5, a) : 0.0));

  // Poisson AR(1) generating function on a grid.
  const double theta = 1.2, rho = 0.35;
  const auto j = chain_joint_pmf(ProcessSpec{BranchingPoissonSpec{theta, rho}}, {0, 1}, 40);
  for (double s : {0.0, 0.25, 0.5, 0.75, 1.0})
    for (double z : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      double acc = 0.0;
      for (int a = 0; a <= 40; ++a)
        for (int b = 0; b <= 40; ++b) acc += std::pow(s, a) * std::pow(z, b) * j.at({a, b});
      const double closed = std::exp(theta * (1 - rho) * (s + z - 2) + theta * rho * (s * z - 1));
      CHECK(std::abs(acc - closed) <= 1e-12);
    }

  // Against the direct three-point product pi(a) q(a,b) q(b,c).
  const auto th = chain_joint_pmf(ProcessSpec{ThinningSpec{kNb, 1.0, 0.5}}, {1, 2, 3}, 6);
  auto pi = [](int a) { return oracle::nb_pmf(1.0, 0.5, a); };
  auto q = [](int a, int b) { return oracle::thinning_nb_q(1.0, 0.5, 0.5, a, b); };
  for (int a = 0; a <= 6; ++a)
    for (int b = 0; b <= 6; ++b)
      for (int cc = 0; cc <= 6; ++cc) CHECK(std::abs(th.at({a, b, cc}) - oracle::chain3(pi, q, a, b, cc)) <= 1e-13);

  CHECK_THROWS_AS(one_step_transition(ProcessSpec{RandomMeasureSpec{kNb, 1.0, 0.5}}, 5), std::logic_error);
}

TEST_CASE("stationarity") {
  const ProcessSpec spec = BranchingPoissonSpec{2.0, 0.5};
  CHECK(check_stationarity(spec, 3, 12).pass);
  CHECK(check_stationarity(ProcessSpec{RandomMeasureSpec{kNb, 1.0, 0.5}}, 3, 10).pass);

  // Started from a point mass at 0 the chain is not stationary.
  const Vector<double> delta = Vector<double>::Ones(1);
  const auto r = check_stationarity(spec, 3, 12, &delta);
  CHECK_FALSE(r.pass);
  CHECK(r.violation > 1e-3);
  // Started from the marginal it is.
  const Vector<double> pi = marginal_pmf(spec, 40);
  CHECK(check_stationarity(spec, 3, 12, &pi).violation <= 1e-12);
}

TEST_CASE("reversibility") {
  for (const ProcessSpec& spec : {ProcessSpec{ThinningSpec{kNb, 1.0, 0.5}}, ProcessSpec{BranchingNBSpec{1.0, 0.5, 0.3}},
                                  ProcessSpec{RandomMeasureSpec{kNb, 1.0, 0.5}}, ProcessSpec{PoissonBD{2.0, 1.0}}})
    CHECK(check_reversibility(spec, 10).pass);

  // Lazy walk on a 5-cycle going up more often than down.
  constexpr int n = 5;
  Matrix<double> T = Matrix<double>::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    T(i, (i + 1) % n) = 0.6;
    T(i, (i + n - 1) % n) = 0.2;
    T(i, i) = 0.2;
  }
  const Vector<double> uniform = Vector<double>::Constant(n, 1.0 / n);
  const auto r = check_reversibility(uniform, T);
  CHECK_FALSE(r.pass);
  CHECK(r.violation == doctest::Approx(0.08));
  CHECK_THROWS_AS(check_reversibility(uniform, Matrix<double>::Identity(4, 4)), std::invalid_argument);
}

TEST_CASE("Markov property") {
  const ProcessSpec thin = ThinningSpec{kNb, 1.0, 0.5};
  CHECK(check_markov_triple(chain_joint_pmf(thin, {1, 2, 3}, lattice_for(thin))).pass);

  const ProcessSpec rm = RandomMeasureSpec{kNb, 1.0, 0.5};
  const auto triple = chain_joint_pmf(rm, {1, 2, 3}, lattice_for(rm));
  const auto r = check_markov_triple(triple);
  CHECK_FALSE(r.pass);
  CHECK(r.violation == doctest::Approx(0.02392578125).epsilon(1e-9));
  CHECK(r.witness == std::vector<int>{1, 2, 1});
  REQUIRE(r.first_witness.has_value());
  CHECK(*r.first_witness == std::vector<int>{0, 2, 0});
  // At (0,2,0) the gap is 0.078125 - 0.0703125.
  CHECK(markov_gap(triple, 0, 2, 0) == doctest::Approx(0.0078125).epsilon(1e-9));

  JointPmf<double> pair({0, 1}, 3);
  CHECK_THROWS_AS(check_markov_triple(pair), std::invalid_argument);
}

TEST_CASE("multivariate infinite divisibility") {
  const ProcessSpec thin = ThinningSpec{kNb, 1.0, 0.5};
  const auto r = check_mvid(chain_joint_pmf(thin, {1, 2, 3}, 12), 8);
  CHECK_FALSE(r.pass);
  CHECK(r.details.at("min_coefficient") == doctest::Approx(-0.015625).epsilon(1e-9));
  CHECK(r.witness == std::vector<int>{1, 2, 1});
  const auto ext = check_mvid(chain_joint_pmf(thin, {1, 2, 3}, 12), 8, Precision::Extended);
  CHECK(ext.details.at("min_coefficient") == doctest::Approx(-0.015625).epsilon(1e-9));
  CHECK(ext.tolerance == kMvidTolExtended);

  for (const ProcessSpec& spec : {ProcessSpec{BranchingNBSpec{1.0, 0.5, 0.5}}, ProcessSpec{BranchingPoissonSpec{1.0, 0.5}},
                                  ProcessSpec{RandomMeasureSpec{kNb, 1.0, 0.5}}})
    CHECK(check_mvid(chain_joint_pmf(spec, {1, 2, 3}, 10), 8).pass);

  // Univariate: the log coefficients are the Levy masses theta q^j / j.
  const ProcessSpec iid = IidSpec{kNb, 1.5};
  const auto one = chain_joint_pmf(iid, {0}, 10);
  CHECK(check_mvid(one, 10).pass);
  const auto L = log(from_joint_pmf(one, 10));
  for (int j = 1; j <= 10; ++j) CHECK(L.coeff({j}) == doctest::Approx(1.5 * std::pow(0.5, j) / j).epsilon(1e-11));

  // With K < D the leaked mass must be negligible.
  CHECK_THROWS_AS(check_mvid(chain_joint_pmf(thin, {1, 2}, 3), 8), std::invalid_argument);
  JointPmf<double> empty({0, 1}, 3);
  empty.at({1, 1}) = 1.0;
  CHECK_THROWS_AS(check_mvid(empty, 3), std::domain_error);
}

TEST_CASE("autocorrelation") {
  const ProcessSpec thin = ThinningSpec{kNb, 1.0, 0.4};
  CHECK(*autocorr_exact(thin, 1, 40) == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(*autocorr_exact(thin, 2, 40) == doctest::Approx(0.16).epsilon(1e-9));
  CHECK(*autocorr_exact(thin, 0, 40) == doctest::Approx(1.0));
  CHECK(*autocorr_exact(ProcessSpec{IidSpec{kNb, 1.0}}, 1, 40) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(*autocorr_exact(ProcessSpec{ConstantSpec{kNb, 1.0}}, 3, 40) == doctest::Approx(1.0));
  CHECK(*autocorr_exact(ProcessSpec{RandomMeasureSpec{kNb, 1.0, 0.4}}, 2, 30) == doctest::Approx(0.16).epsilon(1e-7));
  CHECK_FALSE(autocorr_exact(ProcessSpec{ConstantSpec{kNb, 0.0}}, 1, 10).has_value());
  CHECK_THROWS_AS(autocorr_exact(thin, 1.5, 20), std::invalid_argument);

  const std::vector<int> flat(50, 3);
  CHECK_FALSE(autocorr_mc(flat, 1).has_value());
  CHECK_THROWS_AS(autocorr_mc(flat, 60), std::invalid_argument);

  std::mt19937_64 rng(9);
  constexpr int n = 100000;
  const ProcessSpec chain = BranchingNBSpec{1.5, 0.5, 0.6};
  const auto path = simulate(chain, 0, n, rng);
  for (int lag : {1, 2, 3}) {
    const double exact = *autocorr_exact(chain, lag, 40);
    CHECK(std::abs(*autocorr_mc(path.values, lag) - exact) <= 3 * ar1_autocorr_se(0.6, lag, n));
  }
}

TEST_CASE("branching product form") {
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  for (const ProcessSpec& spec : {ProcessSpec{BranchingPoissonSpec{1.3, 0.4}}, ProcessSpec{BranchingNBSpec{1.5, 0.4, 0.7}}})
    CHECK(check_branching_product_form(spec, lattice_for(spec), 6, grid).pass);
  const ProcessSpec thin = ThinningSpec{kNb, 1.0, 0.5};
  CHECK_FALSE(check_branching_product_form(thin, lattice_for(thin), 6, grid).pass);
  CHECK_THROWS_AS(check_branching_product_form(thin, 5, 6, grid), std::invalid_argument);
}

TEST_CASE("four families from the r-sequence") {
  CHECK(misti_classify(0.0, 1.0, 0.0, 1.0).family == MistiFamily::Constant);
  const auto c = read_misti_params(ConstantSpec{IdLaw::poisson(), 2.0});
  CHECK(misti_classify(c.r0, c.r1, c.r2, c.theta1).family == MistiFamily::Constant);
  const auto i = read_misti_params(IidSpec{kNb, 2.0});
  CHECK(misti_classify(i.r0, i.r1, i.r2, i.theta1).family == MistiFamily::Iid);
  CHECK(i.theta1 == doctest::Approx(1.0));

  for (double alpha : {0.5, 1.0, 3.0})
    for (double p : {0.2, 0.5, 0.8})
      for (double rho : {0.1, 0.5, 0.9}) {
        const auto r = read_misti_params(BranchingNBSpec{alpha, p, rho});
        const double q = 1 - p;
        CHECK(r.theta1 == doctest::Approx(alpha * q).epsilon(1e-9));
        CHECK(std::abs(r.r2 - r.r1 * q * r.r0) <= 1e-9);
        CHECK(misti_classify(r.r0, r.r1, r.r2, r.theta1).family == MistiFamily::BranchingNB);
        const auto po = read_misti_params(BranchingPoissonSpec{alpha, rho});
        CHECK(std::abs(po.r0 + po.r1 - 1) <= 1e-9);
        CHECK(std::abs(po.r2) <= 1e-9);
        CHECK(misti_classify(po.r0, po.r1, po.r2, po.theta1).family == MistiFamily::BranchingPoisson);
      }
  CHECK_THROWS_AS(read_misti_params(IidSpec{kNb, 1.0}, 3), std::invalid_argument);
}

TEST_CASE("report output") {
  auto r = make_report("markov", 0.5, {1, 2, 1}, 1e-9);
  CHECK_FALSE(r.pass);
  r.first_witness = std::vector<int>{0, 2, 0};
  r.details["skipped_rows"] = 3;
  const auto j = nlohmann::ordered_json::parse(to_json_line(r));
  std::vector<std::string> keys;
  for (const auto& item : j.items()) keys.push_back(item.key());
  CHECK(keys == std::vector<std::string>{"name", "violation", "witness", "tolerance", "pass", "first_witness", "skipped_rows"});
  CHECK(j["witness"] == nlohmann::json::array({1, 2, 1}));
  CHECK(j["pass"] == false);
  CHECK(to_json_line(r).find('\n') == std::string::npos);

  CHECK(make_report("x", 1e-9, {}, 1e-9).pass);
  const auto bare = nlohmann::json::parse(to_json_line(make_report("x", 0.0, {}, 1.0)));
  CHECK_FALSE(bare.contains("first_witness"));
}

TEST_CASE("checks are deterministic") {
  const ProcessSpec rm = RandomMeasureSpec{kNb, 1.0, 0.5};
  CHECK(to_json_line(check_mvid(chain_joint_pmf(rm, {1, 2, 3}, 10), 8)) ==
        to_json_line(check_mvid(chain_joint_pmf(rm, {1, 2, 3}, 10), 8)));
  CHECK(to_json_line(check_stationarity(rm, 3, 10)) == to_json_line(check_stationarity(rm, 3, 10)));
}

TEST_CASE("statistics helpers") {
  const std::vector<double> probs{0.25, 0.5, 0.25};
  const auto exact = chi_square_gof({250, 500, 250}, probs);
  CHECK(exact.statistic == doctest::Approx(0.0));
  CHECK(exact.p_value == doctest::Approx(1.0));
  CHECK(exact.dof == 2);
  const auto off = chi_square_gof({400, 400, 200}, probs);
  CHECK(off.p_value < 1e-10);
  // Small tail bins are merged.
  const auto merged = chi_square_gof({10, 5, 1}, {0.6, 0.3, 0.1});
  CHECK(merged.bins == 2);

  CHECK(histogram({0, 1, 1, 7}, 3) == std::vector<long>{1, 2, 0, 1});
  CHECK(sample_mean({1, 2, 3}) == doctest::Approx(2.0));
  CHECK(mean_standard_error({1, 2, 3}) == doctest::Approx(std::sqrt(1.0 / 3)));
  CHECK(ar1_autocorr_se(0.0, 1, 100) == doctest::Approx(0.1));
}
