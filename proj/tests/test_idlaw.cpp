#include "misti/discrete.hpp"
#include "misti/idlaw.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace misti;

namespace {

double sup_diff(const Vector<double>& a, const Vector<double>& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("levy masses") {
  const auto po = levy_masses(IdLaw::poisson(), 2.0, 3);
  CHECK(po(0) == 2.0);
  CHECK(po(1) == 0.0);
  CHECK(po(2) == 0.0);

  const auto nb = levy_masses(IdLaw::negative_binomial(0.5), 2.0, 3);
  CHECK(nb(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(nb(1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(nb(2) == doctest::Approx(1.0 / 12).epsilon(1e-15));

  const auto gl = levy_masses(IdLaw::generic_levy({{1, 0.2}, {2, 0.3}}), 1.0, 2);
  CHECK(gl(0) == 0.2);
  CHECK(gl(1) == 0.3);
}

TEST_CASE("laws without a unit jump are rejected") {
  CHECK_THROWS_AS(IdLaw::generic_levy({{2, 0.3}}), std::invalid_argument);
  CHECK_THROWS_AS(IdLaw::generic_levy({{1, -0.1}}), std::invalid_argument);
  CHECK_THROWS_AS(IdLaw::negative_binomial(1.0), std::invalid_argument);
  CHECK_THROWS_AS(IdLaw::negative_binomial(0.0), std::invalid_argument);
  CHECK_NOTHROW(IdLaw::generic_levy({}));
}

TEST_CASE("id_pmf examples") {
  const auto po = id_pmf(IdLaw::poisson(), 1.0, 3);
  const double e = std::exp(-1.0);
  CHECK(po(0) == doctest::Approx(e));
  CHECK(po(1) == doctest::Approx(e));
  CHECK(po(2) == doctest::Approx(e / 2));
  CHECK(po(3) == doctest::Approx(e / 6));

  const auto nb = id_pmf(IdLaw::negative_binomial(0.5), 2.0, 2);
  CHECK(nb(0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(nb(1) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(nb(2) == doctest::Approx(0.1875).epsilon(1e-14));
  for (int k = 0; k <= 2; ++k) CHECK(nb(k) == doctest::Approx(oracle::nb_pmf(2.0, 0.5, k)).epsilon(1e-13));

  const auto empty = id_pmf(IdLaw::generic_levy({}), 5.0, 2);
  CHECK(empty(0) == 1.0);
  CHECK(empty(1) == 0.0);
  CHECK(empty(2) == 0.0);

  CHECK_THROWS_AS(id_pmf(IdLaw::poisson(), 1.0, -1), std::invalid_argument);
  CHECK(id_pmf(IdLaw::negative_binomial(0.3), 0.0, 3)(0) == 1.0);
}

TEST_CASE("closed forms agree with the compound Poisson recursion") {
  constexpr int K = 30;
  for (double theta : {0.3, 1.0, 4.5}) {
    const IdLaw po = IdLaw::poisson();
    const auto rec_po = compound_poisson_pmf<double>(levy_masses(po, theta, K), levy_total_mass<double>(po, theta), K);
    CHECK(sup_diff(rec_po, id_pmf(po, theta, K)) <= 1e-12);

    for (double p : {0.2, 0.5, 0.9}) {
      const IdLaw nb = IdLaw::negative_binomial(p);
      const auto rec = compound_poisson_pmf<double>(levy_masses(nb, theta, K), levy_total_mass<double>(nb, theta), K);
      const auto closed = id_pmf(nb, theta, K);
      CHECK(sup_diff(rec, closed) <= 1e-12);
      for (int k = 0; k <= K; ++k) CHECK(std::abs(closed(k) - oracle::nb_pmf(theta, p, k)) <= 1e-12);
    }
  }
}

TEST_CASE("semigroup convolution") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> scale(0.05, 3.0);
  const std::vector<IdLaw> laws{IdLaw::poisson(), IdLaw::negative_binomial(0.4),
                                IdLaw::generic_levy({{1, 0.5}, {3, 0.2}, {4, 0.1}})};
  constexpr int K = 25;
  for (const auto& law : laws)
    for (int rep = 0; rep < 10; ++rep) {
      const double a = scale(rng), b = scale(rng);
      const auto conv = detail::convolve_truncated(id_pmf(law, a, K), id_pmf(law, b, K), K);
      CHECK(sup_diff(conv, id_pmf(law, a + b, K)) <= 1e-10);
    }
}

TEST_CASE("pgf") {
  CHECK(id_pgf(IdLaw::poisson(), 1.0, 0.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(id_pgf(IdLaw::negative_binomial(0.5), 1.0, 0.0) == doctest::Approx(0.5));
  const IdLaw gl = IdLaw::generic_levy({{1, 0.4}, {2, 0.7}});
  for (const auto& law : {IdLaw::poisson(), IdLaw::negative_binomial(0.3), gl})
    CHECK(id_pgf(law, 2.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(id_pgf(IdLaw::poisson(), 1.0, 1.5), std::invalid_argument);

  // Sum_k z^k P(k) matches the pgf up to the neglected tail.
  for (const auto& law : {IdLaw::poisson(), IdLaw::negative_binomial(0.3), gl}) {
    const auto pmf = id_pmf(law, 1.7, 200);
    for (double z : {0.0, 0.3, 0.8, 1.0}) {
      double acc = 0.0, zk = 1.0;
      for (int k = 0; k <= 200; ++k, zk *= z) acc += zk * pmf(k);
      CHECK(std::abs(acc - id_pgf(law, 1.7, z)) <= 1e-10);
    }
  }
}

TEST_CASE("samplers") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 100; ++i) CHECK(id_sample(IdLaw::negative_binomial(0.5), 0.0, rng) == 0);

  constexpr int n = 100000;
  auto mean_of = [&](auto draw) {
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = draw();
      s += v;
      s2 += v * v;
    }
    const double m = s / n;
    return std::pair{m, std::sqrt((s2 / n - m * m) / n)};
  };

  auto [mp, sep] = mean_of([&] { return id_sample(IdLaw::poisson(), 4.0, rng); });
  CHECK(std::abs(mp - 4.0) <= 3 * sep);

  // NB mean theta q / p.
  auto [mn, sen] = mean_of([&] { return id_sample(IdLaw::negative_binomial(0.5), 2.0, rng); });
  CHECK(std::abs(mn - 2.0) <= 3 * sen);

  // Compound Poisson mean theta * sum_j j nu_j.
  const IdLaw gl = IdLaw::generic_levy({{1, 0.5}, {3, 0.25}});
  auto [mg, seg] = mean_of([&] { return id_sample(gl, 2.0, rng); });
  CHECK(std::abs(mg - 2.0 * (0.5 + 0.75)) <= 3 * seg);

  // Beta-binomial mean n a / (a + b).
  auto [mb, seb] = mean_of([&] { return sample_beta_binomial(7, 0.5, 1.5, rng); });
  CHECK(std::abs(mb - 7 * 0.25) <= 3 * seb);
}

TEST_CASE("negative binomial Levy cutoff") {
  const int J = nb_levy_cutoff(1.0, 0.5);
  CHECK(std::pow(0.5, J) / J < 1e-16);
  CHECK(std::pow(0.5, J - 1) / (J - 1) >= 1e-16);
}
