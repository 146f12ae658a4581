#include "misti/cli.hpp"
#include "misti/stats.hpp"

#include <cmath>

namespace misti::cli {

namespace {

// Conditioning lattice: large enough that the rows of a trivariate table
// carry all but 1e-13 of their mass.
int conditioning_lattice(const ProcessSpec& spec, int k) { return std::max(k, marginal_tail_bound(spec, 1e-13)); }

struct Collector {
  std::string suite;
  std::vector<SuiteCheck> checks;

  void add(const std::string& label, VerifyReport r, bool expect_pass) {
    r.name = label + ":" + r.name;
    checks.push_back({suite, std::move(r), expect_pass});
  }
};

void core_checks(Collector& c, const std::string& label, const ProcessSpec& spec, const RunConfig& cfg,
                 bool expect_markov, bool expect_mvid) {
  c.add(label, check_stationarity(spec, 3, cfg.k), true);
  c.add(label, check_reversibility(spec, cfg.k), true);
  c.add(label, check_markov_triple(chain_joint_pmf<double>(spec, {1, 2, 3}, conditioning_lattice(spec, cfg.k))),
        expect_markov);
  c.add(label, check_mvid(chain_joint_pmf<double>(spec, {1, 2, 3}, cfg.k), cfg.degree), expect_mvid);
}

void theorem1(Collector& c, const RunConfig& cfg) {
  const std::vector<std::pair<std::string, ProcessSpec>> families{
      {"constant", ConstantSpec{IdLaw::poisson(), cfg.theta}},
      {"iid", IidSpec{IdLaw::poisson(), cfg.theta}},
      {"branching-poisson", BranchingPoissonSpec{cfg.theta, cfg.rho}},
      {"branching-nb", BranchingNBSpec{cfg.alpha, cfg.p, cfg.rho}},
  };
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  for (const auto& [label, spec] : families) {
    validate(spec);
    core_checks(c, label, spec, cfg, true, true);
    if (label.rfind("branching", 0) == 0)
      c.add(label, check_branching_product_form(spec, conditioning_lattice(spec, cfg.k), 6, grid), true);

    // Read the r-sequence off the exact bivariate law and classify it back.
    const auto params = read_misti_params(spec);
    const auto cls = misti_classify(params.r0, params.r1, params.r2, params.theta1);
    double err = to_string(cls.family) == label ? 0.0 : 1.0;
    if (const auto* s = std::get_if<BranchingPoissonSpec>(&spec)) {
      err = std::max({err, std::abs(cls.theta1 - s->theta), std::abs(cls.rho - s->rho)});
    } else if (const auto* s = std::get_if<BranchingNBSpec>(&spec)) {
      err = std::max({err, std::abs(cls.alpha - s->alpha), std::abs(cls.q - (1.0 - s->p)), std::abs(cls.rho - s->rho)});
    }
    auto r = make_report("classify", err, {}, 1e-8);
    r.details["r0"] = params.r0;
    r.details["r1"] = params.r1;
    r.details["r2"] = params.r2;
    r.details["theta1"] = params.theta1;
    c.add(label, r, true);
  }
}

void theorem2(Collector& c, const RunConfig& cfg) {
  const ProcessSpec thin = ThinningSpec{IdLaw::negative_binomial(cfg.p), cfg.theta, cfg.rho};
  core_checks(c, "thinning-nb", thin, cfg, true, false);
  const ProcessSpec branching = BranchingNBSpec{cfg.theta, cfg.p, cfg.rho};
  c.add("branching-nb", check_mvid(chain_joint_pmf<double>(branching, {1, 2, 3}, cfg.k), cfg.degree), true);
}

void theorem3(Collector& c, const RunConfig& cfg) {
  const ProcessSpec rm = RandomMeasureSpec{IdLaw::negative_binomial(cfg.p), cfg.theta, cfg.rho};
  c.add("random-measure-nb", check_stationarity(rm, 3, cfg.k), true);
  c.add("random-measure-nb", check_reversibility(rm, cfg.k), true);
  const auto triple = chain_joint_pmf<double>(rm, {1, 2, 3}, conditioning_lattice(rm, cfg.k));
  auto markov = check_markov_triple(triple);
  markov.details["gap_020"] = markov_gap(triple, 0, 2, 0);
  c.add("random-measure-nb", markov, false);
  c.add("random-measure-nb", check_mvid(chain_joint_pmf<double>(rm, {1, 2, 3}, cfg.k), cfg.degree), true);
}

void poisson_coincidence(Collector& c, const RunConfig& cfg) {
  const ProcessSpec rm = RandomMeasureSpec{IdLaw::poisson(), cfg.theta, cfg.rho};
  const ProcessSpec thin = ThinningSpec{IdLaw::poisson(), cfg.theta, cfg.rho};
  for (const std::vector<int>& times : {std::vector<int>{1, 2, 3}, std::vector<int>{0, 1, 3}})
    c.add("poisson", compare_tables("rm-vs-thinning", chain_joint_pmf<double>(rm, times, cfg.k),
                                    chain_joint_pmf<double>(thin, times, cfg.k), 1e-10),
          true);
  c.add("random-measure-poisson",
        check_markov_triple(chain_joint_pmf<double>(rm, {1, 2, 3}, conditioning_lattice(rm, cfg.k))), true);
  // Adjacent-time bivariate laws coincide for every ID law. Wider gaps do
  // not: the thinning chain's two-step law is not a thinning law with rho^2.
  const ProcessSpec rm_nb = RandomMeasureSpec{IdLaw::negative_binomial(cfg.p), cfg.theta, cfg.rho};
  const ProcessSpec thin_nb = ThinningSpec{IdLaw::negative_binomial(cfg.p), cfg.theta, cfg.rho};
  c.add("nb", compare_tables("bivariate-rm-vs-thinning", chain_joint_pmf<double>(rm_nb, {0, 1}, cfg.k),
                             chain_joint_pmf<double>(thin_nb, {0, 1}, cfg.k), 1e-10),
        true);
}

void continuous_time(Collector& c, const RunConfig& cfg) {
  constexpr int kCompare = 25;
  const double rho = std::exp(-cfg.lambda);
  const std::vector<std::tuple<std::string, ProcessSpec, ProcessSpec>> models{
      {"ct-poisson", PoissonBD{cfg.theta, cfg.lambda}, BranchingPoissonSpec{cfg.theta, rho}},
      {"ct-nb", NegBinomialBD{cfg.alpha, cfg.p, cfg.lambda}, BranchingNBSpec{cfg.alpha, cfg.p, rho}},
  };
  for (const auto& [label, spec, chain] : models) {
    const BDModel model = std::holds_alternative<PoissonBD>(spec) ? BDModel{std::get<PoissonBD>(spec)}
                                                                   : BDModel{std::get<NegBinomialBD>(spec)};
    const int kint = internal_lattice(spec, 30);
    const Vector<double> pi = stationary_bd<double>(model, kint);
    const Vector<double> closed = marginal_pmf<double>(spec, 30);
    Eigen::Index at = 0;
    const double sup = (pi.head(31) - closed).cwiseAbs().maxCoeff(&at);
    c.add(label, make_report("stationary-law", sup, {static_cast<int>(at)}, 1e-12), true);

    const auto res = generator_residual(model, pi);
    auto gr = make_report("generator-residual", res.interior, {}, 1e-10);
    gr.details["boundary"] = res.boundary;
    c.add(label, gr, true);

    const int buffer = internal_lattice(spec, kCompare);
    const Matrix<double> P = transition_uniformized<double>(model, 1.0, buffer).topLeftCorner(kCompare + 1, kCompare + 1);
    const Matrix<double> D = one_step_transition<double>(chain, buffer).topLeftCorner(kCompare + 1, kCompare + 1);
    Eigen::Index x = 0, y = 0;
    const double diff = (P - D).cwiseAbs().maxCoeff(&x, &y);
    c.add(label, make_report("integer-times", diff, {static_cast<int>(x), static_cast<int>(y)}, 1e-5), true);

    for (double t : {0.5, 1.0, 2.0}) {
      const double corr = autocorr_exact(spec, t, 30).value_or(0.0);
      auto r = make_report("autocorr", std::abs(corr - std::exp(-cfg.lambda * t)), {}, 1e-4);
      r.details["t"] = t;
      r.details["corr"] = corr;
      c.add(label, r, true);
    }
    c.add(label, check_reversibility(spec, cfg.k), true);
  }
}

}  // namespace

std::vector<std::string> suite_names() { return {"theorem1", "theorem2", "theorem3", "poisson-coincidence", "ct", "all"}; }

std::vector<SuiteCheck> run_suite(const RunConfig& cfg) {
  std::vector<SuiteCheck> out;
  auto run_one = [&](const std::string& name, void (*fn)(Collector&, const RunConfig&)) {
    if (cfg.suite != name && cfg.suite != "all") return;
    Collector c{name, {}};
    fn(c, cfg);
    for (auto& check : c.checks) out.push_back(std::move(check));
  };
  try {
    run_one("theorem1", theorem1);
    run_one("theorem2", theorem2);
    run_one("theorem3", theorem3);
    run_one("poisson-coincidence", poisson_coincidence);
    run_one("ct", continuous_time);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return out;
}

}  // namespace misti::cli
