#include "misti/cli.hpp"

#include <json.hpp>

#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <random>

namespace misti::cli {

namespace {

// Runs `body` against the configured output file, or `fallback` when none is set.
int with_output(const RunConfig& cfg, std::ostream& fallback, const std::function<int(std::ostream&)>& body) {
  if (cfg.out.empty()) return body(fallback);
  std::ofstream file(cfg.out);
  if (!file) throw ConfigError("cannot open output file '" + cfg.out + "'");
  file << std::setprecision(std::numeric_limits<double>::max_digits10);
  return body(file);
}

std::string witness_string(const std::vector<int>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? ";" : "") + std::to_string(w[i]);
  return s;
}

const char* kUsage =
    "usage: misti <simulate|table|verify|classify> [options]\n"
    "       misti <command> --help\n";

}  // namespace

TableRow discriminating_row(double theta, double p, double rho, int max_value) {
  const IdLaw nb = IdLaw::negative_binomial(p);
  const double marginal2 = id_pmf<double>(nb, theta, 2)(2);
  const auto thin = chain_joint_pmf<double>(ThinningSpec{nb, theta, rho}, {1, 2, 3}, max_value);
  const auto rm = chain_joint_pmf<double>(RandomMeasureSpec{nb, theta, rho}, {1, 2, 3}, max_value);
  return {theta,
          p,
          rho,
          thin.at({0, 2, 0}) / marginal2,
          nb_thinning_cond020<double>(theta, p, rho),
          rm.at({0, 2, 0}) / marginal2,
          nb_random_measure_cond020<double>(theta, p, rho)};
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const ProcessSpec spec = build_spec(cfg);
  std::mt19937_64 rng(cfg.seed);
  const bool jsonl = output_format(cfg) == "jsonl";
  if (is_continuous_time(spec)) {
    const BDModel model = std::holds_alternative<PoissonBD>(spec) ? BDModel{std::get<PoissonBD>(spec)}
                                                                   : BDModel{std::get<NegBinomialBD>(spec)};
    const auto m = marginal_law(spec);
    const int x0 = cfg.x0 >= 0 ? cfg.x0 : id_sample(m.law, m.theta, rng);
    const EventPath path = gillespie(model, x0, cfg.horizon, rng);
    return with_output(cfg, out, [&](std::ostream& os) {
      os << std::setprecision(std::numeric_limits<double>::max_digits10);
      if (!jsonl) os << "time,state\n";
      for (std::size_t i = 0; i < path.times.size(); ++i) {
        if (jsonl)
          os << nlohmann::ordered_json{{"time", path.times[i]}, {"state", path.states[i]}}.dump() << "\n";
        else
          os << path.times[i] << "," << path.states[i] << "\n";
      }
      return kExitOk;
    });
  }
  Trajectory traj;
  try {
    traj = simulate(spec, cfg.t0, cfg.steps, rng);
  } catch (const BudgetExceeded& e) {
    throw ConfigError(e.what());
  }
  return with_output(cfg, out, [&](std::ostream& os) {
    if (!jsonl) os << "t,x\n";
    for (std::size_t i = 0; i < traj.values.size(); ++i) {
      const long t = traj.t0 + static_cast<long>(i);
      if (jsonl)
        os << nlohmann::ordered_json{{"t", t}, {"x", traj.values[i]}}.dump() << "\n";
      else
        os << t << "," << traj.values[i] << "\n";
    }
    return kExitOk;
  });
}

int cmd_table(const RunConfig& cfg, std::ostream& out) {
  const auto thetas = cfg.thetas.empty() ? std::vector<double>{cfg.theta} : cfg.thetas;
  const auto ps = cfg.ps.empty() ? std::vector<double>{cfg.p} : cfg.ps;
  const auto rhos = cfg.rhos.empty() ? std::vector<double>{cfg.rho} : cfg.rhos;
  std::vector<TableRow> rows;
  for (double theta : thetas)
    for (double p : ps)
      for (double rho : rhos) {
        if (!(theta > 0.0)) throw ConfigError("table: theta must be > 0");
        if (!(p > 0.0 && p < 1.0)) throw ConfigError("table: p must lie in (0,1)");
        if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("table: rho must lie strictly inside (0,1)");
        rows.push_back(discriminating_row(theta, p, rho, cfg.k));
      }
  return with_output(cfg, out, [&](std::ostream& os) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    if (output_format(cfg) == "csv")
      os << "theta,p,rho,thinning_enum,thinning_closed,thinning_dev,rm_enum,rm_closed,rm_dev,gap\n";
    for (const auto& r : rows) {
      const double tdev = std::abs(r.thinning_enum - r.thinning_closed);
      const double rdev = std::abs(r.rm_enum - r.rm_closed);
      const double gap = r.rm_enum - r.thinning_enum;
      if (output_format(cfg) == "csv") {
        os << r.theta << "," << r.p << "," << r.rho << "," << r.thinning_enum << "," << r.thinning_closed << ","
           << tdev << "," << r.rm_enum << "," << r.rm_closed << "," << rdev << "," << gap << "\n";
      } else {
        nlohmann::ordered_json j{{"theta", r.theta},         {"p", r.p},
                                 {"rho", r.rho},             {"thinning_enum", r.thinning_enum},
                                 {"thinning_closed", r.thinning_closed}, {"thinning_dev", tdev},
                                 {"rm_enum", r.rm_enum},     {"rm_closed", r.rm_closed},
                                 {"rm_dev", rdev},           {"gap", gap}};
        os << j.dump() << "\n";
      }
    }
    return kExitOk;
  });
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const auto checks = run_suite(cfg);
  bool all_match = true;
  for (const auto& c : checks) all_match = all_match && c.matches();
  return with_output(cfg, out, [&](std::ostream& os) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    if (output_format(cfg) == "csv") os << "suite,name,violation,tolerance,pass,expected,ok,witness\n";
    for (const auto& c : checks) {
      const char* expected = c.expect_pass ? "pass" : "fail";
      if (output_format(cfg) == "csv") {
        os << c.suite << "," << c.report.name << "," << c.report.violation << "," << c.report.tolerance << ","
           << (c.report.pass ? "true" : "false") << "," << expected << "," << (c.matches() ? "true" : "false") << ","
           << witness_string(c.report.witness) << "\n";
      } else {
        auto j = nlohmann::ordered_json::parse(to_json_line(c.report));
        j["suite"] = c.suite;
        j["expected"] = expected;
        j["ok"] = c.matches();
        os << j.dump() << "\n";
      }
    }
    return all_match ? kExitOk : kExitMismatch;
  });
}

int cmd_classify(const RunConfig& cfg, std::ostream& out) {
  std::optional<MistiClass> found;
  try {
    found = misti_classify(cfg.r0, cfg.r1, cfg.r2, cfg.theta1);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  const MistiClass& cls = *found;
  return with_output(cfg, out, [&](std::ostream& os) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    if (output_format(cfg) == "csv") {
      os << "family,theta1,rho,q,alpha,spec\n";
      os << to_string(cls.family) << "," << cls.theta1 << "," << cls.rho << "," << cls.q << "," << cls.alpha << ",\""
         << describe(cls.spec) << "\"\n";
    } else {
      nlohmann::ordered_json j{{"family", to_string(cls.family)}, {"theta1", cls.theta1}, {"rho", cls.rho},
                               {"q", cls.q},                      {"alpha", cls.alpha},   {"spec", describe(cls.spec)}};
      os << j.dump() << "\n";
    }
    return kExitOk;
  });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || args.front() == "--help" || args.front() == "-h") {
    (args.empty() ? err : out) << kUsage;
    return args.empty() ? kExitConfig : kExitOk;
  }
  try {
    const RunConfig cfg = parse_args(args);
    if (cfg.command == "simulate") return cmd_simulate(cfg, out);
    if (cfg.command == "table") return cmd_table(cfg, out);
    if (cfg.command == "verify") return cmd_verify(cfg, out);
    return cmd_classify(cfg, out);
  } catch (const HelpRequested& h) {
    out << h.what();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BudgetExceeded& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace misti::cli
