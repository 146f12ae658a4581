#include "misti/cli.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <limits>
#include <sstream>

namespace misti::cli {

namespace {

const std::vector<std::string> kCommands{"simulate", "table", "verify", "classify"};
const std::vector<std::string> kProcesses{"thinning",       "random-measure", "branching-poisson", "branching-nb",
                                          "constant",       "iid",            "ct-poisson",        "ct-nb"};

void add_options(CLI::App& app, RunConfig& c) {
  app.add_option("--process", c.process, "Process construction")->check(CLI::IsMember(kProcesses));
  app.add_option("--law", c.law, "ID family: poisson, nb or levy")->check(CLI::IsMember({"poisson", "nb", "levy"}));
  app.add_option("--levy", c.levy, "Levy masses as j:mass,j:mass (law = levy)");
  app.add_option("--theta", c.theta, "Semigroup scale");
  app.add_option("--p", c.p, "Negative binomial success probability");
  app.add_option("--rho", c.rho, "Lag-one autocorrelation");
  app.add_option("--alpha", c.alpha, "Negative binomial shape");
  app.add_option("--lambda", c.lambda, "Continuous-time rate");
  app.add_option("--steps", c.steps, "Trajectory length");
  app.add_option("--t0", c.t0, "First time index");
  app.add_option("--horizon", c.horizon, "Continuous-time horizon");
  app.add_option("--x0", c.x0, "Continuous-time initial state (negative: stationary draw)");
  app.add_option("--k", c.k, "Lattice bound K");
  app.add_option("--degree", c.degree, "Series degree D");
  app.add_option("--seed", c.seed, "RNG seed");
  app.add_option("--out", c.out, "Output path (default stdout)");
  app.add_option("--format", c.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  app.add_option("--suite", c.suite, "Verification suite")->check(CLI::IsMember(suite_names()));
  app.add_option("--r0", c.r0);
  app.add_option("--r1", c.r1);
  app.add_option("--r2", c.r2);
  app.add_option("--theta1", c.theta1);
  app.add_option("--thetas", c.thetas, "Table grid for theta")->delimiter(',');
  app.add_option("--ps", c.ps, "Table grid for p")->delimiter(',');
  app.add_option("--rhos", c.rhos, "Table grid for rho")->delimiter(',');
}

void check_ranges(const RunConfig& c) {
  if (std::find(kCommands.begin(), kCommands.end(), c.command) == kCommands.end())
    throw ConfigError("unknown command '" + c.command + "'");
  if (c.steps < 1) throw ConfigError("steps must be >= 1");
  if (!(c.horizon > 0.0)) throw ConfigError("horizon must be > 0");
  if (c.k < 2) throw ConfigError("k must be >= 2");
  if (c.degree < 1) throw ConfigError("degree must be >= 1");
  if (c.command == "simulate") build_spec(c);
}

RunConfig parse_with(const std::string& command, const std::function<void(CLI::App&)>& parse) {
  RunConfig cfg;
  cfg.command = command;
  CLI::App app{"misti " + command};
  add_options(app, cfg);
  app.set_config("--config");
  app.allow_config_extras(false);
  try {
    parse(app);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::Error& e) {
    throw ConfigError(e.what());
  }
  check_ranges(cfg);
  return cfg;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + "]";
}

}  // namespace

RunConfig parse_args(const std::vector<std::string>& args) {
  if (args.empty()) throw ConfigError("missing command (simulate, table, verify, classify)");
  std::vector<std::string> rest(args.rbegin(), args.rend() - 1);  // CLI11 consumes from the back
  return parse_with(args.front(), [&](CLI::App& app) { app.parse(rest); });
}

RunConfig parse_config_text(const std::string& command, const std::string& text) {
  return parse_with(command, [&](CLI::App& app) {
    std::istringstream in(text);
    app.parse_from_stream(in);
  });
}

std::string dump_config(const RunConfig& c) {
  std::ostringstream os;
  auto line = [&os](const std::string& key, const std::string& value) { os << key << " = " << value << "\n"; };
  line("process", quoted(c.process));
  line("law", quoted(c.law));
  if (!c.levy.empty()) line("levy", quoted(c.levy));
  line("theta", fmt(c.theta));
  line("p", fmt(c.p));
  line("rho", fmt(c.rho));
  line("alpha", fmt(c.alpha));
  line("lambda", fmt(c.lambda));
  line("steps", std::to_string(c.steps));
  line("t0", std::to_string(c.t0));
  line("horizon", fmt(c.horizon));
  line("x0", std::to_string(c.x0));
  line("k", std::to_string(c.k));
  line("degree", std::to_string(c.degree));
  line("seed", std::to_string(c.seed));
  if (!c.out.empty()) line("out", quoted(c.out));
  if (!c.format.empty()) line("format", quoted(c.format));
  line("suite", quoted(c.suite));
  line("r0", fmt(c.r0));
  line("r1", fmt(c.r1));
  line("r2", fmt(c.r2));
  line("theta1", fmt(c.theta1));
  if (!c.thetas.empty()) line("thetas", list(c.thetas));
  if (!c.ps.empty()) line("ps", list(c.ps));
  if (!c.rhos.empty()) line("rhos", list(c.rhos));
  return os.str();
}

std::string output_format(const RunConfig& c) {
  if (!c.format.empty()) return c.format;
  return c.command == "verify" ? "jsonl" : "csv";
}

IdLaw build_law(const RunConfig& c) {
  try {
    if (c.law == "poisson") return IdLaw::poisson();
    if (c.law == "nb") return IdLaw::negative_binomial(c.p);
    if (c.law == "levy") {
      std::map<int, double> nu;
      std::istringstream in(c.levy);
      std::string item;
      while (std::getline(in, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("levy entries must look like j:mass, got '" + item + "'");
        nu[std::stoi(item.substr(0, colon))] += std::stod(item.substr(colon + 1));
      }
      return IdLaw::generic_levy(nu);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("law: ") + e.what());
  }
  throw ConfigError("unknown law '" + c.law + "'");
}

ProcessSpec build_spec(const RunConfig& c) {
  ProcessSpec spec = ConstantSpec{IdLaw::poisson(), 0.0};
  const auto& name = c.process;
  if (name == "thinning") spec = ThinningSpec{build_law(c), c.theta, c.rho};
  else if (name == "random-measure") spec = RandomMeasureSpec{build_law(c), c.theta, c.rho};
  else if (name == "branching-poisson") spec = BranchingPoissonSpec{c.theta, c.rho};
  else if (name == "branching-nb") spec = BranchingNBSpec{c.alpha, c.p, c.rho};
  else if (name == "constant") spec = ConstantSpec{build_law(c), c.theta};
  else if (name == "iid") spec = IidSpec{build_law(c), c.theta};
  else if (name == "ct-poisson") spec = PoissonBD{c.theta, c.lambda};
  else if (name == "ct-nb") spec = NegBinomialBD{c.alpha, c.p, c.lambda};
  else throw ConfigError("unknown process '" + name + "'");
  try {
    validate(spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

}  // namespace misti::cli
