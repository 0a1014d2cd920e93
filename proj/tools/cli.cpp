#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "experiment.hpp"
#include "levylmm/setup_io.hpp"

namespace levylmm {

namespace {

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void write_output(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path);
  file << text;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file << text;
}

MarketSetup load(const RunConfig& cfg) {
  return load_setup(cfg.setup_path.empty() ? bundled_setup_path() : cfg.setup_path);
}

std::vector<InstrumentSpec> caplet_specs(const RunConfig& cfg, const MarketSetup& setup) {
  std::vector<InstrumentSpec> specs;
  for (Eigen::Index i = 1; i <= setup.num_rates(); ++i) {
    if (cfg.rate && *cfg.rate != i) continue;
    if (cfg.strike) {
      specs.push_back(CapletSpec{*cfg.strike, i});
      continue;
    }
    for (double m : cfg.strike_multipliers) specs.push_back(CapletSpec{m * setup.initial_libor(i - 1), i});
  }
  if (specs.empty()) throw std::invalid_argument("no caplet matches --rate");
  return specs;
}

std::vector<InstrumentSpec> swaption_specs(const RunConfig& cfg, const MarketSetup& setup) {
  if (cfg.option_index || cfg.swap_end) {
    if (!cfg.option_index || !cfg.swap_end)
      throw std::invalid_argument("--option-index and --swap-end go together");
    const Eigen::Index i = *cfg.option_index, m = *cfg.swap_end;
    if (cfg.strike) return {SwaptionSpec{*cfg.strike, i, m, cfg.convention}};
    double atm = forward_swap_rate(setup, i, m);
    if (cfg.convention == CouponConvention::Literal) atm *= setup.tenor.accrual(i);
    std::vector<InstrumentSpec> specs;
    for (double mult : cfg.strike_multipliers) specs.push_back(SwaptionSpec{mult * atm, i, m, cfg.convention});
    return specs;
  }
  auto specs = swaption_grid(setup, cfg.strike_multipliers, cfg.convention);
  if (cfg.strike)
    for (auto& s : specs) std::get<SwaptionSpec>(s).strike = *cfg.strike;
  return specs;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  const auto setup = load(cfg);
  const auto report = validate_setup(setup);
  write_output(report.to_json() + "\n", cfg.out, out);
  return report.passed() ? 0 : 2;
}

int cmd_price(const RunConfig& cfg, const std::vector<InstrumentSpec>& specs, const MarketSetup& setup,
              std::ostream& out) {
  const auto grid = build_grid(setup.tenor, cfg.substeps);
  const auto est = price_mc(cfg.scheme, specs, setup, grid, cfg.n_paths, cfg.seed, cfg.threads, cfg.drift_method);
  write_output(estimates_csv(specs, est), cfg.out, out);
  return 0;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
  const auto setup = load(cfg);
  auto cells = caplet_specs(cfg, setup);
  if (!cfg.rate) {
    const auto sw = swaption_specs(cfg, setup);
    cells.insert(cells.end(), sw.begin(), sw.end());
  }
  const auto grid = build_grid(setup.tenor, cfg.substeps);
  const auto table = compare_schemes(cells, setup, grid, cfg.n_paths, cfg.seed, cfg.threads, cfg.drift_method);
  write_output(table.to_csv(), cfg.out, out);
  return 0;
}

int cmd_dump_paths(const RunConfig& cfg, std::ostream& out) {
  const auto setup = load(cfg);
  const auto grid = build_grid(setup.tenor, cfg.substeps);
  write_output(dump_paths_csv(simulate_ensemble(cfg.scheme, grid, setup, cfg.n_paths, cfg.seed, cfg.threads)),
               cfg.out, out);
  return 0;
}

int cmd_reproduce(const RunConfig& cfg, bool paths_given, std::ostream& out) {
  const auto setup = load(cfg);
  ExperimentConfig exp;
  exp.seed = cfg.seed;
  exp.substeps = cfg.substeps;
  exp.threads = cfg.threads;
  exp.drift_method = cfg.drift_method;
  if (paths_given) exp.comparison_paths = cfg.n_paths;

  const std::filesystem::path dir = cfg.out.empty() ? std::filesystem::path(".") : std::filesystem::path(cfg.out);
  std::filesystem::create_directories(dir);
  const AcceptanceRun run = run_acceptance(setup, exp, &out);

  write_file(dir / "caplets.csv", run.caplets.to_csv());
  write_file(dir / "swaptions.csv", run.swaptions.to_csv());
  write_file(dir / "caplet_frozen.dat", caplet_surface_dat(run.caplets, Scheme::FrozenDrift));
  write_file(dir / "caplet_taylor.dat", caplet_surface_dat(run.caplets, Scheme::StrongTaylor));
  write_file(dir / "swaption_frozen.dat", swaption_surface_dat(run.swaptions, Scheme::FrozenDrift));
  write_file(dir / "swaption_taylor.dat", swaption_surface_dat(run.swaptions, Scheme::StrongTaylor));
  write_file(dir / "plot.gp", gnuplot_script());
  std::ostringstream summary;
  for (const auto& c : run.criteria) summary << format_result(c) << '\n';
  write_file(dir / "summary.txt", summary.str());

  int passed = 0;
  for (const auto& c : run.criteria) passed += c.passed;
  out << passed << "/" << run.criteria.size() << " criteria passed; results in " << dir.string() << "\n";
  return run.passed() ? 0 : 1;
}

}  // namespace

std::string estimates_csv(const std::vector<InstrumentSpec>& specs, const std::vector<McEstimate>& estimates) {
  std::ostringstream os;
  os << "instrument,maturity_index,swap_end,strike,scheme,price,std_error,n_paths,seed,invalid_paths\n";
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto& e = estimates[k];
    if (const auto* c = std::get_if<CapletSpec>(&specs[k])) {
      os << "caplet," << c->rate << ",0," << fmt_double(c->strike);
    } else {
      const auto& s = std::get<SwaptionSpec>(specs[k]);
      os << "swaption," << s.option_index << ',' << s.swap_end << ',' << fmt_double(s.strike);
    }
    os << ',' << to_string(e.scheme) << ',' << fmt_double(e.value) << ',' << fmt_double(e.std_error) << ','
       << e.n_paths << ',' << e.seed << ',' << e.invalid_path_count << '\n';
  }
  return os.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo for the Levy LIBOR market model with an NIG driver"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string scheme = "full", method = "cumulant", convention = "accrued";
  Eigen::Index rate = 0, option_index = 0, swap_end = 0;
  double strike = 0.0;

  const std::map<std::string, std::string> schemes{{"full", "full"}, {"frozen", "frozen"}, {"taylor", "taylor"}};
  const std::map<std::string, std::string> methods{{"cumulant", "cumulant"}, {"quadrature", "quadrature"}};
  const std::map<std::string, std::string> conventions{{"accrued", "accrued"}, {"literal", "literal"}};

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--setup", cfg.setup_path, "market setup JSON (default: bundled Feb 2002 setup)");
    sub->add_option("--out", cfg.out, "output file (directory for reproduce-paper)");
  };
  const auto sim = [&](CLI::App* sub) {
    common(sub);
    sub->add_option("--scheme", scheme, "full, frozen or taylor")->transform(CLI::IsMember(schemes));
    sub->add_option("--paths", cfg.n_paths, "number of paths")->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "master seed");
    sub->add_option("--substeps", cfg.substeps, "Euler steps per accrual period")->check(CLI::PositiveNumber);
    sub->add_option("--drift-method", method, "cumulant or quadrature")->transform(CLI::IsMember(methods));
    sub->add_option("--threads", cfg.threads, "worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber);
    sub->add_option("--multipliers", cfg.strike_multipliers, "strike grid as multiples of the forward");
  };

  auto* validate = app.add_subcommand("validate", "print the validation report of a setup");
  common(validate);
  auto* caplets = app.add_subcommand("price-caplets", "Monte Carlo caplet prices");
  sim(caplets);
  auto* swaptions = app.add_subcommand("price-swaptions", "Monte Carlo payer swaption prices");
  sim(swaptions);
  auto* compare = app.add_subcommand("compare", "all three schemes on common random numbers");
  sim(compare);
  auto* reproduce = app.add_subcommand("reproduce-paper", "full caplet/swaption experiment with pass/fail summary");
  sim(reproduce);
  auto* dump = app.add_subcommand("dump-paths", "log-rate paths as CSV");
  sim(dump);
  cfg.n_paths = 100000;

  for (auto* sub : {caplets, swaptions, compare}) {
    sub->add_option("--strike", strike, "absolute strike instead of the multiplier grid");
    sub->add_option("--coupon-convention", convention, "accrued or literal")->transform(CLI::IsMember(conventions));
  }
  for (auto* sub : {caplets, compare}) sub->add_option("--rate", rate, "caplet on this rate only");
  for (auto* sub : {swaptions, compare}) {
    sub->add_option("--option-index", option_index, "exercise date index");
    sub->add_option("--swap-end", swap_end, "last payment date index");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  const auto given = [](CLI::App* sub, const char* name) { return sub->count(name) > 0; };
  CLI::App* active = app.get_subcommands().front();
  cfg.subcommand = active->get_name();
  cfg.scheme = scheme_from_string(scheme);
  cfg.drift_method = method == "quadrature" ? DriftMethod::Quadrature : DriftMethod::CumulantExpansion;
  cfg.convention = convention == "literal" ? CouponConvention::Literal : CouponConvention::Accrued;
  if (active != validate && active != reproduce && active != dump) {
    if (given(active, "--strike")) cfg.strike = strike;
    if (active != swaptions && given(active, "--rate")) cfg.rate = rate;
    if (active != caplets && given(active, "--option-index")) cfg.option_index = option_index;
    if (active != caplets && given(active, "--swap-end")) cfg.swap_end = swap_end;
  }
  if (active == dump && !given(dump, "--paths")) cfg.n_paths = 10;

  try {
    if (active == validate) return cmd_validate(cfg, out);
    if (active == caplets) {
      const auto setup = load(cfg);
      return cmd_price(cfg, caplet_specs(cfg, setup), setup, out);
    }
    if (active == swaptions) {
      const auto setup = load(cfg);
      return cmd_price(cfg, swaption_specs(cfg, setup), setup, out);
    }
    if (active == compare) return cmd_compare(cfg, out);
    if (active == dump) return cmd_dump_paths(cfg, out);
    return cmd_reproduce(cfg, given(reproduce, "--paths"), out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace levylmm
