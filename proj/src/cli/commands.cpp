#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <json.hpp>

#include "vlx/cli.hpp"
#include "vlx/error.hpp"
#include "vlx/levy.hpp"
#include "vlx/mc.hpp"
#include "vlx/specfun.hpp"
#include "vlx/vie.hpp"

namespace vlx::cli {

namespace {

namespace pt = boost::property_tree;
using json = nlohmann::ordered_json;

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Report {
  json summary = json::object();
  std::vector<Table> tables;
  bool failed = false;  // a numerical check reported by the command did not pass
};

struct Context {
  std::uint64_t seed = 0;
};

using Command = std::function<Report(Section&, const Context&)>;

std::vector<std::string> cells(std::initializer_list<double> xs) {
  std::vector<std::string> out;
  for (double x : xs) out.push_back(fmt17(x));
  return out;
}

levy::LevyMeasureSpec read_measure(Section& s, const std::string& kind) {
  const std::string k = s.choice("measure", kind, {"none", "cgmy"});
  const double C = s.num("C", 1.0), M = s.num("M", 3.0), Y = s.num("Y", 1.5);
  if (k == "none") return levy::LevyMeasureSpec::none();
  return levy::LevyMeasureSpec::cgmy(C, M, Y);
}

struct ProblemDefaults {
  double epsilon = 1.0;
  std::string measure = "none";
  std::vector<double> breaks{0.0};
  std::vector<double> values{-1.0};
};

vie::RiccatiProblem read_problem(Section& s, const ProblemDefaults& d) {
  vie::RiccatiProblem pb;
  pb.kernel = kernels::KernelSpec::power(s.num("alpha", 0.7));
  pb.lambda = s.num("lambda", 1.0);
  pb.epsilon = s.num("epsilon", d.epsilon);
  pb.sigma = s.num("sigma", 0.4);
  const double T = s.num("T", 1.0);
  const auto breaks = s.list("breaks", d.breaks);
  const auto values = s.list("values", d.values);
  pb.forcing = PiecewiseConstant(breaks, values, T);
  pb.measure = read_measure(s, d.measure);
  const std::string scheme = s.choice("scheme", "resolvent", {"resolvent", "implicit", "pece"});
  pb.scheme = scheme == "resolvent" ? vie::Scheme::Resolvent
              : scheme == "implicit" ? vie::Scheme::Implicit
                                     : vie::Scheme::Pece;
  pb.tol = s.num("tol", 1e-8);
  pb.n_steps = vie::aligned_steps(pb.forcing, s.count("steps", 2000));
  pb.validate();
  return pb;
}

Report cmd_figure1(Section& s, const Context&) {
  ProblemDefaults d;
  d.epsilon = 0.01;
  d.measure = "cgmy";
  d.breaks = {0.0, 0.5};
  d.values = {-1.0, -0.5};
  vie::RiccatiProblem pb = read_problem(s, d);
  const auto ladder = s.list("eps_ladder", {});
  s.finish();

  Report r;
  const auto path = vie::adams_solve(pb);
  const auto psi0 = vie::psi0_on_grid(pb, path.grid);
  const auto gap = vie::limit_gap(pb, path);
  const auto bounds = vie::check_bounds(pb, path);
  Table curves{"", {"t", "psi_eps", "psi0"}, {}};
  for (std::size_t k = 0; k <= path.grid.steps(); ++k)
    curves.rows.push_back(cells({path.grid.t(k), path.grid[k], psi0[k]}));
  r.tables.push_back(std::move(curves));
  r.summary["epsilon"] = pb.epsilon;
  r.summary["steps"] = pb.n_steps;
  r.summary["scheme"] = path.scheme;
  r.summary["l1_gap"] = gap.l1;
  r.summary["linf_gap"] = gap.linf;
  r.summary["psi0_l1"] = gap.psi0_l1;
  r.summary["relative_l1_gap"] = gap.l1 / gap.psi0_l1;
  r.summary["max_defect"] = path.max_defect;
  r.summary["bounds_hold"] = bounds.holds();
  r.summary["psi0_pieces"] = vie::psi0_pieces(pb);

  if (!ladder.empty()) {
    Table t{"ladder", {"epsilon", "l1_gap", "linf_gap", "relative_l1_gap", "max_defect"}, {}};
    bool decreasing = true;
    double prev = INFINITY;
    for (double eps : ladder) {
      vie::RiccatiProblem q = pb;
      q.epsilon = eps;
      const auto p = vie::adams_solve(q);
      const auto g = vie::limit_gap(q, p);
      t.rows.push_back(cells({eps, g.l1, g.linf, g.l1 / g.psi0_l1, p.max_defect}));
      decreasing = decreasing && g.l1 < prev;
      prev = g.l1;
    }
    r.tables.push_back(std::move(t));
    r.summary["ladder_l1_decreasing"] = decreasing;
  }
  return r;
}

Report cmd_vie_solve(Section& s, const Context&) {
  vie::RiccatiProblem pb = read_problem(s, ProblemDefaults{});
  s.finish();
  Report r;
  const auto path = vie::adams_solve(pb);
  const auto bounds = vie::check_bounds(pb, path);
  Table t{"", {"t", "psi"}, {}};
  for (std::size_t k = 0; k <= path.grid.steps(); ++k) t.rows.push_back(cells({path.grid.t(k), path.grid[k]}));
  r.tables.push_back(std::move(t));
  r.summary["steps"] = pb.n_steps;
  r.summary["scheme"] = path.scheme;
  r.summary["max_defect"] = path.max_defect;
  r.summary["bounds_hold"] = bounds.holds();
  r.summary["bounds"] = bounds.describe();
  return r;
}

Report cmd_psi0(Section& s, const Context&) {
  const auto f = s.list("f", {-1.0, -0.5, 0.0});
  const double lambda = s.num("lambda", 1.0);
  const double sigma = s.num("sigma", 0.4);
  const auto m = read_measure(s, "cgmy");
  s.finish();
  Report r;
  Table t{"", {"f", "psi0", "residual"}, {}};
  for (double x : f) {
    const double p = levy::psi0_solve(x, lambda, sigma, m);
    t.rows.push_back(cells({x, p, x - lambda * p + levy::gbar(sigma, m, p)}));
  }
  r.tables.push_back(std::move(t));
  r.summary["lambda"] = lambda;
  r.summary["sigma"] = sigma;
  r.summary["measure"] = m.describe();
  return r;
}

Report cmd_mgf(Section& s, const Context&) {
  const std::string kind = s.choice("kind", "nig", {"nig", "fdd"});
  const double alpha = s.num("alpha", 0.7);
  const double lambda = s.num("lambda", 1.0);
  const std::size_t steps = s.count("steps", 2000);
  Report r;
  if (kind == "nig") {
    levy::RiccatiCoeffs c;
    const auto ps = s.list("p", {0.25, 0.5, 0.75});
    c.rho = s.num("rho", -0.3);
    c.nu = s.num("nu", 0.4);
    c.lambda = lambda;
    c.theta = s.num("theta", 0.04);
    c.v0 = s.num("v0", 0.04);
    const double t = s.num("t", 1.0);
    const auto ladder = s.list("eps_ladder", {0.1, 0.01, 0.001});
    s.finish();
    Table tab{"", {"p", "epsilon", "log_mgf", "nig_limit", "relative_gap"}, {}};
    json gaps = json::object();
    for (double p : ps) {
      c.p = p;
      c.validate();
      const double limit = levy::nig_log_mgf(c, p, t);
      bool monotone = true;
      double prev = INFINITY;
      for (double eps : ladder) {
        const double v = vie::prop11_log_mgf(c, eps, alpha, t, steps);
        const double rel = std::abs(v - limit) / std::abs(limit);
        tab.rows.push_back(cells({p, eps, v, limit, rel}));
        monotone = monotone && rel < prev;
        prev = rel;
      }
      gaps[fmt17(p)] = {{"final_relative_gap", prev}, {"gap_decreasing", monotone}};
    }
    r.tables.push_back(std::move(tab));
    r.summary["nig"] = gaps;
    return r;
  }

  const auto times = s.list("times", {0.4, 0.9});
  const auto u = s.list("u", {-0.5, -0.3});
  const double sigma = s.num("sigma", 0.4);
  const double theta = s.num("theta", 0.25);
  const double v0 = s.num("v0", 0.25);
  const auto m = read_measure(s, "cgmy");
  const auto ladder = s.list("eps_ladder", {1.0, 0.1, 0.01, 0.001});
  s.finish();
  const levy::LevyTriple z{-lambda, sigma * sigma, m};
  const double limit = levy::subordinator_fdd_log_mgf(z, PiecewiseLinearCurve::flat(theta), times, u);
  Table tab{"", {"epsilon", "log_mgf", "limit_log_mgf", "relative_gap"}, {}};
  for (double eps : ladder) {
    vie::RiccatiProblem pb;
    pb.kernel = kernels::KernelSpec::power(alpha);
    pb.lambda = lambda;
    pb.epsilon = eps;
    pb.sigma = sigma;
    pb.measure = m;
    pb.forcing = vie::fdd_forcing(times, u);
    pb.n_steps = vie::aligned_steps(pb.forcing, steps);
    const auto xi = vie::xi0_eps_curve(alpha, lambda, eps, v0, theta, pb.horizon(), pb.n_steps);
    const double v = vie::fdd_log_mgf_eps(pb, xi);
    tab.rows.push_back(cells({eps, v, limit, std::abs(v - limit) / std::abs(limit)}));
  }
  r.tables.push_back(std::move(tab));
  r.summary["limit_log_mgf"] = limit;
  return r;
}

Report cmd_hitting(Section& s, const Context&) {
  levy::SpectrallyNegativeTriple x;
  x.gamma = s.num("gamma", 1.0);
  x.sigma2 = s.num("sigma2", 1.0);
  x.jumps = read_measure(s, "none");
  const auto bs = s.list("b", {0.5, 1.0});
  const auto qs = s.list("q", {0.5, 1.0, 2.0});
  s.finish();
  x.validate();
  Report r;
  Table t{"", {"b", "q", "laplace", "v_inverse"}, {}};
  for (double b : bs)
    for (double q : qs) t.rows.push_back(cells({b, q, levy::hitting_laplace(x, b, q), levy::v_inverse(x, q)}));
  r.tables.push_back(std::move(t));
  r.summary["gamma"] = x.gamma;
  r.summary["sigma2"] = x.sigma2;
  r.summary["measure"] = x.jumps.describe();
  return r;
}

Report cmd_mc_validate(Section& s, const Context& ctx) {
  mc::McConfig cfg;
  cfg.seed = ctx.seed;
  cfg.n_paths = s.count("n_paths", 20000);
  cfg.dt = s.num("dt", 1e-3);
  cfg.jump_trunc = s.num("jump_trunc", 1e-2);
  cfg.horizon = s.num("horizon", 20.0);
  const double gamma = s.num("gamma", 1.0);
  const double sigma2 = s.num("sigma2", 0.16);
  const auto cg = levy::LevyMeasureSpec::cgmy(s.num("C", 1.0), s.num("M", 3.0), s.num("Y", 1.5));
  const auto bs = s.list("b", {0.5, 1.0});
  const auto qs = s.list("q", {0.5, 1.0, 2.0});
  const double theta = s.num("theta", 0.25);
  const auto times = s.list("times", {0.4, 0.9});
  const auto u = s.list("u", {-0.5, -0.3});
  const double heston_dt = s.num("heston_dt", 1e-3);
  const std::size_t steps = s.count("steps", 2000);
  s.finish();
  cfg.validate();

  Report r;
  Table t{"", {"case", "parameters", "reference", "estimate", "std_error", "bias_bound", "allowance", "pass"}, {}};
  int failures = 0;
  auto add = [&](const std::string& name, const std::string& params, double ref, const mc::Estimate& e) {
    const double allowance = 3.0 * e.std_error + e.bias_bound;
    const bool pass = std::abs(e.value - ref) <= allowance;
    failures += !pass;
    t.rows.push_back({name, params, fmt17(ref), fmt17(e.value), fmt17(e.std_error), fmt17(e.bias_bound),
                      fmt17(allowance), pass ? "PASS" : "FAIL"});
  };

  const levy::SpectrallyNegativeTriple bm{gamma, sigma2, levy::LevyMeasureSpec::none()};
  const auto bm_est = mc::first_passage_laplace_mc(bm, bs, qs, cfg);
  const auto x = levy::mirror({-gamma, sigma2, cg});
  const auto cg_est = mc::first_passage_laplace_mc(x, bs, qs, cfg);
  for (std::size_t i = 0; i < bs.size(); ++i)
    for (std::size_t j = 0; j < qs.size(); ++j) {
      const std::string params = "b=" + fmt17(bs[i]) + " q=" + fmt17(qs[j]);
      add("hitting-brownian", params, levy::hitting_laplace(bm, bs[i], qs[j]), bm_est[i][j]);
      add("hitting-cgmy", params, levy::hitting_laplace(x, bs[i], qs[j]), cg_est[i][j]);
    }

  const auto xi = PiecewiseLinearCurve::flat(theta);
  const levy::LevyTriple zb{-gamma, sigma2, levy::LevyMeasureSpec::none()};
  const levy::LevyTriple zc{-gamma, sigma2, cg};
  const std::vector<double> one_t{times.back()}, one_u{u.front()};
  add("fdd-brownian", "s=" + join(one_t) + " u=" + join(one_u),
      std::exp(levy::subordinator_fdd_log_mgf(zb, xi, one_t, one_u)), mc::subordinator_fdd_mc(zb, xi, one_t, one_u, cfg));
  add("fdd-cgmy", "s=" + join(times) + " u=" + join(u), std::exp(levy::subordinator_fdd_log_mgf(zc, xi, times, u)),
      mc::subordinator_fdd_mc(zc, xi, times, u, cfg));

  vie::RiccatiProblem pb;
  pb.kernel = kernels::KernelSpec::power(1.0);
  pb.lambda = gamma;
  pb.epsilon = 1.0;
  pb.sigma = std::sqrt(sigma2);
  pb.measure = cg;
  pb.forcing = vie::fdd_forcing(times, u);
  pb.n_steps = vie::aligned_steps(pb.forcing, steps);
  mc::HestonJumpParams hp;
  hp.lambda = gamma;
  hp.theta = hp.v0 = theta;
  hp.sigma = std::sqrt(sigma2);
  hp.measure = cg;
  mc::McConfig hc = cfg;
  hc.dt = heston_dt;
  add("heston-alpha1", "s=" + join(times) + " u=" + join(u), std::exp(vie::fdd_log_mgf_eps(pb, xi)),
      mc::heston_jump_euler_mgf(hp, pb.forcing, hc));

  r.tables.push_back(std::move(t));
  r.summary["comparisons"] = r.tables.back().rows.size();
  r.summary["failures"] = failures;
  r.failed = failures > 0;
  return r;
}

Report cmd_ml_eval(Section& s, const Context&) {
  const double alpha = s.num("alpha", 0.7);
  const double beta = s.num("beta", 1.0);
  const auto zs = s.list("z", {-50.0, -10.0, -5.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0});
  s.finish();
  Report r;
  Table t{"", {"z", "value"}, {}};
  for (double z : zs) t.rows.push_back(cells({z, specfun::mittag_leffler({alpha, beta}, z)}));
  r.tables.push_back(std::move(t));
  r.summary["alpha"] = alpha;
  r.summary["beta"] = beta;
  return r;
}

const std::map<std::string, std::pair<Command, std::string>>& commands() {
  static const std::map<std::string, std::pair<Command, std::string>> table{
      {"figure1", {cmd_figure1, "psi_eps against psi0 for a two-step forcing with CGMY jumps"}},
      {"vie-solve", {cmd_vie_solve, "solve one Riccati-Volterra equation"}},
      {"psi0", {cmd_psi0, "pointwise limit psi0 for a list of forcing values"}},
      {"mgf", {cmd_mgf, "log-mgf along an epsilon ladder against its limit law"}},
      {"hitting", {cmd_hitting, "first-passage Laplace transform"}},
      {"mc-validate", {cmd_mc_validate, "Monte Carlo cross-checks with 3-SE pass/fail"}},
      {"ml-eval", {cmd_ml_eval, "Mittag-Leffler function values"}},
  };
  return table;
}

json section_json(const pt::ptree& tree) {
  json out = json::object();
  for (const auto& [sec, kids] : tree) {
    json o = json::object();
    for (const auto& [k, v] : kids) o[k] = v.data();
    out[sec] = o;
  }
  return out;
}

json table_json(const Table& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::array();
    for (const auto& c : row) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (!c.empty() && end == c.c_str() + c.size())
        r.push_back(v);
      else
        r.push_back(c);
    }
    rows.push_back(r);
  }
  return {{"columns", t.header}, {"rows", rows}};
}

void write_csv(const std::filesystem::path& file, const Table& t) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + file.string());
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Riccati-Volterra equations, their limit laws and Monte Carlo checks", "vlx"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  std::string config_path, out_dir = ".", format, eps_ladder;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed");
  auto* steps_opt = app.add_option("--steps", steps, "grid steps")->check(CLI::PositiveNumber);
  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--eps-ladder", eps_ladder, "comma-separated epsilon values");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  for (const auto& [name, cmd] : commands()) app.add_subcommand(name, cmd.second)->fallthrough();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  try {
    pt::ptree raw, resolved;
    if (!config_path.empty()) {
      try {
        pt::ini_parser::read_ini(config_path, raw);
      } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
    }
    for (const auto& [sec, kids] : raw)
      if (sec != "run" && !commands().count(sec)) throw ConfigError("config: unknown section [" + sec + "]");
    if (*seed_opt) raw.put(pt::ptree::path_type("run/seed", '/'), std::to_string(seed));
    if (!format.empty()) raw.put(pt::ptree::path_type("run/format", '/'), format);
    if (*steps_opt) raw.put(pt::ptree::path_type(name + "/steps", '/'), std::to_string(steps));
    if (!eps_ladder.empty()) raw.put(pt::ptree::path_type(name + "/eps_ladder", '/'), eps_ladder);

    Section run_sec(raw, resolved, "run");
    Context ctx;
    ctx.seed = run_sec.u64("seed", 20240611);
    const std::string fmt = run_sec.choice("format", "csv", {"csv", "json"});
    run_sec.finish();
    Section sec(raw, resolved, name);
    Report rep = commands().at(name).first(sec, ctx);

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    json files = json::array();
    json tables = json::object();
    for (const auto& t : rep.tables) {
      const std::string stem = t.name.empty() ? name : name + "_" + t.name;
      if (fmt == "csv") {
        write_csv(dir / (stem + ".csv"), t);
        files.push_back(stem + ".csv");
      } else {
        tables[t.name.empty() ? "data" : t.name] = table_json(t);
      }
    }
    pt::ini_parser::write_ini((dir / (name + ".ini")).string(), resolved);
    files.push_back(name + ".ini");
    json doc = {{"command", name}, {"version", kVersion}, {"seed", ctx.seed}, {"config", section_json(resolved)},
                {"summary", rep.summary}, {"files", files}};
    if (fmt == "json") doc["tables"] = tables;
    {
      std::ofstream os(dir / (name + ".json"), std::ios::binary);
      if (!os) throw ConfigError("cannot write " + (dir / (name + ".json")).string());
      os << doc.dump(2) << '\n';
    }
    std::cout << rep.summary.dump(2) << '\n';
    for (const auto& t : rep.tables)
      if (name == "mc-validate")
        for (const auto& row : t.rows) std::cout << row.back() << "  " << row[0] << "  " << row[1] << '\n';
    return rep.failed ? kNumericalError : kOk;
  } catch (const ConfigError& e) {
    std::cerr << "vlx " << name << ": " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    std::cerr << "vlx " << name << ": invalid parameter: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "vlx " << name << ": numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "vlx " << name << ": " << e.what() << '\n';
    return kNumericalError;
  }
}

}  // namespace vlx::cli
