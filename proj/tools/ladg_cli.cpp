// Command line front end: adaptive runs, convergence-order tables over
// uniform meshes, and a quick self check.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "ladg/ladg.hpp"

namespace {

struct CommonFlags {
  std::string solver_name;
};

void add_common(CLI::App* sub, ladg::RunConfig& cfg, CommonFlags& fl) {
  sub->add_option("--problem", cfg.problem, "peak | blayer");
  sub->add_option("--kappa", cfg.kappa, "peak sharpness");
  sub->add_option("--zeta", cfg.zeta, "blayer sharpness");
  sub->add_option("--eps", cfg.eps, "blayer diffusion coefficient");
  sub->add_flag("--advect", cfg.advect, "blayer: advecting field -(1,1)");
  sub->add_option("--penalty", cfg.penalty, "jump penalty factor");
  sub->add_option("--solver", fl.solver_name, "direct | cg-ic | gmres-ilu");
  sub->add_option("--rtol", cfg.solver.rtol, "iterative solver tolerance");
}

int cmd_run(CLI::App* sub, ladg::RunConfig cfg, const CommonFlags& fl,
            const std::string& config_file, const std::string& out_csv,
            const std::string& mesh_out) {
  if (!config_file.empty()) {
    // command line flags win over the file
    ladg::RunConfig fc = ladg::load_config(config_file);
    auto cli = [&](const char* name) { return sub->count(name) > 0; };
    if (!cli("--problem")) cfg.problem = fc.problem;
    if (!cli("--kappa")) cfg.kappa = fc.kappa;
    if (!cli("--zeta")) cfg.zeta = fc.zeta;
    if (!cli("--eps")) cfg.eps = fc.eps;
    if (!cli("--advect")) cfg.advect = fc.advect;
    if (!cli("--scheme")) cfg.scheme = fc.scheme;
    if (!cli("--iters")) cfg.iters = fc.iters;
    if (!cli("--theta")) cfg.theta = fc.theta;
    if (!cli("--penalty")) cfg.penalty = fc.penalty;
    if (!cli("--n0")) cfg.n0 = fc.n0;
    if (!cli("--rtol")) cfg.solver.rtol = fc.solver.rtol;
    if (!cli("--solver")) cfg.solver.method = fc.solver.method;
    if (!cli("--fixed-subdomains")) cfg.fixed_subdomains = fc.fixed_subdomains;
    if (!cli("--mesh-in")) cfg.mesh_in = fc.mesh_in;
    cfg.degree = fc.degree;
    cfg.subdivision_cap = fc.subdivision_cap;
  }
  if (sub->count("--solver") > 0)
    cfg.solver.method = ladg::solve_method_from_string(fl.solver_name);

  ladg::ManufacturedProblem mp = ladg::make_problem(cfg);
  ladg::RunResult res = ladg::run_scheme(cfg, mp.data);
  ladg::print_run_summary(std::cout, res);
  if (!out_csv.empty()) {
    ladg::write_csv(res, out_csv);
    std::cout << "wrote " << out_csv << "\n";
  }
  if (!mesh_out.empty()) {
    ladg::write_mesh(*res.mesh, mesh_out);
    std::cout << "wrote " << mesh_out << "\n";
  }
  return 0;
}

// Fits log(value) vs log(h) over the rows of a CSV produced by `run` or by
// the sweep below. Uses the `h` column when present, otherwise h = 2^-level.
int cmd_orders_fit(const std::string& in_csv, const std::string& col_name) {
  std::ifstream is(in_csv);
  if (!is.good()) throw ladg::LadgError("cannot open " + in_csv);
  std::string header;
  if (!std::getline(is, header))
    throw ladg::LadgError("empty CSV " + in_csv);

  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) out.push_back(cell);
    return out;
  };
  auto cols = split(header);
  int vcol = -1, hcol = -1, lcol = -1;
  for (size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == col_name) vcol = int(i);
    if (cols[i] == "h") hcol = int(i);
    if (cols[i] == "level") lcol = int(i);
  }
  if (vcol < 0)
    throw ladg::LadgError("no column '" + col_name + "' in " + in_csv);
  if (hcol < 0 && lcol < 0)
    throw ladg::LadgError("need an 'h' or 'level' column in " + in_csv);

  std::vector<double> h, v;
  std::string line;
  while (std::getline(is, line)) {
    auto cells = split(line);
    if (int(cells.size()) <= vcol) continue;
    try {
      double hv = hcol >= 0 ? std::stod(cells.at(hcol))
                            : std::pow(2.0, -std::stod(cells.at(lcol)));
      double vv = std::stod(cells[vcol]);
      if (hv > 0.0 && vv > 0.0) {
        h.push_back(hv);
        v.push_back(vv);
      }
    } catch (const std::invalid_argument&) {
      continue;  // summary rows and blanks
    }
  }
  if (h.size() < 2)
    throw ladg::LadgError("fewer than two usable rows in " + in_csv);
  std::printf("%.6f\n", ladg::fit_order(h, v));
  return 0;
}

int cmd_orders(ladg::RunConfig cfg, const CommonFlags& fl, int nmin, int nmax,
               const std::string& out_csv) {
  if (!fl.solver_name.empty())
    cfg.solver.method = ladg::solve_method_from_string(fl.solver_name);
  cfg.scheme = "local";
  cfg.iters = 2;
  cfg.fixed_boxes = {{2, {0.0, 0.0, 0.5, 0.5}}};

  std::vector<double> h;
  std::vector<std::pair<std::string, std::vector<double>>> cols = {
      {"erren", {}}, {"etaNC", {}}, {"etaR", {}},  {"etaDF", {}},
      {"etaU", {}},  {"etatU", {}}, {"etaGu", {}}, {"etaGd", {}},
  };
  std::printf("%6s %10s", "n", "h");
  for (auto& c : cols) std::printf(" %10s", c.first.c_str());
  std::printf("\n");

  for (int n = nmin; n <= nmax; n *= 2) {
    cfg.n0 = n;
    ladg::ManufacturedProblem mp = ladg::make_problem(cfg);
    ladg::RunResult res = ladg::run_local(cfg, mp.data);
    const ladg::IterationRecord& r = res.iterations.at(1);
    h.push_back(1.0 / n);
    double vals[] = {r.erren,    r.est.NC, r.est.R,  r.est.DF,
                     r.est.U, r.est.tU, r.est.G1, r.est.G2};
    std::printf("%6d %10.6f", n, 1.0 / n);
    for (size_t i = 0; i < cols.size(); ++i) {
      cols[i].second.push_back(vals[i]);
      std::printf(" %10.3e", vals[i]);
    }
    std::printf("\n");
    std::fflush(stdout);
  }

  if (h.size() >= 2) {
    std::printf("%6s %10s", "order", "");
    for (auto& c : cols)
      std::printf(" %10.2f", ladg::fit_order(h, c.second));
    std::printf("\n");
  }

  if (!out_csv.empty()) {
    std::ofstream os(out_csv);
    if (!os.good()) throw ladg::LadgError("cannot open " + out_csv);
    os.precision(12);
    os << "n,h";
    for (auto& c : cols) os << ',' << c.first;
    os << '\n';
    for (size_t i = 0; i < h.size(); ++i) {
      os << int(std::lround(1.0 / h[i])) << ',' << h[i];
      for (auto& c : cols) os << ',' << c.second[i];
      os << '\n';
    }
    if (h.size() >= 2) {
      os << "order,";
      for (auto& c : cols) os << ',' << ladg::fit_order(h, c.second);
      os << '\n';
    }
    std::printf("wrote %s\n", out_csv.c_str());
  }
  return 0;
}

int cmd_check() {
  ladg::RunConfig cfg;
  cfg.problem = "peak";
  cfg.kappa = 10.0;
  cfg.n0 = 8;
  cfg.iters = 4;
  cfg.scheme = "local";
  ladg::ManufacturedProblem mp = ladg::make_problem(cfg);
  ladg::RunResult res = ladg::run_local(cfg, mp.data);

  int failures = 0;
  auto report = [&](bool ok, const std::string& what) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what.c_str());
    if (!ok) ++failures;
  };

  bool cons = true, reliable = true, growing = true;
  for (size_t i = 0; i < res.iterations.size(); ++i) {
    const auto& r = res.iterations[i];
    cons = cons && r.est.conservation_max <= 1e-9;
    reliable = reliable && r.erren <= r.est.eta * (1.0 + 1e-6);
    if (i > 0)
      growing = growing &&
                r.n_elements >= res.iterations[i - 1].n_elements;
  }
  report(cons, "flux reconstruction conserves elementwise");
  report(reliable, "estimator bounds the energy error");
  report(growing, "element counts nondecreasing");
  report(res.iterations.back().est.eta < res.iterations.front().est.eta,
         "estimated error decreased over the run");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Discontinuous Galerkin solver with local adaptive correction and "
      "equilibrated-flux error estimation on the unit square"};
  app.require_subcommand(1);

  ladg::RunConfig cfg;
  CommonFlags fl;
  std::string config_file, out_csv, mesh_out;
  int nmin = 64, nmax = 512;

  CLI::App* run = app.add_subcommand("run", "one adaptive run");
  add_common(run, cfg, fl);
  run->add_option("config", config_file, "key=value config file")
      ->check(CLI::ExistingFile);
  run->add_option("--scheme", cfg.scheme, "local | classical");
  run->add_option("--iters", cfg.iters, "number of passes");
  run->add_option("--theta", cfg.theta, "bulk marking fraction");
  run->add_option("--n0", cfg.n0, "initial uniform mesh subdivisions");
  run->add_option("--fixed-subdomains", cfg.fixed_subdomains,
                  "file of 'k xmin ymin xmax ymax' lines")
      ->check(CLI::ExistingFile);
  run->add_option("--mesh-in", cfg.mesh_in, "initial mesh file")
      ->check(CLI::ExistingFile);
  run->add_option("--mesh-out", mesh_out, "write the final mesh here");
  run->add_option("--out", out_csv, "write the per-pass CSV here");

  CLI::App* orders = app.add_subcommand(
      "orders", "fit a convergence order from a CSV, or sweep uniform "
                "meshes with one fixed subdomain correction");
  add_common(orders, cfg, fl);
  orders->add_option("--nmin", nmin, "sweep: coarsest subdivisions");
  orders->add_option("--nmax", nmax, "sweep: finest subdivisions");
  orders->add_option("--out", out_csv, "sweep: write the table CSV here");
  std::string fit_in, fit_col;
  auto* in_opt =
      orders->add_option("--in", fit_in, "fit: CSV file to read");
  orders->add_option("--col", fit_col, "fit: column to fit")->needs(in_opt);

  CLI::App* check =
      app.add_subcommand("check", "quick built-in verification run");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(run, cfg, fl, config_file, out_csv, mesh_out);
    if (orders->parsed()) {
      if (!fit_in.empty()) {
        if (fit_col.empty())
          throw ladg::LadgError("orders --in needs --col <column>");
        return cmd_orders_fit(fit_in, fit_col);
      }
      return cmd_orders(cfg, fl, nmin, nmax, out_csv);
    }
    if (check->parsed()) return cmd_check();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
