#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ladg/assembly.hpp"
#include "ladg/problems.hpp"

namespace ladg {

struct FixedBox {
  double xmin = 0, ymin = 0, xmax = 1, ymax = 1;
  bool contains(const Vec2& p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
};

/// Reads "k xmin ymin xmax ymax" lines; '#' starts a comment.
inline std::map<int, FixedBox> read_fixed_subdomains(const std::string& path) {
  std::ifstream is(path);
  LADG_REQUIRE(is.good(), "cannot open subdomain file " + path);
  std::map<int, FixedBox> out;
  std::string line;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    int k;
    FixedBox b;
    if (!(ls >> k)) continue;  // blank line
    LADG_REQUIRE(bool(ls >> b.xmin >> b.ymin >> b.xmax >> b.ymax),
                 "malformed subdomain line: " + line);
    LADG_REQUIRE(k >= 2 && b.xmin < b.xmax && b.ymin < b.ymax,
                 "bad subdomain entry: " + line);
    out[k] = b;
  }
  return out;
}

/// Everything one adaptive run depends on. Field names double as the keys
/// of the key=value config format and (with dashes) as CLI flags.
struct RunConfig {
  std::string problem = "peak";  // peak | blayer
  double kappa = 100.0;          // peak sharpness
  double zeta = 1e4;             // blayer sharpness
  double eps = 1e-6;             // blayer diffusion
  bool advect = false;           // blayer: beta = -(1,1) instead of 0
  std::string scheme = "local";  // local | classical
  int iters = 10;
  double theta = 0.5;            // bulk marking fraction
  double penalty = 10.0;         // jump penalty factor
  int n0 = 8;                    // initial uniform mesh subdivisions
  int degree = 1;
  SolveOptions solver;
  std::string fixed_subdomains;        // optional file: "k xmin ymin xmax ymax"
  std::map<int, FixedBox> fixed_boxes; // same thing given directly
  std::string mesh_in;                 // optional initial mesh file
  int subdivision_cap = 6;

  // test hooks
  bool keep_fields = false;        // retain per-iteration coefficients
  bool force_full_domain = false;  // local scheme solving on all of Omega
};

struct IterationRecord {
  int k = 1;
  int n_elements = 0;
  int n_dofs = 0;
  int subdomain_elements = 0;
  double erren = std::numeric_limits<double>::quiet_NaN();
  double erraug = std::numeric_limits<double>::quiet_NaN();
  double eff = std::numeric_limits<double>::quiet_NaN();
  double efft = std::numeric_limits<double>::quiet_NaN();
  EstimatorReport est;  // per-element vectors kept only with keep_fields
  double locality = 0.0;
  SolveStats solve;
  double solve_seconds_total = 0.0;  // cumulative over the run
  bool quad_warning = false;
  Eigen::VectorXd u_coeffs;  // only with keep_fields
};

struct RunResult {
  RunConfig config;
  std::vector<IterationRecord> iterations;
  std::shared_ptr<Mesh> mesh;  // final
  std::shared_ptr<DGSpace> space;
  SubdomainHistory history;
  DGField u;
  PotentialField s;
  RTNField t, q;
};

inline ManufacturedProblem make_problem(const RunConfig& cfg) {
  if (cfg.problem == "peak") return make_peak_problem(cfg.kappa, cfg.penalty);
  if (cfg.problem == "blayer")
    return make_blayer_problem(cfg.eps, cfg.advect, cfg.zeta, cfg.penalty);
  throw LadgError("unknown problem '" + cfg.problem + "' (peak | blayer)");
}

namespace detail {

inline void append_record(RunResult& res, const RunConfig& cfg,
                          const ProblemData& prob, int k, const DGSpace& sp,
                          int subdomain_elements, const DGField& u,
                          const EstimatorReport& est, const SolveStats& st,
                          double cum_seconds) {
  IterationRecord rec;
  rec.k = k;
  rec.n_elements = sp.mesh->n_elements();
  rec.n_dofs = sp.mesh->n_elements() * sp.n_loc;
  rec.subdomain_elements = subdomain_elements;
  rec.solve = st;
  rec.solve_seconds_total = cum_seconds;
  rec.locality = locality_diagnostic(est);
  rec.quad_warning = est.quad_warning;

  // keep the roll-ups, drop the per-element arrays unless asked to
  EstimatorReport& s = rec.est;
  s.NC = est.NC; s.R = est.R; s.DF = est.DF; s.C1 = est.C1; s.C2 = est.C2;
  s.tC1 = est.tC1; s.U = est.U; s.tU = est.tU; s.G1 = est.G1; s.G2 = est.G2;
  s.eta = est.eta;
  s.eta_tilde = est.eta_tilde;
  s.conservation_max = est.conservation_max;
  s.quad_warning = est.quad_warning;
  if (cfg.keep_fields) {
    s = est;
    rec.u_coeffs = u.coeffs;
  }

  if (prob.exact_u) {
    ExactErrors ee = exact_errors(u, prob, cfg.subdivision_cap);
    rec.erren = ee.energy;
    rec.erraug = ee.augmented;
    rec.quad_warning = rec.quad_warning || ee.quad_capped;
    Effectivity eff = effectivity(est, ee.energy, ee.augmented);
    rec.eff = eff.index_eta;
    rec.efft = eff.index_eta_tilde;
  }
  res.iterations.push_back(std::move(rec));
}

inline std::shared_ptr<Mesh> initial_mesh(const RunConfig& cfg) {
  auto mesh = std::make_shared<Mesh>(cfg.mesh_in.empty()
                                         ? build_uniform_mesh(cfg.n0)
                                         : read_mesh(cfg.mesh_in));
  validate_mesh(*mesh);
  return mesh;
}

/// Elements to refine for pass k: the prescribed box when one is given,
/// bulk marking on the previous estimate otherwise.
inline std::vector<int> select_core(const RunConfig& cfg,
                                    const std::map<int, FixedBox>& fixed,
                                    int k, const Mesh& m,
                                    const EstimatorReport& est) {
  if (!fixed.empty()) {
    auto it = fixed.find(k);
    LADG_REQUIRE(it != fixed.end(), "no subdomain entry for pass " +
                                        std::to_string(k));
    std::vector<int> core;
    for (int e = 0; e < m.n_elements(); ++e)
      if (it->second.contains(m.centroid(e))) core.push_back(e);
    LADG_REQUIRE(!core.empty(), "subdomain box contains no element");
    return core;
  }
  return mark_subdomain(est.marking, cfg.theta);
}

inline std::vector<int> descendants_of(const std::vector<int>& parents,
                                       const RefinementRelation& rel) {
  std::vector<int> out;
  for (int pe : parents)
    for (int c : rel.children[pe]) out.push_back(c);
  return out;
}

inline std::vector<int> all_elements(const Mesh& m) {
  std::vector<int> out(m.n_elements());
  for (int e = 0; e < m.n_elements(); ++e) out[e] = e;
  return out;
}

}  // namespace detail

/// Local adaptive scheme: one global solve, then per pass a refinement of
/// the marked region and a solve on the enlarged refined subdomain with the
/// previous composed solution as artificial boundary data. Solution,
/// potential and both equilibrated fluxes are composed across passes.
inline RunResult run_local(const RunConfig& cfg, const ProblemData& prob) {
  LADG_REQUIRE(cfg.iters >= 1, "run_local: iters must be >= 1");
  std::map<int, FixedBox> fixed = cfg.fixed_boxes;
  if (fixed.empty() && !cfg.fixed_subdomains.empty())
    fixed = read_fixed_subdomains(cfg.fixed_subdomains);

  RunResult res;
  res.config = cfg;
  auto mesh = detail::initial_mesh(cfg);
  auto space = std::make_shared<DGSpace>(*mesh, cfg.degree);
  SubdomainHistory hist = init_history(*mesh);

  auto [u, st] = solve_global(*space, prob, cfg.solver);
  auto [t, q] = reconstruct_local_fluxes(*space, u, prob, nullptr);
  PotentialField s = oswald(*space, u, nullptr);
  EstimatorReport est =
      estimate_elements(u, s, t, q, prob, hist, cfg.subdivision_cap);
  double cum = st.seconds;
  detail::append_record(res, cfg, prob, 1, *space, mesh->n_elements(), u, est,
                        st, cum);

  for (int k = 2; k <= cfg.iters; ++k) {
    std::vector<int> core = detail::select_core(cfg, fixed, k, *mesh, est);
    auto [nm, rel] = refine(*mesh, core);
    auto new_mesh = std::make_shared<Mesh>(std::move(nm));

    // Subdomain: every element the refinement touched, grown by one vertex
    // layer so the artificial boundary runs through untouched elements.
    // With a prescribed box the subdomain is exactly the refined box, and
    // when forcing the full domain it is everything.
    std::vector<int> omega;
    if (cfg.force_full_domain) {
      omega = detail::all_elements(*new_mesh);
    } else if (!fixed.empty()) {
      omega = detail::descendants_of(core, rel);
    } else {
      std::vector<int> touched;
      for (int pe = 0; pe < int(rel.children.size()); ++pe)
        if (rel.refined(pe))
          for (int c : rel.children[pe]) touched.push_back(c);
      omega = enlarge_subdomain(*new_mesh, touched);
    }
    hist = update_history(hist, rel, *new_mesh, omega);

    auto new_space = std::make_shared<DGSpace>(*new_mesh, cfg.degree);
    DGField u_prev = transport_field(u, rel, *new_space);
    PotentialField s_prev = transport_potential(s, rel, *new_mesh);
    RTNField t_prev = transport_rtn(t, rel, *new_mesh);
    RTNField q_prev = transport_rtn(q, rel, *new_mesh);
    mesh = new_mesh;
    space = new_space;

    auto [sub, map] = extract_submesh(*mesh, omega);
    DGSpace sub_space(sub, cfg.degree);
    BoundaryData g = make_artificial_boundary(*mesh, map, u_prev);
    auto [u_hat, stats] = solve_local(sub_space, prob, g, cfg.solver);
    u = correct_global(u_prev, u_hat, map);

    auto [t_hat, q_hat] = reconstruct_local_fluxes(sub_space, u_hat, prob, g);
    t = compose_fluxes(t_prev, t_hat, map);
    q = compose_fluxes(q_prev, q_hat, map);
    PotentialField s_hat =
        oswald(sub_space, u_hat, potential_boundary(*mesh, map, s_prev));
    s = compose_potential(s_prev, s_hat, map);

    est = estimate_elements(u, s, t, q, prob, hist, cfg.subdivision_cap);
    cum += stats.seconds;
    detail::append_record(res, cfg, prob, k, *space, int(omega.size()), u,
                          est, stats, cum);
  }

  res.mesh = mesh;
  res.space = space;
  res.history = hist;
  res.u = std::move(u);
  res.s = std::move(s);
  res.t = std::move(t);
  res.q = std::move(q);
  return res;
}

/// Classical adaptive loop for comparison: same marking and refinement, but
/// each pass re-solves and re-equilibrates on the whole domain, so the
/// composition jump terms vanish.
inline RunResult run_classical(const RunConfig& cfg, const ProblemData& prob) {
  LADG_REQUIRE(cfg.iters >= 1, "run_classical: iters must be >= 1");
  std::map<int, FixedBox> fixed = cfg.fixed_boxes;
  if (fixed.empty() && !cfg.fixed_subdomains.empty())
    fixed = read_fixed_subdomains(cfg.fixed_subdomains);

  RunResult res;
  res.config = cfg;
  auto mesh = detail::initial_mesh(cfg);
  auto space = std::make_shared<DGSpace>(*mesh, cfg.degree);
  SubdomainHistory hist = init_history(*mesh);

  DGField u(*space);
  SolveStats st;
  std::tie(u, st) = solve_global(*space, prob, cfg.solver);
  auto [t, q] = reconstruct_local_fluxes(*space, u, prob, nullptr);
  PotentialField s = oswald(*space, u, nullptr);
  EstimatorReport est =
      estimate_elements(u, s, t, q, prob, hist, cfg.subdivision_cap);
  double cum = st.seconds;
  detail::append_record(res, cfg, prob, 1, *space, mesh->n_elements(), u, est,
                        st, cum);

  for (int k = 2; k <= cfg.iters; ++k) {
    std::vector<int> core = detail::select_core(cfg, fixed, k, *mesh, est);
    auto [nm, rel] = refine(*mesh, core);
    auto new_mesh = std::make_shared<Mesh>(std::move(nm));
    hist = update_history(hist, rel, *new_mesh,
                          detail::all_elements(*new_mesh));
    mesh = new_mesh;
    space = std::make_shared<DGSpace>(*mesh, cfg.degree);

    SolveStats stats;
    std::tie(u, stats) = solve_global(*space, prob, cfg.solver);
    std::tie(t, q) = reconstruct_local_fluxes(*space, u, prob, nullptr);
    s = oswald(*space, u, nullptr);
    est = estimate_elements(u, s, t, q, prob, hist, cfg.subdivision_cap);
    cum += stats.seconds;
    detail::append_record(res, cfg, prob, k, *space, mesh->n_elements(), u,
                          est, stats, cum);
  }

  res.mesh = mesh;
  res.space = space;
  res.history = hist;
  res.u = std::move(u);
  res.s = std::move(s);
  res.t = std::move(t);
  res.q = std::move(q);
  return res;
}

inline RunResult run_scheme(const RunConfig& cfg, const ProblemData& prob) {
  if (cfg.scheme == "local") return run_local(cfg, prob);
  if (cfg.scheme == "classical") return run_classical(cfg, prob);
  throw LadgError("unknown scheme '" + cfg.scheme + "' (local | classical)");
}

/// One CSV row per pass; the column set is part of the tool's interface.
inline void write_csv(const RunResult& res, std::ostream& os) {
  os << "level,erren,erraug,etaNC,etaR,etaDF,etaU,etatU,etaGu,etaGd,"
        "eta,etat,eff,efft,linsolvertot\n";
  os.precision(12);
  for (const auto& r : res.iterations) {
    const auto& e = r.est;
    os << r.k << ',' << r.erren << ',' << r.erraug << ',' << e.NC << ','
       << e.R << ',' << e.DF << ',' << e.U << ',' << e.tU << ',' << e.G1
       << ',' << e.G2 << ',' << e.eta << ',' << e.eta_tilde << ',' << r.eff
       << ',' << r.efft << ',' << r.solve_seconds_total << '\n';
  }
}

inline void write_csv(const RunResult& res, const std::string& path) {
  std::ofstream os(path);
  LADG_REQUIRE(os.good(), "cannot open output file " + path);
  write_csv(res, os);
}

inline void print_run_summary(std::ostream& os, const RunResult& res) {
  os << "scheme=" << res.config.scheme << " problem=" << res.config.problem
     << " passes=" << res.iterations.size() << "\n";
  for (const auto& r : res.iterations) {
    os << "  k=" << r.k << " elems=" << r.n_elements
       << " sub=" << r.subdomain_elements << " eta=" << r.est.eta
       << " erren=" << r.erren << " eff=" << r.eff
       << " cons=" << r.est.conservation_max << " locality=" << r.locality
       << " solve=" << r.solve.seconds << "s";
    if (r.solve.iterations > 0) os << " (" << r.solve.iterations << " it)";
    if (r.quad_warning) os << " [quadrature near cap: refine or lower n0]";
    os << "\n";
  }
}

/// key=value lines with '#' comments; keys are the RunConfig field names.
inline RunConfig parse_config(std::istream& is, RunConfig base = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      auto e = s.find_last_not_of(" \t\r");
      s.erase(e == std::string::npos ? 0 : e + 1);
    };
    trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    LADG_REQUIRE(eq != std::string::npos,
                 "config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    trim(key);
    trim(val);
    auto as_bool = [&](const std::string& v) {
      if (v == "1" || v == "true" || v == "yes") return true;
      if (v == "0" || v == "false" || v == "no") return false;
      throw LadgError("config: bad boolean '" + v + "' for " + key);
    };
    try {
      if (key == "problem") base.problem = val;
      else if (key == "kappa") base.kappa = std::stod(val);
      else if (key == "zeta") base.zeta = std::stod(val);
      else if (key == "eps") base.eps = std::stod(val);
      else if (key == "advect") base.advect = as_bool(val);
      else if (key == "scheme") base.scheme = val;
      else if (key == "iters") base.iters = std::stoi(val);
      else if (key == "theta") base.theta = std::stod(val);
      else if (key == "penalty") base.penalty = std::stod(val);
      else if (key == "n0") base.n0 = std::stoi(val);
      else if (key == "degree") base.degree = std::stoi(val);
      else if (key == "solver") base.solver.method = solve_method_from_string(val);
      else if (key == "rtol") base.solver.rtol = std::stod(val);
      else if (key == "fixed_subdomains") base.fixed_subdomains = val;
      else if (key == "mesh_in") base.mesh_in = val;
      else if (key == "subdivision_cap") base.subdivision_cap = std::stoi(val);
      else throw LadgError("config: unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw LadgError("config: bad value '" + val + "' for " + key);
    }
  }
  return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
  std::ifstream is(path);
  LADG_REQUIRE(is.good(), "cannot open config file " + path);
  return parse_config(is, base);
}

}  // namespace ladg
