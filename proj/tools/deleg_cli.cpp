// Command-line driver: parse a problem config, run one of the pipelines and
// emit machine-readable CSV/JSON artifacts.
//
// Exit codes: 0 success, 1 validation error, 2 solver non-convergence,
// 3 certificate failure (certify only; failure is a result, not an error).

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "deleg/boundary2d.hpp"
#include "deleg/cert.hpp"
#include "deleg/config.hpp"
#include "deleg/lp.hpp"
#include "deleg/measure.hpp"
#include "deleg/mech.hpp"
#include "deleg/model.hpp"
#include "deleg/report.hpp"
#include "deleg/sim.hpp"

namespace fs = std::filesystem;
using namespace deleg;

namespace {

struct CliContext {
  std::string config_path;
  std::string out_dir = ".";
  double tol = -1.0;       // overrides [cert] tol when >= 0
  long seed = -1;          // overrides [sim] seed when >= 0
  int threads = 0;         // overrides [sim] threads when > 0
  long cells = 0;          // overrides [grid] cells when > 0
  double rho = 0.0;        // overrides [lp] rho when > 0
  double alpha = -1e300;   // overrides linear-bias alpha when set

  Config config;
  DelegationProblem problem;
  RunParams params;

  void load() {
    config = Config::parse_file(config_path);
    if (alpha != -1e300) config.set("problem", "alpha", format_float(alpha));
    problem = problem_from_config(config);
    params = params_from_config(config);
    if (tol >= 0.0) params.tol = tol;
    if (seed >= 0) params.seed = static_cast<std::uint64_t>(seed);
    if (threads > 0) params.threads = threads;
    if (cells > 0) params.grid_cells = static_cast<int>(cells);
    if (rho > 0.0) params.rho = rho;
    fs::create_directories(out_dir);
  }

  std::ofstream open(const std::string& name) const {
    std::ofstream out(fs::path(out_dir) / name);
    if (!out) throw std::invalid_argument("cannot write output file: " + name);
    return out;
  }

  CertOptions cert_options() const {
    CertOptions opts;
    opts.tol = params.tol;
    return opts;
  }
};

void add_common_flags(CLI::App* cmd, CliContext& ctx) {
  cmd->add_option("--config", ctx.config_path, "problem config file")->required();
  cmd->add_option("--out", ctx.out_dir, "output directory");
  cmd->add_option("--tol", ctx.tol, "certificate tolerance override");
  cmd->add_option("--seed", ctx.seed, "random seed override");
  cmd->add_option("--threads", ctx.threads, "worker thread cap");
  cmd->add_option("--cells", ctx.cells, "grid cells per axis override");
  cmd->add_option("--rho", ctx.rho, "domain inflation override");
  cmd->add_option("--alpha", ctx.alpha, "linear bias alpha override");
}

double interval_value(const DelegationProblem& problem, double s1, double s2) {
  // Principal payoff of interval delegation by fine quadrature of
  // u_P(clamp(s), s) f(s).
  const double lo = problem.state_space.lo[0];
  const double hi = problem.state_space.hi[0];
  const int cells = 20000;
  CompensatedSum acc;
  for (int i = 0; i < cells; ++i) {
    const double s = lo + (hi - lo) * (i + 0.5) / cells;
    const double a = std::clamp(s, s1, s2);
    const Vector av = vec1(a);
    const Vector sv = vec1(s);
    acc.add((av.dot(problem.bias_at(sv)) + problem.kappa * problem.curvature_b(av)) *
            problem.density_at(sv) * (hi - lo) / cells);
  }
  return acc.value();
}

void write_interval_json(const CliContext& ctx, const OptimalInterval& interval,
                         const CertificateReport& certificate, double value) {
  JsonWriter json;
  json.begin_object();
  json.field("s1", interval.s1);
  json.field("s2", interval.s2);
  json.field("degenerate", interval.degenerate);
  json.field("value", value);
  json.field("verdict",
             std::string(interval.report.pass && certificate.pass ? "pass" : "fail"));
  json.field("min_nu", interval.report.min_nu);
  json.field("upper_equality", interval.report.upper_equality);
  json.field("lower_equality", interval.report.lower_equality);
  json.field("upper_tail_worst", interval.report.upper_tail_worst);
  json.field("lower_tail_worst", interval.report.lower_tail_worst);
  json.field("certificate_worst_residual", certificate.worst_residual);
  if (certificate.gap) json.field("gamma_gap", *certificate.gap);
  json.end_object();
  auto out = ctx.open("interval.json");
  out << json.str() << "\n";
}

void append_certificate(JsonWriter& json, const CertificateReport& report) {
  json.field("pass", report.pass);
  json.field("worst_residual", report.worst_residual);
  if (report.gap) json.field("gamma_gap", *report.gap);
  json.begin_array("regions");
  for (const auto& region : report.regions) {
    json.begin_array_object();
    json.field("region", region.region);
    json.field("mass", region.mass);
    json.field("singleton", region.singleton);
    json.field("touch", region.has_touch);
    json.field("pass", region.pass);
    json.field("residual", region.residual);
    if (!region.note.empty()) json.field("note", region.note);
    json.end_object();
  }
  json.end_array();
}

// Certify a menu against the main certificate and, when it passes, attach the
// standalone gamma evidence.
CertificateReport certify_menu(const DelegationProblem& problem, const Menu& menu,
                               const SignedMeasureGrid& measure, const CertOptions& opts) {
  CertificateReport report = check_optimality_certificate(problem, menu, measure, opts);
  if (!report.pass) return report;
  const PoolingPartition partition = extract_partition(problem, menu, measure, opts);
  const SignedMeasureGrid gamma = build_gamma_from_partition(partition, measure, report);
  Vector u_values(measure.size());
  for (long i = 0; i < measure.size(); ++i)
    u_values[i] = menu_eval(menu, measure.node(i)).first;
  CompensatedSum h_gamma;
  for (long k = 0; k < gamma.size(); ++k)
    h_gamma.add(gamma.weights[k] * first_best_payoff(problem, gamma.node(k)));
  report.gap = h_gamma.value() - integrate(measure, u_values);
  return report;
}

int run_nu(CliContext& ctx) {
  const SignedMeasureGrid measure = discretize_measure(ctx.problem, {ctx.params.grid_cells});
  auto out = ctx.open("nu.csv");
  write_measure_csv(out, measure);
  return 0;
}

int run_solve(CliContext& ctx, const std::string& export_lp) {
  const SignedMeasureGrid measure = discretize_measure(ctx.problem, {ctx.params.grid_cells});
  const XGrid xgrid =
      build_xgrid(ctx.problem, measure, ctx.params.rho, ctx.params.extension_factor);
  const LPInstance instance = build_primal_lp(ctx.problem, measure, xgrid);
  if (!export_lp.empty()) {
    std::ofstream lp_out(export_lp);
    write_lp_format(instance, lp_out);
  }
  const LPSolution solution = solve_lp(instance);
  if (solution.status != LPStatus::optimal) {
    std::cerr << "solver did not reach an optimum\n";
    return 2;
  }
  const SignedMeasureGrid gamma = extract_dual_certificate(instance, solution);
  const double gap = duality_gap(ctx.problem, solution, measure, gamma);

  {
    auto out = ctx.open("solution.csv");
    write_solution_csv(out, instance, solution);
  }
  JsonWriter json;
  json.begin_object();
  json.field("objective", solution.objective);
  json.field("gap", gap);
  json.field("status", std::string("optimal"));
  json.field("iterations", solution.iterations);
  json.field("primal_residual", solution.primal_residual);
  json.field("cs_residual", solution.cs_residual);
  json.field("nodes", static_cast<long>(instance.value_vars));
  json.field("gamma_mass", gamma.total_mass);
  json.end_object();
  auto out = ctx.open("summary.json");
  out << json.str() << "\n";
  return 0;
}

int run_interval(CliContext& ctx) {
  const OptimalInterval interval = find_optimal_interval(ctx.problem, ctx.cert_options());
  CertificateReport certificate;
  double value = 0.0;
  if (!interval.degenerate) {
    const SignedMeasureGrid measure =
        discretize_measure(ctx.problem, {std::max(ctx.params.grid_cells, 999)});
    const Menu menu = make_interval_menu(ctx.problem, measure, interval.s1, interval.s2);
    CertOptions opts = ctx.cert_options();
    certificate = certify_menu(ctx.problem, menu, measure, opts);
    value = interval_value(ctx.problem, interval.s1, interval.s2);
    {
      auto menu_out = ctx.open("menu.txt");
      write_menu(menu_out, menu);
      auto mech_out = ctx.open("mechanism.txt");
      write_mechanism(mech_out, build_mechanism(ctx.problem, menu));
    }
  }
  write_interval_json(ctx, interval, certificate, value);
  return interval.degenerate ? 2 : 0;
}

int run_certify(CliContext& ctx, double s1, double s2, const std::string& menu_path,
                const std::string& boundary_path) {
  JsonWriter json;
  json.begin_object();
  bool pass = false;

  if (!menu_path.empty()) {
    std::ifstream in(menu_path);
    if (!in) throw std::invalid_argument("cannot read menu file: " + menu_path);
    const Menu menu = read_menu(in);
    const SignedMeasureGrid measure =
        discretize_measure(ctx.problem, {std::max(ctx.params.grid_cells, 999)});
    const CertificateReport report =
        certify_menu(ctx.problem, menu, measure, ctx.cert_options());
    pass = report.pass;
    json.field("kind", std::string("menu"));
    append_certificate(json, report);
  } else if (!boundary_path.empty()) {
    std::ifstream in(boundary_path);
    if (!in) throw std::invalid_argument("cannot read boundary file: " + boundary_path);
    const BoundaryCurve curve = read_curve_csv(in);
    ConvexDelegationOptions opts;
    opts.tol = ctx.tol >= 0.0 ? ctx.tol : 5e-3;
    const ConvexDelegationReport report = check_convex_delegation(ctx.problem, curve, opts);
    pass = report.pass;
    json.field("kind", std::string("convex_set"));
    json.field("pass", report.pass);
    json.field("min_nu", report.min_nu);
    json.field("worst_equality", report.worst_equality);
    json.field("worst_tail", report.worst_tail);
    json.field("worst_vertex", report.worst_vertex);
  } else {
    const IntervalReport report =
        check_interval_delegation(ctx.problem, s1, s2, ctx.cert_options());
    const SignedMeasureGrid measure =
        discretize_measure(ctx.problem, {std::max(ctx.params.grid_cells, 999)});
    const Menu menu = make_interval_menu(ctx.problem, measure, s1, s2);
    const CertificateReport certificate =
        certify_menu(ctx.problem, menu, measure, ctx.cert_options());
    pass = report.pass && certificate.pass;
    json.field("kind", std::string("interval"));
    json.field("s1", report.s1);
    json.field("s2", report.s2);
    json.field("interval_pass", report.pass);
    json.field("min_nu", report.min_nu);
    json.field("upper_equality", report.upper_equality);
    json.field("upper_tail_worst", report.upper_tail_worst);
    json.field("lower_equality", report.lower_equality);
    json.field("lower_tail_worst", report.lower_tail_worst);
    if (!report.note.empty()) json.field("note", report.note);
    append_certificate(json, certificate);
  }
  json.end_object();
  auto out = ctx.open("certificate.json");
  out << json.str() << "\n";
  return pass ? 0 : 3;
}

int run_boundary2d(CliContext& ctx) {
  const Box& box = ctx.problem.state_space;
  const BoundaryCurve initial =
      circle_curve(box.center(), ctx.params.boundary_radius, ctx.params.boundary_vertices);
  BoundarySolveOptions opts;
  opts.max_iters = ctx.params.boundary_max_iters;
  opts.tol = ctx.params.boundary_tol;
  opts.cells_per_axis = ctx.params.boundary_cells;
  const BoundarySolveReport report = solve_boundary(ctx.problem, initial, opts);
  {
    auto out = ctx.open("boundary.csv");
    write_curve_csv(out, report.curve);
  }
  ConvexDelegationOptions check_opts;
  const ConvexDelegationReport check = check_convex_delegation(ctx.problem, report.curve,
                                                               check_opts);
  JsonWriter json;
  json.begin_object();
  json.field("converged", report.converged);
  json.field("iterations", report.iterations);
  json.field("max_residual", report.max_residual);
  json.field("area", curve_area(report.curve));
  json.field("certified", check.pass);
  json.field("check_worst_equality", check.worst_equality);
  json.field("check_worst_tail", check.worst_tail);
  json.field("check_min_nu", check.min_nu);
  json.end_object();
  auto out = ctx.open("boundary.json");
  out << json.str() << "\n";
  return report.converged ? 0 : 2;
}

int run_simulate(CliContext& ctx, const std::string& mech_path, const std::string& boundary_path,
                 double s1, double s2, bool has_interval) {
  McEstimate est;
  std::string kind;
  if (!mech_path.empty()) {
    std::ifstream in(mech_path);
    if (!in) throw std::invalid_argument("cannot read mechanism file: " + mech_path);
    const Mechanism mech = read_mechanism(in);
    est = mc_principal_payoff(ctx.problem, mech, ctx.params.samples, ctx.params.seed,
                              ctx.params.threads);
    kind = "mechanism";
  } else if (!boundary_path.empty()) {
    std::ifstream in(boundary_path);
    if (!in) throw std::invalid_argument("cannot read boundary file: " + boundary_path);
    const BoundaryCurve curve = read_curve_csv(in);
    est = mc_delegation_payoff(ctx.problem, curve, ctx.params.samples, ctx.params.seed,
                               ctx.params.threads);
    kind = "convex_set";
  } else if (has_interval) {
    const SignedMeasureGrid measure =
        discretize_measure(ctx.problem, {std::max(ctx.params.grid_cells, 999)});
    const Menu menu = make_interval_menu(ctx.problem, measure, s1, s2);
    const Mechanism mech = build_mechanism(ctx.problem, menu);
    est = mc_principal_payoff(ctx.problem, mech, ctx.params.samples, ctx.params.seed,
                              ctx.params.threads);
    kind = "interval";
  } else {
    throw std::invalid_argument("simulate needs --mechanism, --boundary or --s1/--s2");
  }
  JsonWriter json;
  json.begin_object();
  json.field("kind", kind);
  json.field("estimate", est.estimate);
  json.field("standard_error", est.standard_error);
  json.field("samples", est.samples);
  json.field("seed", static_cast<long>(ctx.params.seed));
  json.end_object();
  auto out = ctx.open("sim.json");
  out << json.str() << "\n";
  return 0;
}

// Plot-data tables: indirect-utility shapes and the tilt construction on the
// 1D benchmark, plus the no-convex-extension obstruction over the inflated
// domain and a normal-ray profile for convex-set delegation.
int run_figures(CliContext& ctx) {
  if (ctx.problem.n != 1)
    throw std::invalid_argument("figures are generated from a 1D config");
  const DelegationProblem& p = ctx.problem;
  const double lo = p.state_space.lo[0];
  const double hi = p.state_space.hi[0];
  const SignedMeasureGrid measure =
      discretize_measure(p, {std::max(ctx.params.grid_cells, 499)});

  const OptimalInterval opt = find_optimal_interval(p, ctx.cert_options());
  const double t1 = opt.s1, t2 = opt.s2;

  Menu interval_menu = make_interval_menu(p, measure, t1, t2);

  Menu extra = interval_menu;  // one extra deterministic action above s2
  const double outer = t2 + 0.7 * (hi - t2);
  extra.pieces.push_back({vec1(outer), p.curvature_b(vec1(outer))});

  Menu stochastic = make_interval_menu(p, measure, 0.5 * t1, 0.5 * t2);
  {
    const double a = 0.5 * t2 + 0.6 * (hi - 0.5 * t2);
    stochastic.pieces.push_back({vec1(a), p.curvature_b(vec1(a)) - 0.01});
    stochastic.pieces.push_back({vec1(-a), p.curvature_b(vec1(-a)) - 0.01});
  }

  Menu adjacent = make_interval_menu(p, measure, t1, t2);
  {
    const double a1 = t2 + 0.3 * (hi - t2);
    const double a2 = t2 + 0.75 * (hi - t2);
    adjacent.pieces.push_back({vec1(a1), p.curvature_b(vec1(a1)) - 0.004});
    adjacent.pieces.push_back({vec1(a2), p.curvature_b(vec1(a2)) - 0.012});
  }

  {
    auto out = ctx.open("fig2_indirect_utilities.csv");
    out << "s,h,interval,extra_action,stochastic,adjacent_stochastic\n";
    const int points = 801;
    for (int i = 0; i < points; ++i) {
      const double s = lo + (hi - lo) * i / (points - 1);
      const Vector sv = vec1(s);
      out << format_float(s) << "," << format_float(first_best_payoff(p, sv)) << ","
          << format_float(menu_eval(interval_menu, sv).first) << ","
          << format_float(menu_eval(extra, sv).first) << ","
          << format_float(menu_eval(stochastic, sv).first) << ","
          << format_float(menu_eval(adjacent, sv).first) << "\n";
    }
  }

  {
    // Tilting the indirect utility upward from a point above s2, with the
    // affine deterministic comparator.
    auto out = ctx.open("fig3_tilt.csv");
    out << "s,solid,dashed,dotted\n";
    const double s0 = t2 + 0.25 * (hi - t2);
    const double base = menu_eval(interval_menu, vec1(s0)).first;
    const double tilted_slope = t2 + 0.6 * (hi - t2);
    const double dotted_c = p.curvature_b(vec1(tilted_slope));
    const int points = 801;
    for (int i = 0; i < points; ++i) {
      const double s = lo + (hi - lo) * i / (points - 1);
      const double solid = menu_eval(interval_menu, vec1(s)).first;
      const double dashed = std::max(solid, base + tilted_slope * (s - s0));
      const double dotted = std::max(solid, tilted_slope * s + dotted_c);
      out << format_float(s) << "," << format_float(solid) << "," << format_float(dashed) << ","
          << format_float(dotted) << "\n";
    }
  }

  {
    // Affine function below h on S with no convex extension below h on X.
    auto out = ctx.open("fig1_no_extension.csv");
    out << "x,h,affine\n";
    const Box x_box = inflate_domain(p, 3.0);
    const double slope = 2.0;
    const double intercept = first_best_payoff(p, vec1(hi)) - 0.1 - slope * hi;
    const int points = 801;
    for (int i = 0; i < points; ++i) {
      const double x = x_box.lo[0] + (x_box.hi[0] - x_box.lo[0]) * i / (points - 1);
      out << format_float(x) << "," << format_float(first_best_payoff(p, vec1(x))) << ","
          << format_float(slope * x + intercept) << "\n";
    }
  }

  {
    // Indirect utility along a boundary normal for delegation to a disc of
    // radius t2: h inside, R z - R^2/2 outside.
    auto out = ctx.open("fig4_convex_set_ray.csv");
    out << "z,h,u\n";
    const double radius = std::abs(t2);
    const int points = 801;
    for (int i = 0; i < points; ++i) {
      const double z = 3.0 * radius * i / (points - 1);
      const double h = 0.5 * z * z;
      const double u = (z <= radius) ? h : radius * z - 0.5 * radius * radius;
      out << format_float(z) << "," << format_float(h) << "," << format_float(u) << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal delegation solver and verifier"};
  app.require_subcommand(1);

  CliContext ctx;
  std::string export_lp, menu_path, boundary_path, mech_path;
  double s1 = 0.0, s2 = 0.0;

  CLI::App* nu = app.add_subcommand("nu", "tabulate the signed measure density");
  add_common_flags(nu, ctx);

  CLI::App* solve = app.add_subcommand("solve", "build and solve the discretized LP");
  add_common_flags(solve, ctx);
  solve->add_option("--export-lp", export_lp, "write the LP in text interchange format");

  CLI::App* interval = app.add_subcommand("interval", "find and certify the optimal interval");
  add_common_flags(interval, ctx);

  CLI::App* certify = app.add_subcommand("certify", "check a candidate mechanism");
  add_common_flags(certify, ctx);
  auto* s1_opt = certify->add_option("--s1", s1, "interval lower endpoint");
  auto* s2_opt = certify->add_option("--s2", s2, "interval upper endpoint");
  certify->add_option("--menu", menu_path, "menu file to certify");
  certify->add_option("--boundary", boundary_path, "boundary CSV to certify");

  CLI::App* boundary2d = app.add_subcommand("boundary2d", "solve the 2D delegation boundary");
  add_common_flags(boundary2d, ctx);

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo payoff of a mechanism");
  add_common_flags(simulate, ctx);
  simulate->add_option("--mechanism", mech_path, "mechanism file");
  simulate->add_option("--boundary", boundary_path, "boundary CSV (delegation set)");
  auto* sim_s1 = simulate->add_option("--s1", s1, "interval lower endpoint");
  simulate->add_option("--s2", s2, "interval upper endpoint");

  CLI::App* figures = app.add_subcommand("figures", "emit plot-data tables");
  add_common_flags(figures, ctx);

  CLI11_PARSE(app, argc, argv);

  try {
    ctx.load();
    if (app.got_subcommand(nu)) return run_nu(ctx);
    if (app.got_subcommand(solve)) return run_solve(ctx, export_lp);
    if (app.got_subcommand(interval)) return run_interval(ctx);
    if (app.got_subcommand(certify)) {
      if (menu_path.empty() && boundary_path.empty() && (!*s1_opt || !*s2_opt))
        throw std::invalid_argument("certify needs --s1/--s2, --menu or --boundary");
      return run_certify(ctx, s1, s2, menu_path, boundary_path);
    }
    if (app.got_subcommand(boundary2d)) return run_boundary2d(ctx);
    if (app.got_subcommand(simulate))
      return run_simulate(ctx, mech_path, boundary_path, s1, s2, static_cast<bool>(*sim_s1));
    if (app.got_subcommand(figures)) return run_figures(ctx);
  } catch (const SolverError& err) {
    std::cerr << "solver error: " << err.what() << " (residual " << err.residual() << ")\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 1;
}
