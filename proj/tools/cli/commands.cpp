#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "ksym/gauge.hpp"
#include "ksym/symmetry.hpp"

namespace ksym::cli {

namespace {

Json exprs_json(const std::vector<Expr>& exprs) {
  Json out = Json::array();
  for (const auto& e : exprs) out.push_back(to_string(e));
  return out;
}

Json header(const char* command, const ModelSpec& spec) {
  Json j;
  j["command"] = command;
  j["model"] = spec.path.string();
  j["n"] = spec.vars.n();
  j["k"] = spec.vars.k();
  j["seed"] = spec.seed;
  j["samples"] = spec.samples;
  j["tolerances"] = spec.tol.values();
  return j;
}

/// Writes files under --out and records their names in the report.
class Outputs {
 public:
  explicit Outputs(const Options& options) : dir_(options.out) {
    if (dir_) std::filesystem::create_directories(*dir_);
  }

  bool enabled() const { return dir_.has_value(); }

  std::ofstream open(const std::string& name) {
    names_.push_back(name);
    std::ofstream f(*dir_ / name);
    if (!f) throw ModelError("cannot write " + (*dir_ / name).string());
    return f;
  }

  void finish(Json& report, const std::string& name) {
    if (!dir_) return;
    names_.push_back(name);
    report["files"] = names_;
    std::ofstream f(*dir_ / name);
    f << report.dump(2) << '\n';
  }

 private:
  std::optional<std::filesystem::path> dir_;
  std::vector<std::string> names_;
};

// ---- analyze ---------------------------------------------------------------

Json analyze_lagrangian(const ModelSpec& spec, bool& pass) {
  const LagrangianModel& model = *spec.lagrangian;
  const VarTable& vars = spec.vars;
  const Chart& chart = model.chart();
  Json j;
  j["lagrangian"] = to_string(model.lagrangian());

  Json theta = Json::array();
  for (int a = 0; a < vars.k(); ++a) {
    Json leg = Json::object();
    const OneForm form = theta_L(model, a);
    for (std::size_t c = 0; c < chart.size(); ++c)
      if (!form.coefficients[c].is_zero()) leg[chart[c]] = to_string(form.coefficients[c]);
    theta.push_back(leg);
  }
  j["theta_L"] = theta;
  j["energy"] = to_string(energy(model));

  Json legendre = Json::object();
  for (int a = 0; a < vars.k(); ++a)
    for (int i = 0; i < vars.n(); ++i) legendre[vars.p(a, i)] = to_string(model.dv(i, a));
  j["legendre"] = legendre;

  const auto points = spec.sample_spec().points(chart);
  std::vector<JetPoint> jets;
  int regular = 0;
  double min_det = std::numeric_limits<double>::infinity();
  double pullback = 0.0;
  for (const auto& x : points) {
    const JetPoint w = JetPoint::from_flat(vars, x);
    const Hessian h = hessian(model, w);
    min_det = std::min(min_det, std::abs(h.determinant));
    if (h.regular) {
      ++regular;
      jets.push_back(w);
    }
    for (int a = 0; a < vars.k(); ++a)
      pullback = std::max(pullback, (legendre_pullback_omega(model, a, w) - omega_L(model, a, w)).cwiseAbs().maxCoeff());
  }
  const bool all_regular = regular == static_cast<int>(points.size());
  j["regularity"] = {{"regular", all_regular},
                     {"regular_samples", regular},
                     {"sample_count", points.size()},
                     {"min_abs_determinant", min_det}};
  j["pullback_identity"] = {{"condition", "(FL)*omega - omega_L"},
                            {"max_residual", pullback},
                            {"sample_count", points.size()},
                            {"pass", pullback <= spec.tol["pullback"]}};
  pass = pass && pullback <= spec.tol["pullback"];

  if (all_regular) {
    const SopdeCheck sopde = sopde_check(
        vars, [&](const JetPoint& w) { return sopde_solve(model, w).legs; }, jets, spec.tol["sopde"]);
    j["sopde"] = {{"condition", "S^A(Gamma_A) - Delta_A"},
                  {"max_residual", sopde.max_residual},
                  {"sample_count", jets.size()},
                  {"pass", sopde.is_sopde}};
    pass = pass && sopde.is_sopde;
  } else {
    j["warnings"] = Json::array({"velocity Hessian is singular at " +
                                 std::to_string(points.size() - static_cast<std::size_t>(regular)) + " of " +
                                 std::to_string(points.size()) + " samples; field equations are not SOPDE-solvable"});
  }
  return j;
}

Json analyze_hamiltonian(const ModelSpec& spec, bool& pass) {
  const HamiltonianModel& model = *spec.hamiltonian;
  const VarTable& vars = spec.vars;
  Json j;
  j["hamiltonian"] = to_string(model.hamiltonian());
  const KVectorField x = ham_kvector_field(model);
  Json legs = Json::array();
  for (const auto& leg : x.legs) {
    Json comps = Json::object();
    for (std::size_t c = 0; c < leg.chart.size(); ++c)
      if (!leg.components[c].is_zero()) comps[leg.chart[c]] = to_string(leg.components[c]);
    legs.push_back(comps);
  }
  j["kvector_field"] = legs;
  double worst = 0.0;
  const auto points = spec.sample_spec().points(model.chart());
  for (const auto& p : points) {
    const CoJetPoint w = CoJetPoint::from_flat(vars, p);
    worst = std::max(worst, generic_residual(model, w, ham_kvector(model, w)).cwiseAbs().maxCoeff());
  }
  const bool ok = worst <= spec.tol["kvector"];
  j["kvector_residual"] = {{"condition", "sum_A i(X_A)omega^A - dH"},
                           {"max_residual", worst},
                           {"sample_count", points.size()},
                           {"pass", ok}};
  pass = pass && ok;
  return j;
}

// ---- solve -----------------------------------------------------------------

SolutionGrid integrate(const ModelSpec& spec, const GridSolution& g, const GridSpec& grid) {
  const LagrangianModel& model = spec.require_lagrangian();
  if (grid.k() == 1) {
    const Bindings at_start{{spec.vars.t(0), grid.axis(0).min}};
    Eigen::VectorXd q0(spec.vars.n()), v0(spec.vars.n());
    for (int i = 0; i < spec.vars.n(); ++i) {
      q0[i] = eval(g.initial[static_cast<std::size_t>(i)], at_start);
      v0[i] = eval(g.initial_velocity[static_cast<std::size_t>(i)], at_start);
    }
    return integrate_k1(model, q0, v0, grid);
  }
  return integrate_k2_hyperbolic(model, g.initial, g.initial_velocity, grid);
}

/// max |coarse - fine| over the nodes the two grids share.
double shared_node_gap(const SolutionGrid& coarse, const SolutionGrid& fine) {
  double worst = 0.0;
  for (int node = 0; node < coarse.grid.node_count(); ++node) {
    const auto idx = coarse.grid.multi_index(node);
    const int match = fine.grid.node(2 * idx[0], 2 * idx[1]);
    for (int i = 0; i < coarse.n; ++i) worst = std::max(worst, std::abs(coarse.value(node, i) - fine.value(match, i)));
  }
  return worst;
}

struct Convergence {
  Json json;
  bool pass = false;
};

/// Error ratio under halving h against the closed form, or self-convergence over three grids.
Convergence measure_convergence(const ModelSpec& spec, const GridSolution& g, const SolutionGrid& base) {
  const int order = base.grid.k() == 1 ? 4 : 2;
  const double nominal = std::pow(2.0, order);
  const SolutionGrid half = integrate(spec, g, base.grid.refined(2));
  double e1 = 0.0, e2 = 0.0;
  Convergence c;
  if (!g.exact.empty()) {
    e1 = solution_error(spec.vars, base, g.exact);
    e2 = solution_error(spec.vars, half, g.exact);
    c.json["mode"] = "closed form";
  } else {
    const SolutionGrid quarter = integrate(spec, g, base.grid.refined(4));
    e1 = shared_node_gap(base, half);
    e2 = shared_node_gap(half, quarter);
    c.json["mode"] = "self-convergence";
  }
  const double ratio = e2 > 0.0 ? e1 / e2 : std::numeric_limits<double>::infinity();
  const double band = spec.tol["convergence"];
  const bool at_rounding = e1 <= 1e-11;
  c.pass = at_rounding || std::abs(ratio / nominal - 1.0) <= band;
  c.json["nominal_order"] = order;
  c.json["error_h"] = e1;
  c.json["error_h_over_2"] = e2;
  c.json["ratio"] = std::isfinite(ratio) ? Json(ratio) : Json(nullptr);
  c.json["expected_ratio"] = nominal;
  c.json["observed_order"] = e1 > 0.0 && e2 > 0.0 ? Json(std::log2(e1 / e2)) : Json(nullptr);
  c.json["pass"] = c.pass;
  return c;
}

// ---- noether ---------------------------------------------------------------

NoetherCurrent build_current(const ModelSpec& spec, const SymmetrySpec& sym, Side side) {
  const VarTable& vars = spec.vars;
  const SampleSpec samples = spec.sample_spec();
  switch (sym.kind) {
    case SymmetrySpec::Kind::VectorFieldQ: {
      const VectorFieldQ z(sym.components, vars);
      if (side == Side::Lagrangian) {
        return noether_current_lagrangian(spec.require_lagrangian(), z, sym.gauge, samples, spec.tol["noether"]);
      }
      return noether_current_hamiltonian(spec.require_hamiltonian(), cotangent_lift(vars, z), sym.zeta, samples,
                                         spec.tol["noether"]);
    }
    case SymmetrySpec::Kind::General: {
      if (sym.side != Side::Hamiltonian || side != Side::Hamiltonian) {
        throw ModelError("currents of general fields are constructed on the Hamiltonian side only");
      }
      const VectorField y{spec.require_hamiltonian().chart(), sym.components};
      return noether_current_hamiltonian(spec.require_hamiltonian(), y, sym.zeta, samples, spec.tol["noether"]);
    }
    case SymmetrySpec::Kind::Diffeomorphism: break;
  }
  throw ModelError("noether needs an infinitesimal symmetry, not a diffeomorphism");
}

Json conservation_on(const ModelSpec& spec, const NoetherCurrent& current, const std::string& name,
                     const SolutionSpec& sol, Outputs& files, bool& pass) {
  const VarTable& vars = spec.vars;
  Json j;
  j["solution"] = name;
  if (sol.grid) {
    const LagrangianModel& model = spec.require_lagrangian();
    const SolutionGrid coarse = integrate(spec, *sol.grid, sol.grid->grid);
    const SolutionGrid fine = integrate(spec, *sol.grid, sol.grid->grid.refined(2));
    const GridConservationReport r = verify_conservation_grid(vars, current, coarse, fine, &model,
                                                              spec.tol["grid_divergence"]);
    j["mode"] = "grid";
    j["max_divergence"] = r.coarse_divergence;
    j["max_divergence_refined"] = r.fine_divergence;
    j["ratio"] = std::isfinite(r.ratio) ? Json(r.ratio) : Json(nullptr);
    j["ratio_in_range"] = r.ratio_in_range;
    j["tolerance"] = r.tolerance;
    j["pass"] = r.pass;
    if (!coarse.warnings.empty()) j["warnings"] = coarse.warnings;
    pass = pass && r.pass;
    if (files.enabled()) {
      const CurrentTrace trace = evaluate_current(vars, current.f, coarse, current.side, &model);
      auto csv = files.open("current_" + name + ".csv");
      write_csv(csv, vars, coarse, &trace);
    }
    return j;
  }
  const double tol = spec.tol["conservation"];
  CheckReport r;
  if (current.side == Side::Hamiltonian && sol.cojet) {
    r = verify_conservation(vars, current, *sol.cojet, spec.parameter_samples(), tol);
  } else {
    const LagrangianModel* model = spec.lagrangian ? &*spec.lagrangian : nullptr;
    if (current.side == Side::Hamiltonian && model == nullptr) {
      throw ModelError("solution '" + name + "' needs momenta (or a lagrangian) for a Hamiltonian current");
    }
    r = verify_conservation(vars, current, sol.phi, spec.parameter_samples(), tol, model);
  }
  j["mode"] = "analytic";
  j.update(to_json(r));
  pass = pass && r.pass;
  return j;
}

const char* side_name(Side side) { return side == Side::Lagrangian ? "lagrangian" : "hamiltonian"; }

// ---- check-symmetry --------------------------------------------------------

Json transport_json(const TransportReport& r) {
  return {{"input", to_json(r.input)}, {"image", to_json(r.image)}, {"tolerance", r.tolerance}, {"pass", r.pass}};
}

}  // namespace

Json to_json(const CheckReport& report) {
  Json j;
  j["condition"] = report.condition;
  j["max_residual"] = report.max_residual;
  j["sample_count"] = report.sample_count;
  j["pass"] = report.pass;
  j["tolerance"] = report.tolerance;
  if (report.witness.size() > 0 && !report.pass) {
    Json w = Json::object();
    for (std::size_t i = 0; i < report.chart.size() && static_cast<Eigen::Index>(i) < report.witness.size(); ++i)
      w[report.chart[i]] = report.witness[static_cast<Eigen::Index>(i)];
    j["witness"] = w;
  }
  if (!report.parts.empty()) {
    Json parts = Json::array();
    for (const auto& p : report.parts) parts.push_back(to_json(p));
    j["parts"] = parts;
  }
  return j;
}

void apply_options(ModelSpec& spec, const Options& options) {
  if (options.seed) spec.seed = *options.seed;
  if (options.samples) {
    if (*options.samples < 1) throw ModelError("--samples must be positive");
    spec.samples = *options.samples;
  }
  for (const auto& entry : options.tol) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) throw ModelError("--tol expects KEY=VAL, got '" + entry + "'");
    double value = 0.0;
    try {
      value = parse_constant(entry.substr(eq + 1));
    } catch (const Error& e) {
      throw ModelError("--tol " + entry + ": " + e.what());
    }
    spec.tol.set(entry.substr(0, eq), value);
  }
}

CommandResult cmd_analyze(const ModelSpec& spec, const Options& options) {
  Outputs files(options);
  CommandResult r{header("analyze", spec), kExitPass};
  bool pass = true;
  if (spec.lagrangian) r.report["lagrangian_side"] = analyze_lagrangian(spec, pass);
  if (spec.hamiltonian) r.report["hamiltonian_side"] = analyze_hamiltonian(spec, pass);
  r.report["pass"] = pass;
  r.exit_code = pass ? kExitPass : kExitCheckFailed;
  files.finish(r.report, "analyze.json");
  return r;
}

CommandResult cmd_solve(const ModelSpec& spec, const std::string& name, const Options& options) {
  const SolutionSpec& sol = spec.solution(name);
  if (!sol.grid) throw ModelError("solution '" + name + "' is analytic; solve needs a grid solution");
  Outputs files(options);
  CommandResult r{header("solve", spec), kExitPass};
  r.report["solution"] = name;
  const SolutionGrid grid = integrate(spec, *sol.grid, sol.grid->grid);
  r.report["integrator"] = grid.grid.k() == 1 ? "rk4" : "leapfrog";
  r.report["nodes"] = grid.grid.node_count();
  Json steps = Json::array();
  for (const auto& axis : grid.grid.axes()) steps.push_back(axis.step);
  r.report["steps"] = steps;
  if (!sol.grid->exact.empty()) r.report["max_error"] = solution_error(spec.vars, grid, sol.grid->exact);
  const Convergence conv = measure_convergence(spec, *sol.grid, grid);
  r.report["convergence"] = conv.json;
  r.report["warnings"] = grid.warnings;
  r.report["pass"] = conv.pass;
  r.exit_code = conv.pass ? kExitPass : kExitCheckFailed;
  if (files.enabled()) {
    auto csv = files.open("solution_" + name + ".csv");
    write_csv(csv, spec.vars, grid);
  }
  files.finish(r.report, "solve_" + name + ".json");
  return r;
}

CommandResult cmd_noether(const ModelSpec& spec, const std::string& symmetry, const std::optional<std::string>& solution,
                          const std::optional<Side>& side_override, const Options& options) {
  const SymmetrySpec& sym = spec.symmetry(symmetry);
  Side side = side_override.value_or(spec.lagrangian ? Side::Lagrangian : Side::Hamiltonian);
  if (!side_override && sym.kind == SymmetrySpec::Kind::General) side = sym.side;
  Outputs files(options);
  CommandResult r{header("noether", spec), kExitPass};
  r.report["symmetry"] = symmetry;
  r.report["side"] = side_name(side);

  NoetherCurrent current;
  try {
    current = build_current(spec, sym, side);
  } catch (const VerificationFailure& e) {
    r.report["current"] = nullptr;
    r.report["rejected"] = e.what();
    r.report["residual"] = e.residual();
    r.report["pass"] = false;
    r.exit_code = kExitCheckFailed;
    files.finish(r.report, "noether_" + symmetry + ".json");
    return r;
  }
  bool pass = current.verification.pass;
  r.report["current"] = exprs_json(current.f);
  r.report["provenance"] = current.provenance == Provenance::NaturalLift ? "natural-lift" : "user-supplied";
  r.report["verification"] = to_json(current.verification);

  const SampleSpec samples = spec.sample_spec();
  const CheckReport bracket = side == Side::Lagrangian
                                  ? verify_bracket_theorem(*spec.lagrangian, current, samples, spec.tol["bracket"])
                                  : verify_bracket_theorem(*spec.hamiltonian, current, samples, spec.tol["bracket"]);
  r.report["bracket"] = to_json(bracket);
  pass = pass && bracket.pass;

  if (solution) {
    r.report["conservation"] = conservation_on(spec, current, *solution, spec.solution(*solution), files, pass);
  }
  r.report["pass"] = pass;
  r.exit_code = pass ? kExitPass : kExitCheckFailed;
  files.finish(r.report, "noether_" + symmetry + ".json");
  return r;
}

CommandResult cmd_check_symmetry(const ModelSpec& spec, const std::string& symmetry,
                                 const std::optional<std::string>& solution, const Options& options) {
  const SymmetrySpec& sym = spec.symmetry(symmetry);
  const VarTable& vars = spec.vars;
  const SampleSpec samples = spec.sample_spec();
  const double tol = spec.tol["cartan"];
  Outputs files(options);
  CommandResult r{header("check-symmetry", spec), kExitPass};
  r.report["symmetry"] = symmetry;
  bool pass = true;
  Json checks = Json::array();
  auto record = [&](const CheckReport& c) {
    checks.push_back(to_json(c));
    pass = pass && c.pass;
  };

  switch (sym.kind) {
    case SymmetrySpec::Kind::VectorFieldQ: {
      const VectorFieldQ z(sym.components, vars);
      r.report["kind"] = "vector-field-on-Q";
      if (spec.lagrangian) record(check_cartan_lagrangian(complete_lift(vars, z), *spec.lagrangian, samples, tol));
      if (spec.hamiltonian) record(check_cartan_hamiltonian(cotangent_lift(vars, z), *spec.hamiltonian, samples, tol));
      break;
    }
    case SymmetrySpec::Kind::General: {
      r.report["kind"] = "general-vector-field";
      if (sym.side == Side::Lagrangian) {
        const auto& model = spec.require_lagrangian();
        record(check_cartan_lagrangian(VectorField{model.chart(), sym.components}, model, samples, tol));
      } else {
        const auto& model = spec.require_hamiltonian();
        record(check_cartan_hamiltonian(VectorField{model.chart(), sym.components}, model, samples, tol));
      }
      break;
    }
    case SymmetrySpec::Kind::Diffeomorphism: {
      r.report["kind"] = "diffeomorphism";
      const QDiffeomorphism& phi = sym.diffeomorphism;
      if (spec.lagrangian) record(check_cartan_diffeomorphism(*spec.lagrangian, phi, samples, tol));
      if (spec.hamiltonian) record(check_cartan_diffeomorphism(*spec.hamiltonian, phi, samples, tol));
      Json transports = Json::array();
      for (const auto& [name, sol] : spec.solutions) {
        if (solution && name != *solution) continue;
        if (sol.grid) continue;
        const SampleSpec t = spec.parameter_samples();
        const double base = spec.tol["transport"];
        if (spec.lagrangian) {
          const TransportReport tr = check_symmetry_by_transport(*spec.lagrangian, phi, sol.phi, t, base);
          Json entry = transport_json(tr);
          entry["solution"] = name;
          entry["side"] = "lagrangian";
          transports.push_back(entry);
          pass = pass && tr.pass;
        }
        if (spec.hamiltonian && sol.cojet) {
          const TransportReport tr = check_symmetry_by_transport(*spec.hamiltonian, phi, *sol.cojet, t, base);
          Json entry = transport_json(tr);
          entry["solution"] = name;
          entry["side"] = "hamiltonian";
          transports.push_back(entry);
          pass = pass && tr.pass;
        }
      }
      r.report["transport"] = transports;
      break;
    }
  }
  r.report["checks"] = checks;
  r.report["pass"] = pass;
  r.exit_code = pass ? kExitPass : kExitCheckFailed;
  files.finish(r.report, "check_symmetry_" + symmetry + ".json");
  return r;
}

CommandResult cmd_gauge(const ModelSpec& first, const ModelSpec& second, const Options& options) {
  const LagrangianModel& l1 = first.require_lagrangian();
  const LagrangianModel& l2 = second.require_lagrangian();
  if (!first.vars.same_shape(second.vars)) throw ModelError("gauge needs two models with the same n and k");
  Outputs files(options);
  CommandResult r{header("gauge", first), kExitPass};
  r.report["other_model"] = second.path.string();

  const GaugeResult g = gauge_compare(l1, l2, first.sample_spec(), first.tol["gauge"]);
  r.report["verdict"] = to_string(g.verdict);
  Json decomposition;
  Json alpha = Json::array();
  for (const auto& leg : g.decomposition.alpha) alpha.push_back(exprs_json(leg));
  decomposition["alpha"] = alpha;
  decomposition["f"] = to_string(g.decomposition.f);
  decomposition["c"] = g.decomposition.c;
  r.report["decomposition"] = decomposition;
  r.report["residual"] = g.residual;
  if (g.verdict == GaugeVerdict::Inequivalent) {
    r.report["reason"] = g.reason;
    Json w = Json::object();
    for (std::size_t i = 0; i < l1.chart().size() && static_cast<Eigen::Index>(i) < g.witness.size(); ++i)
      w[l1.chart()[i]] = g.witness[static_cast<Eigen::Index>(i)];
    r.report["witness"] = w;
  }
  bool pass = g.verdict != GaugeVerdict::Inequivalent;

  Json shared = Json::array();
  for (const auto& [name, sol] : first.solutions) {
    const auto other = second.solutions.find(name);
    if (other == second.solutions.end() || sol.grid) continue;
    const SameSolutionsReport s =
        verify_same_solutions(l1, l2, sol.phi, first.parameter_samples(), first.tol["same_solutions"]);
    shared.push_back({{"solution", name},
                      {"max_difference", s.max_difference},
                      {"max_residual_1", s.max_residual_1},
                      {"max_residual_2", s.max_residual_2},
                      {"sample_count", s.sample_count},
                      {"pass", s.pass}});
    pass = pass && s.pass;
  }
  r.report["same_solutions"] = shared;
  r.report["pass"] = pass;
  r.exit_code = pass ? kExitPass : kExitCheckFailed;
  files.finish(r.report, "gauge.json");
  return r;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ModelError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const UndeclaredIdentifier*>(&e) || dynamic_cast<const DimensionMismatch*>(&e)) {
    return kExitInputError;
  }
  if (dynamic_cast<const Error*>(&e)) return kExitCheckFailed;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return kExitInputError;
  return kExitCheckFailed;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Verification toolkit for first-order k-symplectic field theories", "ksym"};
  app.require_subcommand(1);
  Options options;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", options.out, "Directory for JSON and CSV results");
    sub->add_option("--seed", options.seed, "Sampling seed (overrides the model file)");
    sub->add_option("--samples", options.samples, "Number of sample points (overrides the model file)");
    sub->add_option("--tol", options.tol, "Tolerance override KEY=VAL (repeatable)");
  };

  std::string model, model2, solution_name, symmetry_name, side_name_arg;
  std::optional<std::string> solution_opt;

  CLI::App* analyze = app.add_subcommand("analyze", "Cartan forms, energy, regularity and Legendre map");
  analyze->add_option("model", model, "Model file")->required();
  common(analyze);

  CLI::App* solve = app.add_subcommand("solve", "Integrate a grid solution and measure convergence");
  solve->add_option("model", model, "Model file")->required();
  solve->add_option("--solution", solution_name, "Named grid solution")->required();
  common(solve);

  CLI::App* noether = app.add_subcommand("noether", "Construct and verify a Noether current");
  noether->add_option("model", model, "Model file")->required();
  noether->add_option("--symmetry", symmetry_name, "Named symmetry")->required();
  noether->add_option("--solution", solution_opt, "Named solution for the conservation check");
  noether->add_option("--side", side_name_arg, "lagrangian or hamiltonian")
      ->check(CLI::IsMember({"lagrangian", "hamiltonian"}));
  common(noether);

  CLI::App* check = app.add_subcommand("check-symmetry", "Check a Cartan symmetry candidate");
  check->add_option("model", model, "Model file")->required();
  check->add_option("--symmetry", symmetry_name, "Named symmetry")->required();
  check->add_option("--solution", solution_opt, "Restrict transport checks to one solution");
  common(check);

  CLI::App* gauge = app.add_subcommand("gauge", "Decide gauge equivalence of two Lagrangians");
  gauge->add_option("model", model, "First model file")->required();
  gauge->add_option("other", model2, "Second model file")->required();
  common(gauge);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitInputError;
  }

  try {
    ModelSpec spec = load_model(model);
    apply_options(spec, options);
    CommandResult result;
    if (*analyze) {
      result = cmd_analyze(spec, options);
    } else if (*solve) {
      result = cmd_solve(spec, solution_name, options);
    } else if (*noether) {
      std::optional<Side> side;
      if (!side_name_arg.empty()) side = side_name_arg == "lagrangian" ? Side::Lagrangian : Side::Hamiltonian;
      result = cmd_noether(spec, symmetry_name, solution_opt, side, options);
    } else if (*check) {
      result = cmd_check_symmetry(spec, symmetry_name, solution_opt, options);
    } else {
      ModelSpec other = load_model(model2);
      apply_options(other, options);
      result = cmd_gauge(spec, other, options);
    }
    out << result.report.dump(2) << '\n';
    return result.exit_code;
  } catch (const std::exception& e) {
    err << "ksym: error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace ksym::cli
