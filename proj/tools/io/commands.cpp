#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "dlharmonic/errors.hpp"
#include "dlharmonic/monte_carlo.hpp"

namespace dlh::io {

namespace {

constexpr const char* kUnclassifiableVerdict = "unclassifiable";

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json mu_tilde_json(const ZWalk& w) {
  json out = json::object();
  for (const auto& [n, p] : w.mass()) out[std::to_string(n)] = p;
  return out;
}

json common_json(const WalkSpec& spec, const CommonConfig& c) {
  return {{"walk", c.walk_path},
          {"walk_spec", spec.source},
          {"seed", c.seed ? json(*c.seed) : json(nullptr)},
          {"side", static_cast<int>(c.side)},
          {"threads", c.threads}};
}

std::uint64_t require_seed(const CommonConfig& c, const char* command) {
  if (!c.seed) throw InvalidInput(std::string("--seed is required for ") + command);
  return *c.seed;
}

ZWalk walk_z_law(const WalkSpec& spec, Side side) {
  if (spec.dl) return z_law(*spec.dl);
  return project_to_z(tree_walk_for(spec, side));
}

TreeVertex parse_tree_vertex(const std::string& text, const char* flag, int q) {
  auto v = tree_vertex_from_json(read_json_argument(text, flag), std::string(flag));
  validate_vertex(v, q);
  return v;
}

BoundaryPoint parse_boundary(const std::string& text, const char* flag, int q) {
  auto xi = boundary_from_json(read_json_argument(text, flag), std::string(flag));
  validate_vertex(xi.anchor, q);
  return xi;
}

SolverOptions solver_options(std::size_t truncation, double tolerance = 1e-8) {
  SolverOptions o;
  o.truncation = truncation;
  o.tolerance = tolerance;
  return o;
}

// Boundary points used to sample kernel families: the canonical end through
// o, one above and one below the root.
std::vector<BoundaryPoint> sample_ends(int q) {
  std::vector<BoundaryPoint> out;
  out.push_back(BoundaryPoint{});
  out.push_back(BoundaryPoint{TreeVertex(2, {{1, 1}}), Continuation::Zero});
  out.push_back(BoundaryPoint{TreeVertex::from_digits(-3, {1, 0, static_cast<Symbol>(q - 1)}), Continuation::Zero});
  return out;
}

void add_family_rows(Report& rep, const std::vector<FamilyDescriptor>& families) {
  json list = json::array();
  for (const auto& f : families) {
    list.push_back({{"label", f.label()},
                    {"kind", f.kind == FamilyKind::Kernel        ? "kernel"
                             : f.kind == FamilyKind::Exponential ? "exponential"
                                                                 : "constant"},
                    {"side", static_cast<int>(f.side)},
                    {"c", f.c}});
  }
  rep.results["families"] = list;
}

void add_coefficient_checks(Report& rep, const std::string& prefix, const TreeWalk& w,
                            const BoundaryCoefficients& c, double tolerance, double tail_tolerance) {
  const auto res = coefficient_residuals(c, solver_walk(w, c.tcase));
  rep.results[prefix + "residuals"] = {{"solver", c.residual},
                                       {"root_equation", res.root_equation},
                                       {"level_equations", res.level_equations},
                                       {"tail_recurrence", res.tail_recurrence},
                                       {"iterations", c.iterations}};
  rep.check_below(prefix + "solver_residual", c.residual, tolerance);
  rep.check_below(prefix + "tail_recurrence", res.tail_recurrence, tail_tolerance);
}

}  // namespace

// ---------------------------------------------------------------- analyze

Report cmd_analyze(const WalkSpec& spec, const CommonConfig& common, const AnalyzeConfig& cfg) {
  if (!(cfg.grid_step > 0.0) || cfg.grid_max < cfg.grid_min) throw InvalidInput("--grid-*: empty or invalid grid");
  Report rep;
  rep.command = "analyze";
  rep.config = common_json(spec, common);
  rep.config["grid_min"] = cfg.grid_min;
  rep.config["grid_max"] = cfg.grid_max;
  rep.config["grid_step"] = cfg.grid_step;

  const ZWalk z = walk_z_law(spec, common.side);
  const double alpha = drift(z);
  std::optional<double> c0 = find_c0(z);

  rep.results["q"] = spec.q;
  rep.results["r"] = spec.r ? json(*spec.r) : json(nullptr);
  rep.results["mu_tilde"] = mu_tilde_json(z);
  rep.results["alpha"] = alpha;
  rep.results["c0"] = optional_number(c0);

  const auto steps = static_cast<std::int64_t>(std::floor((cfg.grid_max - cfg.grid_min) / cfg.grid_step + 1e-9));
  rep.table.columns = {"c", "phi"};
  for (std::int64_t i = 0; i <= steps; ++i) {
    const double c = cfg.grid_min + static_cast<double>(i) * cfg.grid_step;
    rep.table.rows.push_back({c, phi(z, c)});
  }

  const bool zero = std::abs(alpha) <= RootOptions{}.drift_tolerance;
  std::string verdict;
  if (spec.dl) {
    rep.results["m1"] = moment(*spec.dl, 1.0);
    rep.results["m2_eps"] = moment(*spec.dl, 2.5);
    rep.results["m_c0"] = c0 ? json(exp_moment(*spec.dl, *c0)) : json(nullptr);
    verdict = zero ? "I" : (c0 ? "II" : kUnclassifiableVerdict);
  } else {
    const TreeWalk& w = *spec.tree;
    rep.results["m1"] = moment(w, 1.0);
    rep.results["m2_eps"] = moment(w, 2.5);
    rep.results["m_c0"] = c0 ? json(hor_moment(w, *c0)) : json(nullptr);
    if (zero) {
      verdict = to_string(DriftCase::ZeroDrift);
    } else if (alpha > 0) {
      verdict = to_string(DriftCase::PositiveDrift);
    } else {
      verdict = c0 ? to_string(DriftCase::NegativeDriftConjugated) : kUnclassifiableVerdict;
    }
  }
  rep.results["case"] = verdict;
  if (c0) rep.check_below("phi_c0_minus_one", std::abs(phi(z, *c0) - 1.0), 1e-10);
  if (verdict == kUnclassifiableVerdict) {
    rep.check("classifiable", 0.0, 0.0, false);
    rep.failure_code = Unclassifiable("").exit_code();
  }
  return rep;
}

// ---------------------------------------------------------------- coeffs

Report cmd_coeffs(const WalkSpec& spec, const CommonConfig& common, const CoeffsConfig& cfg) {
  Report rep;
  rep.command = "coeffs";
  rep.config = common_json(spec, common);
  rep.config["truncation"] = cfg.truncation;
  rep.config["tolerance"] = cfg.tolerance;
  rep.config["tail_tolerance"] = cfg.tail_tolerance;

  const TreeWalk w = tree_walk_for(spec, common.side);
  const auto c = solve_coefficients(w, solver_options(cfg.truncation, cfg.tolerance));
  rep.results["drift_case"] = to_string(c.tcase.drift);
  rep.results["alpha"] = c.tcase.alpha;
  rep.results["c0"] = optional_number(c.tcase.c0);
  rep.results["normalization"] = to_string(c.normalization);
  add_coefficient_checks(rep, "", w, c, cfg.tolerance, cfg.tail_tolerance);

  rep.table.columns = {"j", "a_j"};
  for (std::size_t j = 0; j < c.a.size(); ++j) rep.table.rows.push_back({j, c.a[j]});
  return rep;
}

// ---------------------------------------------------------------- kernel

Report cmd_kernel(const WalkSpec& spec, const CommonConfig& common, const KernelConfig& cfg) {
  Report rep;
  rep.command = "kernel";
  rep.config = common_json(spec, common);
  rep.config["x"] = read_json_argument(cfg.x, "--x");
  rep.config["xi"] = read_json_argument(cfg.xi, "--xi");
  rep.config["truncation"] = cfg.truncation;
  rep.config["tolerance"] = cfg.tolerance;

  const TreeWalk w = tree_walk_for(spec, common.side);
  const TreeVertex x = parse_tree_vertex(cfg.x, "--x", w.q());
  const BoundaryPoint xi = parse_boundary(cfg.xi, "--xi", w.q());
  auto coeffs = std::make_shared<const BoundaryCoefficients>(solve_coefficients(w, solver_options(cfg.truncation)));

  const std::int64_t k = up_to_boundary(TreeVertex{}, xi);
  const std::int64_t l = up_to_boundary(x, xi);
  const std::int64_t m = x.hor();
  const double value = kernel_at(*coeffs, x, xi);
  rep.results["drift_case"] = to_string(coeffs->tcase.drift);
  rep.results["c0"] = optional_number(coeffs->tcase.c0);
  rep.results["k"] = k;
  rep.results["l"] = l;
  rep.results["m"] = m;
  rep.results["epsilon"] = epsilon(k, l, m);
  rep.results["K"] = value;

  const auto h = [&](const TreeVertex& y) { return kernel_at(*coeffs, y, xi); };
  rep.check("positive", value, 0.0, value > 0.0);
  rep.check_below("harmonicity_at_x", harmonicity_defect(w, h, {x}), cfg.tolerance);
  return rep;
}

// ---------------------------------------------------------------- verify

Report cmd_verify(const WalkSpec& spec, const CommonConfig& common, const VerifyConfig& cfg) {
  const std::uint64_t seed = require_seed(common, "verify");
  Report rep;
  rep.command = "verify";
  rep.config = common_json(spec, common);
  rep.config["radius"] = cfg.radius;
  rep.config["deep"] = cfg.deep;
  rep.config["extent"] = cfg.extent;
  rep.config["truncation"] = cfg.truncation;
  rep.config["tolerance"] = cfg.tolerance;

  rep.table.columns = {"family", "xi", "max_rel_err"};
  double worst = 0.0;
  const auto record = [&](const FamilyDescriptor& f, const std::string& xi_label, double err) {
    rep.table.rows.push_back({f.label(), xi_label, err});
    worst = std::max(worst, err);
  };

  const auto opts = solver_options(cfg.truncation);
  if (spec.dl) {
    const QuadrupleMeasure& w = *spec.dl;
    const auto cls = enumerate_minimal_families(w, opts);
    rep.results["case"] = cls.dl_case == DLCase::I ? "I" : "II";
    add_family_rows(rep, cls.families);
    const auto xs = dl_check_vertices(w.q(), w.r(), cfg.radius, cfg.deep, cfg.extent, seed);
    rep.results["vertices"] = xs.size();
    for (const auto& f : cls.families) {
      const int q_side = f.side == Side::One ? w.q() : w.r();
      const auto ends = f.kind == FamilyKind::Kernel ? sample_ends(q_side) : std::vector<BoundaryPoint>{{}};
      for (const auto& xi : ends) {
        const HarmonicFunction h = f.member(xi);
        const double err = harmonicity_defect(w, [&](const DLVertex& x) { return h(x); }, xs);
        record(f, f.kind == FamilyKind::Kernel ? to_json(xi).dump() : "-", err);
      }
    }
  } else {
    const TreeWalk& w = *spec.tree;
    const auto cls = tree_minimal_families(w, opts);
    rep.results["case"] = to_string(cls.tcase.drift);
    add_family_rows(rep, cls.families);
    const auto xs = tree_check_vertices(w.q(), cfg.radius, cfg.deep, cfg.extent, seed);
    rep.results["vertices"] = xs.size();
    for (const auto& f : cls.families) {
      const auto ends = f.kind == FamilyKind::Kernel ? sample_ends(w.q()) : std::vector<BoundaryPoint>{{}};
      for (const auto& xi : ends) {
        const HarmonicFunction h = f.member(xi);
        const double err = harmonicity_defect(w, [&](const TreeVertex& x) { return h(x); }, xs);
        record(f, f.kind == FamilyKind::Kernel ? to_json(xi).dump() : "-", err);
      }
    }
  }
  rep.results["harmonicity max rel err"] = worst;
  rep.check_below("harmonicity_max_rel_err", worst, cfg.tolerance);
  return rep;
}

// ---------------------------------------------------------------- simulate

Report cmd_simulate(const WalkSpec& spec, const CommonConfig& common, const SimulateConfig& cfg) {
  const std::uint64_t seed = require_seed(common, "simulate");
  Report rep;
  rep.command = "simulate";
  rep.config = common_json(spec, common);
  rep.config["mode"] = cfg.mode;
  rep.config["steps"] = cfg.steps;

  if (cfg.mode == "trajectory") {
    rep.config["x0"] = cfg.x0.empty() ? json(nullptr) : read_json_argument(cfg.x0, "--x0");
    if (spec.dl) {
      DLVertex x0;
      if (!cfg.x0.empty()) {
        x0 = dl_vertex_from_json(read_json_argument(cfg.x0, "--x0"), "--x0");
        validate_vertex(x0, spec.dl->q(), spec.dl->r());
      }
      rep.table.columns = {"n", "hor", "dist"};
      simulate(*spec.dl, x0, cfg.steps, seed, [&rep](std::uint64_t n, const DLVertex& z) {
        rep.table.rows.push_back({n, z.pos, dl_distance(dl_root(), z)});
        rep.results["final_hor"] = z.pos;
      });
    } else {
      const TreeWalk& w = *spec.tree;
      const TreeVertex x0 = cfg.x0.empty() ? TreeVertex{} : parse_tree_vertex(cfg.x0, "--x0", w.q());
      rep.table.columns = {"n", "hor", "up"};
      simulate(w, x0, cfg.steps, seed, [&rep](std::uint64_t n, const TreeVertex& z) {
        rep.table.rows.push_back({n, z.hor(), up(TreeVertex{}, z)});
        rep.results["final_hor"] = z.hor();
      });
    }
    rep.results["mean_increment"] =
        static_cast<double>(rep.results["final_hor"].get<std::int64_t>()) / static_cast<double>(cfg.steps);
    return rep;
  }

  rep.config["runs"] = cfg.runs;
  if (cfg.mode == "transience") {
    const auto t = spec.dl ? transience_diagnostic(*spec.dl, cfg.runs, cfg.steps, seed)
                           : transience_diagnostic(*spec.tree, cfg.runs, cfg.steps, seed);
    rep.results = {{"mean_returns_half", t.mean_returns_half},
                   {"stderr_half", t.stderr_half},
                   {"mean_returns", t.mean_returns},
                   {"stderr", t.stderr_}};
    return rep;
  }

  if (cfg.mode != "coefficients") throw InvalidInput("--mode: expected trajectory, coefficients or transience");
  rep.config["window"] = cfg.window;
  rep.config["depth_margin"] = cfg.depth_margin;
  rep.config["max_j"] = cfg.max_j;
  rep.config["truncation"] = cfg.truncation;
  rep.config["sigmas"] = cfg.sigmas;

  const TreeWalk w = tree_walk_for(spec, common.side);
  const auto coeffs = solve_coefficients(w, solver_options(cfg.truncation));
  if (coeffs.tcase.drift == DriftCase::ZeroDrift) {
    throw InvalidInput("simulate --mode coefficients: boundary limits need nonzero drift");
  }
  // Negative drift escapes to omega; the coefficients belong to the conjugated walk.
  const TreeWalk walked = solver_walk(w, coeffs.tcase);
  rep.results["simulated_walk"] = coeffs.tcase.drift == DriftCase::PositiveDrift ? "original" : "conjugated";
  rep.results["c0"] = optional_number(coeffs.tcase.c0);

  TrajectoryParams p;
  p.steps = cfg.steps;
  p.window = cfg.window;
  p.depth_margin = cfg.depth_margin;
  p.seed = seed;
  BinCounts raw;
  const auto est = estimate_boundary_coefficients(walked, cfg.runs, cfg.max_j, p, &raw, common.threads);
  rep.results["unconverged"] = raw.unconverged;

  rep.table.columns = {"j", "count", "freq", "stderr", "solver", "z"};
  double worst_z = 0.0;
  for (std::size_t j = 0; j < est.size(); ++j) {
    const double a = j < coeffs.a.size() ? coeffs.a[j] : 0.0;
    // Binomial standard error under the solved value, defined even with zero hits.
    const double sigma = std::sqrt(std::max(a * (1.0 - a), 0.0) / static_cast<double>(cfg.runs));
    const double z = sigma > 0.0 ? (est[j].value - a) / sigma : (est[j].hits == 0 ? 0.0 : INFINITY);
    worst_z = std::max(worst_z, std::abs(z));
    rep.table.rows.push_back({j, est[j].hits, est[j].value, est[j].stderr_, a, z});
  }
  rep.check_below("max_abs_z", worst_z, cfg.sigmas);
  return rep;
}

// ---------------------------------------------------------------- martin

Report cmd_martin(const WalkSpec& spec, const CommonConfig& common, const MartinConfig& cfg) {
  Report rep;
  rep.command = "martin";
  rep.config = common_json(spec, common);
  rep.config["x"] = read_json_argument(cfg.x, "--x");
  rep.config["xi"] = read_json_argument(cfg.xi, "--xi");
  rep.config["depths"] = cfg.depths;
  rep.config["n_max"] = cfg.n_max;
  rep.config["truncation"] = cfg.truncation;
  rep.config["tolerance"] = cfg.tolerance;
  if (cfg.depths.empty()) throw InvalidInput("--depths: at least one depth is required");

  const TreeWalk w = tree_walk_for(spec, common.side);
  const TreeVertex x = parse_tree_vertex(cfg.x, "--x", w.q());
  const BoundaryPoint xi = parse_boundary(cfg.xi, "--xi", w.q());
  const auto coeffs = solve_coefficients(w, solver_options(cfg.truncation));
  const auto m = martin_convergence_test(w, coeffs, x, xi, cfg.depths, cfg.n_max);

  rep.table.columns = {"n", "K_hat", "target", "rel_err", "last_increment"};
  for (const auto& row : m.rows) {
    rep.table.rows.push_back({row.n, row.estimate, row.target, row.rel_err, row.last_increment});
  }
  rep.results["final_rel_err"] = m.final_rel_err;
  rep.results["trending_down"] = m.trending_down;
  rep.check_below("final_rel_err", m.final_rel_err, cfg.tolerance);
  rep.check("trending_down", m.trending_down ? 1.0 : 0.0, 1.0, m.trending_down);
  return rep;
}

// ---------------------------------------------------------------- classify

Report cmd_classify(const WalkSpec& spec, const CommonConfig& common, const ClassifyConfig& cfg) {
  Report rep;
  rep.command = "classify";
  rep.config = common_json(spec, common);
  rep.config["truncation"] = cfg.truncation;
  rep.config["tolerance"] = cfg.tolerance;
  const auto opts = solver_options(cfg.truncation, cfg.tolerance);

  const std::vector<FamilyDescriptor>* families = nullptr;
  DLClassification dl;
  TreeClassification tree;
  if (spec.dl) {
    dl = enumerate_minimal_families(*spec.dl, opts);
    rep.results["case"] = dl.dl_case == DLCase::I ? "I" : "II";
    rep.results["alpha"] = dl.alpha;
    rep.results["c0"] = optional_number(dl.c0);
    rep.results["m1"] = dl.m1;
    rep.results["m2_eps"] = dl.m2_eps;
    rep.results["m_c0"] = dl.c0 ? json(dl.m_c0) : json(nullptr);
    add_coefficient_checks(rep, "tree1.", project_to_tree(*spec.dl, Side::One), *dl.tree1.coeffs, cfg.tolerance,
                           1e-6);
    add_coefficient_checks(rep, "tree2.", project_to_tree(*spec.dl, Side::Two), *dl.tree2.coeffs, cfg.tolerance,
                           1e-6);
    families = &dl.families;
    const bool zero = std::abs(dl.alpha) <= opts.root.drift_tolerance;
    const bool has_constant = std::any_of(dl.families.begin(), dl.families.end(),
                                          [](const FamilyDescriptor& f) { return f.kind == FamilyKind::Constant; });
    rep.check("constant_iff_case_I", has_constant ? 1.0 : 0.0, zero ? 1.0 : 0.0, has_constant == zero);
  } else {
    tree = tree_minimal_families(*spec.tree, opts);
    rep.results["case"] = to_string(tree.tcase.drift);
    rep.results["alpha"] = tree.tcase.alpha;
    rep.results["c0"] = optional_number(tree.tcase.c0);
    add_coefficient_checks(rep, "", *spec.tree, *tree.coeffs, cfg.tolerance, 1e-6);
    families = &tree.families;
  }
  add_family_rows(rep, *families);
  rep.table.columns = {"family", "kind", "side", "c"};
  for (const auto& f : rep.results["families"]) {
    rep.table.rows.push_back({f["label"], f["kind"], f["side"], f["c"]});
  }
  return rep;
}

}  // namespace dlh::io
