#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "dlharmonic/errors.hpp"
#include "io/commands.hpp"

namespace {

using namespace dlh::io;

struct Flags {
  CommonConfig common;
  int side = 1;
  std::string out;
  std::string format = "json";
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--walk", f.common.walk_path, "walk spec JSON file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.common.seed, "base seed (required by stochastic commands)");
  cmd->add_option("--out", f.out, "output path (default stdout)");
  cmd->add_option("--format", f.format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  cmd->add_option("--side", f.side, "factor tree used by tree commands on DL walks")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  cmd->add_option("--threads", f.common.threads, "Monte Carlo worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonic functions of semi-isotropic walks on trees and Diestel-Leader graphs"};
  app.require_subcommand(1);
  Flags flags;

  AnalyzeConfig analyze;
  auto* a = app.add_subcommand("analyze", "drift, phi grid, root, moments and case");
  add_common(a, flags);
  a->add_option("--grid-min", analyze.grid_min)->capture_default_str();
  a->add_option("--grid-max", analyze.grid_max)->capture_default_str();
  a->add_option("--grid-step", analyze.grid_step)->capture_default_str();

  CoeffsConfig coeffs;
  auto* co = app.add_subcommand("coeffs", "boundary coefficients a_j");
  add_common(co, flags);
  co->add_option("--truncation,-J", coeffs.truncation)->capture_default_str();
  co->add_option("--tolerance", coeffs.tolerance)->capture_default_str();
  co->add_option("--tail-tolerance", coeffs.tail_tolerance)->capture_default_str();

  KernelConfig kernel;
  auto* k = app.add_subcommand("kernel", "evaluate K(x, xi)");
  add_common(k, flags);
  k->add_option("--x", kernel.x, "tree vertex JSON or @file")->capture_default_str();
  k->add_option("--xi", kernel.xi, "boundary point JSON or @file")->capture_default_str();
  k->add_option("--truncation,-J", kernel.truncation)->capture_default_str();
  k->add_option("--tolerance", kernel.tolerance)->capture_default_str();

  VerifyConfig verify;
  auto* v = app.add_subcommand("verify", "exact harmonicity of every enumerated family");
  add_common(v, flags);
  v->add_option("--radius", verify.radius)->capture_default_str();
  v->add_option("--deep", verify.deep)->capture_default_str();
  v->add_option("--extent", verify.extent)->capture_default_str();
  v->add_option("--truncation,-J", verify.truncation)->capture_default_str();
  v->add_option("--tolerance", verify.tolerance)->capture_default_str();

  SimulateConfig sim;
  auto* s = app.add_subcommand("simulate", "Monte Carlo trajectories, boundary hits or returns");
  add_common(s, flags);
  s->add_option("--mode", sim.mode)
      ->check(CLI::IsMember({"trajectory", "coefficients", "transience"}))
      ->capture_default_str();
  s->add_option("--runs", sim.runs)->capture_default_str();
  s->add_option("--steps", sim.steps)->capture_default_str();
  s->add_option("--window", sim.window)->capture_default_str();
  s->add_option("--depth-margin", sim.depth_margin)->capture_default_str();
  s->add_option("--max-j", sim.max_j)->capture_default_str();
  s->add_option("--truncation,-J", sim.truncation)->capture_default_str();
  s->add_option("--sigmas", sim.sigmas)->capture_default_str();
  s->add_option("--x0", sim.x0, "start vertex JSON or @file (default: root)");

  MartinConfig martin;
  auto* m = app.add_subcommand("martin", "Green-ratio convergence toward K(x, xi)");
  add_common(m, flags);
  m->add_option("--x", martin.x)->capture_default_str();
  m->add_option("--xi", martin.xi)->capture_default_str();
  m->add_option("--depths", martin.depths)->delimiter(',')->capture_default_str();
  m->add_option("--n-max", martin.n_max)->capture_default_str();
  m->add_option("--truncation,-J", martin.truncation)->capture_default_str();
  m->add_option("--tolerance", martin.tolerance)->capture_default_str();

  ClassifyConfig classify;
  auto* cl = app.add_subcommand("classify", "enumerate the minimal harmonic families");
  add_common(cl, flags);
  cl->add_option("--truncation,-J", classify.truncation)->capture_default_str();
  cl->add_option("--tolerance", classify.tolerance)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    flags.common.side = flags.side == 2 ? dlh::Side::Two : dlh::Side::One;
    const WalkSpec spec = load_walk_spec(flags.common.walk_path);
    Report rep;
    if (a->parsed()) rep = cmd_analyze(spec, flags.common, analyze);
    if (co->parsed()) rep = cmd_coeffs(spec, flags.common, coeffs);
    if (k->parsed()) rep = cmd_kernel(spec, flags.common, kernel);
    if (v->parsed()) rep = cmd_verify(spec, flags.common, verify);
    if (s->parsed()) rep = cmd_simulate(spec, flags.common, sim);
    if (m->parsed()) rep = cmd_martin(spec, flags.common, martin);
    if (cl->parsed()) rep = cmd_classify(spec, flags.common, classify);

    const Format format = parse_format(flags.format);
    if (flags.out.empty()) {
      write_report(rep, format, std::cout);
    } else {
      std::ofstream os(flags.out, std::ios::binary);
      if (!os) throw dlh::InvalidInput("--out: cannot open " + flags.out);
      write_report(rep, format, os);
    }
    for (const auto& c : rep.checks) {
      if (!c.passed) std::cerr << "check failed: " << c.name << " = " << c.value << " (tolerance " << c.tolerance << ")\n";
    }
    return rep.passed() ? 0 : rep.failure_code;
  } catch (const dlh::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
