#include "tcar/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "tcar/ini.hpp"

namespace tcar {

namespace {

[[noreturn]] void fail_at(const std::string& origin, int line, const std::string& msg) {
  throw validation_error(origin + ":" + std::to_string(line) + ": " + msg);
}

double parse_num(const IniEntry& e, const std::string& origin) {
  const char* s = e.value.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0')
    fail_at(origin, e.line, "value of '" + e.key + "' is not a number: '" + e.value + "'");
  return v;
}

int parse_int(const IniEntry& e, const std::string& origin) {
  const char* s = e.value.c_str();
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (end == s || *end != '\0')
    fail_at(origin, e.line, "value of '" + e.key + "' is not an integer: '" + e.value + "'");
  return static_cast<int>(v);
}

RunMode parse_mode(const std::string& v, const std::string& origin, int line) {
  if (v == "open") return RunMode::Open;
  if (v == "closed") return RunMode::Closed;
  if (v == "target") return RunMode::Target;
  if (v == "both") return RunMode::Both;
  fail_at(origin, line, "mode must be open, closed, target or both (got '" + v + "')");
}

std::string mode_name(RunMode m) {
  switch (m) {
    case RunMode::Open: return "open";
    case RunMode::Closed: return "closed";
    case RunMode::Target: return "target";
    default: return "both";
  }
}

void check_no_dup(std::set<std::string>& seen, const IniEntry& e, const std::string& section,
                  const std::string& origin) {
  if (!seen.insert(e.key).second)
    fail_at(origin, e.line, "duplicate key '" + e.key + "' in [" + section + "]");
}

}  // namespace

bool operator==(const Scenario& a, const Scenario& b) {
  const auto& p = a.params;
  const auto& q = b.params;
  return a.name == b.name && p.V1 == q.V1 && p.V2 == q.V2 && p.gamma1 == q.gamma1 &&
         p.gamma2 == q.gamma2 && p.AObar1 == q.AObar1 && p.AObar2 == q.AObar2 &&
         p.tau1 == q.tau1 && p.tau2 == q.tau2 && p.a1 == q.a1 && p.a2 == q.a2 &&
         p.W == q.W && p.L == q.L && a.rho1 == b.rho1 && a.rho2 == b.rho2 &&
         a.sim.N == b.sim.N && a.sim.cfl == b.sim.cfl && a.sim.tEnd == b.sim.tEnd &&
         a.sim.outputStride == b.sim.outputStride && a.kernel == b.kernel &&
         a.mode == b.mode && a.outputDir == b.outputDir;
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  const IniDoc doc = parse_ini(text, origin);
  Scenario s;

  static const std::set<std::string> known = {"model",  "equilibrium", "sim",
                                              "kernel", "output",      "results"};
  std::set<std::string> sectionsSeen;
  for (const auto& sec : doc.sections) {
    if (!known.count(sec.name)) fail_at(origin, sec.line, "unknown section [" + sec.name + "]");
    if (sec.name != "results" && !sectionsSeen.insert(sec.name).second)
      fail_at(origin, sec.line, "duplicate section [" + sec.name + "]");
  }

  std::map<std::string, double ModelParams::*> modelKeys = {
      {"V1", &ModelParams::V1},         {"V2", &ModelParams::V2},
      {"gamma1", &ModelParams::gamma1}, {"gamma2", &ModelParams::gamma2},
      {"AObar1", &ModelParams::AObar1}, {"AObar2", &ModelParams::AObar2},
      {"tau1", &ModelParams::tau1},     {"tau2", &ModelParams::tau2},
      {"a1", &ModelParams::a1},         {"a2", &ModelParams::a2},
      {"W", &ModelParams::W},           {"L", &ModelParams::L}};

  const IniSection* model = doc.find("model");
  if (!model) throw validation_error(origin + ": missing required section [model]");
  {
    std::set<std::string> seen;
    for (const auto& e : model->entries) {
      const auto it = modelKeys.find(e.key);
      if (it == modelKeys.end())
        fail_at(origin, e.line, "unknown key '" + e.key + "' in [model]");
      check_no_dup(seen, e, "model", origin);
      s.params.*(it->second) = parse_num(e, origin);
    }
    for (const auto& kv : modelKeys)
      if (!seen.count(kv.first))
        throw validation_error(origin + ": missing required key '" + kv.first + "' in [model]");
  }

  const IniSection* eqs = doc.find("equilibrium");
  if (!eqs) throw validation_error(origin + ": missing required section [equilibrium]");
  {
    std::set<std::string> seen;
    for (const auto& e : eqs->entries) {
      check_no_dup(seen, e, "equilibrium", origin);
      if (e.key == "rho1")
        s.rho1 = parse_num(e, origin);
      else if (e.key == "rho2")
        s.rho2 = parse_num(e, origin);
      else
        fail_at(origin, e.line, "unknown key '" + e.key + "' in [equilibrium]");
    }
    if (!seen.count("rho1"))
      throw validation_error(origin + ": missing required key 'rho1' in [equilibrium]");
    if (!seen.count("rho2"))
      throw validation_error(origin + ": missing required key 'rho2' in [equilibrium]");
  }

  if (const IniSection* sim = doc.find("sim")) {
    std::set<std::string> seen;
    for (const auto& e : sim->entries) {
      check_no_dup(seen, e, "sim", origin);
      if (e.key == "N") {
        s.sim.N = parse_int(e, origin);
        if (s.sim.N < 32) fail_at(origin, e.line, "sim N must be at least 32");
      } else if (e.key == "cfl") {
        s.sim.cfl = parse_num(e, origin);
        if (!(s.sim.cfl > 0) || s.sim.cfl > 1)
          fail_at(origin, e.line, "cfl must lie in (0, 1]");
      } else if (e.key == "t_end") {
        s.sim.tEnd = parse_num(e, origin);
      } else if (e.key == "output_stride") {
        s.sim.outputStride = parse_int(e, origin);
        if (s.sim.outputStride < 0) fail_at(origin, e.line, "output_stride must be >= 0");
      } else if (e.key == "mode") {
        s.mode = parse_mode(e.value, origin, e.line);
      } else {
        fail_at(origin, e.line, "unknown key '" + e.key + "' in [sim]");
      }
    }
  }

  if (const IniSection* ker = doc.find("kernel")) {
    std::set<std::string> seen;
    for (const auto& e : ker->entries) {
      check_no_dup(seen, e, "kernel", origin);
      if (e.key == "N") {
        s.kernel.N = parse_int(e, origin);
        if (s.kernel.N < 8) fail_at(origin, e.line, "kernel N must be at least 8");
      } else if (e.key == "tol") {
        s.kernel.tol = parse_num(e, origin);
        if (!(s.kernel.tol > 0)) fail_at(origin, e.line, "kernel tol must be positive");
      } else if (e.key == "max_iter") {
        s.kernel.maxIter = parse_int(e, origin);
        if (s.kernel.maxIter < 1) fail_at(origin, e.line, "kernel max_iter must be >= 1");
      } else {
        fail_at(origin, e.line, "unknown key '" + e.key + "' in [kernel]");
      }
    }
  }

  if (const IniSection* outsec = doc.find("output")) {
    std::set<std::string> seen;
    for (const auto& e : outsec->entries) {
      check_no_dup(seen, e, "output", origin);
      if (e.key == "dir")
        s.outputDir = e.value;
      else if (e.key == "name")
        s.name = e.value;
      else
        fail_at(origin, e.line, "unknown key '" + e.key + "' in [output]");
    }
  }

  try {
    validate(s.params);
  } catch (const validation_error& e) {
    throw validation_error(origin + ": " + e.what());
  }
  if (!(s.rho1 > 0) || !(s.rho2 > 0))
    throw validation_error(origin + ": equilibrium densities must be positive");
  return s;
}

std::string scenario_to_ini(const Scenario& s) {
  std::ostringstream os;
  const auto& p = s.params;
  os << "[model]\n";
  os << "V1 = " << fmt_full(p.V1) << "\nV2 = " << fmt_full(p.V2) << "\n";
  os << "gamma1 = " << fmt_full(p.gamma1) << "\ngamma2 = " << fmt_full(p.gamma2) << "\n";
  os << "AObar1 = " << fmt_full(p.AObar1) << "\nAObar2 = " << fmt_full(p.AObar2) << "\n";
  os << "tau1 = " << fmt_full(p.tau1) << "\ntau2 = " << fmt_full(p.tau2) << "\n";
  os << "a1 = " << fmt_full(p.a1) << "\na2 = " << fmt_full(p.a2) << "\n";
  os << "W = " << fmt_full(p.W) << "\nL = " << fmt_full(p.L) << "\n";
  os << "\n[equilibrium]\n";
  os << "rho1 = " << fmt_full(s.rho1) << "\nrho2 = " << fmt_full(s.rho2) << "\n";
  os << "\n[sim]\n";
  os << "N = " << s.sim.N << "\ncfl = " << fmt_full(s.sim.cfl) << "\n";
  os << "t_end = " << fmt_full(s.sim.tEnd) << "\n";
  os << "output_stride = " << s.sim.outputStride << "\n";
  os << "mode = " << mode_name(s.mode) << "\n";
  os << "\n[kernel]\n";
  os << "N = " << s.kernel.N << "\ntol = " << fmt_full(s.kernel.tol) << "\n";
  os << "max_iter = " << s.kernel.maxIter << "\n";
  os << "\n[output]\n";
  os << "dir = " << s.outputDir << "\nname = " << s.name << "\n";
  return os.str();
}

namespace {

struct ModeOutcome {
  std::string name;
  SimResult res;
};

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

void run_level(const Scenario& sc, const EquilibriumState& eq, const CharacteristicBasis& cb,
               int simN, int kernelN, std::vector<ModeOutcome>& outcomes, RiemannSystem& rs,
               KernelSolution& ks, FeedbackGains& gains, double& kresid,
               const ModelParams& p) {
  const SpatialGrid grid{p.L, simN + 1};
  rs = build_riemann_system(eq, cb, grid);
  const TriangularGrid kgrid{p.L, kernelN};
  ks = solve_kernels(rs, kgrid, sc.kernel.tol, sc.kernel.maxIter);
  kresid = kernel_residual(ks, rs, 1);
  gains = build_gains(rs, ks);

  std::vector<RunMode> modes;
  if (sc.mode == RunMode::Both)
    modes = {RunMode::Open, RunMode::Closed};
  else
    modes = {sc.mode};

  outcomes.clear();
  for (const RunMode m : modes) {
    SimConfig c = sc.sim;
    c.N = simN;
    c.mode = m == RunMode::Open     ? SimMode::OpenLoop
             : m == RunMode::Closed ? SimMode::ClosedLoop
                                    : SimMode::TargetSystem;
    SimResult r = run(c, p, eq, rs, &ks, c.mode == SimMode::ClosedLoop ? &gains : nullptr);
    outcomes.push_back({mode_name(m), std::move(r)});
  }
}

}  // namespace

void run_scenario(const Scenario& s, const RunOptions& opt, std::ostream& out) {
  Scenario sc = s;
  if (!opt.modeName.empty()) sc.mode = parse_mode(opt.modeName, "<mode option>", 0);
  const std::string outDir = opt.outDir.empty() ? sc.outputDir : opt.outDir;
  std::filesystem::create_directories(outDir);
  auto path = [&](const std::string& f) { return outDir + "/" + f; };

  const EquilibriumState eq = equilibrium_from_densities(sc.rho1, sc.rho2, sc.params);
  const CharacteristicBasis cb = characteristic_basis(eq);

  RiemannSystem rs;
  KernelSolution ks;
  FeedbackGains gains;
  double kresid = 0;
  std::vector<ModeOutcome> outcomes;
  run_level(sc, eq, cb, sc.sim.N, sc.kernel.N, outcomes, rs, ks, gains, kresid, sc.params);

  out << "scenario '" << sc.name << "'\n";
  out << "  speeds: lambda1 = " << cb.lambda[0] << ", lambda2 = " << cb.lambda[1]
      << ", lambda3 = " << cb.lambda[2] << ", lambda4 = " << cb.lambda[3] << "\n";
  out << "  kappa = " << rs.kappa << ", settling horizon tF = " << gains.tF << " s\n";
  out << "  kernels: N = " << sc.kernel.N << ", sweeps = " << ks.iterations
      << ", last change = " << sci(ks.residual) << ", residual = " << sci(kresid) << "\n";

  const SimResult* openRes = nullptr;
  const SimResult* closedRes = nullptr;
  for (const auto& oc : outcomes) {
    const SimResult& r = oc.res;
    if (oc.name == "open") openRes = &r;
    if (oc.name == "closed") closedRes = &r;
    double maxU = 0;
    for (const double u : r.U) maxU = std::max(maxU, std::abs(u));
    out << "  " << oc.name << ": dt = " << sci(r.dtUsed) << ", steps = "
        << r.stepTimes.size() - 1 << ", sup " << sci(r.supNorm.front()) << " -> "
        << sci(r.supNorm.back()) << ", l2 " << sci(r.l2Norm.front()) << " -> "
        << sci(r.l2Norm.back());
    if (oc.name != "open") out << ", max|U| = " << sci(maxU);
    if (oc.name != "target") out << ", max|beta(L)| = " << sci(r.betaLMax);
    out << "\n";

    if (oc.name == "target")
      write_target_csv(path("target_fields.csv"), r, rs.grid);
    else
      write_fields_csv(path(oc.name + "_fields.csv"), r, rs.grid);
    write_series_csv(path(oc.name + "_series.csv"), r);
  }
  if (openRes && closedRes) {
    const double ratio = closedRes->l2Norm.back() / openRes->l2Norm.back();
    out << "  closed/open final l2 ratio = " << sci(ratio) << "\n";
  }

  write_riemann_csv(path("riemann_diag.csv"), rs);
  if (opt.dumpKernels) write_kernel_csv(path("kernels.csv"), ks);

  std::ostringstream manifest;
  manifest << "# written by the tcar pipeline; [results] is ignored when re-parsed\n";
  manifest << scenario_to_ini(sc);
  manifest << "\n[results]\n";
  for (int i = 0; i < 4; ++i)
    manifest << "lambda" << i + 1 << " = " << fmt_full(cb.lambda[i]) << "\n";
  manifest << "delta = " << fmt_full(cb.Delta) << "\n";
  manifest << "kappa = " << fmt_full(rs.kappa) << "\n";
  manifest << "t_f = " << fmt_full(gains.tF) << "\n";
  manifest << "kernel_iterations = " << ks.iterations << "\n";
  manifest << "kernel_last_change = " << fmt_full(ks.residual) << "\n";
  manifest << "kernel_residual = " << fmt_full(kresid) << "\n";
  for (const auto& oc : outcomes) {
    manifest << oc.name << "_dt = " << fmt_full(oc.res.dtUsed) << "\n";
    manifest << oc.name << "_steps = " << oc.res.stepTimes.size() - 1 << "\n";
    manifest << oc.name << "_final_sup = " << fmt_full(oc.res.supNorm.back()) << "\n";
    manifest << oc.name << "_final_l2 = " << fmt_full(oc.res.l2Norm.back()) << "\n";
    manifest << oc.name << "_beta_l_max = " << fmt_full(oc.res.betaLMax) << "\n";
  }
  {
    std::ofstream f(path("manifest.ini"), std::ios::binary);
    if (!f) throw validation_error("cannot write file: " + path("manifest.ini"));
    f << manifest.str();
  }

  if (opt.refine > 0) {
    out << "  refinement study (no files written):\n";
    std::vector<double> prevSup;
    for (int lvl = 0; lvl <= opt.refine; ++lvl) {
      const int simN = sc.sim.N << lvl;
      const int kernelN = ((sc.kernel.N - 1) << lvl) + 1;
      RiemannSystem rsL;
      KernelSolution ksL;
      FeedbackGains gL;
      double krL = 0;
      std::vector<ModeOutcome> ocs;
      if (lvl == 0) {
        ocs = outcomes;
        krL = kresid;
      } else {
        run_level(sc, eq, cb, simN, kernelN, ocs, rsL, ksL, gL, krL, sc.params);
      }
      out << "    level " << lvl << ": N = " << simN << ", kernel residual = " << sci(krL);
      std::vector<double> sups;
      for (const auto& oc : ocs) {
        out << ", " << oc.name << " final sup = " << sci(oc.res.supNorm.back());
        sups.push_back(oc.res.supNorm.back());
      }
      if (!prevSup.empty() && prevSup.size() == sups.size())
        for (size_t i = 0; i < sups.size(); ++i)
          if (sups[i] > 0) out << ", ratio = " << std::setprecision(3) << prevSup[i] / sups[i];
      out << "\n";
      prevSup = sups;
    }
  }
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"boundary feedback toolkit for two-class traffic flow"};
  std::vector<std::string> scenarioPaths;
  std::string modeName, outDir;
  bool dumpKernels = false;
  bool compare = false;
  int refine = 0, jobs = 1;
  app.add_option("-s,--scenario", scenarioPaths, "scenario INI file (repeatable)")
      ->required();
  app.add_option("--mode", modeName, "override run mode: open, closed, target or both")
      ->check(CLI::IsMember({"open", "closed", "target", "both"}));
  app.add_option("--out", outDir, "override the output directory");
  app.add_flag("--dump-kernels", dumpKernels, "also write the kernel triangle as CSV");
  app.add_option("--refine", refine, "extra levels with doubled resolution")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--jobs", jobs, "run scenarios in parallel")->check(CLI::PositiveNumber);
  app.add_flag("--compare", compare,
               "print the open/closed comparison (implied when both modes run)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForVersion")
      return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    std::vector<Scenario> scenarios;
    for (const auto& p : scenarioPaths) {
      std::ifstream f(p);
      if (!f) throw validation_error("cannot read scenario file: " + p);
      std::ostringstream buf;
      buf << f.rdbuf();
      Scenario s = parse_scenario(buf.str(), p);
      if (s.name == "scenario") s.name = std::filesystem::path(p).stem().string();
      scenarios.push_back(std::move(s));
    }

    RunOptions opt;
    opt.modeName = modeName;
    opt.dumpKernels = dumpKernels;
    opt.refine = refine;
    if (compare && !modeName.empty() && modeName != "both")
      std::cout << "note: --compare needs both loop modes; use --mode both\n";

    if (scenarios.size() == 1 || jobs <= 1) {
      for (const auto& s : scenarios) {
        RunOptions o = opt;
        if (!outDir.empty())
          o.outDir = scenarios.size() == 1 ? outDir : outDir + "/" + s.name;
        run_scenario(s, o, std::cout);
      }
    } else {
      // Waves of at most `jobs` tasks; summaries buffered and printed in order.
      std::vector<std::string> buffers(scenarios.size());
      std::vector<std::exception_ptr> errors(scenarios.size());
      for (size_t base = 0; base < scenarios.size(); base += jobs) {
        const size_t end = std::min(scenarios.size(), base + jobs);
        std::vector<std::future<void>> tasks;
        for (size_t i = base; i < end; ++i) {
          tasks.push_back(std::async(std::launch::async, [&, i] {
            try {
              RunOptions o = opt;
              if (!outDir.empty()) o.outDir = outDir + "/" + scenarios[i].name;
              std::ostringstream os;
              run_scenario(scenarios[i], o, os);
              buffers[i] = os.str();
            } catch (...) {
              errors[i] = std::current_exception();
            }
          }));
        }
        for (auto& t : tasks) t.get();
      }
      for (size_t i = 0; i < scenarios.size(); ++i) {
        std::cout << buffers[i];
        if (errors[i]) std::rethrow_exception(errors[i]);
      }
    }
    return 0;
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace tcar
