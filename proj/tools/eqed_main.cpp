// Command-line front end: instrument, simulate, localize, oracle, campaign, tradeoff, generate.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "eqed/harness.hpp"

namespace fs = std::filesystem;
using namespace eqed;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

struct Loaded {
  ElaboratedDesign design;
  SignaturePlan plan;
  Partition partition;
};

Loaded load(const std::string& netlist, const std::string& top, const std::string& plan_path) {
  Loaded l;
  l.design = elaborate(parse_netlist(read_file(netlist)), top);
  l.plan = read_plan(read_file(plan_path), l.design);
  l.partition = partition_design(l.design, l.plan.budget);
  return l;
}

SolverConfig solver_from(const std::string& cmd) {
  SolverConfig s;
  if (!cmd.empty() && cmd != "internal") {
    s.backend = SolverConfig::Backend::External;
    s.command = cmd;
  }
  return s;
}

InjectionSpec parse_injection(const ElaboratedDesign& d, const std::string& spec) {
  const auto at = spec.rfind('@');
  if (at == std::string::npos) throw std::invalid_argument("injection must look like FF_PATH@CYCLE");
  const auto ff = d.find_ff(spec.substr(0, at));
  if (!ff) throw std::invalid_argument("unknown FF " + spec.substr(0, at));
  return {*ff, std::stoull(spec.substr(at + 1))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signature-based electrical bug localization"};
  app.require_subcommand(1);

  // instrument
  std::string netlist, top = "top", out;
  int budget = 1500;
  std::uint64_t window = 64;
  int b = 8;
  std::vector<std::string> b_block;
  auto* inst = app.add_subcommand("instrument", "partition a design and plan its signature blocks");
  inst->add_option("netlist,--netlist", netlist, "design (.enl)")->required()->check(CLI::ExistingFile);
  inst->add_option("--top", top, "top module");
  inst->add_option("--budget", budget, "block size budget (gates + FFs)");
  inst->add_option("-N,--window", window, "capture window N");
  inst->add_option("-b", b, "MISR bits per captured signal");
  inst->add_option("--b-block", b_block, "per-block override BLOCK=B (keyed by source block)");
  inst->add_option("-o,--out,--output", out, "plan file (default stdout)");

  // simulate
  std::string plan_path, inject, monitors;
  std::uint64_t seed = 1, length = 0;
  bool randomize_init = true;
  auto* sim = app.add_subcommand("simulate", "run a stimulus, optionally with an injected FF error, and scan");
  sim->add_option("netlist,--netlist", netlist)->required()->check(CLI::ExistingFile);
  sim->add_option("--top", top);
  sim->add_option("--plan", plan_path)->required()->check(CLI::ExistingFile);
  sim->add_option("--seed", seed, "stimulus seed");
  sim->add_option("--cycles,--length", length, "cycles to run (default 3N)");
  sim->add_option("--inject", inject, "FF_PATH@CYCLE");
  sim->add_option("--monitors", monitors, "comma-separated monitor signals (default: primary outputs)");
  sim->add_option("--randomize-init", randomize_init, "symbolic FFs power up to seeded random values");
  sim->add_option("-o,--out,--output", out, "scan file (default stdout)");

  // localize
  std::string scan_path, mode = "ff", ncc_strategy = "joint", solver, traces_dir;
  std::string ncc_switch = "on";
  bool recheck = false;
  int ncc_depth = -1;
  auto* loc = app.add_subcommand("localize", "find the buggy block, candidate FFs and bug traces");
  loc->add_option("netlist,--netlist", netlist)->required()->check(CLI::ExistingFile);
  loc->add_option("--top", top);
  loc->add_option("--plan", plan_path)->required()->check(CLI::ExistingFile);
  loc->add_option("--scan", scan_path)->required()->check(CLI::ExistingFile);
  loc->add_option("--mode", mode, "candidate granularity: ff or pair")->check(CLI::IsMember({"ff", "pair"}));
  loc->add_option("--ncc", ncc_switch, "neighbour consistency checking on/off")->check(CLI::IsMember({"on", "off"}));
  loc->add_option("--ncc-strategy", ncc_strategy)->check(CLI::IsMember({"joint", "backtracking"}));
  loc->add_option("--depth,--ncc-depth", ncc_depth, "neighbour hops (-1: whole clock domain)");
  loc->add_flag("--short-window-recheck", recheck, "re-check inconsistent blocks on the shorter MISR window");
  loc->add_option("--solver", solver, "external DIMACS solver command (default: built-in)");
  loc->add_option("--traces", traces_dir, "directory for one trace file per surviving candidate");
  loc->add_option("-o,--report,--output", out, "report (default stdout)");

  // oracle
  int block = -1;
  bool symbolic = false;
  auto* orc = app.add_subcommand("oracle", "exhaustive injection simulation for one block");
  orc->add_option("netlist,--netlist", netlist)->required()->check(CLI::ExistingFile);
  orc->add_option("--top", top);
  orc->add_option("--plan", plan_path)->required()->check(CLI::ExistingFile);
  orc->add_option("--scan", scan_path)->required()->check(CLI::ExistingFile);
  orc->add_option("--seed", seed, "stimulus seed used for the scan");
  orc->add_option("--randomize-init", randomize_init);
  orc->add_option("--block", block)->required();
  orc->add_flag("--symbolic", symbolic, "enumerate initial states of up to 10 symbolic-init FFs");
  orc->add_option("-o,--out,--output", out);

  // campaign / tradeoff
  std::string config_path;
  std::vector<int> b_values;
  bool extra = false;
  auto* camp = app.add_subcommand("campaign", "seeded injection campaign, one CSV row per run");
  camp->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  camp->add_option("-o,--out,--output", out, "CSV (default stdout)");
  auto* trade = app.add_subcommand("tradeoff", "re-run a campaign for several b values");
  trade->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  trade->add_option("--b", b_values, "b values (at least two)")->required()->delimiter(',');
  trade->add_flag("--extra", extra, "also run each b with extra memory signature blocks");
  trade->add_option("-o,--out,--output", out);

  // generate
  auto* gen = app.add_subcommand("generate", "write the synthetic design described by a campaign config");
  gen->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  gen->add_option("-o,--out,--output", out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*inst) {
      const auto design = elaborate(parse_netlist(read_file(netlist)), top);
      const auto part = partition_design(design, budget);
      BMap bm;
      bm.default_b = b;
      for (const auto& kv : b_block) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--b-block expects BLOCK=B");
        bm.per_block[std::stoi(kv.substr(0, eq))] = std::stoi(kv.substr(eq + 1));
      }
      auto plan = plan_signatures(group_interfaces(design, part), bm, window);
      plan.budget = budget;
      for (const auto& w : plan.warnings) std::cerr << "warning: " << w << "\n";
      for (const auto& blk : part.blocks)
        std::cerr << "block " << blk.id << " " << blk.root_path << " clock=" << blk.clock << " cost=" << blk.cost
                  << (blk.oversized ? " (oversized)" : "") << "\n";
      emit(out, write_plan(plan, design));
    } else if (*sim) {
      const Loaded l = load(netlist, top, plan_path);
      const Simulator s(l.design, l.plan);
      Stimulus st;
      st.seed = seed;
      st.length = length ? length : 3 * l.plan.window;
      st.randomize_symbolic_init = randomize_init;
      std::optional<InjectionSpec> inj;
      if (!inject.empty()) inj = parse_injection(l.design, inject);
      std::optional<std::vector<SignalId>> mons;
      if (!monitors.empty()) {
        mons.emplace();
        std::stringstream ss(monitors);
        std::string name;
        while (std::getline(ss, name, ',')) {
          const auto sid = l.design.find_signal(name);
          if (!sid) throw std::invalid_argument("unknown monitor " + name);
          mons->push_back(*sid);
        }
      }
      const SimResult r = run_test(s, st, inj, mons);
      std::cerr << (r.detection_cycle ? "detected at cycle " + std::to_string(*r.detection_cycle) : "not detected")
                << ", " << r.cycles_run << " cycles\n";
      emit(out, write_scan(r.snapshot, r.external, l.design, l.plan));
    } else if (*loc) {
      const Loaded l = load(netlist, top, plan_path);
      const auto [snap, ext] = read_scan(read_file(scan_path), l.design, l.plan);
      LocalizeOptions o;
      o.mode = mode == "pair" ? CandidateMode::PerPair : CandidateMode::PerFF;
      o.ncc = ncc_switch == "on";
      o.ncc_strategy = ncc_strategy == "joint" ? NccStrategy::Joint : NccStrategy::Backtracking;
      o.ncc_depth = ncc_depth;
      o.short_window_recheck = recheck;
      o.solver = solver_from(solver);
      const auto rep = localize(l.design, l.partition, l.plan, snap, ext, o);
      emit(out, write_report(rep, l.design));
      if (!traces_dir.empty()) {
        fs::create_directories(traces_dir);
        int k = 0;
        for (const auto& c : rep.survivors) {
          std::ofstream f(fs::path(traces_dir) / ("candidate_" + std::to_string(k++) + ".trace"));
          f << write_trace(c.trace, l.design);
        }
      }
    } else if (*orc) {
      const Loaded l = load(netlist, top, plan_path);
      const auto [snap, ext] = read_scan(read_file(scan_path), l.design, l.plan);
      Stimulus st;
      st.seed = seed;
      st.length = snap.cycles_run;
      st.randomize_symbolic_init = randomize_init;
      OracleOptions oo;
      oo.enumerate_symbolic_init = symbolic;
      const auto pairs = brute_force_oracle(l.design, l.partition, l.plan, st, snap, ext, block, oo);
      std::ostringstream os;
      os << "pairs=" << pairs.size() << "\n";
      for (const auto& p : pairs)
        os << "pair ff=" << l.design.ffs[static_cast<std::size_t>(p.ff)].path << " cycle=" << p.cycle << "\n";
      emit(out, os.str());
    } else if (*camp) {
      const auto cfg = parse_campaign_config(read_file(config_path));
      std::ofstream f;
      std::ostream* csv = &std::cout;
      if (!out.empty() && out != "-") {
        f.open(out);
        if (!f) throw std::runtime_error("cannot write " + out);
        csv = &f;
      }
      const auto res = run_campaign(cfg, csv);
      std::cerr << res.rows.size() << " runs in " << res.wall_ms / 1000.0 << " s\n";
    } else if (*trade) {
      const auto cfg = parse_campaign_config(read_file(config_path));
      std::ofstream f;
      std::ostream* csv = &std::cout;
      if (!out.empty() && out != "-") {
        f.open(out);
        if (!f) throw std::runtime_error("cannot write " + out);
        csv = &f;
      }
      TradeoffOptions to;
      to.b_values = b_values;
      to.compare_extra = extra;
      tradeoff_study(cfg, to, csv);
    } else if (*gen) {
      const auto cfg = parse_campaign_config(read_file(config_path));
      emit(out, generate_design(cfg.generator, cfg.design_seed));
    }
  } catch (const std::exception& e) {
    std::cerr << "eqed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
