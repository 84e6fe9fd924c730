#include "eqed/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "eqed/rng.hpp"

namespace eqed {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

constexpr std::uint64_t kInjectionStream = 0x696e6a656374ULL;

const BitVector& chosen_misr(const SignatureScan& scan, int misr) { return misr == 1 ? scan.misr1 : scan.misr2; }

}  // namespace

std::vector<InjectionSpec> brute_force_oracle(const ElaboratedDesign& design, const Partition& partition,
                                              const SignaturePlan& plan, const Stimulus& stimulus,
                                              const ScanSnapshot& snapshot, const ExternalTrace& external, int block,
                                              const OracleOptions& options) {
  if (block < 0 || static_cast<std::size_t>(block) >= partition.blocks.size())
    throw std::invalid_argument("oracle: unknown block " + std::to_string(block));
  std::vector<int> symbolic;
  for (std::size_t f = 0; f < design.ffs.size(); ++f)
    if (design.ffs[f].init == InitValue::Symbolic) symbolic.push_back(static_cast<int>(f));
  if (!symbolic.empty() && !options.enumerate_symbolic_init)
    throw std::invalid_argument("oracle: design has " + std::to_string(symbolic.size()) +
                                " symbolic-init FFs; the oracle needs concrete initial values");
  if (symbolic.size() > 10)
    throw std::invalid_argument("oracle: " + std::to_string(symbolic.size()) +
                                " symbolic-init FFs is too many to enumerate (limit 10)");

  const AnalysisWindow window = select_window(plan, snapshot);
  const std::uint64_t g = snapshot.cycles_run;
  Stimulus st = stimulus;
  st.length = g;
  if (!st.vectors.empty()) {
    if (st.vectors.size() < g) throw std::invalid_argument("oracle: stimulus shorter than the snapshot");
    st.vectors.resize(g);
  }

  const std::vector<int> ids = plan.interfaces_of(partition, block);
  for (int id : ids) {
    const Interface& iface = plan.interface(id);
    if (iface.misr) {
      if (!snapshot.find(id)) throw std::invalid_argument("oracle: snapshot lacks interface " + std::to_string(id));
      continue;
    }
    for (std::uint64_t t = window.start; t < g; ++t)
      if (!external.covers(t)) throw std::invalid_argument("oracle: external trace does not cover cycle " + std::to_string(t));
  }

  const Simulator sim(design, plan);
  auto reproduces = [&](const SimResult& r) {
    for (int id : ids) {
      const Interface& iface = plan.interface(id);
      if (iface.misr) {
        const SignatureScan* want = snapshot.find(id);
        const SignatureScan* got = r.snapshot.find(id);
        if (!got || chosen_misr(*got, window.misr) != chosen_misr(*want, window.misr)) return false;
        continue;
      }
      for (SignalId s : iface.signals)
        for (std::uint64_t t = window.start; t < g; ++t)
          if (r.external.value(s, t) != external.value(s, t)) return false;
    }
    return true;
  };

  std::vector<InjectionSpec> out;
  std::vector<int> ffs = partition.blocks[static_cast<std::size_t>(block)].ffs;
  std::sort(ffs.begin(), ffs.end());
  const std::uint64_t inits = std::uint64_t{1} << symbolic.size();
  SimOptions opt;
  opt.halt_on_detect = false;
  for (int ff : ffs) {
    for (std::uint64_t c = window.start; c < window.start + window.frames; ++c) {
      for (std::uint64_t a = 0; a < inits; ++a) {
        opt.init_overrides.clear();
        for (std::size_t k = 0; k < symbolic.size(); ++k) opt.init_overrides.emplace_back(symbolic[k], ((a >> k) & 1) != 0);
        if (reproduces(sim.run(st, opt, InjectionSpec{ff, c}))) {
          out.push_back({ff, c});
          break;
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void CampaignConfig::validate() const {
  if (seeds < 1) throw std::invalid_argument("campaign: seed count must be at least 1");
  if (window < 1) throw std::invalid_argument("campaign: N must be positive");
  if (budget < 1) throw std::invalid_argument("campaign: budget must be positive");
  if (b.default_b < 1) throw std::invalid_argument("campaign: b must be at least 1");
  if (injection == InjectionPolicy::Window && test_length() < 2 * window)
    throw std::invalid_argument("campaign: length must be at least 2N for window sampling");
  if (injection == InjectionPolicy::PowerOn && test_length() < window)
    throw std::invalid_argument("campaign: length must be at least N for power-on sampling");
  if (design_path.empty()) generator.validate();
  if (extra_memory && (!design_path.empty() || !generator.memory))
    throw std::invalid_argument("campaign: extra memory signatures need the generator's memory");
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw std::invalid_argument("config: " + key + " expects on/off, got '" + v + "'");
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const auto x = std::stoull(v, &used);
    if (used != v.size() || v[0] == '-') throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: " + key + " expects a non-negative integer, got '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: " + key + " expects an integer, got '" + v + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

// Generator keys, by name, for both parsing and printing.
std::vector<std::pair<std::string, int GeneratorParams::*>> generator_int_keys() {
  return {{"gen.rows", &GeneratorParams::rows},
          {"gen.cols", &GeneratorParams::cols},
          {"gen.leaf_inputs", &GeneratorParams::leaf_inputs},
          {"gen.front_width", &GeneratorParams::front_width},
          {"gen.bus_width", &GeneratorParams::bus_width},
          {"gen.side_stages", &GeneratorParams::side_stages},
          {"gen.side_width", &GeneratorParams::side_width},
          {"gen.side_toggles", &GeneratorParams::side_toggles},
          {"gen.masked_ffs", &GeneratorParams::masked_ffs},
          {"gen.gates_per_block", &GeneratorParams::gates_per_block},
          {"gen.hub_selects", &GeneratorParams::hub_selects},
          {"gen.memory_words", &GeneratorParams::memory_words},
          {"gen.memory_width", &GeneratorParams::memory_width},
          {"gen.w_and", &GeneratorParams::w_and},
          {"gen.w_or", &GeneratorParams::w_or},
          {"gen.w_xor", &GeneratorParams::w_xor},
          {"gen.w_mux", &GeneratorParams::w_mux},
          {"gen.w_nand", &GeneratorParams::w_nand},
          {"gen.w_nor", &GeneratorParams::w_nor},
          {"gen.w_not", &GeneratorParams::w_not}};
}

std::vector<std::pair<std::string, bool GeneratorParams::*>> generator_bool_keys() {
  return {{"gen.hub", &GeneratorParams::hub},
          {"gen.memory", &GeneratorParams::memory},
          {"gen.second_clock", &GeneratorParams::second_clock},
          {"gen.concrete_init", &GeneratorParams::concrete_init}};
}

}  // namespace

CampaignConfig parse_campaign_config(const std::string& text) {
  CampaignConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  const auto int_keys = generator_int_keys();
  const auto bool_keys = generator_bool_keys();
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (key == "design") c.design_path = v;
    else if (key == "top") c.top = v;
    else if (key == "design_seed") c.design_seed = parse_u64(key, v);
    else if (key == "N") c.window = parse_u64(key, v);
    else if (key == "b") c.b.default_b = parse_int(key, v);
    else if (key.rfind("b.", 0) == 0) c.b.per_block[parse_int(key, key.substr(2))] = parse_int(key, v);
    else if (key == "budget") c.budget = parse_int(key, v);
    else if (key == "seeds") c.seeds = parse_u64(key, v);
    else if (key == "seed_base") c.seed_base = parse_u64(key, v);
    else if (key == "injection") {
      if (v == "window") c.injection = InjectionPolicy::Window;
      else if (v == "power_on") c.injection = InjectionPolicy::PowerOn;
      else throw std::invalid_argument("config: injection must be window or power_on");
    } else if (key == "length") c.length = parse_u64(key, v);
    else if (key == "monitors") c.monitors = v == "outputs" ? std::vector<std::string>{} : split(v, ',');
    else if (key == "randomize_init") c.randomize_init = parse_bool(key, v);
    else if (key == "mode") {
      if (v == "ff") c.mode = CandidateMode::PerFF;
      else if (v == "pair") c.mode = CandidateMode::PerPair;
      else throw std::invalid_argument("config: mode must be ff or pair");
    } else if (key == "ncc") c.ncc = parse_bool(key, v);
    else if (key == "ncc_strategy") {
      if (v == "joint") c.ncc_strategy = NccStrategy::Joint;
      else if (v == "backtracking") c.ncc_strategy = NccStrategy::Backtracking;
      else throw std::invalid_argument("config: ncc_strategy must be joint or backtracking");
    } else if (key == "ncc_depth") c.ncc_depth = parse_int(key, v);
    else if (key == "canonical_traces") c.canonical_traces = parse_bool(key, v);
    else if (key == "short_window_recheck") c.short_window_recheck = parse_bool(key, v);
    else if (key == "extra_memory") c.extra_memory = parse_bool(key, v);
    else if (key == "extra_b") c.extra_b = parse_int(key, v);
    else if (key == "oracle") c.oracle = parse_bool(key, v);
    else if (key == "solver") {
      if (v == "internal") {
        c.solver.backend = SolverConfig::Backend::Internal;
      } else {
        c.solver.backend = SolverConfig::Backend::External;
        c.solver.command = v;
      }
    } else if (key == "threads") c.threads = static_cast<unsigned>(parse_u64(key, v));
    else {
      bool found = false;
      for (const auto& [name, member] : int_keys)
        if (key == name) {
          c.generator.*member = parse_int(key, v);
          found = true;
        }
      for (const auto& [name, member] : bool_keys)
        if (key == name) {
          c.generator.*member = parse_bool(key, v);
          found = true;
        }
      if (!found) throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

std::string write_campaign_config(const CampaignConfig& c) {
  std::ostringstream out;
  if (!c.design_path.empty()) out << "design=" << c.design_path << "\n";
  out << "top=" << c.top << "\n";
  if (c.design_path.empty()) {
    out << "design_seed=" << c.design_seed << "\n";
    for (const auto& [name, member] : generator_int_keys()) out << name << "=" << c.generator.*member << "\n";
    for (const auto& [name, member] : generator_bool_keys())
      out << name << "=" << (c.generator.*member ? "on" : "off") << "\n";
  }
  out << "N=" << c.window << "\n";
  out << "b=" << c.b.default_b << "\n";
  for (const auto& [blk, b] : c.b.per_block) out << "b." << blk << "=" << b << "\n";
  out << "budget=" << c.budget << "\n";
  out << "seeds=" << c.seeds << "\n";
  out << "seed_base=" << c.seed_base << "\n";
  out << "injection=" << (c.injection == InjectionPolicy::Window ? "window" : "power_on") << "\n";
  out << "length=" << c.length << "\n";
  out << "monitors=";
  if (c.monitors.empty()) out << "outputs";
  for (std::size_t i = 0; i < c.monitors.size(); ++i) out << (i ? "," : "") << c.monitors[i];
  out << "\n";
  out << "randomize_init=" << (c.randomize_init ? "on" : "off") << "\n";
  out << "mode=" << (c.mode == CandidateMode::PerFF ? "ff" : "pair") << "\n";
  out << "ncc=" << (c.ncc ? "on" : "off") << "\n";
  out << "ncc_strategy=" << (c.ncc_strategy == NccStrategy::Joint ? "joint" : "backtracking") << "\n";
  out << "ncc_depth=" << c.ncc_depth << "\n";
  out << "canonical_traces=" << (c.canonical_traces ? "on" : "off") << "\n";
  out << "short_window_recheck=" << (c.short_window_recheck ? "on" : "off") << "\n";
  out << "extra_memory=" << (c.extra_memory ? "on" : "off") << "\n";
  out << "extra_b=" << c.extra_b << "\n";
  out << "oracle=" << (c.oracle ? "on" : "off") << "\n";
  out << "solver=" << (c.solver.backend == SolverConfig::Backend::Internal ? "internal" : c.solver.command) << "\n";
  out << "threads=" << c.threads << "\n";
  return out.str();
}

Instrumented instrument(const CampaignConfig& config) {
  config.validate();
  Instrumented inst;
  if (config.design_path.empty()) {
    inst.netlist = generate_design(config.generator, config.design_seed);
  } else {
    std::ifstream f(config.design_path);
    if (!f) throw std::runtime_error("cannot read " + config.design_path);
    std::ostringstream ss;
    ss << f.rdbuf();
    inst.netlist = ss.str();
  }
  const auto modules = parse_netlist(inst.netlist);
  inst.design = elaborate(modules, config.top);
  inst.partition = partition_design(inst.design, config.budget);
  inst.plan = plan_signatures(group_interfaces(inst.design, inst.partition), config.b, config.window);
  inst.plan.budget = config.budget;
  if (config.extra_memory) {
    std::vector<SignalId> rd;
    for (const auto& name : memory_read_signals(config.generator)) {
      const auto s = inst.design.find_signal(name);
      if (!s) throw std::logic_error("generator memory signal " + name + " missing");
      rd.push_back(*s);
    }
    const int block = inst.partition.driver_block(inst.design, rd.front());
    add_extra_interface(inst.plan, inst.design, inst.partition, block, rd, config.extra_b);
  }
  return inst;
}

// ---------------------------------------------------------------------------

namespace {

LocalizeOptions localize_options(const CampaignConfig& c) {
  LocalizeOptions o;
  o.solver = c.solver;
  o.mode = c.mode;
  o.ncc = c.ncc;
  o.ncc_depth = c.ncc_depth;
  o.ncc_strategy = c.ncc_strategy;
  o.canonical_traces = c.canonical_traces;
  o.short_window_recheck = c.short_window_recheck;
  return o;
}

bool set_has(const CandidateSet& s, const InjectionSpec& inj) {
  return s.mode == CandidateMode::PerPair ? s.contains(inj.ff, inj.cycle) : s.contains(inj.ff);
}

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

CampaignRow run_one(const CampaignConfig& config, const Instrumented& inst, std::uint64_t seed) {
  CampaignRow row;
  row.seed = seed;
  const ElaboratedDesign& d = inst.design;
  const std::uint64_t n = config.window;
  const std::uint64_t len = config.test_length();
  Xorshift64Star rng = Xorshift64Star::stream(seed, kInjectionStream);
  row.injection.ff = static_cast<int>(rng.below(d.ffs.size()));
  const std::uint64_t lo = config.injection == InjectionPolicy::Window ? len - 2 * n : 0;
  row.injection.cycle = lo + rng.below(n);
  row.truth_block = inst.partition.ff_block[static_cast<std::size_t>(row.injection.ff)];
  row.area_proxy = static_cast<double>(inst.plan.signature_ffs()) / static_cast<double>(d.total_ffs());

  try {
    std::optional<std::vector<SignalId>> monitors;
    if (!config.monitors.empty()) {
      monitors.emplace();
      for (const auto& name : config.monitors) {
        const auto s = d.find_signal(name);
        if (!s) throw std::invalid_argument("unknown monitor signal " + name);
        monitors->push_back(*s);
      }
    }
    const Simulator sim(d, inst.plan);
    Stimulus st;
    st.seed = seed;
    st.length = len;
    st.randomize_symbolic_init = config.randomize_init;
    const SimResult res = run_test(sim, st, row.injection, monitors);
    if (!res.detection_cycle) {
      row.status = "vanished";
      return row;
    }
    row.detected = true;
    row.detect_cycle = *res.detection_cycle;
    row.latency = row.detect_cycle - row.injection.cycle;
    const AnalysisWindow window = select_window(inst.plan, res.snapshot);
    row.window_t = window.frames;
    row.covered = row.injection.cycle >= window.start && row.injection.cycle < window.start + window.frames;

    const LocalizationReport rep =
        localize(d, inst.partition, inst.plan, res.snapshot, res.external, localize_options(config));
    row.buggy_blocks = rep.buggy_blocks;
    row.candidates_before = rep.candidate_ffs_before;
    row.candidates_after = rep.candidate_ffs_after;
    row.pairs_before = rep.pairs_before;
    row.pairs_after = rep.pairs_after;
    row.traces_before = rep.traces_before;
    row.traces_after = rep.traces_after;
    row.trace_bits = rep.trace_bits;
    row.factor = rep.factor;
    row.t_localize_ms = rep.times.localize_ms;
    row.t_enum_ms = rep.times.enumerate_ms;
    row.t_ncc_ms = rep.times.ncc_ms;
    row.max_inj_per_model = rep.max_injections_per_model;
    row.status = rep.status;
    for (std::size_t k = 0; k < rep.before.size(); ++k) {
      const CandidateSet& before = rep.before[k];
      const CandidateSet& after = rep.after[k];
      if (before.block == row.truth_block) {
        row.contains_truth = set_has(before, row.injection);
        row.survives_truth = set_has(after, row.injection);
      }
      for (const auto& e : after.entries) {
        const bool present = before.mode == CandidateMode::PerPair ? before.contains(e.ff, e.cycle) : before.contains(e.ff);
        if (!present) row.ncc_subset = false;
      }
    }
    if (config.oracle && config.mode == CandidateMode::PerPair) {
      const auto it = std::find_if(rep.before.begin(), rep.before.end(),
                                   [&](const CandidateSet& s) { return s.block == row.truth_block; });
      if (it != rep.before.end()) {
        auto expected = brute_force_oracle(d, inst.partition, inst.plan, st, res.snapshot, res.external,
                                           row.truth_block);
        std::vector<InjectionSpec> got;
        for (const auto& e : it->entries) got.push_back({e.ff, e.cycle});
        auto key = [](const InjectionSpec& a, const InjectionSpec& b) {
          return a.ff != b.ff ? a.ff < b.ff : a.cycle < b.cycle;
        };
        std::sort(got.begin(), got.end(), key);
        std::sort(expected.begin(), expected.end(), key);
        row.oracle_match = got == expected;
      }
    }
  } catch (const std::exception& e) {
    row.status = "error: " + csv_safe(e.what());
  }
  return row;
}

std::string campaign_csv_header() {
  return "seed,inj_ff,inj_cycle,detected,detect_cycle,latency,window_T,covered,buggy_blocks,truth_block,"
         "candidates_before_ff,candidates_after_ff,pairs_before,pairs_after,traces_before,traces_after,trace_bits,"
         "factor,contains_truth,survives_truth,ncc_subset,t_localize_ms,t_enum_ms,t_ncc_ms,area_proxy,oracle_match,"
         "max_inj_per_model,status";
}

std::string campaign_csv_row(const CampaignRow& r, const ElaboratedDesign& design) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(3);
  out << r.seed << "," << design.ffs[static_cast<std::size_t>(r.injection.ff)].path << "," << r.injection.cycle << ","
      << (r.detected ? 1 : 0) << ",";
  if (r.detected) {
    out << r.detect_cycle << "," << r.latency << "," << r.window_t << "," << (r.covered ? 1 : 0) << ",";
  } else {
    out << "NA,NA,NA,NA,";
  }
  for (std::size_t i = 0; i < r.buggy_blocks.size(); ++i) out << (i ? ";" : "") << r.buggy_blocks[i];
  out << "," << r.truth_block << "," << r.candidates_before << "," << r.candidates_after << "," << r.pairs_before
      << "," << r.pairs_after << "," << r.traces_before << "," << r.traces_after << "," << r.trace_bits << ",";
  if (r.factor) {
    out << *r.factor;
  } else {
    out << "NA";
  }
  out << "," << (r.contains_truth ? 1 : 0) << "," << (r.survives_truth ? 1 : 0) << "," << (r.ncc_subset ? 1 : 0) << ","
      << r.t_localize_ms << "," << r.t_enum_ms << "," << r.t_ncc_ms << ",";
  out.precision(6);
  out << r.area_proxy << ",";
  if (r.oracle_match) {
    out << (*r.oracle_match ? 1 : 0);
  } else {
    out << "NA";
  }
  out << "," << r.max_inj_per_model << "," << r.status;
  return out.str();
}

CampaignResult run_campaign(const CampaignConfig& config, std::ostream* csv) {
  const Instrumented inst = instrument(config);
  return run_campaign(config, inst, csv);
}

CampaignResult run_campaign(const CampaignConfig& config, const Instrumented& inst, std::ostream* csv) {
  config.validate();
  const auto t0 = Clock::now();
  const std::size_t total = config.seeds;
  CampaignResult result;
  result.rows.resize(total);
  std::vector<bool> done(total, false);
  std::size_t flushed = 0;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  if (csv) *csv << campaign_csv_header() << "\n";

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      CampaignRow row = run_one(config, inst, config.seed_base + i);
      std::lock_guard<std::mutex> lock(mu);
      result.rows[i] = std::move(row);
      done[i] = true;
      while (flushed < total && done[flushed]) {
        if (csv) *csv << campaign_csv_row(result.rows[flushed], inst.design) << "\n" << std::flush;
        ++flushed;
      }
    }
  };
  unsigned threads = config.threads ? config.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  result.wall_ms = ms_since(t0);
  return result;
}

// ---------------------------------------------------------------------------

std::vector<TradeoffRow> tradeoff_study(const CampaignConfig& config, const TradeoffOptions& options,
                                        std::ostream* csv) {
  std::set<int> distinct(options.b_values.begin(), options.b_values.end());
  if (distinct.size() < 2) throw std::invalid_argument("tradeoff study needs at least two distinct b values");
  for (int b : distinct)
    if (b < 1) throw std::invalid_argument("tradeoff study: b must be at least 1");
  if (csv) *csv << tradeoff_csv_header() << "\n";
  std::vector<TradeoffRow> out;
  for (int b : options.b_values) {
    for (int variant = 0; variant < (options.compare_extra ? 2 : 1); ++variant) {
      CampaignConfig c = config;
      c.b.default_b = b;
      c.b.per_block.clear();
      if (options.compare_extra) {
        c.extra_memory = variant == 1;
        c.extra_b = b;
      }
      const Instrumented inst = instrument(c);
      const CampaignResult res = run_campaign(c, inst);
      TradeoffRow row;
      row.b = b;
      row.extra = c.extra_memory;
      row.signature_ffs = inst.plan.signature_ffs();
      double sum_tb = 0, sum_ta = 0, sum_cb = 0, sum_ca = 0;
      for (const auto& r : res.rows) {
        if (r.status != "localized") continue;
        ++row.runs;
        row.max_traces_before = std::max(row.max_traces_before, r.traces_before);
        row.max_traces_after = std::max(row.max_traces_after, r.traces_after);
        sum_tb += static_cast<double>(r.traces_before);
        sum_ta += static_cast<double>(r.traces_after);
        sum_cb += static_cast<double>(r.candidates_before);
        sum_ca += static_cast<double>(r.candidates_after);
      }
      if (row.runs) {
        const auto k = static_cast<double>(row.runs);
        row.mean_traces_before = sum_tb / k;
        row.mean_traces_after = sum_ta / k;
        row.mean_candidates_before = sum_cb / k;
        row.mean_candidates_after = sum_ca / k;
      }
      if (csv) *csv << tradeoff_csv_row(row) << "\n" << std::flush;
      out.push_back(row);
    }
  }
  return out;
}

std::string tradeoff_csv_header() {
  return "b,extra,signature_ffs,runs,max_traces_before,mean_traces_before,max_traces_after,mean_traces_after,"
         "mean_candidates_before,mean_candidates_after";
}

std::string tradeoff_csv_row(const TradeoffRow& r) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(3);
  out << r.b << "," << (r.extra ? 1 : 0) << "," << r.signature_ffs << "," << r.runs << "," << r.max_traces_before << ","
      << r.mean_traces_before << "," << r.max_traces_after << "," << r.mean_traces_after << ","
      << r.mean_candidates_before << "," << r.mean_candidates_after;
  return out.str();
}

}  // namespace eqed
