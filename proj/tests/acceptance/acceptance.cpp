// Acceptance run: one PASS/FAIL line per criterion on stdout, diagnostics on
// stderr. Usage: acceptance [--csv-dir DIR] [C1 C2 ...] (default: all twelve).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "eqed/bmc.hpp"
#include "eqed/harness.hpp"
#include "eqed/rng.hpp"
#include "eqed/signature.hpp"

using namespace eqed;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string csv_dir;

void save_rows(const std::string& name, const std::vector<CampaignRow>& rows, const ElaboratedDesign& d) {
  if (csv_dir.empty()) return;
  std::filesystem::create_directories(csv_dir);
  std::ofstream f(std::filesystem::path(csv_dir) / name);
  f << campaign_csv_header() << "\n";
  for (const auto& r : rows) f << campaign_csv_row(r, d) << "\n";
}

bool localized(const CampaignRow& r) { return r.status == "localized"; }

// ---------------------------------------------------------------------------
// 1. MISR linearity

Verdict misr_linearity() {
  const auto t0 = Clock::now();
  std::uint64_t checks = 0, violations = 0;
  // Exhaustive for K <= 6 with M = K (a narrower input is the same map with zero-padded inputs).
  for (int k = 1; k <= 6; ++k) {
    const MisrConfig c{k, k, default_taps(k)};
    const std::uint32_t n = 1U << k;
    auto bits = [&](std::uint32_t v) {
      BitVector b(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) b.set(static_cast<std::size_t>(i), (v >> i) & 1U);
      return b;
    };
    auto word = [&](const BitVector& b) {
      std::uint32_t v = 0;
      for (int i = 0; i < k; ++i) v |= static_cast<std::uint32_t>(b.get(static_cast<std::size_t>(i))) << i;
      return v;
    };
    std::vector<std::uint32_t> table(static_cast<std::size_t>(n) * n);
    for (std::uint32_t s = 0; s < n; ++s)
      for (std::uint32_t x = 0; x < n; ++x) table[s * n + x] = word(misr_step(c, bits(s), bits(x)));
    for (std::uint32_t s = 0; s < n; ++s)
      for (std::uint32_t s2 = 0; s2 < n; ++s2)
        for (std::uint32_t x = 0; x < n; ++x)
          for (std::uint32_t x2 = 0; x2 < n; ++x2) {
            ++checks;
            if (table[(s ^ s2) * n + (x ^ x2)] != (table[s * n + x] ^ table[s2 * n + x2])) ++violations;
          }
  }
  Xorshift64Star rng(0x6c696e);
  const MisrConfig c32{32, 32, default_taps(32)};
  auto rnd = [&] {
    BitVector b(32);
    for (std::size_t i = 0; i < 32; ++i) b.set(i, rng.next_bit());
    return b;
  };
  for (int t = 0; t < 10000; ++t) {
    const auto s = rnd(), s2 = rnd(), x = rnd(), x2 = rnd();
    ++checks;
    if (misr_step(c32, s ^ s2, x ^ x2) != (misr_step(c32, s, x) ^ misr_step(c32, s2, x2))) ++violations;
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && secs < 10,
          std::to_string(checks) + " checks, " + std::to_string(violations) + " violations, " + fmt("%.2f s", secs)};
}

// ---------------------------------------------------------------------------
// 2. Dual-window guarantee

Verdict dual_window() {
  std::uint64_t cases = 0, violations = 0;
  for (const std::uint64_t n : {4ULL, 8ULL, 1024ULL}) {
    const int cw = counter_width(n);
    const MisrConfig cfg{std::max(8, cw), 1, default_taps(std::max(8, cw))};
    auto st = SignatureBlockState::power_on(cfg, n);
    Xorshift64Star rng(n);
    std::vector<BitVector> history;
    for (std::uint64_t run = 1; run <= 4 * n + 1; ++run) {
      BitVector in(1);
      in.set(0, rng.next_bit());
      history.push_back(in);
      st.step(in);
      const std::uint64_t detection = run - 1;  // the run halts right after the detection cycle
      if (detection < n) continue;
      ++cases;
      const auto w = window_lengths(st.counter, n, run);
      bool ok = w.length >= n && w.length < 2 * n && !w.short_window;
      // The chosen MISR must hold exactly the last T inputs folded from reset.
      BitVector replay = misr_reset(cfg);
      for (std::uint64_t t = run - w.length; t < run; ++t) replay = misr_step(cfg, replay, history[t]);
      ok = ok && replay == (w.misr == 1 ? st.misr1 : st.misr2);
      if (!ok) ++violations;
    }
  }
  return {violations == 0, std::to_string(cases) + " detection cycles, " + std::to_string(violations) + " violations"};
}

// ---------------------------------------------------------------------------
// 3. Encoding / simulation equivalence

Verdict encoding_equivalence() {
  const auto t0 = Clock::now();
  Xorshift64Star rng(0x656e63);
  int total = 0, satisfied = 0;
  for (int k = 0; k < 100; ++k) {
    GeneratorParams gp;
    gp.rows = 1;
    gp.cols = 1 + static_cast<int>(rng.below(2));
    gp.hub = gp.cols > 1;
    gp.leaf_inputs = 4 + static_cast<int>(rng.below(4));
    gp.front_width = 2;
    gp.bus_width = 3 + static_cast<int>(rng.below(3));
    gp.side_stages = 1 + static_cast<int>(rng.below(2));
    gp.side_width = 2;
    gp.masked_ffs = 1 + static_cast<int>(rng.below(2));
    gp.gates_per_block = 60 + static_cast<int>(rng.below(80));
    gp.hub_selects = 2;
    gp.concrete_init = rng.next_bit();
    const std::uint64_t n = 4 + rng.below(8);
    const std::string text = generate_design(gp, 1000 + static_cast<std::uint64_t>(k));
    const auto design = elaborate(parse_netlist(text), "top");
    const int budget = gp.cols > 1 ? 200 + static_cast<int>(rng.below(100)) : 100000;
    const auto part = partition_design(design, budget);
    BMap bm;
    bm.default_b = 1 + static_cast<int>(rng.below(8));
    auto plan = plan_signatures(group_interfaces(design, part), bm, n);
    plan.budget = budget;

    Stimulus st;
    st.seed = rng.next();
    st.length = n + rng.below(3 * n);
    st.randomize_symbolic_init = true;
    SimOptions o;
    o.record_values = true;
    const auto run = Simulator(design, plan).run(st, o);
    const auto window = select_window(plan, run.snapshot);

    BmcProblem pb;
    pb.blocks = {static_cast<int>(rng.below(part.blocks.size()))};
    pb.frames = window.frames;
    pb.start_cycle = window.start;
    pb.init = window.start == 0 && gp.concrete_init ? InitMode::Declared : InitMode::Free;
    pb.instrumentation = rng.next_bit() ? Instrumentation::Decoder : Instrumentation::Gates;
    auto u = unroll(design, part, plan, pb);
    add_signature_constraints(u, design, part, plan, run.snapshot, run.external, window.misr);
    ++total;
    if (u.cnf.satisfied_by(assignment_from_simulation(u, design, run))) ++satisfied;
  }
  const double secs = seconds_since(t0);
  return {satisfied == total && secs < 120,
          std::to_string(satisfied) + "/" + std::to_string(total) + " traces satisfy their unrolling, " +
              fmt("%.1f s", secs)};
}

// ---------------------------------------------------------------------------
// Shared campaigns

const CampaignConfig& standard_config() {
  static const CampaignConfig c = [] {
    CampaignConfig c;  // 2x2 grid + hub, N = 64, b = 8, budget 1500
    c.seeds = 50;
    c.threads = 1;
    return c;
  }();
  return c;
}

const Instrumented& standard_design() {
  static const Instrumented i = instrument(standard_config());
  return i;
}

struct StandardCampaign {
  std::vector<CampaignRow> timed;  // the 50-seed campaign
  std::vector<CampaignRow> rows;   // plus extra seeds until 50 runs localized
  double wall_s = 0;
};

const StandardCampaign& standard_campaign() {
  static const StandardCampaign s = [] {
    StandardCampaign s;
    const auto& cfg = standard_config();
    const auto& inst = standard_design();
    const auto t0 = Clock::now();
    s.timed = run_campaign(cfg, inst).rows;
    s.wall_s = seconds_since(t0);
    s.rows = s.timed;
    std::uint64_t seed = cfg.seed_base + cfg.seeds;
    auto count = [&] { return std::count_if(s.rows.begin(), s.rows.end(), localized); };
    while (count() < 50 && seed < cfg.seed_base + 4 * cfg.seeds) s.rows.push_back(run_one(cfg, inst, seed++));
    save_rows("standard.csv", s.rows, inst.design);
    return s;
  }();
  return s;
}

// Per-pair enumeration without NCC on the standard fixture, until 200 runs are window-covered.
const std::vector<CampaignRow>& pair_runs() {
  static const std::vector<CampaignRow> rows = [] {
    CampaignConfig cfg = standard_config();
    cfg.mode = CandidateMode::PerPair;
    cfg.ncc = false;
    cfg.canonical_traces = false;
    cfg.seed_base = 1001;
    const auto& inst = standard_design();
    std::vector<CampaignRow> out;
    int covered = 0;
    for (std::uint64_t seed = cfg.seed_base; covered < 200 && seed < cfg.seed_base + 400; ++seed) {
      out.push_back(run_one(cfg, inst, seed));
      if (out.back().covered) ++covered;
    }
    save_rows("pairs.csv", out, inst.design);
    return out;
  }();
  return rows;
}

const CampaignConfig& oracle_config() {
  static const CampaignConfig c = parse_campaign_config(R"(
gen.rows=1
gen.cols=2
gen.bus_width=4
gen.front_width=2
gen.side_stages=2
gen.side_width=2
gen.masked_ffs=2
gen.leaf_inputs=6
gen.gates_per_block=150
gen.hub_selects=2
gen.concrete_init=on
N=16
b=8
budget=400
seeds=80
injection=power_on
mode=pair
oracle=on
canonical_traces=off
threads=1
)");
  return c;
}

struct OracleCampaign {
  Instrumented inst;
  std::vector<CampaignRow> rows;
  double wall_s = 0;
};

const OracleCampaign& oracle_campaign() {
  static const OracleCampaign o = [] {
    OracleCampaign o;
    o.inst = instrument(oracle_config());
    const auto t0 = Clock::now();
    o.rows = run_campaign(oracle_config(), o.inst).rows;
    o.wall_s = seconds_since(t0);
    save_rows("oracle.csv", o.rows, o.inst.design);
    return o;
  }();
  return o;
}

// ---------------------------------------------------------------------------
// 4-12

Verdict block_soundness() {
  const auto& rows = pair_runs();
  int covered = 0, clean_neighbours = 0, truth_flagged = 0;
  for (const auto& r : rows) {
    if (!r.covered || r.status.rfind("error", 0) == 0) continue;
    ++covered;
    const bool others_sat =
        std::all_of(r.buggy_blocks.begin(), r.buggy_blocks.end(), [&](int b) { return b == r.truth_block; });
    if (others_sat) ++clean_neighbours;
    if (std::find(r.buggy_blocks.begin(), r.buggy_blocks.end(), r.truth_block) != r.buggy_blocks.end())
      ++truth_flagged;
  }
  const double rate = covered ? 100.0 * truth_flagged / covered : 0;
  return {covered >= 200 && clean_neighbours == covered && rate >= 95.0,
          std::to_string(covered) + " covered runs; non-buggy blocks SAT in " + std::to_string(clean_neighbours) +
              "; injected block UNSAT in " + std::to_string(truth_flagged) + fmt(" (%.1f%%)", rate)};
}

Verdict candidate_completeness() {
  const auto& rows = pair_runs();
  int covered = 0, contained = 0;
  for (const auto& r : rows) {
    if (!r.covered) continue;
    ++covered;
    if (r.contains_truth) ++contained;
  }
  return {covered > 0 && contained == covered,
          "truth pair in per-pair set for " + std::to_string(contained) + "/" + std::to_string(covered) +
              " window-covered runs"};
}

Verdict oracle_equivalence() {
  const auto& o = oracle_campaign();
  std::size_t max_ffs = 0;
  for (const auto& b : o.inst.partition.blocks) max_ffs = std::max(max_ffs, b.ffs.size());
  std::uint64_t max_t = 0;
  int compared = 0, equal = 0;
  for (const auto& r : o.rows) {
    max_t = std::max(max_t, r.window_t);
    if (!r.oracle_match) continue;
    ++compared;
    if (*r.oracle_match) ++equal;
  }
  return {compared >= 50 && equal == compared && max_ffs <= 30 && max_t <= 32 && o.wall_s < 600,
          std::to_string(equal) + "/" + std::to_string(compared) + " runs equal to brute force (blocks <= " +
              std::to_string(max_ffs) + " FFs, T <= " + std::to_string(max_t) + ", " + fmt("%.1f s)", o.wall_s)};
}

Verdict ncc_conservative() {
  const auto& rows = standard_campaign().rows;
  int covered = 0, survive = 0, runs = 0, subset = 0;
  for (const auto& r : rows) {
    if (!localized(r)) continue;
    ++runs;
    if (r.ncc_subset && r.candidates_after <= r.candidates_before && r.pairs_after <= r.pairs_before) ++subset;
    if (!r.covered) continue;
    ++covered;
    if (r.contains_truth && r.survives_truth) ++survive;
  }
  return {covered > 0 && survive == covered && subset == runs,
          "truth FF enumerated and kept by NCC in " + std::to_string(survive) + "/" + std::to_string(covered) +
              " covered runs; post-NCC subset of pre-NCC in " + std::to_string(subset) + "/" + std::to_string(runs)};
}

Verdict ncc_effective() {
  const auto& rows = standard_campaign().rows;
  int runs = 0, single = 0;
  double before = 0, after = 0;
  for (const auto& r : rows) {
    if (!localized(r)) continue;
    ++runs;
    if (r.traces_after == 1) ++single;
    before += static_cast<double>(r.candidates_before);
    after += static_cast<double>(r.candidates_after);
  }
  const double rate = runs ? 100.0 * single / runs : 0;
  before /= std::max(runs, 1);
  after /= std::max(runs, 1);
  return {runs >= 50 && rate >= 90.0 && after < before,
          std::to_string(single) + "/" + std::to_string(runs) + fmt(" runs with one surviving trace (%.1f%%)", rate) +
              fmt("; mean FF candidates %.2f", before) + fmt(" -> %.2f", after)};
}

Verdict b_tradeoff() {
  const auto& inst8 = standard_design();
  CampaignConfig cfg = standard_config();
  cfg.ncc = false;
  cfg.canonical_traces = false;
  cfg.seed_base = 2001;
  CampaignConfig cfg2 = cfg;
  cfg2.b.default_b = 2;
  const Instrumented inst2 = instrument(cfg2);
  std::vector<CampaignRow> r8, r2;
  int paired = 0;
  double sum8 = 0, sum2 = 0;
  for (std::uint64_t seed = cfg.seed_base; paired < 50 && seed < cfg.seed_base + 200; ++seed) {
    r8.push_back(run_one(cfg, inst8, seed));
    r2.push_back(run_one(cfg2, inst2, seed));
    if (!localized(r8.back()) || !localized(r2.back())) continue;
    ++paired;
    sum8 += static_cast<double>(r8.back().candidates_before);
    sum2 += static_cast<double>(r2.back().candidates_before);
  }
  save_rows("tradeoff_b8.csv", r8, inst8.design);
  save_rows("tradeoff_b2.csv", r2, inst2.design);
  const double m8 = sum8 / std::max(paired, 1), m2 = sum2 / std::max(paired, 1);
  return {paired >= 50 && m8 <= m2,
          std::to_string(paired) + " paired seeds; mean pre-NCC FF candidates b=8 " + fmt("%.2f", m8) + " vs b=2 " +
              fmt("%.2f", m2) + "; signature FFs " + std::to_string(inst8.plan.signature_ffs()) + " vs " +
              std::to_string(inst2.plan.signature_ffs())};
}

Verdict one_shot() {
  std::uint64_t worst = 0;
  int with_models = 0, rows_seen = 0;
  auto scan = [&](const std::vector<CampaignRow>& rows) {
    for (const auto& r : rows) {
      if (!localized(r)) continue;
      ++rows_seen;
      worst = std::max(worst, r.max_inj_per_model);
      if (r.max_inj_per_model > 0) ++with_models;
    }
  };
  scan(pair_runs());
  scan(oracle_campaign().rows);
  scan(standard_campaign().rows);
  return {rows_seen > 0 && worst <= 1 && with_models > 0,
          "max decoded injections per model " + std::to_string(worst) + " over " + std::to_string(rows_seen) +
              " localized runs"};
}

Verdict factor_arithmetic() {
  const auto& rows = standard_campaign().rows;
  const double total = static_cast<double>(standard_design().design.total_ffs());
  int checked = 0, exact = 0;
  for (const auto& r : rows) {
    if (!localized(r) || r.candidates_after == 0 || checked == 20) continue;
    ++checked;
    if (r.factor && *r.factor == total / static_cast<double>(r.candidates_after)) ++exact;
  }
  return {checked == 20 && exact == 20,
          std::to_string(exact) + "/" + std::to_string(checked) + " factors equal " + fmt("%.0f", total) +
              " / surviving FFs"};
}

Verdict campaign_budget() {
  const auto& s = standard_campaign();
  const auto& d = standard_design().design;
  int errors = 0;
  for (const auto& r : s.timed)
    if (r.status.rfind("error", 0) == 0) ++errors;
  return {s.timed.size() == 50 && errors == 0 && s.wall_s < 1800,
          std::to_string(s.timed.size()) + " seeds on " + std::to_string(d.gates.size()) + " gates / " +
              std::to_string(d.total_ffs()) + " FFs in " + fmt("%.1f s", s.wall_s) + ", " + std::to_string(errors) +
              " errors"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"C1 misr-linearity", misr_linearity},
      {"C2 dual-window", dual_window},
      {"C3 encoding-simulation", encoding_equivalence},
      {"C4 block-soundness", block_soundness},
      {"C5 candidate-completeness", candidate_completeness},
      {"C6 oracle-equivalence", oracle_equivalence},
      {"C7 ncc-conservative", ncc_conservative},
      {"C8 ncc-effective", ncc_effective},
      {"C9 b-tradeoff", b_tradeoff},
      {"C10 one-shot", one_shot},
      {"C11 factor-arithmetic", factor_arithmetic},
      {"C12 campaign-budget", campaign_budget},
  };
  std::set<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--csv-dir" && i + 1 < argc) {
      csv_dir = argv[++i];
    } else {
      only.insert(a);
    }
  }
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && !only.count(name.substr(0, name.find(' ')))) continue;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
    std::cerr << "  (" << name << " took " << fmt("%.1f s", seconds_since(t0)) << ")" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
