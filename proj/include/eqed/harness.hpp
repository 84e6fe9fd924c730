#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eqed/generator.hpp"
#include "eqed/localize.hpp"
#include "eqed/netlist.hpp"
#include "eqed/partition.hpp"
#include "eqed/sim.hpp"

namespace eqed {

// ---------------------------------------------------------------------------
// Brute-force oracle

struct OracleOptions {
  /// Also enumerate every initial state of the design's symbolic-init FFs
  /// (at most 10 of them); a pair is kept if any initial state reproduces.
  bool enumerate_symbolic_init = false;
};

/// Every (FF in `block`, cycle in the analysis window) whose injected run,
/// simulated from power-on for exactly the snapshot's cycle count without
/// halting, reproduces the block's constrained signatures and the traced
/// primary I/O touching the block. Sorted by (ff, cycle).
std::vector<InjectionSpec> brute_force_oracle(const ElaboratedDesign& design, const Partition& partition,
                                              const SignaturePlan& plan, const Stimulus& stimulus,
                                              const ScanSnapshot& snapshot, const ExternalTrace& external, int block,
                                              const OracleOptions& options = {});

// ---------------------------------------------------------------------------
// Campaigns

enum class InjectionPolicy {
  Window,   // uniform over FFs x [L-2N, L-N)
  PowerOn,  // uniform over FFs x [0, N): windows start at power-on
};

struct CampaignConfig {
  std::string design_path;  // .enl file; empty means "generate"
  std::string top = "top";
  GeneratorParams generator;
  std::uint64_t design_seed = 1;

  std::uint64_t window = 64;  // N
  BMap b;
  int budget = 1500;
  std::uint64_t seeds = 10;
  std::uint64_t seed_base = 1;
  InjectionPolicy injection = InjectionPolicy::Window;
  std::uint64_t length = 0;  // L; 0 means 3N
  std::vector<std::string> monitors;  // empty: primary outputs
  bool randomize_init = true;         // symbolic FFs power up to per-seed random values

  CandidateMode mode = CandidateMode::PerFF;
  bool ncc = true;
  NccStrategy ncc_strategy = NccStrategy::Joint;
  int ncc_depth = -1;
  bool canonical_traces = true;
  bool short_window_recheck = false;
  bool extra_memory = false;  // extra signature block on the generator's memory read data
  int extra_b = 8;
  bool oracle = false;        // compare per-pair candidates against the brute-force oracle
  SolverConfig solver;
  unsigned threads = 0;       // 0: hardware concurrency

  void validate() const;
  std::uint64_t test_length() const { return length ? length : 3 * window; }
};

/// Flat `key=value` lines; `#` starts a comment. Unknown keys are errors.
CampaignConfig parse_campaign_config(const std::string& text);
std::string write_campaign_config(const CampaignConfig& config);

/// A design with its partition and signature plan, built from a campaign config.
struct Instrumented {
  ElaboratedDesign design;
  Partition partition;
  SignaturePlan plan;
  std::string netlist;
};

Instrumented instrument(const CampaignConfig& config);

struct CampaignRow {
  std::uint64_t seed = 0;
  InjectionSpec injection;
  bool detected = false;
  std::uint64_t detect_cycle = 0;
  std::uint64_t latency = 0;
  std::uint64_t window_t = 0;
  bool covered = false;
  std::vector<int> buggy_blocks;
  int truth_block = -1;
  std::uint64_t candidates_before = 0;  // distinct FFs
  std::uint64_t candidates_after = 0;
  std::uint64_t pairs_before = 0;
  std::uint64_t pairs_after = 0;
  std::uint64_t traces_before = 0;
  std::uint64_t traces_after = 0;
  std::uint64_t trace_bits = 0;
  std::optional<double> factor;
  bool contains_truth = false;  // before NCC (per-FF: the FF; per-pair: the pair)
  bool survives_truth = false;  // after NCC
  bool ncc_subset = true;       // every survivor was a pre-NCC candidate
  double t_localize_ms = 0;
  double t_enum_ms = 0;
  double t_ncc_ms = 0;
  double area_proxy = 0;
  std::optional<bool> oracle_match;
  std::uint64_t max_inj_per_model = 0;
  std::string status;
};

struct CampaignResult {
  std::vector<CampaignRow> rows;  // seed order
  double wall_ms = 0;
};

/// The fixed CSV header (comma separated, runtimes in milliseconds).
std::string campaign_csv_header();
std::string campaign_csv_row(const CampaignRow& row, const ElaboratedDesign& design);

/// One run of the campaign (exposed for tests).
CampaignRow run_one(const CampaignConfig& config, const Instrumented& inst, std::uint64_t seed);

/// Runs every seed on a thread pool. Rows are streamed to `csv` (when given) in
/// seed order as soon as all earlier seeds are done.
CampaignResult run_campaign(const CampaignConfig& config, std::ostream* csv = nullptr);
CampaignResult run_campaign(const CampaignConfig& config, const Instrumented& inst, std::ostream* csv = nullptr);

// ---------------------------------------------------------------------------
// b trade-off study

struct TradeoffRow {
  int b = 0;
  bool extra = false;
  std::uint64_t signature_ffs = 0;
  std::uint64_t runs = 0;  // localized runs contributing
  std::uint64_t max_traces_before = 0;
  double mean_traces_before = 0;
  std::uint64_t max_traces_after = 0;
  double mean_traces_after = 0;
  double mean_candidates_before = 0;
  double mean_candidates_after = 0;
};

struct TradeoffOptions {
  std::vector<int> b_values;
  bool compare_extra = false;  // add a second row per b with extra memory signature blocks
};

/// Re-plans and re-runs the campaign for each b. Throws std::invalid_argument
/// with fewer than two b values.
std::vector<TradeoffRow> tradeoff_study(const CampaignConfig& config, const TradeoffOptions& options,
                                        std::ostream* csv = nullptr);
std::string tradeoff_csv_header();
std::string tradeoff_csv_row(const TradeoffRow& row);

}  // namespace eqed
