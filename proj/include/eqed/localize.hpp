#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eqed/bmc.hpp"
#include "eqed/cnf.hpp"
#include "eqed/netlist.hpp"
#include "eqed/partition.hpp"
#include "eqed/sim.hpp"

namespace eqed {

/// Candidate blocking granularity during enumeration.
enum class CandidateMode {
  PerFF,    // a found FF is ruled out at every cycle
  PerPair,  // only the found (FF, cycle) is ruled out
};

enum class NccStrategy {
  Joint,         // one satisfiability check over the candidate's block and all reachable neighbours
  Backtracking,  // neighbour-by-neighbour search with alternative-trace backtracking
};

struct LocalizeOptions {
  SolverConfig solver;
  CandidateMode mode = CandidateMode::PerFF;
  Instrumentation instrumentation = Instrumentation::Decoder;
  bool ncc = true;
  int ncc_depth = -1;  // -1: whole clock domain
  NccStrategy ncc_strategy = NccStrategy::Joint;
  std::uint64_t ncc_backtrack_limit = 20000;  // per candidate; exceeding it keeps the candidate
  bool power_on_state = true;         // use declared FF inits when the window starts at power-on
  bool short_window_recheck = false;  // re-check UNSAT blocks on the other MISR's shorter window
  bool canonical_traces = true;       // compute canonical traces for trace counting
  std::size_t max_candidates = 100000;
};

/// The window analysed for a snapshot: frames [start, start+T) and the MISR pinned.
struct AnalysisWindow {
  std::uint64_t start = 0;
  std::uint64_t frames = 0;  // T
  int misr = 1;
  bool short_window = false;
  std::uint64_t other_frames = 0;  // the other MISR's window (used by the short-window recheck)
  int other_misr = 2;
};

/// Window for a snapshot; throws if no signature block was scanned.
AnalysisWindow select_window(const SignaturePlan& plan, const ScanSnapshot& snapshot);

struct BlockCheck {
  int block = -1;
  bool consistent = true;
  std::optional<bool> short_recheck_unsat;  // set when the short-window recheck ran
  std::uint64_t short_frames = 0;
  double ms = 0;
};

struct BlockLocalization {
  AnalysisWindow window;
  std::vector<BlockCheck> checks;
  std::vector<int> buggy;  // blocks whose signatures cannot be explained without an error
};

/// Build the BMC problem for `blocks` over the snapshot window.
BmcProblem make_problem(const ElaboratedDesign& design, const Partition& partition, const AnalysisWindow& window,
                        std::vector<int> blocks, const LocalizeOptions& options);

/// Stage 1: check every block's signatures for error-free consistency.
BlockLocalization localize_block(const ElaboratedDesign& design, const Partition& partition, const SignaturePlan& plan,
                                 const ScanSnapshot& snapshot, const ExternalTrace& external,
                                 const LocalizeOptions& options = {});

struct Candidate {
  int ff = -1;
  std::uint64_t cycle = 0;
  BlockTrace trace;
};

struct CandidateSet {
  int block = -1;
  CandidateMode mode = CandidateMode::PerFF;
  std::vector<Candidate> entries;
  bool model_mismatch = false;
  bool truncated = false;
  std::uint64_t models = 0;
  std::uint64_t max_injections_per_model = 0;
  std::uint64_t solve_calls = 0;

  std::vector<int> distinct_ffs() const;
  bool contains(int ff, std::optional<std::uint64_t> cycle = std::nullopt) const;
};

/// Stage 2: iterate the instrumented BMC, blocking each found candidate, until UNSAT.
CandidateSet enumerate_candidates(const ElaboratedDesign& design, const Partition& partition,
                                  const SignaturePlan& plan, const ScanSnapshot& snapshot,
                                  const ExternalTrace& external, int block, const LocalizeOptions& options = {});

/// Same-domain blocks reachable from `block` through signatured interfaces within
/// `depth` hops (-1: unlimited), ascending ids, `block` first.
std::vector<int> ncc_region(const Partition& partition, const SignaturePlan& plan, int block, int depth);

struct NccResult {
  CandidateSet survivors;
  std::vector<bool> kept;              // per input entry
  std::vector<BlockTrace> traces;      // canonical trace per survivor (region-constrained)
  std::uint64_t undecided = 0;         // candidates kept because the backtrack limit was hit
  std::uint64_t max_injections_per_model = 0;
  std::vector<int> region;
};

/// Stage 3: neighbour consistency checking.
NccResult ncc_filter(const ElaboratedDesign& design, const Partition& partition, const SignaturePlan& plan,
                     const ScanSnapshot& snapshot, const ExternalTrace& external, const CandidateSet& candidates,
                     const LocalizeOptions& options = {});

/// Canonical block-only traces of each candidate (used for the before-NCC trace count).
std::vector<BlockTrace> candidate_traces(const ElaboratedDesign& design, const Partition& partition,
                                         const SignaturePlan& plan, const ScanSnapshot& snapshot,
                                         const ExternalTrace& external, const CandidateSet& candidates,
                                         const LocalizeOptions& options = {});

/// Number of pairwise-distinct traces.
std::size_t distinct_traces(const std::vector<BlockTrace>& traces);

struct StageTimes {
  double localize_ms = 0;
  double enumerate_ms = 0;
  double ncc_ms = 0;
};

struct LocalizationReport {
  std::vector<int> buggy_blocks;
  bool short_window = false;
  std::uint64_t window = 0;  // T
  std::uint64_t total_ffs = 0;
  std::uint64_t candidate_ffs_before = 0;
  std::uint64_t candidate_ffs_after = 0;
  std::uint64_t pairs_before = 0;
  std::uint64_t pairs_after = 0;
  std::uint64_t traces_before = 0;
  std::uint64_t traces_after = 0;
  std::uint64_t trace_bits = 0;
  std::optional<double> factor;  // undefined when no candidate survives
  bool model_mismatch = false;
  std::string status;            // "localized", "none inconsistent", "model mismatch"
  StageTimes times;
  std::vector<Candidate> survivors;
  std::uint64_t max_injections_per_model = 0;
  std::vector<CandidateSet> before;  // per buggy block, as enumerated
  std::vector<CandidateSet> after;   // per buggy block, after NCC (same as before when NCC is off)
};

/// Assemble report fields. `after` may equal `before` when NCC is off.
LocalizationReport compute_report(const ElaboratedDesign& design, const std::vector<CandidateSet>& before,
                                  const std::vector<CandidateSet>& after, const StageTimes& times);

/// The whole pipeline: stage 1, then stages 2 and 3 for every inconsistent block.
LocalizationReport localize(const ElaboratedDesign& design, const Partition& partition, const SignaturePlan& plan,
                            const ScanSnapshot& snapshot, const ExternalTrace& external,
                            const LocalizeOptions& options = {});

/// Flat `key=value` report plus one `candidate` line per survivor.
std::string write_report(const LocalizationReport& report, const ElaboratedDesign& design);

/// Per-frame hex of a trace's signals.
std::string write_trace(const BlockTrace& trace, const ElaboratedDesign& design);

}  // namespace eqed
