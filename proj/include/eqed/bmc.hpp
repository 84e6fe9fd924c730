#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "eqed/bitvec.hpp"
#include "eqed/cnf.hpp"
#include "eqed/netlist.hpp"
#include "eqed/partition.hpp"
#include "eqed/sim.hpp"

namespace eqed {

/// How frame-0 flip-flop values are treated.
enum class InitMode {
  Free,      // every FF starts unconstrained (the window begins mid-run)
  Declared,  // FFs with a 0/1 init start there; symbolic ones stay free
};

/// Error-injection instrumentation of the unrolled block.
enum class Instrumentation {
  None,
  Decoder,  // per-frame select index P_t, decoded by clauses, at most one nonzero frame
  Gates,    // decoder and one-shot latch built from gates, mirroring the hardware drawing
};

struct BmcProblem {
  std::vector<int> blocks;        // region to unroll; blocks[0] is the block under analysis
  std::uint64_t frames = 0;       // T
  std::uint64_t start_cycle = 0;  // global cycle of frame 0
  InitMode init = InitMode::Free;
  Instrumentation instrumentation = Instrumentation::None;
  std::vector<int> instrumented_ffs;    // FFs that may receive the error; empty = every FF of blocks[0]
  std::optional<InjectionSpec> forced;  // hard-wired flip (global cycle), independent of instrumentation
};

/// Time-frame expansion of a region plus its signature registers.
struct Unrolling {
  BmcProblem problem;
  CnfFormula cnf;

  std::vector<int> ffs;                               // region FFs (global ids)
  std::vector<int> gates;                             // region gates in evaluation order
  std::vector<SignalId> inputs;                       // signals read by the region but driven outside it
  std::unordered_map<SignalId, std::size_t> slot;     // signal -> column of `values`
  std::vector<SignalId> slot_signal;                  // column -> signal
  std::vector<std::vector<Lit>> values;               // [frame][column], frames 0..T-1
  std::vector<std::vector<Lit>> state;                // [frame 0..T][region FF index]

  // Instrumentation.
  std::vector<int> inj_ffs;               // instrumented FFs (global ids)
  std::vector<std::vector<Lit>> select;   // [frame][inj index]: that FF captures the inverted D at that frame
  std::vector<std::vector<Lit>> p_bits;   // [frame][bit]: error-select index, 0 = no error
  std::vector<Lit> nonzero;               // [frame]: P_t != 0

  struct MisrChain {
    int interface_id = -1;
    int misr = 1;
    std::vector<std::vector<Lit>> states;  // [frame 0..T][stage-1]
  };
  std::vector<MisrChain> chains;
  std::vector<int> constrained;  // interface ids whose constraints were added

  /// Where each free variable comes from (indexed by variable); Aux covers
  /// instrumentation and encoding helpers.
  struct VarOrigin {
    enum class Kind : std::uint8_t { Aux, Input, FfInit, MisrInit };
    Kind kind = Kind::Aux;
    int index = -1;          // signal, FF or chain index
    std::uint64_t frame = 0; // frame for inputs, stage index for MISR bits
  };
  std::vector<VarOrigin> origin;

  bool has_signal(SignalId s) const { return slot.count(s) != 0; }
  /// Literal holding signal `s` during frame `frame`. Throws for unmapped signals.
  Lit signal(SignalId s, std::uint64_t frame) const;
  std::size_t region_ff_index(int ff) const;
};

/// Interfaces constrained when analysing `blocks` together (deduplicated, ascending id).
std::vector<int> region_interfaces(const SignaturePlan& plan, const Partition& partition, const std::vector<int>& blocks);

/// Signals on the block's boundary: every non-extra interface touching it, in interface order.
std::vector<SignalId> boundary_signals(const SignaturePlan& plan, const Partition& partition, int block);

/// Unroll the region for problem.frames frames. Throws if T = 0 or the region spans clock domains.
Unrolling unroll(const ElaboratedDesign& design, const Partition& partition, const SignaturePlan& plan,
                 const BmcProblem& problem);

/// Build the MISR chains of every signatured region interface and pin the chosen
/// MISR (`misr` = 1 or 2) to its reset value at frame 0 and to the scanned value at
/// frame T; pin traced primary I/O per frame to the external trace.
void add_signature_constraints(Unrolling& u, const ElaboratedDesign& design, const Partition& partition,
                               const SignaturePlan& plan, const ScanSnapshot& snapshot, const ExternalTrace& external,
                               int misr);

/// Selected (FF, global cycle) pairs in the session's current model.
std::vector<InjectionSpec> decode_injections(const Unrolling& u, const SatSession& session);

/// Per-frame values of a block's boundary signals in a model.
struct BlockTrace {
  int block = -1;
  std::uint64_t start_cycle = 0;
  std::vector<SignalId> signals;
  std::vector<BitVector> frames;  // frames[t] bit j = signals[j] during cycle start_cycle + t
  std::optional<InjectionSpec> injection;

  std::uint64_t bit_size() const { return signals.size() * frames.size(); }
  bool same_values(const BlockTrace& o) const { return signals == o.signals && frames == o.frames; }
};

BlockTrace extract_trace(const Unrolling& u, const SatSession& session, const SignaturePlan& plan,
                         const Partition& partition, int block);

/// Lexicographically smallest boundary trace (frame-major, signal order) among all
/// models of the session, found greedily under assumptions. Returns nullopt when UNSAT.
std::optional<BlockTrace> canonical_trace(const Unrolling& u, SatSession& session, const SignaturePlan& plan,
                                          const Partition& partition, int block,
                                          std::vector<Lit> assumptions = {});

/// Complete assignment of the unrolled formula induced by a simulation of the
/// whole design (SimOptions::record_values), with no injection selected.
std::vector<bool> assignment_from_simulation(const Unrolling& u, const ElaboratedDesign& design,
                                             const SimResult& run);

/// `var <id> = <signal>@<frame>` lines for every mapped signal variable.
std::string write_varmap(const Unrolling& u, const ElaboratedDesign& design);

}  // namespace eqed
