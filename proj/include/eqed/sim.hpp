#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eqed/bitvec.hpp"
#include "eqed/netlist.hpp"
#include "eqed/partition.hpp"
#include "eqed/signature.hpp"

namespace eqed {

/// Primary-input stimulus: explicit per-cycle vectors when given, else bits from
/// per-input PRNG streams (stream i of `seed` drives primary input i).
struct Stimulus {
  std::uint64_t seed = 0;
  std::uint64_t length = 0;
  std::vector<BitVector> vectors;
  bool randomize_symbolic_init = false;  // symbolic-init FFs start at a per-seed random value instead of 0
};

/// The FF captures the complement of its data input at the end of `cycle`.
struct InjectionSpec {
  int ff = -1;
  std::uint64_t cycle = 0;
  bool operator==(const InjectionSpec&) const = default;
};

struct SignatureScan {
  int interface_id = -1;
  std::uint64_t counter = 0;
  BitVector misr1;
  BitVector misr2;
};

struct ScanSnapshot {
  std::optional<std::uint64_t> detection_cycle;
  std::uint64_t cycles_run = 0;  // clock steps since power-on at scan time
  std::vector<SignatureScan> scans;

  const SignatureScan* find(int interface_id) const;
};

/// Primary I/O values for the most recent cycles (a 2N-deep ring at scan time).
struct ExternalTrace {
  std::vector<SignalId> signals;  // primary inputs then primary outputs
  std::uint64_t first_cycle = 0;
  std::vector<BitVector> frames;  // frames[k] holds cycle first_cycle + k

  bool covers(std::uint64_t cycle) const { return cycle >= first_cycle && cycle < first_cycle + frames.size(); }
  /// Column of `s` in `signals`, or -1.
  int column(SignalId s) const;
  bool value(SignalId s, std::uint64_t cycle) const;
};

struct SimOptions {
  std::optional<std::vector<SignalId>> monitors;  // default: primary outputs
  const std::vector<BitVector>* reference = nullptr;  // golden monitor trace for on-line detection
  bool halt_on_detect = true;
  bool record_values = false;
  std::vector<std::pair<int, bool>> init_overrides;  // (ff, value)
};

struct SimResult {
  std::uint64_t cycles_run = 0;
  std::optional<std::uint64_t> detection_cycle;
  ScanSnapshot snapshot;
  ExternalTrace external;
  std::vector<SignalId> monitors;
  std::vector<BitVector> monitor_trace;  // per cycle, one bit per monitor
  std::vector<BitVector> value_trace;    // per cycle, every signal (record_values only)
  std::vector<BitVector> ff_trace;       // per cycle, FF outputs at the start of the cycle (record_values only)
};

/// Reusable simulator for one instrumented design.
class Simulator {
 public:
  Simulator(const ElaboratedDesign& design, const SignaturePlan& plan);

  SimResult run(const Stimulus& stimulus, const SimOptions& options = {},
                std::optional<InjectionSpec> injection = std::nullopt) const;

  const ElaboratedDesign& design() const { return design_; }
  const SignaturePlan& plan() const { return plan_; }
  std::vector<bool> initial_state(const Stimulus& stimulus, const SimOptions& options) const;

 private:
  struct FlatGate {
    GateOp op;
    SignalId in[3];
    SignalId out;
  };
  struct SigSlot {
    int interface_id;
    std::vector<SignalId> signals;
    BitVector tap_mask;
    BitVector reset;
  };

  const ElaboratedDesign& design_;
  const SignaturePlan& plan_;
  std::vector<FlatGate> gates_;
  std::vector<SigSlot> slots_;
  std::uint64_t trace_depth_;
};

/// Per-cycle primary input vectors for a stimulus (explicit or PRNG-derived).
std::vector<BitVector> stimulus_vectors(const Stimulus& stimulus, std::size_t input_count);

SimResult simulate(const ElaboratedDesign& design, const SignaturePlan& plan, const Stimulus& stimulus,
                   const SimOptions& options = {});

/// Same as simulate() but the injected FF latches the complement of its D input at the injection cycle.
SimResult simulate_with_injection(const ElaboratedDesign& design, const SignaturePlan& plan, const Stimulus& stimulus,
                                  const InjectionSpec& injection, const SimOptions& options = {});

/// Earliest cycle where any of `monitors` differs between the two runs.
std::optional<std::uint64_t> detect(const SimResult& golden, const SimResult& actual,
                                    const std::vector<SignalId>& monitors);

/// Golden run followed by the injected run halting at the first monitored mismatch.
SimResult run_test(const Simulator& sim, const Stimulus& stimulus, std::optional<InjectionSpec> injection,
                   const std::optional<std::vector<SignalId>>& monitors = std::nullopt);

/// Scan file: `scan`/`detect` records plus `extio` lines for the external trace.
std::string write_scan(const ScanSnapshot& snapshot, const ExternalTrace& external, const ElaboratedDesign& design,
                       const SignaturePlan& plan);
std::pair<ScanSnapshot, ExternalTrace> read_scan(std::string_view text, const ElaboratedDesign& design,
                                                 const SignaturePlan& plan);

}  // namespace eqed
