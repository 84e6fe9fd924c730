#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace eqed {

/// Shape of a synthetic design: a grid of pipelined leaf blocks feeding a hub.
///
/// Every leaf has a front register stage fed by its primary inputs, a main
/// stage that drives a bus into the hub, a narrow side pipeline (plus toggle
/// registers) whose 1-bit result goes to the hub and to the next leaf, and a
/// masked register region that only sees the neighbour's side signal, so errors
/// there never reach an output. The hub registers all leaf outputs, swaps bit
/// pairs under primary select inputs and mixes them through an invertible
/// network onto the first half of the primary outputs. The second half is an
/// invertible same-cycle view of the hub inputs.
struct GeneratorParams {
  int rows = 2;
  int cols = 2;
  bool hub = true;
  int leaf_inputs = 12;   // primary inputs per leaf
  int front_width = 4;    // first register stage
  int bus_width = 8;      // main stage width = leaf-to-hub bus width
  int side_stages = 3;    // depth of the 1-bit side pipeline (0 disables it)
  int side_width = 3;     // registers per side stage
  int side_toggles = 1;   // self-toggling registers XORed into the side output
  int masked_ffs = 4;     // masked register region per leaf
  int gates_per_block = 600;  // approximate combinational gates per leaf
  int hub_selects = 8;        // primary select inputs of the hub crossbar
  bool memory = false;        // register-file subcircuit inside the hub
  int memory_words = 4;
  int memory_width = 4;
  bool second_clock = false;  // last leaf runs in clock domain "clk2"
  bool concrete_init = false; // FFs get 0/1 inits instead of symbolic
  // Relative weights of the gate kinds in random logic.
  int w_and = 3, w_or = 3, w_xor = 3, w_mux = 2, w_nand = 1, w_nor = 1, w_not = 1;

  void validate() const;
};

/// Deterministic per seed. Throws std::invalid_argument for shapes that would
/// leave outputs unconnected.
std::string generate_design(const GeneratorParams& params, std::uint64_t seed);

/// Names of the hub's memory read-data signals (flat, path-qualified), for extra
/// signature blocks. Empty when the memory is disabled.
std::vector<std::string> memory_read_signals(const GeneratorParams& params);

}  // namespace eqed
