#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace eqed {

enum class GateOp { And, Or, Not, Xor, Nand, Nor, Mux, Const0, Const1 };
enum class InitValue { Zero, One, Symbolic };
enum class PortDir { In, Out };

int gate_arity(GateOp op);
std::string_view to_string(GateOp op);
std::optional<GateOp> parse_gate_op(std::string_view name);

/// Evaluate a gate on already-computed input bits. MUX inputs are (select, a, b).
inline bool eval_gate(GateOp op, const bool* in) {
  switch (op) {
    case GateOp::And: return in[0] && in[1];
    case GateOp::Or: return in[0] || in[1];
    case GateOp::Not: return !in[0];
    case GateOp::Xor: return in[0] != in[1];
    case GateOp::Nand: return !(in[0] && in[1]);
    case GateOp::Nor: return !(in[0] || in[1]);
    case GateOp::Mux: return in[0] ? in[2] : in[1];
    case GateOp::Const0: return false;
    case GateOp::Const1: return true;
  }
  return false;
}

/// Error raised by the parser and by elaboration. `line` is 0 when not tied to a source line.
class NetlistError : public std::runtime_error {
 public:
  NetlistError(int line, const std::string& msg)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// ---------------------------------------------------------------------------
// Source-level (hierarchical) netlist

struct PortDef {
  std::string name;
  PortDir dir = PortDir::In;
  int line = 0;
  bool operator==(const PortDef& o) const { return name == o.name && dir == o.dir; }
};

struct GateDef {
  GateOp op = GateOp::And;
  std::vector<std::string> inputs;
  std::string output;
  int line = 0;
  bool operator==(const GateDef& o) const { return op == o.op && inputs == o.inputs && output == o.output; }
};

struct FlipFlopDef {
  std::string name;
  std::string d;
  std::string q;
  InitValue init = InitValue::Symbolic;
  int line = 0;
  bool operator==(const FlipFlopDef& o) const { return name == o.name && d == o.d && q == o.q && init == o.init; }
};

struct InstanceDef {
  std::string child;
  std::string name;
  std::vector<std::pair<std::string, std::string>> bindings;  // child port -> local signal
  int line = 0;
  bool operator==(const InstanceDef& o) const { return child == o.child && name == o.name && bindings == o.bindings; }
};

struct ModuleDef {
  std::string name;
  std::vector<PortDef> ports;
  std::vector<GateDef> gates;
  std::vector<FlipFlopDef> flipflops;
  std::vector<InstanceDef> instances;
  std::optional<std::string> clock;
  int line = 0;

  const PortDef* find_port(std::string_view port) const;
  bool operator==(const ModuleDef& o) const {
    return name == o.name && ports == o.ports && gates == o.gates && flipflops == o.flipflops &&
           instances == o.instances && clock == o.clock;
  }
};

/// Parse the line-based ".enl" format. Cross-references (child modules, port
/// directions, drivers) are resolved and checked before returning.
std::vector<ModuleDef> parse_netlist(std::string_view text);

/// Print modules back in the ".enl" format; parse_netlist(print_netlist(m)) == m.
std::string print_netlist(std::span<const ModuleDef> modules);

// ---------------------------------------------------------------------------
// Elaborated (flat) design

using SignalId = int;

struct Driver {
  enum class Kind { None, Input, Gate, FlipFlop };
  Kind kind = Kind::None;
  int index = -1;  // primary-input ordinal, gate index or FF index
};

struct Gate {
  GateOp op = GateOp::And;
  std::vector<SignalId> inputs;
  SignalId output = -1;
  int node = -1;  // owning hierarchy node
};

struct FlipFlop {
  std::string path;
  SignalId d = -1;
  SignalId q = -1;
  InitValue init = InitValue::Symbolic;
  std::string clock;
  int node = -1;
};

/// One instance in the retained hierarchy. `gates`/`ffs` hold the elements
/// declared directly in this instance (not in its children).
struct HierNode {
  std::string path;
  std::string module;
  std::string clock;
  int parent = -1;
  std::vector<int> children;
  std::vector<int> gates;
  std::vector<int> ffs;
};

class ElaboratedDesign {
 public:
  std::vector<std::string> signal_names;
  std::vector<Driver> drivers;
  std::vector<Gate> gates;
  std::vector<FlipFlop> ffs;
  std::vector<SignalId> inputs;   // primary inputs in port order
  std::vector<SignalId> outputs;  // primary outputs in port order
  std::vector<HierNode> nodes;    // nodes[0] is the top instance
  std::vector<std::string> clock_domains;

  // Fan-out, filled by elaborate().
  std::vector<std::vector<int>> gate_sinks;  // per signal: gates reading it
  std::vector<std::vector<int>> ff_sinks;    // per signal: FFs whose D it is
  std::vector<bool> is_output;               // per signal: primary output

  std::size_t signal_count() const { return signal_names.size(); }
  std::size_t total_ffs() const { return ffs.size(); }

  std::optional<SignalId> find_signal(std::string_view name) const;
  std::optional<int> find_ff(std::string_view path) const;

  /// Total cost (gates + FFs) of the subtree rooted at `node`.
  int subtree_cost(int node) const;

  /// Gates of the whole design in topological order (computed once by elaborate()).
  const std::vector<int>& gate_order() const { return gate_order_; }

 private:
  friend ElaboratedDesign elaborate(std::span<const ModuleDef>, std::string_view);
  std::unordered_map<std::string, SignalId> signal_index_;
  std::unordered_map<std::string, int> ff_index_;
  std::vector<int> gate_order_;
};

/// Flatten the hierarchy below `top`. Names are path-qualified ("top.u1.ff3").
/// Throws NetlistError on recursive instantiation or a combinational cycle.
ElaboratedDesign elaborate(std::span<const ModuleDef> modules, std::string_view top);

/// Order `scope` (gate indices) so every gate follows the scope gates driving
/// its inputs. Throws NetlistError if the scope contains a cycle.
std::vector<int> topo_order(const ElaboratedDesign& design, std::span<const int> scope);

}  // namespace eqed
