#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eqed/netlist.hpp"
#include "eqed/signature.hpp"

namespace eqed {

/// Pseudo block id for primary I/O.
inline constexpr int kExternal = -1;

struct DesignBlock {
  int id = 0;
  std::string root_path;  // hierarchy node the block was cut at
  std::string clock;
  std::vector<int> gates;
  std::vector<int> ffs;
  int cost = 0;           // gates + FFs
  bool oversized = false; // cost > budget (indivisible leaf, or glue pushed it over)
};

struct Partition {
  int budget = 0;
  std::vector<DesignBlock> blocks;
  std::vector<int> gate_block;  // per gate
  std::vector<int> ff_block;    // per FF

  /// Block owning the driver of `s`, or kExternal for a primary input.
  int driver_block(const ElaboratedDesign& d, SignalId s) const;
};

/// Recursive descent over the hierarchy: a node whose subtree fits the budget
/// (and lies in one clock domain) becomes a block; otherwise its children are
/// partitioned and the node's own elements join the cheapest resulting block of
/// the same domain.
Partition partition_design(const ElaboratedDesign& design, int budget);

struct Interface {
  int id = 0;
  int source = kExternal;   // block id or kExternal
  std::vector<int> dests;   // sorted; may contain kExternal
  std::vector<SignalId> signals;
  std::string clock;
  bool extra = false;       // designer-added signature inside one block
  std::optional<MisrConfig> misr;  // set by plan_signatures for signatured interfaces

  /// Primary I/O interfaces are traced externally instead of signatured.
  bool external() const;
  bool touches(int block) const;
};

/// Group every block-boundary signal by (source block, destination set, domain).
std::vector<Interface> group_interfaces(const ElaboratedDesign& design, const Partition& partition);

/// MISR bits per interface signal, with optional per-block overrides keyed by source block.
struct BMap {
  int default_b = 8;
  std::map<int, int> per_block;
  int for_block(int block) const;
};

struct SignaturePlan {
  int budget = 0;
  std::uint64_t window = 0;  // N
  int counter_width = 0;     // C
  std::vector<Interface> interfaces;
  std::vector<std::string> warnings;

  const Interface& interface(int id) const { return interfaces.at(static_cast<std::size_t>(id)); }
  std::vector<int> signatured() const;
  /// Interfaces a block's analysis constrains: signatured ones in its domain, plus traced ones.
  std::vector<int> interfaces_of(const Partition& partition, int block) const;
  /// Sum over signature blocks of 2K + C.
  std::uint64_t signature_ffs() const;
};

/// K = max(M*b, ceil(log2 N) + 1), taps from the built-in table, C = ceil(log2 2N).
SignaturePlan plan_signatures(std::vector<Interface> interfaces, const BMap& b_map, std::uint64_t window);

/// Append a designer-chosen signature block over signals internal to `block`.
int add_extra_interface(SignaturePlan& plan, const ElaboratedDesign& design, const Partition& partition, int block,
                        const std::vector<SignalId>& signals, int b);

/// Plan file: a `plan budget=.. N=.. C=..` header, one `sig` line per signatured
/// interface and one `ext` line per traced interface.
std::string write_plan(const SignaturePlan& plan, const ElaboratedDesign& design);
SignaturePlan read_plan(std::string_view text, const ElaboratedDesign& design);

}  // namespace eqed
