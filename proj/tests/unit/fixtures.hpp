#pragma once

#include <string>

#include "eqed/netlist.hpp"
#include "eqed/partition.hpp"

namespace eqed::testing {

/// Three-FF pipeline f1 -> f2 -> f3 in one block feeding a one-FF sink in
/// another; the pipeline output is a signatured interface and the sink output
/// is the traced primary output. A masked FF hangs off the sink's input.
inline const char* kPipeline = R"(
module pipe
input a
output p3
ff f1 init 0 d a q p1
ff f2 init 0 d p1 q p2
ff f3 init 0 d p2 q p3
endmodule

module sink
input i
output y
output z
ff s init 0 d i q y
ff m init 0 d i q mq
gate zero = CONST0()
gate z = AND(mq,zero)
endmodule

module top
input a
output y
output z
inst pipe AS p bind (a=a, p3=w)
inst sink AS k bind (i=w, y=y, z=z)
endmodule
)";

struct Fixture {
  ElaboratedDesign design;
  Partition partition;
  SignaturePlan plan;
};

inline Fixture make_fixture(const std::string& text, int budget, std::uint64_t window, int b = 8) {
  Fixture f;
  f.design = elaborate(parse_netlist(text), "top");
  f.partition = partition_design(f.design, budget);
  BMap bm;
  bm.default_b = b;
  f.plan = plan_signatures(group_interfaces(f.design, f.partition), bm, window);
  f.plan.budget = budget;
  return f;
}

inline Fixture pipeline_fixture(std::uint64_t window = 16) { return make_fixture(kPipeline, 3, window); }

}  // namespace eqed::testing
