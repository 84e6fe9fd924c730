#include <gtest/gtest.h>

#include "eqed/netlist.hpp"

using namespace eqed;

namespace {

const char* kTwoLevel = R"(
module cell
input a
input b
output y
gate n = AND(a,b)
ff r init 0 d n q y
endmodule

module top
input x0
input x1
output o0
output o1
inst cell AS u1 bind (a=x0, b=x1, y=o0)
inst cell AS u2 bind (a=o0, b=x1, y=o1)
endmodule
)";

int line_of(const std::string& text) {
  try {
    parse_netlist(text);
  } catch (const NetlistError& e) {
    return e.line();
  }
  return -1;
}

std::string message_of(const std::string& text, const char* top = nullptr) {
  try {
    auto mods = parse_netlist(text);
    if (top) elaborate(mods, top);
  } catch (const NetlistError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Netlist, MinimalModule) {
  const auto mods = parse_netlist("module m\ninput a\ninput b\noutput y\ngate y = AND(a,b)\nendmodule\n");
  ASSERT_EQ(mods.size(), 1u);
  EXPECT_EQ(mods[0].gates.size(), 1u);
  EXPECT_EQ(mods[0].flipflops.size(), 0u);
  EXPECT_EQ(mods[0].ports.size(), 3u);
}

TEST(Netlist, UndrivenSignalIsReported) {
  const std::string text = "module m\ninput a\noutput y\ngate y = AND(a,w)\nendmodule\n";
  EXPECT_NE(message_of(text).find("no driver: w"), std::string::npos);
  EXPECT_EQ(line_of(text), 4);
}

TEST(Netlist, ParseErrorsCarryLineNumbers) {
  EXPECT_EQ(line_of("module m\ninput a\noutput y\ngate y = FOO(a,a)\nendmodule\n"), 4);
  EXPECT_EQ(line_of("module m\ninput a\noutput y\ngate y = AND(a)\nendmodule\n"), 4);
  EXPECT_EQ(line_of("module m\ninput a\noutput y\ngate y = NOT(a)\ngate y = NOT(a)\nendmodule\n"), 5);
  EXPECT_EQ(line_of("module m\ninput a\noutput y\ninst nope AS u bind (a=a)\ngate y = NOT(a)\nendmodule\n"), 4);
  EXPECT_NE(message_of("module m\ninput a\noutput y\nff r init 2 d a q y\nendmodule\n").find("init"), std::string::npos);
}

TEST(Netlist, TwoLevelHierarchy) {
  const auto mods = parse_netlist(kTwoLevel);
  ASSERT_EQ(mods.size(), 2u);
  const auto& top = mods[0].name == "top" ? mods[0] : mods[1];
  EXPECT_EQ(top.instances.size(), 2u);

  const auto d = elaborate(mods, "top");
  EXPECT_EQ(d.total_ffs(), 2u);
  EXPECT_EQ(d.gates.size(), 2u);
  EXPECT_TRUE(d.find_ff("top.u1.r").has_value());
  EXPECT_TRUE(d.find_ff("top.u2.r").has_value());
  EXPECT_TRUE(d.find_signal("top.x0").has_value());
  ASSERT_EQ(d.nodes.size(), 3u);
  EXPECT_EQ(d.nodes[0].children.size(), 2u);
  // The second cell reads the first cell's output through the binding.
  const auto o0 = *d.find_signal("top.o0");
  const int ff1 = *d.find_ff("top.u1.r");
  EXPECT_EQ(d.ffs[static_cast<std::size_t>(ff1)].q, o0);
  EXPECT_EQ(d.subtree_cost(0), 4);
}

TEST(Netlist, PrintParseRoundTrip) {
  const auto mods = parse_netlist(kTwoLevel);
  const auto again = parse_netlist(print_netlist(mods));
  EXPECT_EQ(mods, again);
}

TEST(Netlist, FlatModuleElaboratesToOneNode) {
  const auto d = elaborate(parse_netlist("module top\ninput a\noutput y\nff f1 init 0 d a q b\nff f2 init 1 d b q c\n"
                                         "ff f3 init x d c q y\nendmodule\n"),
                           "top");
  EXPECT_EQ(d.total_ffs(), 3u);
  EXPECT_EQ(d.nodes.size(), 1u);
  EXPECT_EQ(d.ffs[2].init, InitValue::Symbolic);
}

TEST(Netlist, CombinationalCycleRejected) {
  const std::string text = "module top\ninput a\noutput y\ngate p = AND(a,q)\ngate q = NOT(p)\ngate y = NOT(q)\nendmodule\n";
  const std::string msg = message_of(text, "top");
  EXPECT_NE(msg.find("combinational cycle"), std::string::npos);
  EXPECT_NE(msg.find("top.p"), std::string::npos);
}

TEST(Netlist, RecursiveInstantiationRejected) {
  const std::string text = "module a\ninput i\noutput o\ninst b AS x bind (i=i, o=o)\nendmodule\n"
                           "module b\ninput i\noutput o\ninst a AS y bind (i=i, o=o)\nendmodule\n";
  EXPECT_NE(message_of(text, "a").find("recursive instantiation"), std::string::npos);
}

TEST(Netlist, TopologicalOrderRespectsDependencies) {
  const auto d = elaborate(parse_netlist("module top\ninput a\noutput y\ngate y = NOT(p)\ngate p = AND(a,q)\n"
                                         "gate q = NOT(a)\nendmodule\n"),
                           "top");
  const auto& order = d.gate_order();
  std::vector<int> pos(d.gates.size());
  for (std::size_t i = 0; i < order.size(); ++i) pos[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
  for (std::size_t g = 0; g < d.gates.size(); ++g)
    for (SignalId in : d.gates[g].inputs)
      if (d.drivers[static_cast<std::size_t>(in)].kind == Driver::Kind::Gate)
        EXPECT_LT(pos[static_cast<std::size_t>(d.drivers[static_cast<std::size_t>(in)].index)], pos[g]);
}

TEST(Netlist, GateSemantics) {
  bool in[3];
  in[0] = false, in[1] = true, in[2] = false;
  EXPECT_TRUE(eval_gate(GateOp::Mux, in));  // select 0 picks a
  in[0] = true;
  EXPECT_FALSE(eval_gate(GateOp::Mux, in));  // select 1 picks b
  EXPECT_EQ(gate_arity(GateOp::Mux), 3);
  EXPECT_EQ(gate_arity(GateOp::Const1), 0);
}
