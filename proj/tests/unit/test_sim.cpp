#include <gtest/gtest.h>

#include "eqed/sim.hpp"
#include "eqed/signature.hpp"
#include "fixtures.hpp"

using namespace eqed;
using eqed::testing::pipeline_fixture;

namespace {

Stimulus random_stimulus(std::uint64_t seed, std::uint64_t length) {
  Stimulus s;
  s.seed = seed;
  s.length = length;
  return s;
}

}  // namespace

TEST(Sim, OneFlipFlopOscillates) {
  const auto d = elaborate(parse_netlist("module top\noutput y\ngate n = NOT(y)\nff r init 0 d n q y\nendmodule\n"), "top");
  const auto part = partition_design(d, 100);
  auto plan = plan_signatures(group_interfaces(d, part), BMap{}, 4);
  const auto r = simulate(d, plan, random_stimulus(1, 4));
  ASSERT_EQ(r.monitor_trace.size(), 4u);
  EXPECT_EQ(r.monitor_trace[0].get(0), false);
  EXPECT_EQ(r.monitor_trace[1].get(0), true);
  EXPECT_EQ(r.monitor_trace[2].get(0), false);
  EXPECT_EQ(r.monitor_trace[3].get(0), true);
}

TEST(Sim, ZeroCyclesIsEmpty) {
  const auto f = pipeline_fixture();
  const auto r = simulate(f.design, f.plan, random_stimulus(1, 0));
  EXPECT_EQ(r.cycles_run, 0u);
  EXPECT_TRUE(r.monitor_trace.empty());
  EXPECT_TRUE(r.external.frames.empty());
  EXPECT_FALSE(r.detection_cycle.has_value());
}

TEST(Sim, SignaturesMatchIndependentReplay) {
  const auto f = pipeline_fixture(8);
  SimOptions o;
  o.record_values = true;
  const auto r = simulate(f.design, f.plan, random_stimulus(3, 37), o);
  for (const int id : f.plan.signatured()) {
    const auto& itf = f.plan.interface(id);
    auto st = SignatureBlockState::power_on(*itf.misr, f.plan.window);
    for (std::uint64_t t = 0; t < r.cycles_run; ++t) {
      BitVector in(itf.signals.size());
      for (std::size_t j = 0; j < itf.signals.size(); ++j)
        in.set(j, r.value_trace[t].get(static_cast<std::size_t>(itf.signals[j])));
      st.step(in);
    }
    const auto* scan = r.snapshot.find(id);
    ASSERT_NE(scan, nullptr);
    EXPECT_EQ(scan->counter, st.counter);
    EXPECT_EQ(scan->misr1, st.misr1);
    EXPECT_EQ(scan->misr2, st.misr2);
  }
}

TEST(Sim, MaskedInjectionVanishes) {
  const auto f = pipeline_fixture();
  const Simulator sim(f.design, f.plan);
  const int m = *f.design.find_ff("top.k.m");
  const auto golden = sim.run(random_stimulus(5, 40));
  const auto bad = sim.run(random_stimulus(5, 40), {}, InjectionSpec{m, 10});
  EXPECT_EQ(golden.monitor_trace, bad.monitor_trace);
  EXPECT_EQ(golden.external.frames, bad.external.frames);
  EXPECT_FALSE(detect(golden, bad, golden.monitors).has_value());
}

TEST(Sim, DetectionLatencyFollowsPipelineDepth) {
  const auto f = pipeline_fixture();
  const Simulator sim(f.design, f.plan);
  // f1 sits k = 3 stages (f2, f3, sink) before the monitored output.
  const struct {
    const char* ff;
    std::uint64_t k;
  } cases[] = {{"top.p.f1", 3}, {"top.p.f2", 2}, {"top.p.f3", 1}, {"top.k.s", 0}};
  for (const auto& c : cases) {
    const InjectionSpec inj{*f.design.find_ff(c.ff), 9};
    const auto r = run_test(sim, random_stimulus(2, 48), inj);
    ASSERT_TRUE(r.detection_cycle.has_value()) << c.ff;
    EXPECT_EQ(*r.detection_cycle, inj.cycle + c.k + 1) << c.ff;
    EXPECT_EQ(r.cycles_run, *r.detection_cycle + 1);  // halted at detection
  }
}

TEST(Sim, InjectionBoundsChecked) {
  const auto f = pipeline_fixture();
  const Simulator sim(f.design, f.plan);
  EXPECT_THROW(sim.run(random_stimulus(1, 10), {}, InjectionSpec{0, 10}), std::invalid_argument);
  EXPECT_THROW(sim.run(random_stimulus(1, 10), {}, InjectionSpec{99, 1}), std::invalid_argument);
}

TEST(Sim, StimulusIsSeedDeterministic) {
  const auto a = stimulus_vectors(random_stimulus(9, 20), 5);
  const auto b = stimulus_vectors(random_stimulus(9, 20), 5);
  const auto c = stimulus_vectors(random_stimulus(10, 20), 5);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Sim, ScanRoundTrip) {
  const auto f = pipeline_fixture();
  const Simulator sim(f.design, f.plan);
  const auto r = run_test(sim, random_stimulus(4, 48), InjectionSpec{*f.design.find_ff("top.p.f2"), 20});
  const auto text = write_scan(r.snapshot, r.external, f.design, f.plan);
  const auto [snap, ext] = read_scan(text, f.design, f.plan);
  EXPECT_EQ(snap.cycles_run, r.snapshot.cycles_run);
  EXPECT_EQ(snap.detection_cycle, r.snapshot.detection_cycle);
  ASSERT_EQ(snap.scans.size(), r.snapshot.scans.size());
  for (std::size_t i = 0; i < snap.scans.size(); ++i) {
    EXPECT_EQ(snap.scans[i].misr1, r.snapshot.scans[i].misr1);
    EXPECT_EQ(snap.scans[i].misr2, r.snapshot.scans[i].misr2);
  }
  EXPECT_EQ(ext.signals, r.external.signals);
  EXPECT_EQ(ext.first_cycle, r.external.first_cycle);
  EXPECT_EQ(ext.frames, r.external.frames);
  EXPECT_EQ(write_scan(snap, ext, f.design, f.plan), text);
}
