#include <gtest/gtest.h>

#include <set>

#include "eqed/harness.hpp"
#include "eqed/localize.hpp"
#include "fixtures.hpp"

using namespace eqed;
using eqed::testing::Fixture;
using eqed::testing::pipeline_fixture;

namespace {

struct Scenario {
  Fixture f = pipeline_fixture();
  Stimulus stimulus;
  SimResult run;
  int pipe_block = -1;
  InjectionSpec truth;

  explicit Scenario(const char* ff = "top.p.f2", std::uint64_t cycle = 9) {
    stimulus.seed = 3;
    stimulus.length = 40;
    truth = {*f.design.find_ff(ff), cycle};
    run = run_test(Simulator(f.design, f.plan), stimulus, truth);
    pipe_block = f.partition.ff_block[static_cast<std::size_t>(*f.design.find_ff("top.p.f1"))];
  }
  std::string path(int ff) const { return f.design.ffs[static_cast<std::size_t>(ff)].path; }
};

std::set<std::pair<std::string, std::uint64_t>> pairs_of(const Scenario& s, const CandidateSet& c) {
  std::set<std::pair<std::string, std::uint64_t>> out;
  for (const auto& e : c.entries) out.insert({s.path(e.ff), e.cycle});
  return out;
}

}  // namespace

TEST(Localize, WindowFollowsCounter) {
  const Scenario s;
  const auto w = select_window(s.f.plan, s.run.snapshot);
  EXPECT_EQ(s.run.snapshot.cycles_run, 13u);
  EXPECT_EQ(w.frames, 13u);
  EXPECT_EQ(w.start, 0u);
  EXPECT_TRUE(w.short_window);
}

TEST(Localize, OnlyTheInjectedBlockIsInconsistent) {
  const Scenario s;
  const auto bl = localize_block(s.f.design, s.f.partition, s.f.plan, s.run.snapshot, s.run.external);
  EXPECT_EQ(bl.buggy, std::vector<int>{s.pipe_block});
  for (const auto& c : bl.checks) EXPECT_EQ(c.consistent, c.block != s.pipe_block);
}

TEST(Localize, GoldenRunHasNoBuggyBlock) {
  Scenario s;
  s.run = run_test(Simulator(s.f.design, s.f.plan), s.stimulus, std::nullopt);
  const auto rep = localize(s.f.design, s.f.partition, s.f.plan, s.run.snapshot, s.run.external);
  EXPECT_TRUE(rep.buggy_blocks.empty());
  EXPECT_EQ(rep.status, "none inconsistent");
}

TEST(Localize, PipelineEquivalenceClassPerPair) {
  const Scenario s;
  LocalizeOptions o;
  o.mode = CandidateMode::PerPair;
  const auto c = enumerate_candidates(s.f.design, s.f.partition, s.f.plan, s.run.snapshot, s.run.external,
                                      s.pipe_block, o);
  const std::set<std::pair<std::string, std::uint64_t>> expect = {
      {"top.p.f1", 8}, {"top.p.f2", 9}, {"top.p.f3", 10}};
  EXPECT_EQ(pairs_of(s, c), expect);
  EXPECT_EQ(c.models, 3u);
  EXPECT_EQ(c.max_injections_per_model, 1u);
  EXPECT_FALSE(c.model_mismatch);

  // The same set from exhaustive injection simulation.
  const auto oracle = brute_force_oracle(s.f.design, s.f.partition, s.f.plan, s.stimulus, s.run.snapshot,
                                         s.run.external, s.pipe_block);
  std::set<std::pair<std::string, std::uint64_t>> got;
  for (const auto& p : oracle) got.insert({s.path(p.ff), p.cycle});
  EXPECT_EQ(got, expect);
}

TEST(Localize, PipelineEquivalenceClassPerFF) {
  const Scenario s;
  const auto c = enumerate_candidates(s.f.design, s.f.partition, s.f.plan, s.run.snapshot, s.run.external,
                                      s.pipe_block);
  std::set<std::string> ffs;
  for (int ff : c.distinct_ffs()) ffs.insert(s.path(ff));
  EXPECT_EQ(ffs, (std::set<std::string>{"top.p.f1", "top.p.f2", "top.p.f3"}));
  EXPECT_TRUE(c.contains(s.truth.ff));
}

TEST(Localize, NccDepthZeroKeepsEverything) {
  const Scenario s;
  LocalizeOptions o;
  o.mode = CandidateMode::PerPair;
  o.ncc_depth = 0;
  const auto c = enumerate_candidates(s.f.design, s.f.partition, s.f.plan, s.run.snapshot, s.run.external,
                                      s.pipe_block, o);
  EXPECT_EQ(ncc_region(s.f.partition, s.f.plan, s.pipe_block, 0), std::vector<int>{s.pipe_block});
  const auto r = ncc_filter(s.f.design, s.f.partition, s.f.plan, s.run.snapshot, s.run.external, c, o);
  EXPECT_EQ(r.survivors.entries.size(), c.entries.size());
  EXPECT_TRUE(std::all_of(r.kept.begin(), r.kept.end(), [](bool k) { return k; }));
}

TEST(Localize, NccStrategiesAgreeAndKeepTruth) {
  const Scenario s;
  LocalizeOptions o;
  o.mode = CandidateMode::PerPair;
  const auto c = enumerate_candidates(s.f.design, s.f.partition, s.f.plan, s.run.snapshot, s.run.external,
                                      s.pipe_block, o);
  const auto joint = ncc_filter(s.f.design, s.f.partition, s.f.plan, s.run.snapshot, s.run.external, c, o);
  o.ncc_strategy = NccStrategy::Backtracking;
  const auto back = ncc_filter(s.f.design, s.f.partition, s.f.plan, s.run.snapshot, s.run.external, c, o);
  EXPECT_EQ(joint.kept, back.kept);
  EXPECT_EQ(back.undecided, 0u);
  EXPECT_TRUE(joint.survivors.contains(s.truth.ff, s.truth.cycle));
  EXPECT_LE(joint.max_injections_per_model, 1u);  // NCC hard-wires the candidate's flip
}

TEST(Localize, ReportArithmetic) {
  const Scenario s;
  const auto rep = localize(s.f.design, s.f.partition, s.f.plan, s.run.snapshot, s.run.external);
  EXPECT_EQ(rep.status, "localized");
  EXPECT_EQ(rep.total_ffs, s.f.design.total_ffs());
  ASSERT_GT(rep.candidate_ffs_after, 0u);
  ASSERT_TRUE(rep.factor.has_value());
  EXPECT_DOUBLE_EQ(*rep.factor, static_cast<double>(rep.total_ffs) / static_cast<double>(rep.candidate_ffs_after));
  EXPECT_LE(rep.candidate_ffs_after, rep.candidate_ffs_before);
  // All three candidates drive the same boundary trace.
  EXPECT_EQ(rep.traces_after, 1u);
  EXPECT_EQ(rep.trace_bits, boundary_signals(s.f.plan, s.f.partition, s.pipe_block).size() * rep.window);

  CandidateSet empty;
  const auto none = compute_report(s.f.design, {empty}, {empty}, {});
  EXPECT_FALSE(none.factor.has_value());
}

TEST(Localize, ReportAndTraceFilesNameSignals) {
  const Scenario s;
  const auto rep = localize(s.f.design, s.f.partition, s.f.plan, s.run.snapshot, s.run.external);
  const auto text = write_report(rep, s.f.design);
  EXPECT_NE(text.find("top.p.f2"), std::string::npos);
  ASSERT_FALSE(rep.survivors.empty());
  const auto trace = write_trace(rep.survivors[0].trace, s.f.design);
  EXPECT_NE(trace.find("top.w"), std::string::npos);
}

TEST(Localize, ExternalSolverGivesSameCandidates) {
  const Scenario s;
  LocalizeOptions a, b;
  a.mode = b.mode = CandidateMode::PerPair;
  b.solver.backend = SolverConfig::Backend::External;
  b.solver.command = EQED_DPLL_SOLVER;
  const auto ca = enumerate_candidates(s.f.design, s.f.partition, s.f.plan, s.run.snapshot, s.run.external,
                                       s.pipe_block, a);
  const auto cb = enumerate_candidates(s.f.design, s.f.partition, s.f.plan, s.run.snapshot, s.run.external,
                                       s.pipe_block, b);
  EXPECT_EQ(pairs_of(s, ca), pairs_of(s, cb));
}
