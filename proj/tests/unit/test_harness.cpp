#include <gtest/gtest.h>

#include <sstream>

#include "eqed/harness.hpp"
#include "fixtures.hpp"

using namespace eqed;

namespace {

// Small two-leaf fixture with concrete FF inits; runs in well under a second.
CampaignConfig small_config() {
  return parse_campaign_config(R"(
gen.rows=1
gen.cols=2
gen.bus_width=4
gen.front_width=2
gen.side_stages=2
gen.side_width=2
gen.masked_ffs=2
gen.leaf_inputs=6
gen.gates_per_block=150
gen.hub_selects=2
gen.concrete_init=on
N=16
budget=400
seeds=6
injection=power_on
mode=pair
oracle=on
canonical_traces=off
threads=1
)");
}

}  // namespace

TEST(Generator, SingleLeafIsOneModule) {
  GeneratorParams p;
  p.rows = 1;
  p.cols = 1;
  p.hub = false;
  const auto mods = parse_netlist(generate_design(p, 1));
  ASSERT_EQ(mods.size(), 1u);
  EXPECT_EQ(mods[0].name, "top");
}

TEST(Generator, StandardGridGivesFiveBlocks) {
  const GeneratorParams p;
  const auto d = elaborate(parse_netlist(generate_design(p, 1)), "top");
  const auto part = partition_design(d, CampaignConfig{}.budget);
  EXPECT_EQ(part.blocks.size(), 5u);
  EXPECT_GE(d.gates.size() + d.ffs.size(), 2000u);
  EXPECT_LE(d.gates.size() + d.ffs.size(), 5000u);
}

TEST(Generator, DeterministicPerSeed) {
  const GeneratorParams p;
  EXPECT_EQ(generate_design(p, 7), generate_design(p, 7));
  EXPECT_NE(generate_design(p, 7), generate_design(p, 8));
}

TEST(Generator, RejectsBadParameters) {
  GeneratorParams p;
  p.rows = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Harness, ConfigRoundTripAndErrors) {
  const auto c = small_config();
  EXPECT_EQ(c.window, 16u);
  EXPECT_EQ(c.mode, CandidateMode::PerPair);
  EXPECT_EQ(c.injection, InjectionPolicy::PowerOn);
  EXPECT_TRUE(c.generator.concrete_init);
  const auto again = parse_campaign_config(write_campaign_config(c));
  EXPECT_EQ(write_campaign_config(again), write_campaign_config(c));
  EXPECT_THROW(parse_campaign_config("nonsense=1\n"), std::invalid_argument);
  EXPECT_THROW(parse_campaign_config("N=zero\n"), std::invalid_argument);
}

TEST(Harness, OracleRejectsSymbolicInit) {
  auto f = eqed::testing::make_fixture("module top\ninput a\noutput y\nff r init x d a q y\nendmodule\n", 10, 4);
  Stimulus st;
  st.seed = 1;
  st.length = 6;
  const auto run = run_test(Simulator(f.design, f.plan), st, std::nullopt);
  EXPECT_THROW(brute_force_oracle(f.design, f.partition, f.plan, st, run.snapshot, run.external, 0),
               std::invalid_argument);
  OracleOptions o;
  o.enumerate_symbolic_init = true;
  EXPECT_NO_THROW(brute_force_oracle(f.design, f.partition, f.plan, st, run.snapshot, run.external, 0, o));
}

TEST(Harness, CampaignRowsAndAreaProxy) {
  const auto c = small_config();
  const auto inst = instrument(c);
  std::ostringstream csv;
  const auto res = run_campaign(c, inst, &csv);
  ASSERT_EQ(res.rows.size(), 6u);

  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, campaign_csv_header());
  int n = 0;
  while (std::getline(lines, line)) ++n;
  EXPECT_EQ(n, 6);

  double area = 0;
  for (const int id : inst.plan.signatured()) area += 2.0 * inst.plan.interface(id).misr->width + inst.plan.counter_width;
  area /= static_cast<double>(inst.design.total_ffs());
  for (const auto& r : res.rows) {
    EXPECT_DOUBLE_EQ(r.area_proxy, area);
    if (r.status != "localized") continue;
    EXPECT_LE(r.latency, c.window);
    EXPECT_TRUE(r.contains_truth);
    EXPECT_TRUE(r.survives_truth);
    ASSERT_TRUE(r.oracle_match.has_value());
    EXPECT_TRUE(*r.oracle_match);
  }
}

TEST(Harness, TradeoffNeedsTwoValues) {
  TradeoffOptions o;
  o.b_values = {8};
  EXPECT_THROW(tradeoff_study(small_config(), o), std::invalid_argument);
  o.b_values = {8, 8};
  EXPECT_THROW(tradeoff_study(small_config(), o), std::invalid_argument);
}

TEST(Harness, TradeoffRowsPerB) {
  auto c = small_config();
  c.seeds = 3;
  c.oracle = false;
  c.ncc = false;
  TradeoffOptions o;
  o.b_values = {2, 8};
  std::ostringstream csv;
  const auto rows = tradeoff_study(c, o, &csv);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].b, 2);
  EXPECT_EQ(rows[1].b, 8);
  EXPECT_LT(rows[0].signature_ffs, rows[1].signature_ffs);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), tradeoff_csv_header());
}
