#include <gtest/gtest.h>

#include "eqed/cnf.hpp"
#include "eqed/rng.hpp"
#include "eqed/sat.hpp"

using namespace eqed;
using sat::Lit;

namespace {

// Pigeonhole: 4 pigeons, 3 holes; variable 1 + 3*i + j means pigeon i in hole j.
CnfFormula php43() {
  CnfFormula f;
  for (int i = 0; i < 12; ++i) f.new_var();
  auto p = [](int i, int j) { return Lit::make(1 + 3 * i + j); };
  for (int i = 0; i < 4; ++i) f.add_clause({p(i, 0), p(i, 1), p(i, 2)});
  for (int j = 0; j < 3; ++j)
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) f.add_clause({~p(a, j), ~p(b, j)});
  return f;
}

bool brute_force_sat(const CnfFormula& f) {
  const int n = f.num_vars();
  for (std::uint64_t m = 0; m < (1ULL << n); ++m) {
    std::vector<bool> a(static_cast<std::size_t>(n) + 1, false);
    for (int v = 1; v <= n; ++v) a[static_cast<std::size_t>(v)] = (m >> (v - 1)) & 1U;
    if (f.satisfied_by(a)) return true;
  }
  return false;
}

CnfFormula random_3sat(Xorshift64Star& rng, int vars, int clauses) {
  CnfFormula f;
  for (int i = 0; i < vars; ++i) f.new_var();
  for (int c = 0; c < clauses; ++c) {
    std::vector<Lit> cl;
    for (int k = 0; k < 3; ++k)
      cl.push_back(Lit::make(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(vars))), rng.next_bit()));
    f.add_clause(std::span<const Lit>(cl));
  }
  return f;
}

SolverConfig external() {
  SolverConfig c;
  c.backend = SolverConfig::Backend::External;
  c.command = EQED_DPLL_SOLVER;
  return c;
}

}  // namespace

TEST(Sat, EmptyFormulaIsSat) {
  CnfFormula f;
  const auto m = solve(f);
  ASSERT_TRUE(m.has_value());
}

TEST(Sat, ContradictionIsUnsat) {
  CnfFormula f;
  const Lit x = f.fresh();
  f.add_unit(x);
  f.add_unit(~x);
  EXPECT_FALSE(solve(f).has_value());
  EXPECT_FALSE(solve(f, {}, external()).has_value());
}

TEST(Sat, PigeonholeIsUnsat) {
  const auto f = php43();
  ASSERT_FALSE(brute_force_sat(f));  // independent check over all 2^12 assignments
  EXPECT_FALSE(solve(f).has_value());
  EXPECT_FALSE(solve(f, {}, external()).has_value());
}

TEST(Sat, AgreesWithBruteForceOnRandom3Sat) {
  Xorshift64Star rng(21);
  int sat_count = 0;
  for (int t = 0; t < 200; ++t) {
    const auto f = random_3sat(rng, 10, 43);  // near the phase transition
    const bool expect = brute_force_sat(f);
    const auto m = solve(f);
    ASSERT_EQ(m.has_value(), expect) << t;
    if (m) {
      EXPECT_TRUE(f.satisfied_by(*m));
      ++sat_count;
    }
  }
  EXPECT_GT(sat_count, 20);
  EXPECT_LT(sat_count, 180);
}

TEST(Sat, ExternalRoundTripMatchesInternal) {
  Xorshift64Star rng(5);
  for (int t = 0; t < 30; ++t) {
    const auto f = random_3sat(rng, 12, 50);
    const auto a = solve(f);
    const auto b = solve(f, {}, external());
    ASSERT_EQ(a.has_value(), b.has_value()) << t;
    if (b) EXPECT_TRUE(f.satisfied_by(*b));
  }
}

TEST(Sat, BlockingClausesAndAssumptions) {
  CnfFormula f;
  const Lit x = f.fresh(), y = f.fresh();
  f.add_clause({x, y});
  std::vector<std::vector<Lit>> blocked = {{~x}, {~y}};
  EXPECT_FALSE(solve(f, blocked).has_value());

  auto s = open_session(f);
  EXPECT_TRUE(s->solve(std::vector<Lit>{~x}));
  EXPECT_TRUE(s->value(y));
  s->add_clause({~y});
  EXPECT_FALSE(s->solve(std::vector<Lit>{~x}));
  EXPECT_TRUE(s->solve());
  EXPECT_TRUE(s->value(x));
}

TEST(Sat, IncrementalSolverReportsFailedAssumptions) {
  sat::Solver s;
  const auto a = s.new_var(), b = s.new_var();
  s.add_clause({Lit::make(a, true), Lit::make(b, true)});
  const Lit as[] = {Lit::make(a), Lit::make(b)};
  EXPECT_EQ(s.solve(as), sat::Result::Unsat);
  EXPECT_FALSE(s.failed_assumptions().empty());
  EXPECT_EQ(s.solve(), sat::Result::Sat);
}

TEST(Cnf, TseitinGatesAreExact) {
  for (int op = 0; op < 3; ++op) {
    for (int m = 0; m < 8; ++m) {
      CnfFormula f;
      const Lit a = f.fresh(), b = f.fresh(), c = f.fresh();
      const Lit o = op == 0 ? f.mk_and(a, b) : op == 1 ? f.mk_xor(a, b) : f.mk_mux(a, b, c);
      const bool va = m & 1, vb = m & 2, vc = m & 4;
      f.add_unit(a ^ !va);
      f.add_unit(b ^ !vb);
      f.add_unit(c ^ !vc);
      const auto model = solve(f);
      ASSERT_TRUE(model);
      const bool out = (*model)[static_cast<std::size_t>(o.var())] != o.negated();
      const bool expect = op == 0 ? (va && vb) : op == 1 ? (va != vb) : (va ? vc : vb);
      EXPECT_EQ(out, expect);
    }
  }
}

TEST(Cnf, ConstantsFold) {
  CnfFormula f;
  const Lit a = f.fresh();
  EXPECT_EQ(f.mk_and(a, CnfFormula::kFalse), CnfFormula::kFalse);
  EXPECT_EQ(f.mk_and(a, CnfFormula::kTrue), a);
  EXPECT_EQ(f.mk_xor(a, CnfFormula::kTrue), ~a);
  f.add_clause({CnfFormula::kFalse});
  EXPECT_TRUE(f.trivially_unsat());
}

TEST(Cnf, DimacsRoundTrip) {
  const auto f = php43();
  const auto g = parse_dimacs(f.to_dimacs());
  EXPECT_EQ(g.num_vars(), f.num_vars());
  EXPECT_EQ(g.clauses(), f.clauses());
  const auto m = parse_solver_output("s SATISFIABLE\nv 1 -2\nv 3 0\n", 3);
  ASSERT_TRUE(m);
  EXPECT_TRUE((*m)[1]);
  EXPECT_FALSE((*m)[2]);
  EXPECT_TRUE((*m)[3]);
  EXPECT_FALSE(parse_solver_output("s UNSATISFIABLE\n", 3).has_value());
}

TEST(Cnf, EvaluateCompletesBuilderOutputs) {
  CnfFormula f;
  const Lit a = f.fresh(), b = f.fresh();
  const Lit o = f.mk_xor(f.mk_and(a, b), a);
  const auto full = f.evaluate([&](sat::Var v) { return v == a.var(); });
  EXPECT_TRUE(f.satisfied_by(full));
  EXPECT_EQ(full[static_cast<std::size_t>(o.var())] != o.negated(), true);
}
