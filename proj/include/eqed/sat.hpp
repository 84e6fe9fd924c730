#pragma once

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <vector>

namespace eqed::sat {

using Var = int;

/// Literal encoded as 2*var + sign (sign 1 = negated).
struct Lit {
  std::uint32_t x = 0;

  static constexpr Lit make(Var v, bool negated = false) { return Lit{static_cast<std::uint32_t>(v) * 2 + (negated ? 1U : 0U)}; }
  constexpr Var var() const { return static_cast<Var>(x >> 1); }
  constexpr bool negated() const { return (x & 1U) != 0; }
  constexpr Lit operator~() const { return Lit{x ^ 1U}; }
  constexpr Lit operator^(bool flip) const { return Lit{x ^ (flip ? 1U : 0U)}; }
  constexpr bool operator==(const Lit&) const = default;
  constexpr bool operator<(const Lit& o) const { return x < o.x; }
  /// Signed DIMACS form; variable 0 has no DIMACS name and must not be exported.
  constexpr int to_dimacs() const { return negated() ? -var() : var(); }
  static constexpr Lit from_dimacs(int d) { return d < 0 ? make(-d, true) : make(d, false); }
};

enum class Result { Sat, Unsat };

struct Stats {
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t restarts = 0;
  std::uint64_t solves = 0;
};

/// Conflict-driven clause-learning solver with two watched literals, VSIDS,
/// phase saving, Luby restarts and activity-based learnt-clause reduction.
/// Clauses may be added between solve() calls; assumptions are per call.
class Solver {
 public:
  Solver();
  ~Solver();
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;
  Solver(Solver&&) noexcept;
  Solver& operator=(Solver&&) noexcept;

  Var new_var();
  /// Make sure variables 0..n-1 exist.
  void reserve_vars(int n);
  int num_vars() const;
  std::size_t num_clauses() const;

  /// Returns false once the clause set is known to be unsatisfiable.
  bool add_clause(std::span<const Lit> lits);
  bool add_clause(std::initializer_list<Lit> lits) { return add_clause(std::span<const Lit>(lits.begin(), lits.size())); }

  Result solve(std::span<const Lit> assumptions = {});

  /// Model value after a Sat result.
  bool model_value(Var v) const;
  bool model_value(Lit l) const { return model_value(l.var()) != l.negated(); }
  const std::vector<bool>& model() const;

  /// After Unsat under assumptions: the subset of assumptions responsible (as given).
  const std::vector<Lit>& failed_assumptions() const;

  bool okay() const;
  const Stats& stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace eqed::sat
