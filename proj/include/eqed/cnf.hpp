#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eqed/sat.hpp"

namespace eqed {

using sat::Lit;

/// Clause set with a Tseitin builder. Variable 0 is the constant TRUE and is
/// folded away: it never appears in a stored clause, so DIMACS variables are 1..V.
class CnfFormula {
 public:
  static constexpr Lit kTrue = Lit::make(0, false);
  static constexpr Lit kFalse = Lit::make(0, true);
  static bool is_const(Lit l) { return l.var() == 0; }

  /// How a variable came to be: free, or the Tseitin output of a builder call.
  struct Definition {
    enum class Op : std::uint8_t { Free, And, Xor, Mux };
    Op op = Op::Free;
    Lit a, b, c;  // Mux: sel, a, b
  };

  CnfFormula() = default;

  sat::Var new_var() {
    defs_.emplace_back();
    return ++last_var_;
  }
  Lit fresh() { return Lit::make(new_var()); }
  /// Number of DIMACS variables (excluding the constant).
  int num_vars() const { return last_var_; }
  std::size_t num_clauses() const { return clauses_.size(); }
  const std::vector<std::vector<Lit>>& clauses() const { return clauses_; }

  /// Constants are folded: TRUE literals satisfy the clause, FALSE literals drop out.
  /// A clause that folds to empty marks the formula trivially unsatisfiable.
  void add_clause(std::initializer_list<Lit> lits) { add_clause(std::span<const Lit>(lits.begin(), lits.size())); }
  void add_clause(std::span<const Lit> lits);
  void add_unit(Lit l) { add_clause({l}); }
  bool trivially_unsat() const { return trivially_unsat_; }

  Lit mk_and(Lit a, Lit b);
  Lit mk_or(Lit a, Lit b) { return ~mk_and(~a, ~b); }
  Lit mk_xor(Lit a, Lit b);
  /// sel ? b : a
  Lit mk_mux(Lit sel, Lit a, Lit b);

  /// Evaluate every clause under a full assignment (index = variable; entry 0 ignored).
  bool satisfied_by(const std::vector<bool>& assignment) const;

  /// Definition of variable v (1-based; free variables report Op::Free).
  const Definition& definition(sat::Var v) const { return defs_.at(static_cast<std::size_t>(v - 1)); }

  /// Complete an assignment: free variables come from `free_value`, builder
  /// outputs are recomputed from their inputs. Entry 0 is the constant.
  std::vector<bool> evaluate(const std::function<bool(sat::Var)>& free_value) const;

  std::string to_dimacs() const;

 private:
  Lit define(Definition::Op op, Lit a, Lit b, Lit c = {});

  int last_var_ = 0;
  std::vector<Definition> defs_;
  std::vector<std::vector<Lit>> clauses_;
  bool trivially_unsat_ = false;
};

/// Parse a DIMACS CNF file.
CnfFormula parse_dimacs(std::string_view text);

/// Parse solver output in competition format ("s ..." and "v ..." lines).
/// Returns the model (index = variable) for SAT, nullopt for UNSAT.
std::optional<std::vector<bool>> parse_solver_output(std::string_view text, int num_vars);

struct SolverConfig {
  enum class Backend { Internal, External };
  Backend backend = Backend::Internal;
  std::string command;  // external: invoked as `<command> <file.cnf>`, result on stdout
};

/// Incremental satisfiability over one formula. Clauses added later persist;
/// assumptions hold for a single call.
class SatSession {
 public:
  virtual ~SatSession() = default;
  virtual void add_clause(std::span<const Lit> lits) = 0;
  /// A variable unknown to the formula (activation literals and the like).
  virtual Lit new_var() = 0;
  void add_clause(std::initializer_list<Lit> lits) { add_clause(std::span<const Lit>(lits.begin(), lits.size())); }
  virtual bool solve(std::span<const Lit> assumptions = {}) = 0;
  /// Value of a literal in the last model (constants allowed).
  virtual bool value(Lit l) const = 0;
  virtual std::uint64_t solve_calls() const = 0;
};

std::unique_ptr<SatSession> open_session(const CnfFormula& cnf, const SolverConfig& config = {});

/// One-shot decision: the formula plus `blocked` clauses. Returns the model or nullopt (UNSAT).
std::optional<std::vector<bool>> solve(const CnfFormula& cnf, std::span<const std::vector<Lit>> blocked = {},
                                       const SolverConfig& config = {});

}  // namespace eqed
