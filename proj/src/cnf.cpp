#include "eqed/cnf.hpp"

#include <unistd.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace eqed {

void CnfFormula::add_clause(std::span<const Lit> lits) {
  std::vector<Lit> c;
  c.reserve(lits.size());
  for (const Lit l : lits) {
    if (l == kTrue) return;
    if (l == kFalse) continue;
    if (l.var() > last_var_) throw std::logic_error("clause references unallocated variable");
    c.push_back(l);
  }
  if (c.empty()) trivially_unsat_ = true;
  clauses_.push_back(std::move(c));
}

Lit CnfFormula::mk_and(Lit a, Lit b) {
  if (a == kFalse || b == kFalse || a == ~b) return kFalse;
  if (a == kTrue || a == b) return b;
  if (b == kTrue) return a;
  const Lit c = define(Definition::Op::And, a, b);
  add_clause({~c, a});
  add_clause({~c, b});
  add_clause({c, ~a, ~b});
  return c;
}

Lit CnfFormula::mk_xor(Lit a, Lit b) {
  if (a == kFalse) return b;
  if (b == kFalse) return a;
  if (a == kTrue) return ~b;
  if (b == kTrue) return ~a;
  if (a == b) return kFalse;
  if (a == ~b) return kTrue;
  const Lit c = define(Definition::Op::Xor, a, b);
  add_clause({~c, a, b});
  add_clause({~c, ~a, ~b});
  add_clause({c, ~a, b});
  add_clause({c, a, ~b});
  return c;
}

Lit CnfFormula::mk_mux(Lit sel, Lit a, Lit b) {
  if (sel == kTrue) return b;
  if (sel == kFalse) return a;
  if (a == b) return a;
  if (a == kFalse) return mk_and(sel, b);
  if (b == kFalse) return mk_and(~sel, a);
  if (a == kTrue) return mk_or(~sel, b);
  if (b == kTrue) return mk_or(sel, a);
  const Lit c = define(Definition::Op::Mux, sel, a, b);
  add_clause({~sel, ~b, c});
  add_clause({~sel, b, ~c});
  add_clause({sel, ~a, c});
  add_clause({sel, a, ~c});
  return c;
}

Lit CnfFormula::define(Definition::Op op, Lit a, Lit b, Lit c) {
  const Lit out = fresh();
  defs_.back() = Definition{op, a, b, c};
  return out;
}

std::vector<bool> CnfFormula::evaluate(const std::function<bool(sat::Var)>& free_value) const {
  std::vector<bool> val(static_cast<std::size_t>(last_var_) + 1);
  val[0] = true;
  auto lit = [&](Lit l) { return val[static_cast<std::size_t>(l.var())] != l.negated(); };
  for (int v = 1; v <= last_var_; ++v) {
    const Definition& d = defs_[static_cast<std::size_t>(v - 1)];
    bool x = false;
    switch (d.op) {
      case Definition::Op::Free: x = free_value(v); break;
      case Definition::Op::And: x = lit(d.a) && lit(d.b); break;
      case Definition::Op::Xor: x = lit(d.a) != lit(d.b); break;
      case Definition::Op::Mux: x = lit(d.a) ? lit(d.c) : lit(d.b); break;
    }
    val[static_cast<std::size_t>(v)] = x;
  }
  return val;
}

bool CnfFormula::satisfied_by(const std::vector<bool>& assignment) const {
  if (assignment.size() < static_cast<std::size_t>(last_var_) + 1) return false;
  for (const auto& c : clauses_) {
    bool sat = false;
    for (const Lit l : c) {
      if (assignment[static_cast<std::size_t>(l.var())] != l.negated()) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

std::string CnfFormula::to_dimacs() const {
  std::ostringstream out;
  out << "p cnf " << last_var_ << " " << clauses_.size() << "\n";
  for (const auto& c : clauses_) {
    for (const Lit l : c) out << l.to_dimacs() << " ";
    out << "0\n";
  }
  return out.str();
}

CnfFormula parse_dimacs(std::string_view text) {
  CnfFormula cnf;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = false;
  int declared_vars = 0;
  std::vector<Lit> clause;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'c' || line[0] == '%') continue;
    std::istringstream ls(line);
    if (line[0] == 'p') {
      std::string p, fmt;
      std::size_t n_clauses = 0;
      ls >> p >> fmt >> declared_vars >> n_clauses;
      if (fmt != "cnf") throw std::runtime_error("dimacs: expected 'p cnf'");
      while (cnf.num_vars() < declared_vars) cnf.new_var();
      header = true;
      continue;
    }
    if (!header) throw std::runtime_error("dimacs: clause before header");
    int d = 0;
    while (ls >> d) {
      if (d == 0) {
        cnf.add_clause(clause);
        clause.clear();
      } else {
        if (std::abs(d) > declared_vars) throw std::runtime_error("dimacs: literal beyond declared variables");
        clause.push_back(Lit::from_dimacs(d));
      }
    }
  }
  if (!clause.empty()) cnf.add_clause(clause);
  return cnf;
}

std::optional<std::vector<bool>> parse_solver_output(std::string_view text, int num_vars) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::optional<bool> sat;
  std::vector<bool> model(static_cast<std::size_t>(num_vars) + 1, false);
  model[0] = true;
  while (std::getline(in, line)) {
    if (line.rfind("s ", 0) == 0) {
      if (line.find("UNSATISFIABLE") != std::string::npos) {
        sat = false;
      } else if (line.find("SATISFIABLE") != std::string::npos) {
        sat = true;
      }
    } else if (line.rfind("v ", 0) == 0) {
      std::istringstream ls(line.substr(2));
      int d = 0;
      while (ls >> d) {
        if (d == 0) continue;
        const auto v = static_cast<std::size_t>(std::abs(d));
        if (v < model.size()) model[v] = d > 0;
      }
    }
  }
  if (!sat) throw std::runtime_error("external solver produced no 's' status line");
  if (!*sat) return std::nullopt;
  return model;
}

namespace {

class InternalSession final : public SatSession {
 public:
  explicit InternalSession(const CnfFormula& cnf) {
    solver_.reserve_vars(cnf.num_vars() + 1);
    solver_.add_clause({CnfFormula::kTrue});
    for (const auto& c : cnf.clauses()) solver_.add_clause(c);
  }
  void add_clause(std::span<const Lit> lits) override {
    std::vector<Lit> c;
    for (const Lit l : lits) {
      if (l == CnfFormula::kTrue) return;
      if (l != CnfFormula::kFalse) c.push_back(l);
    }
    solver_.add_clause(c);
  }
  Lit new_var() override { return Lit::make(solver_.new_var()); }
  bool solve(std::span<const Lit> assumptions) override {
    ++calls_;
    return solver_.solve(assumptions) == sat::Result::Sat;
  }
  bool value(Lit l) const override { return solver_.model_value(l); }
  std::uint64_t solve_calls() const override { return calls_; }

 private:
  sat::Solver solver_;
  std::uint64_t calls_ = 0;
};

class ExternalSession final : public SatSession {
 public:
  ExternalSession(const CnfFormula& cnf, std::string command) : cnf_(cnf), command_(std::move(command)) {
    if (command_.empty()) throw std::runtime_error("external solver backend selected without a command");
  }
  void add_clause(std::span<const Lit> lits) override { cnf_.add_clause(lits); }
  Lit new_var() override { return cnf_.fresh(); }
  bool solve(std::span<const Lit> assumptions) override {
    ++calls_;
    CnfFormula f = cnf_;
    for (const Lit a : assumptions) f.add_unit(a);
    char path[] = "/tmp/eqed-XXXXXX";
    const int fd = mkstemp(path);
    if (fd < 0) throw std::runtime_error("cannot create temporary DIMACS file");
    close(fd);
    {
      std::ofstream out(path);
      out << f.to_dimacs();
    }
    const std::string cmd = command_ + " " + path + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
      std::remove(path);
      throw std::runtime_error("cannot start external solver: " + command_);
    }
    std::string output;
    std::array<char, 4096> buf{};
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) output.append(buf.data(), n);
    pclose(pipe);
    std::remove(path);
    auto model = parse_solver_output(output, f.num_vars());
    if (!model) return false;
    model_ = std::move(*model);
    if (!f.satisfied_by(model_)) throw std::runtime_error("external solver returned a model that violates the formula");
    return true;
  }
  bool value(Lit l) const override { return model_.at(static_cast<std::size_t>(l.var())) != l.negated(); }
  std::uint64_t solve_calls() const override { return calls_; }

 private:
  CnfFormula cnf_;
  std::string command_;
  std::vector<bool> model_;
  std::uint64_t calls_ = 0;
};

}  // namespace

std::unique_ptr<SatSession> open_session(const CnfFormula& cnf, const SolverConfig& config) {
  if (config.backend == SolverConfig::Backend::External) return std::make_unique<ExternalSession>(cnf, config.command);
  return std::make_unique<InternalSession>(cnf);
}

std::optional<std::vector<bool>> solve(const CnfFormula& cnf, std::span<const std::vector<Lit>> blocked,
                                       const SolverConfig& config) {
  auto session = open_session(cnf, config);
  for (const auto& c : blocked) session->add_clause(c);
  if (!session->solve()) return std::nullopt;
  std::vector<bool> model(static_cast<std::size_t>(cnf.num_vars()) + 1);
  for (int v = 0; v <= cnf.num_vars(); ++v) model[static_cast<std::size_t>(v)] = session->value(Lit::make(v));
  return model;
}

}  // namespace eqed
