#include "eqed/sat.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace eqed::sat {

namespace {

constexpr std::uint8_t kFalse = 0;
constexpr std::uint8_t kTrue = 1;
constexpr std::uint8_t kUndef = 2;
constexpr int kNoReason = -1;
constexpr std::uint32_t kUndefLit = 0xffffffffU;

double luby(double y, int x) {
  int size = 1;
  int seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  return std::pow(y, seq);
}

}  // namespace

struct Solver::Impl {
  struct Clause {
    std::vector<Lit> lits;
    double activity = 0;
    bool learnt = false;
    bool deleted = false;
  };
  struct Watcher {
    int cref;
    Lit blocker;
  };

  // Max-heap of variables by activity.
  struct Heap {
    const std::vector<double>* act = nullptr;
    std::vector<Var> heap;
    std::vector<int> index;

    bool less(Var a, Var b) const { return (*act)[static_cast<std::size_t>(a)] > (*act)[static_cast<std::size_t>(b)]; }
    bool contains(Var v) const { return static_cast<std::size_t>(v) < index.size() && index[static_cast<std::size_t>(v)] >= 0; }
    bool empty() const { return heap.empty(); }

    void up(int i) {
      Var x = heap[static_cast<std::size_t>(i)];
      while (i > 0) {
        const int parent = (i - 1) >> 1;
        if (!less(x, heap[static_cast<std::size_t>(parent)])) break;
        heap[static_cast<std::size_t>(i)] = heap[static_cast<std::size_t>(parent)];
        index[static_cast<std::size_t>(heap[static_cast<std::size_t>(i)])] = i;
        i = parent;
      }
      heap[static_cast<std::size_t>(i)] = x;
      index[static_cast<std::size_t>(x)] = i;
    }
    void down(int i) {
      Var x = heap[static_cast<std::size_t>(i)];
      const int n = static_cast<int>(heap.size());
      while (2 * i + 1 < n) {
        int child = 2 * i + 1;
        if (child + 1 < n && less(heap[static_cast<std::size_t>(child + 1)], heap[static_cast<std::size_t>(child)])) ++child;
        if (!less(heap[static_cast<std::size_t>(child)], x)) break;
        heap[static_cast<std::size_t>(i)] = heap[static_cast<std::size_t>(child)];
        index[static_cast<std::size_t>(heap[static_cast<std::size_t>(i)])] = i;
        i = child;
      }
      heap[static_cast<std::size_t>(i)] = x;
      index[static_cast<std::size_t>(x)] = i;
    }
    void insert(Var v) {
      if (static_cast<std::size_t>(v) >= index.size()) index.resize(static_cast<std::size_t>(v) + 1, -1);
      if (contains(v)) return;
      index[static_cast<std::size_t>(v)] = static_cast<int>(heap.size());
      heap.push_back(v);
      up(static_cast<int>(heap.size()) - 1);
    }
    void increased(Var v) {
      if (contains(v)) up(index[static_cast<std::size_t>(v)]);
    }
    Var pop() {
      Var top = heap[0];
      heap[0] = heap.back();
      index[static_cast<std::size_t>(heap[0])] = 0;
      index[static_cast<std::size_t>(top)] = -1;
      heap.pop_back();
      if (heap.size() > 1) down(0);
      return top;
    }
  };

  std::vector<Clause> clauses;
  std::vector<int> learnts;
  std::size_t num_original = 0;
  std::vector<std::uint8_t> assigns;
  std::vector<int> level;
  std::vector<int> reason;
  std::vector<Lit> trail;
  std::vector<int> trail_lim;
  std::size_t qhead = 0;
  std::vector<std::vector<Watcher>> watches;
  std::vector<double> activity;
  std::vector<char> phase;
  std::vector<char> seen;
  std::vector<Lit> analyze_stack;
  std::vector<Lit> analyze_clear;
  Heap order;
  double var_inc = 1.0;
  double cla_inc = 1.0;
  double max_learnts = 0;
  bool ok = true;
  std::vector<bool> model;
  std::vector<Lit> failed;
  std::vector<Lit> assumptions;
  Stats stats;

  Impl() { order.act = &activity; }

  int num_vars() const { return static_cast<int>(assigns.size()); }
  int decision_level() const { return static_cast<int>(trail_lim.size()); }

  std::uint8_t value(Lit p) const {
    const std::uint8_t a = assigns[static_cast<std::size_t>(p.var())];
    return a == kUndef ? kUndef : static_cast<std::uint8_t>(a ^ (p.negated() ? 1U : 0U));
  }

  Var new_var() {
    const Var v = num_vars();
    assigns.push_back(kUndef);
    level.push_back(0);
    reason.push_back(kNoReason);
    activity.push_back(0.0);
    phase.push_back(0);
    seen.push_back(0);
    watches.emplace_back();
    watches.emplace_back();
    order.insert(v);
    return v;
  }

  void enqueue(Lit p, int from) {
    const auto v = static_cast<std::size_t>(p.var());
    assigns[v] = p.negated() ? kFalse : kTrue;
    level[v] = decision_level();
    reason[v] = from;
    trail.push_back(p);
  }

  void attach(int cref) {
    const Clause& c = clauses[static_cast<std::size_t>(cref)];
    watches[(~c.lits[0]).x].push_back({cref, c.lits[1]});
    watches[(~c.lits[1]).x].push_back({cref, c.lits[0]});
  }

  void cancel_until(int lvl) {
    if (decision_level() <= lvl) return;
    for (std::size_t i = trail.size(); i-- > static_cast<std::size_t>(trail_lim[static_cast<std::size_t>(lvl)]);) {
      const auto v = static_cast<std::size_t>(trail[i].var());
      assigns[v] = kUndef;
      reason[v] = kNoReason;
      phase[v] = trail[i].negated() ? 0 : 1;
      order.insert(static_cast<Var>(v));
    }
    trail.resize(static_cast<std::size_t>(trail_lim[static_cast<std::size_t>(lvl)]));
    trail_lim.resize(static_cast<std::size_t>(lvl));
    qhead = trail.size();
  }

  int propagate() {
    int confl = -1;
    while (qhead < trail.size()) {
      const Lit p = trail[qhead++];
      ++stats.propagations;
      std::vector<Watcher>& ws = watches[p.x];
      const Lit false_lit = ~p;
      std::size_t i = 0;
      std::size_t j = 0;
      const std::size_t n = ws.size();
      while (i < n) {
        const Watcher w = ws[i];
        if (value(w.blocker) == kTrue) {
          ws[j++] = ws[i++];
          continue;
        }
        Clause& c = clauses[static_cast<std::size_t>(w.cref)];
        if (c.deleted) {
          ++i;
          continue;
        }
        if (c.lits[0] == false_lit) std::swap(c.lits[0], c.lits[1]);
        ++i;
        const Lit first = c.lits[0];
        const Watcher nw{w.cref, first};
        if (first != w.blocker && value(first) == kTrue) {
          ws[j++] = nw;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.lits.size(); ++k) {
          if (value(c.lits[k]) != kFalse) {
            c.lits[1] = c.lits[k];
            c.lits[k] = false_lit;
            watches[(~c.lits[1]).x].push_back(nw);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = nw;
        if (value(first) == kFalse) {
          confl = w.cref;
          qhead = trail.size();
          while (i < n) ws[j++] = ws[i++];
        } else {
          enqueue(first, w.cref);
        }
      }
      ws.resize(j);
      if (confl >= 0) break;
    }
    return confl;
  }

  void bump_var(Var v) {
    auto& a = activity[static_cast<std::size_t>(v)];
    a += var_inc;
    if (a > 1e100) {
      for (auto& x : activity) x *= 1e-100;
      var_inc *= 1e-100;
    }
    order.increased(v);
  }

  void bump_clause(Clause& c) {
    c.activity += cla_inc;
    if (c.activity > 1e20) {
      for (int l : learnts) clauses[static_cast<std::size_t>(l)].activity *= 1e-20;
      cla_inc *= 1e-20;
    }
  }

  std::uint32_t abstract_level(Var v) const { return 1U << (level[static_cast<std::size_t>(v)] & 31); }

  bool lit_redundant(Lit p, std::uint32_t levels) {
    analyze_stack.clear();
    analyze_stack.push_back(p);
    const std::size_t top = analyze_clear.size();
    while (!analyze_stack.empty()) {
      const Lit q = analyze_stack.back();
      analyze_stack.pop_back();
      const Clause& c = clauses[static_cast<std::size_t>(reason[static_cast<std::size_t>(q.var())])];
      for (std::size_t i = 1; i < c.lits.size(); ++i) {
        const Lit l = c.lits[i];
        const auto v = static_cast<std::size_t>(l.var());
        if (seen[v] || level[v] == 0) continue;
        if (reason[v] != kNoReason && (abstract_level(l.var()) & levels) != 0) {
          seen[v] = 1;
          analyze_stack.push_back(l);
          analyze_clear.push_back(l);
        } else {
          for (std::size_t k = top; k < analyze_clear.size(); ++k) seen[static_cast<std::size_t>(analyze_clear[k].var())] = 0;
          analyze_clear.resize(top);
          return false;
        }
      }
    }
    return true;
  }

  void analyze(int confl, std::vector<Lit>& out, int& bt_level) {
    int path = 0;
    Lit p{kUndefLit};
    out.clear();
    out.push_back(Lit{kUndefLit});
    std::size_t index = trail.size();
    do {
      Clause& c = clauses[static_cast<std::size_t>(confl)];
      if (c.learnt) bump_clause(c);
      for (std::size_t j = (p.x == kUndefLit ? 0 : 1); j < c.lits.size(); ++j) {
        const Lit q = c.lits[j];
        const auto v = static_cast<std::size_t>(q.var());
        if (seen[v] || level[v] == 0) continue;
        bump_var(q.var());
        seen[v] = 1;
        if (level[v] >= decision_level()) {
          ++path;
        } else {
          out.push_back(q);
        }
      }
      while (!seen[static_cast<std::size_t>(trail[--index].var())]) {
      }
      p = trail[index];
      confl = reason[static_cast<std::size_t>(p.var())];
      seen[static_cast<std::size_t>(p.var())] = 0;
      --path;
    } while (path > 0);
    out[0] = ~p;

    // Recursive minimization.
    analyze_clear.assign(out.begin(), out.end());
    std::uint32_t levels = 0;
    for (std::size_t i = 1; i < out.size(); ++i) levels |= abstract_level(out[i].var());
    std::size_t keep = 1;
    for (std::size_t i = 1; i < out.size(); ++i) {
      const auto v = static_cast<std::size_t>(out[i].var());
      if (reason[v] == kNoReason || !lit_redundant(out[i], levels)) out[keep++] = out[i];
    }
    out.resize(keep);

    bt_level = 0;
    if (out.size() > 1) {
      std::size_t max_i = 1;
      for (std::size_t i = 2; i < out.size(); ++i)
        if (level[static_cast<std::size_t>(out[i].var())] > level[static_cast<std::size_t>(out[max_i].var())]) max_i = i;
      std::swap(out[1], out[max_i]);
      bt_level = level[static_cast<std::size_t>(out[1].var())];
    }
    for (const Lit l : analyze_clear) seen[static_cast<std::size_t>(l.var())] = 0;
  }

  // Collect the assumptions implying `p` (p is the negation of a falsified assumption).
  void analyze_final(Lit p) {
    failed.clear();
    failed.push_back(~p);
    if (decision_level() == 0) return;
    seen[static_cast<std::size_t>(p.var())] = 1;
    for (std::size_t i = trail.size(); i-- > static_cast<std::size_t>(trail_lim[0]);) {
      const auto v = static_cast<std::size_t>(trail[i].var());
      if (!seen[v]) continue;
      if (reason[v] == kNoReason) {
        if (level[v] > 0) failed.push_back(trail[i]);
      } else {
        const Clause& c = clauses[static_cast<std::size_t>(reason[v])];
        for (std::size_t k = 1; k < c.lits.size(); ++k)
          if (level[static_cast<std::size_t>(c.lits[k].var())] > 0) seen[static_cast<std::size_t>(c.lits[k].var())] = 1;
      }
      seen[v] = 0;
    }
    seen[static_cast<std::size_t>(p.var())] = 0;
  }

  bool locked(const Clause& c, int cref) const {
    const Lit first = c.lits[0];
    return value(first) == kTrue && reason[static_cast<std::size_t>(first.var())] == cref;
  }

  void reduce_db() {
    std::sort(learnts.begin(), learnts.end(), [&](int a, int b) {
      const Clause& ca = clauses[static_cast<std::size_t>(a)];
      const Clause& cb = clauses[static_cast<std::size_t>(b)];
      if ((ca.lits.size() > 2) != (cb.lits.size() > 2)) return ca.lits.size() > 2;
      return ca.activity < cb.activity;
    });
    const double extra = cla_inc / static_cast<double>(std::max<std::size_t>(learnts.size(), 1));
    std::size_t j = 0;
    for (std::size_t i = 0; i < learnts.size(); ++i) {
      const int cref = learnts[i];
      Clause& c = clauses[static_cast<std::size_t>(cref)];
      if (c.lits.size() > 2 && !locked(c, cref) && (i < learnts.size() / 2 || c.activity < extra)) {
        c.deleted = true;
        c.lits.clear();
        c.lits.shrink_to_fit();
      } else {
        learnts[j++] = cref;
      }
    }
    learnts.resize(j);
  }

  Lit pick_branch() {
    while (!order.empty()) {
      const Var v = order.pop();
      if (assigns[static_cast<std::size_t>(v)] == kUndef) return Lit::make(v, phase[static_cast<std::size_t>(v)] == 0);
    }
    return Lit{kUndefLit};
  }

  // 1 = sat, 0 = unsat, -1 = restart
  int search(int conflict_limit) {
    int conflicts = 0;
    std::vector<Lit> learnt;
    for (;;) {
      const int confl = propagate();
      if (confl >= 0) {
        ++stats.conflicts;
        ++conflicts;
        if (decision_level() == 0) {
          ok = false;
          return 0;
        }
        int bt = 0;
        analyze(confl, learnt, bt);
        cancel_until(bt);
        if (learnt.size() == 1) {
          enqueue(learnt[0], kNoReason);
        } else {
          const int cref = static_cast<int>(clauses.size());
          clauses.push_back(Clause{learnt, 0.0, true, false});
          learnts.push_back(cref);
          attach(cref);
          bump_clause(clauses.back());
          enqueue(learnt[0], cref);
        }
        var_inc /= 0.95;
        cla_inc /= 0.999;
        continue;
      }
      if (conflict_limit >= 0 && conflicts >= conflict_limit) {
        cancel_until(0);
        return -1;
      }
      if (static_cast<double>(learnts.size()) - static_cast<double>(trail.size()) >= max_learnts) reduce_db();

      Lit next{kUndefLit};
      while (decision_level() < static_cast<int>(assumptions.size())) {
        const Lit a = assumptions[static_cast<std::size_t>(decision_level())];
        if (value(a) == kTrue) {
          trail_lim.push_back(static_cast<int>(trail.size()));
        } else if (value(a) == kFalse) {
          analyze_final(~a);
          return 0;
        } else {
          next = a;
          break;
        }
      }
      if (next.x == kUndefLit) {
        ++stats.decisions;
        next = pick_branch();
        if (next.x == kUndefLit) return 1;
      }
      trail_lim.push_back(static_cast<int>(trail.size()));
      enqueue(next, kNoReason);
    }
  }
};

Solver::Solver() : impl_(std::make_unique<Impl>()) {}
Solver::~Solver() = default;
Solver::Solver(Solver&& o) noexcept : impl_(std::move(o.impl_)) { impl_->order.act = &impl_->activity; }
Solver& Solver::operator=(Solver&& o) noexcept {
  impl_ = std::move(o.impl_);
  impl_->order.act = &impl_->activity;
  return *this;
}

Var Solver::new_var() { return impl_->new_var(); }

void Solver::reserve_vars(int n) {
  while (impl_->num_vars() < n) impl_->new_var();
}

int Solver::num_vars() const { return impl_->num_vars(); }
std::size_t Solver::num_clauses() const { return impl_->num_original; }

bool Solver::add_clause(std::span<const Lit> lits) {
  Impl& s = *impl_;
  if (!s.ok) return false;
  std::vector<Lit> c(lits.begin(), lits.end());
  for (const Lit l : c) reserve_vars(l.var() + 1);
  std::sort(c.begin(), c.end());
  std::size_t j = 0;
  Lit prev{kUndefLit};
  for (const Lit l : c) {
    if (s.value(l) == kTrue || l == ~prev) return true;  // satisfied or tautology
    if (s.value(l) == kFalse || l == prev) continue;
    c[j++] = prev = l;
  }
  c.resize(j);
  ++s.num_original;
  if (c.empty()) {
    s.ok = false;
    return false;
  }
  if (c.size() == 1) {
    s.enqueue(c[0], kNoReason);
    if (s.propagate() >= 0) s.ok = false;
    return s.ok;
  }
  const int cref = static_cast<int>(s.clauses.size());
  s.clauses.push_back(Impl::Clause{std::move(c), 0.0, false, false});
  s.attach(cref);
  return true;
}

Result Solver::solve(std::span<const Lit> assumptions) {
  Impl& s = *impl_;
  ++s.stats.solves;
  s.model.clear();
  s.failed.clear();
  if (!s.ok) return Result::Unsat;
  for (const Lit a : assumptions) reserve_vars(a.var() + 1);
  s.assumptions.assign(assumptions.begin(), assumptions.end());
  s.max_learnts = std::max(static_cast<double>(s.num_original) / 3.0, 2000.0);
  int status = -1;
  for (int restarts = 0; status < 0; ++restarts) {
    status = s.search(static_cast<int>(luby(2.0, restarts) * 100));
    if (status < 0) {
      ++s.stats.restarts;
      s.max_learnts *= 1.05;
    }
  }
  if (status == 1) {
    s.model.resize(s.assigns.size());
    for (std::size_t v = 0; v < s.assigns.size(); ++v) s.model[v] = s.assigns[v] == kTrue;
  }
  s.cancel_until(0);
  return status == 1 ? Result::Sat : Result::Unsat;
}

bool Solver::model_value(Var v) const { return impl_->model.at(static_cast<std::size_t>(v)); }
const std::vector<bool>& Solver::model() const { return impl_->model; }
const std::vector<Lit>& Solver::failed_assumptions() const { return impl_->failed; }
bool Solver::okay() const { return impl_->ok; }
const Stats& Solver::stats() const { return impl_->stats; }

}  // namespace eqed::sat
