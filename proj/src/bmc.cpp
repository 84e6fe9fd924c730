#include "eqed/bmc.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <sstream>
#include <stdexcept>

#include "eqed/signature.hpp"

namespace eqed {

using Origin = Unrolling::VarOrigin;

Lit Unrolling::signal(SignalId s, std::uint64_t frame) const {
  auto it = slot.find(s);
  if (it == slot.end()) throw std::out_of_range("signal " + std::to_string(s) + " is not part of the unrolled region");
  return values.at(frame)[it->second];
}

std::size_t Unrolling::region_ff_index(int ff) const {
  auto it = std::lower_bound(ffs.begin(), ffs.end(), ff);
  if (it == ffs.end() || *it != ff) throw std::out_of_range("FF " + std::to_string(ff) + " is not in the unrolled region");
  return static_cast<std::size_t>(it - ffs.begin());
}

std::vector<int> region_interfaces(const SignaturePlan& plan, const Partition& partition, const std::vector<int>& blocks) {
  std::set<int> ids;
  for (int b : blocks)
    for (int id : plan.interfaces_of(partition, b)) ids.insert(id);
  return {ids.begin(), ids.end()};
}

std::vector<SignalId> boundary_signals(const SignaturePlan& plan, const Partition& partition, int block) {
  (void)partition;
  std::vector<SignalId> out;
  std::set<SignalId> seen;
  for (const auto& iface : plan.interfaces) {
    if (iface.extra || !iface.touches(block)) continue;
    for (SignalId s : iface.signals)
      if (seen.insert(s).second) out.push_back(s);
  }
  return out;
}

namespace {

class Builder {
 public:
  Builder(const ElaboratedDesign& d, const Partition& p, const SignaturePlan& plan, Unrolling& u)
      : d_(d), p_(p), plan_(plan), u_(u) {}

  Lit free_var(Origin origin) {
    const Lit l = u_.cnf.fresh();
    u_.origin.resize(static_cast<std::size_t>(u_.cnf.num_vars()) + 1);
    u_.origin[static_cast<std::size_t>(l.var())] = origin;
    return l;
  }

  void build() {
    const BmcProblem& pb = u_.problem;
    if (pb.frames == 0) throw std::invalid_argument("unroll: T must be at least 1");
    if (pb.blocks.empty()) throw std::invalid_argument("unroll: empty region");
    const std::string& clock = p_.blocks.at(static_cast<std::size_t>(pb.blocks[0])).clock;
    std::set<int> region(pb.blocks.begin(), pb.blocks.end());
    for (int b : region) {
      const DesignBlock& blk = p_.blocks.at(static_cast<std::size_t>(b));
      if (blk.clock != clock) throw std::invalid_argument("unroll: region spans clock domains");
      u_.ffs.insert(u_.ffs.end(), blk.ffs.begin(), blk.ffs.end());
    }
    std::sort(u_.ffs.begin(), u_.ffs.end());
    for (int g : d_.gate_order())
      if (region.count(p_.gate_block[static_cast<std::size_t>(g)])) u_.gates.push_back(g);

    // Columns: everything the region's logic touches plus the constrained interfaces.
    auto want = [&](SignalId s) {
      if (u_.slot.emplace(s, u_.slot_signal.size()).second) u_.slot_signal.push_back(s);
    };
    for (int g : u_.gates) {
      for (SignalId s : d_.gates[static_cast<std::size_t>(g)].inputs) want(s);
      want(d_.gates[static_cast<std::size_t>(g)].output);
    }
    for (int f : u_.ffs) {
      want(d_.ffs[static_cast<std::size_t>(f)].d);
      want(d_.ffs[static_cast<std::size_t>(f)].q);
    }
    for (int id : region_interfaces(plan_, p_, pb.blocks))
      for (SignalId s : plan_.interface(id).signals) want(s);
    for (int b : region)
      for (SignalId s : boundary_signals(plan_, p_, b)) want(s);

    // Classify columns.
    const std::size_t cols = u_.slot_signal.size();
    std::vector<int> kind(cols, 0);  // 0 input, 1 gate, 2 FF
    std::vector<std::size_t> ff_of(cols, 0);
    for (std::size_t c = 0; c < cols; ++c) {
      const SignalId s = u_.slot_signal[c];
      const Driver& drv = d_.drivers[static_cast<std::size_t>(s)];
      if (drv.kind == Driver::Kind::Gate && region.count(p_.gate_block[static_cast<std::size_t>(drv.index)])) {
        kind[c] = 1;
      } else if (drv.kind == Driver::Kind::FlipFlop && region.count(p_.ff_block[static_cast<std::size_t>(drv.index)])) {
        kind[c] = 2;
        ff_of[c] = u_.region_ff_index(drv.index);
      } else {
        u_.inputs.push_back(s);
      }
    }

    // Frame-0 state.
    std::vector<Lit> s0;
    for (int f : u_.ffs) {
      const InitValue init = d_.ffs[static_cast<std::size_t>(f)].init;
      if (pb.init == InitMode::Declared && init != InitValue::Symbolic) {
        s0.push_back(init == InitValue::One ? CnfFormula::kTrue : CnfFormula::kFalse);
      } else {
        s0.push_back(free_var({Origin::Kind::FfInit, f, 0}));
      }
    }
    u_.state.push_back(std::move(s0));

    if (pb.forced) {
      (void)u_.region_ff_index(pb.forced->ff);
      if (pb.forced->cycle < pb.start_cycle || pb.forced->cycle >= pb.start_cycle + pb.frames)
        throw std::invalid_argument("unroll: forced injection outside the window");
    }
    build_instrumentation();

    std::vector<std::size_t> ff_slot_d;
    for (int f : u_.ffs) ff_slot_d.push_back(u_.slot.at(d_.ffs[static_cast<std::size_t>(f)].d));
    std::vector<std::ptrdiff_t> inj_pos(u_.ffs.size(), -1);
    for (std::size_t i = 0; i < u_.inj_ffs.size(); ++i)
      inj_pos[u_.region_ff_index(u_.inj_ffs[i])] = static_cast<std::ptrdiff_t>(i);

    for (std::uint64_t t = 0; t < pb.frames; ++t) {
      std::vector<Lit> v(cols, CnfFormula::kFalse);
      for (std::size_t c = 0; c < cols; ++c) {
        if (kind[c] == 0) v[c] = free_var({Origin::Kind::Input, u_.slot_signal[c], t});
        if (kind[c] == 2) v[c] = u_.state[t][ff_of[c]];
      }
      for (int g : u_.gates) {
        const Gate& gate = d_.gates[static_cast<std::size_t>(g)];
        Lit in[3] = {};
        for (std::size_t k = 0; k < gate.inputs.size(); ++k) in[k] = v[u_.slot.at(gate.inputs[k])];
        v[u_.slot.at(gate.output)] = encode(gate.op, in);
      }
      std::vector<Lit> next(u_.ffs.size());
      for (std::size_t i = 0; i < u_.ffs.size(); ++i) {
        Lit dlit = v[ff_slot_d[i]];
        if (inj_pos[i] >= 0) dlit = u_.cnf.mk_xor(dlit, u_.select[t][static_cast<std::size_t>(inj_pos[i])]);
        if (pb.forced && pb.forced->ff == u_.ffs[i] && pb.forced->cycle == pb.start_cycle + t) dlit = ~dlit;
        next[i] = dlit;
      }
      u_.values.push_back(std::move(v));
      u_.state.push_back(std::move(next));
    }
  }

 private:
  Lit encode(GateOp op, const Lit* in) {
    CnfFormula& f = u_.cnf;
    switch (op) {
      case GateOp::And: return f.mk_and(in[0], in[1]);
      case GateOp::Or: return f.mk_or(in[0], in[1]);
      case GateOp::Not: return ~in[0];
      case GateOp::Xor: return f.mk_xor(in[0], in[1]);
      case GateOp::Nand: return ~f.mk_and(in[0], in[1]);
      case GateOp::Nor: return ~f.mk_or(in[0], in[1]);
      case GateOp::Mux: return f.mk_mux(in[0], in[1], in[2]);
      case GateOp::Const0: return CnfFormula::kFalse;
      case GateOp::Const1: return CnfFormula::kTrue;
    }
    return CnfFormula::kFalse;
  }

  void build_instrumentation() {
    const BmcProblem& pb = u_.problem;
    if (pb.instrumentation == Instrumentation::None) return;
    if (pb.instrumented_ffs.empty()) {
      const auto& own = p_.blocks.at(static_cast<std::size_t>(pb.blocks[0])).ffs;
      u_.inj_ffs.assign(own.begin(), own.end());
    } else {
      u_.inj_ffs = pb.instrumented_ffs;
      std::sort(u_.inj_ffs.begin(), u_.inj_ffs.end());
      u_.inj_ffs.erase(std::unique(u_.inj_ffs.begin(), u_.inj_ffs.end()), u_.inj_ffs.end());
      for (int f : u_.inj_ffs) (void)u_.region_ff_index(f);
    }
    const auto r = static_cast<std::uint64_t>(u_.inj_ffs.size());
    const int width = std::max(1, static_cast<int>(std::bit_width(r)));
    CnfFormula& f = u_.cnf;

    if (pb.instrumentation == Instrumentation::Decoder) {
      for (std::uint64_t t = 0; t < pb.frames; ++t) {
        std::vector<Lit> p;
        for (int j = 0; j < width; ++j) p.push_back(free_var({}));
        // P_t <= R: for every bit where R has a 0, forbid P matching R above it with a 1 there.
        for (int j = 0; j < width; ++j) {
          if ((r >> j) & 1U) continue;
          std::vector<Lit> clause{~p[static_cast<std::size_t>(j)]};
          for (int k = j + 1; k < width; ++k) clause.push_back(((r >> k) & 1U) ? ~p[static_cast<std::size_t>(k)] : p[static_cast<std::size_t>(k)]);
          f.add_clause(clause);
        }
        std::vector<Lit> sel;
        for (std::uint64_t i = 0; i < r; ++i) {
          const std::uint64_t code = i + 1;
          const Lit s = free_var({});
          std::vector<Lit> any_mismatch{s};
          for (int j = 0; j < width; ++j) {
            const Lit bit = ((code >> j) & 1U) ? p[static_cast<std::size_t>(j)] : ~p[static_cast<std::size_t>(j)];
            f.add_clause({~s, bit});
            any_mismatch.push_back(~bit);
          }
          f.add_clause(any_mismatch);
          sel.push_back(s);
        }
        const Lit nz = free_var({});
        std::vector<Lit> some_bit{~nz};
        for (const Lit b : p) {
          f.add_clause({nz, ~b});
          some_bit.push_back(b);
        }
        f.add_clause(some_bit);
        u_.p_bits.push_back(std::move(p));
        u_.select.push_back(std::move(sel));
        u_.nonzero.push_back(nz);
      }
      at_most_one(u_.nonzero);
      return;
    }

    // Gate-level rendering: decoder AND-trees, an error-latch FF e (0 at frame 0) that
    // records that an injection happened and gates every later selection off.
    Lit latched = CnfFormula::kFalse;
    for (std::uint64_t t = 0; t < pb.frames; ++t) {
      std::vector<Lit> p;
      for (int j = 0; j < width; ++j) p.push_back(free_var({}));
      std::vector<Lit> sel;
      Lit any = CnfFormula::kFalse;
      for (std::uint64_t i = 0; i < r; ++i) {
        const std::uint64_t code = i + 1;
        Lit dec = CnfFormula::kTrue;
        for (int j = 0; j < width; ++j)
          dec = f.mk_and(dec, ((code >> j) & 1U) ? p[static_cast<std::size_t>(j)] : ~p[static_cast<std::size_t>(j)]);
        const Lit eff = f.mk_and(dec, ~latched);
        sel.push_back(eff);
        any = f.mk_or(any, eff);
      }
      latched = f.mk_or(latched, any);
      u_.p_bits.push_back(std::move(p));
      u_.select.push_back(std::move(sel));
      u_.nonzero.push_back(any);
    }
  }

  // Sequential-counter at-most-one.
  void at_most_one(const std::vector<Lit>& xs) {
    if (xs.size() < 2) return;
    CnfFormula& f = u_.cnf;
    std::vector<Lit> s;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) s.push_back(free_var({}));
    f.add_clause({~xs[0], s[0]});
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
      f.add_clause({~xs[i], s[i]});
      f.add_clause({~s[i - 1], s[i]});
      f.add_clause({~xs[i], ~s[i - 1]});
    }
    f.add_clause({~xs.back(), ~s.back()});
  }

  const ElaboratedDesign& d_;
  const Partition& p_;
  const SignaturePlan& plan_;
  Unrolling& u_;
};

}  // namespace

Unrolling unroll(const ElaboratedDesign& design, const Partition& partition, const SignaturePlan& plan,
                 const BmcProblem& problem) {
  Unrolling u;
  u.problem = problem;
  u.origin.resize(1);
  Builder(design, partition, plan, u).build();
  u.origin.resize(static_cast<std::size_t>(u.cnf.num_vars()) + 1);
  return u;
}

void add_signature_constraints(Unrolling& u, const ElaboratedDesign& design, const Partition& partition,
                               const SignaturePlan& plan, const ScanSnapshot& snapshot, const ExternalTrace& external,
                               int misr) {
  (void)design;
  if (misr != 1 && misr != 2) throw std::invalid_argument("MISR selector must be 1 or 2");
  const BmcProblem& pb = u.problem;
  const std::uint64_t end = pb.start_cycle + pb.frames;
  if (end != snapshot.cycles_run)
    throw std::invalid_argument("window must end at the scan: start + T = " + std::to_string(end) + ", scan after " +
                                std::to_string(snapshot.cycles_run) + " cycles");
  CnfFormula& f = u.cnf;
  std::optional<std::uint64_t> counter;
  for (int id : region_interfaces(plan, partition, pb.blocks)) {
    const Interface& iface = plan.interface(id);
    u.constrained.push_back(id);
    if (iface.misr) {
      const SignatureScan* scan = snapshot.find(id);
      if (!scan) throw std::invalid_argument("no scanned signature for interface " + std::to_string(id));
      if (counter && *counter != scan->counter)
        throw std::invalid_argument("signature blocks of one region report different counters");
      counter = scan->counter;
      const WindowSelection w = window_lengths(scan->counter, plan.window, snapshot.cycles_run);
      if ((misr == 1 ? w.w1 : w.w2) != pb.frames)
        throw std::invalid_argument("T = " + std::to_string(pb.frames) + " does not match the window of MISR" +
                                    std::to_string(misr));
      const MisrConfig& cfg = *iface.misr;
      const BitVector& target = misr == 1 ? scan->misr1 : scan->misr2;
      if (target.size() != static_cast<std::size_t>(cfg.width))
        throw std::invalid_argument("scanned value width differs from K for interface " + std::to_string(id));

      Unrolling::MisrChain chain;
      chain.interface_id = id;
      chain.misr = misr;
      const auto chain_index = static_cast<int>(u.chains.size());
      std::vector<Lit> st;
      for (int k = 0; k < cfg.width; ++k) {
        const Lit l = f.fresh();
        u.origin.resize(static_cast<std::size_t>(f.num_vars()) + 1);
        u.origin[static_cast<std::size_t>(l.var())] = {Unrolling::VarOrigin::Kind::MisrInit, chain_index,
                                                        static_cast<std::uint64_t>(k)};
        st.push_back(l);
      }
      const BitVector reset = misr_reset(cfg);
      for (int k = 0; k < cfg.width; ++k) f.add_unit(st[static_cast<std::size_t>(k)] ^ !reset.get(static_cast<std::size_t>(k)));
      chain.states.push_back(st);
      for (std::uint64_t t = 0; t < pb.frames; ++t) {
        const auto& cur = chain.states.back();
        std::vector<Lit> next(cur.size());
        Lit fb = CnfFormula::kFalse;
        for (int tap : cfg.taps) fb = f.mk_xor(fb, cur[static_cast<std::size_t>(tap - 1)]);
        next[0] = fb;
        for (std::size_t k = 1; k < cur.size(); ++k) next[k] = cur[k - 1];
        for (std::size_t j = 0; j < iface.signals.size(); ++j) next[j] = f.mk_xor(next[j], u.signal(iface.signals[j], t));
        chain.states.push_back(std::move(next));
      }
      const auto& last = chain.states.back();
      for (int k = 0; k < cfg.width; ++k) f.add_unit(last[static_cast<std::size_t>(k)] ^ !target.get(static_cast<std::size_t>(k)));
      u.chains.push_back(std::move(chain));
    } else {
      for (SignalId s : iface.signals) {
        if (!u.has_signal(s)) continue;
        for (std::uint64_t t = 0; t < pb.frames; ++t) {
          const std::uint64_t cycle = pb.start_cycle + t;
          if (!external.covers(cycle))
            throw std::invalid_argument("external trace does not cover cycle " + std::to_string(cycle));
          f.add_unit(u.signal(s, t) ^ !external.value(s, cycle));
        }
      }
    }
  }
  u.origin.resize(static_cast<std::size_t>(f.num_vars()) + 1);
}

std::vector<InjectionSpec> decode_injections(const Unrolling& u, const SatSession& session) {
  std::vector<InjectionSpec> out;
  for (std::size_t t = 0; t < u.select.size(); ++t)
    for (std::size_t i = 0; i < u.select[t].size(); ++i)
      if (session.value(u.select[t][i])) out.push_back({u.inj_ffs[i], u.problem.start_cycle + t});
  return out;
}

BlockTrace extract_trace(const Unrolling& u, const SatSession& session, const SignaturePlan& plan,
                         const Partition& partition, int block) {
  BlockTrace tr;
  tr.block = block;
  tr.start_cycle = u.problem.start_cycle;
  tr.signals = boundary_signals(plan, partition, block);
  for (std::uint64_t t = 0; t < u.problem.frames; ++t) {
    BitVector v(tr.signals.size());
    for (std::size_t j = 0; j < tr.signals.size(); ++j) v.set(j, session.value(u.signal(tr.signals[j], t)));
    tr.frames.push_back(std::move(v));
  }
  if (u.problem.forced) {
    tr.injection = u.problem.forced;
  } else {
    const auto inj = decode_injections(u, session);
    if (!inj.empty()) tr.injection = inj.front();
  }
  return tr;
}

std::optional<BlockTrace> canonical_trace(const Unrolling& u, SatSession& session, const SignaturePlan& plan,
                                          const Partition& partition, int block, std::vector<Lit> assumptions) {
  if (!session.solve(assumptions)) return std::nullopt;
  const auto signals = boundary_signals(plan, partition, block);
  std::vector<Lit> lits;
  for (std::uint64_t t = 0; t < u.problem.frames; ++t)
    for (SignalId s : signals) lits.push_back(u.signal(s, t));
  std::vector<bool> current(lits.size());
  auto refresh = [&] {
    for (std::size_t k = 0; k < lits.size(); ++k) current[k] = session.value(lits[k]);
  };
  refresh();
  std::vector<bool> chosen(lits.size());
  for (std::size_t k = 0; k < lits.size(); ++k) {
    const Lit l = lits[k];
    if (CnfFormula::is_const(l) || !current[k]) {
      chosen[k] = current[k];
      if (!CnfFormula::is_const(l)) assumptions.push_back(l ^ !current[k]);
      continue;
    }
    assumptions.push_back(~l);
    if (session.solve(assumptions)) {
      chosen[k] = false;
      refresh();
    } else {
      assumptions.back() = l;
      chosen[k] = true;
    }
  }
  if (!session.solve(assumptions)) throw std::logic_error("canonical trace lost its witness");
  BlockTrace tr = extract_trace(u, session, plan, partition, block);
  for (std::size_t k = 0; k < lits.size(); ++k) {
    const std::size_t t = k / std::max<std::size_t>(signals.size(), 1);
    if (tr.frames[t].get(k % signals.size()) != chosen[k]) throw std::logic_error("canonical trace mismatch");
  }
  return tr;
}

std::vector<bool> assignment_from_simulation(const Unrolling& u, const ElaboratedDesign& design, const SimResult& run) {
  (void)design;
  const std::uint64_t start = u.problem.start_cycle;
  if (run.value_trace.size() < start + u.problem.frames)
    throw std::invalid_argument("simulation did not record values for the whole window");
  return u.cnf.evaluate([&](sat::Var v) {
    const auto& o = u.origin.at(static_cast<std::size_t>(v));
    switch (o.kind) {
      case Unrolling::VarOrigin::Kind::Input:
        return run.value_trace[start + o.frame].get(static_cast<std::size_t>(o.index));
      case Unrolling::VarOrigin::Kind::FfInit:
        return run.ff_trace[start].get(static_cast<std::size_t>(o.index));
      case Unrolling::VarOrigin::Kind::MisrInit: {
        const auto& chain = u.chains.at(static_cast<std::size_t>(o.index));
        return o.frame + 1 == chain.states[0].size();
      }
      case Unrolling::VarOrigin::Kind::Aux: return false;
    }
    return false;
  });
}

std::string write_varmap(const Unrolling& u, const ElaboratedDesign& design) {
  std::ostringstream out;
  for (std::size_t t = 0; t < u.values.size(); ++t) {
    for (std::size_t c = 0; c < u.slot_signal.size(); ++c) {
      const Lit l = u.values[t][c];
      if (CnfFormula::is_const(l)) continue;
      out << "var " << l.var() << " = " << (l.negated() ? "!" : "")
          << design.signal_names[static_cast<std::size_t>(u.slot_signal[c])] << "@" << t << "\n";
    }
  }
  return out.str();
}

}  // namespace eqed
