#include "eqed/localize.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace eqed {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool block_is(const BlockTrace& a, const BlockTrace& b) { return a.same_values(b); }

}  // namespace

AnalysisWindow select_window(const SignaturePlan& plan, const ScanSnapshot& snapshot) {
  const std::uint64_t counter = snapshot.cycles_run % (2 * plan.window);
  for (const auto& s : snapshot.scans) {
    if (s.counter != counter)
      throw std::invalid_argument("signature block " + std::to_string(s.interface_id) + " reports counter " +
                                  std::to_string(s.counter) + ", expected " + std::to_string(counter) +
                                  " after a common reset");
  }
  const WindowSelection w = window_lengths(counter, plan.window, snapshot.cycles_run);
  AnalysisWindow out;
  out.frames = w.length;
  out.misr = w.misr;
  out.short_window = w.short_window;
  out.start = snapshot.cycles_run - w.length;
  out.other_misr = w.misr == 1 ? 2 : 1;
  out.other_frames = w.misr == 1 ? w.w2 : w.w1;
  return out;
}

BmcProblem make_problem(const ElaboratedDesign& design, const Partition& partition, const AnalysisWindow& window,
                        std::vector<int> blocks, const LocalizeOptions& options) {
  (void)design;
  (void)partition;
  BmcProblem pb;
  pb.blocks = std::move(blocks);
  pb.frames = window.frames;
  pb.start_cycle = window.start;
  pb.init = options.power_on_state && window.start == 0 ? InitMode::Declared : InitMode::Free;
  return pb;
}

BlockLocalization localize_block(const ElaboratedDesign& design, const Partition& partition, const SignaturePlan& plan,
                                 const ScanSnapshot& snapshot, const ExternalTrace& external,
                                 const LocalizeOptions& options) {
  BlockLocalization out;
  out.window = select_window(plan, snapshot);
  if (out.window.frames == 0) return out;
  for (const auto& blk : partition.blocks) {
    const auto t0 = Clock::now();
    BlockCheck check;
    check.block = blk.id;
    Unrolling u = unroll(design, partition, plan, make_problem(design, partition, out.window, {blk.id}, options));
    add_signature_constraints(u, design, partition, plan, snapshot, external, out.window.misr);
    check.consistent = open_session(u.cnf, options.solver)->solve();
    if (!check.consistent && options.short_window_recheck && out.window.other_frames > 0 &&
        out.window.other_frames < out.window.frames) {
      AnalysisWindow shorter = out.window;
      shorter.frames = out.window.other_frames;
      shorter.start = snapshot.cycles_run - shorter.frames;
      shorter.misr = out.window.other_misr;
      Unrolling us = unroll(design, partition, plan, make_problem(design, partition, shorter, {blk.id}, options));
      add_signature_constraints(us, design, partition, plan, snapshot, external, shorter.misr);
      check.short_recheck_unsat = !open_session(us.cnf, options.solver)->solve();
      check.short_frames = shorter.frames;
    }
    check.ms = ms_since(t0);
    if (!check.consistent) out.buggy.push_back(blk.id);
    out.checks.push_back(check);
  }
  return out;
}

std::vector<int> CandidateSet::distinct_ffs() const {
  std::set<int> ffs;
  for (const auto& e : entries) ffs.insert(e.ff);
  return {ffs.begin(), ffs.end()};
}

bool CandidateSet::contains(int ff, std::optional<std::uint64_t> cycle) const {
  return std::any_of(entries.begin(), entries.end(),
                     [&](const Candidate& e) { return e.ff == ff && (!cycle || e.cycle == *cycle); });
}

CandidateSet enumerate_candidates(const ElaboratedDesign& design, const Partition& partition,
                                  const SignaturePlan& plan, const ScanSnapshot& snapshot,
                                  const ExternalTrace& external, int block, const LocalizeOptions& options) {
  CandidateSet out;
  out.block = block;
  out.mode = options.mode;
  const AnalysisWindow window = select_window(plan, snapshot);
  if (window.frames == 0) {
    out.model_mismatch = true;
    return out;
  }
  BmcProblem pb = make_problem(design, partition, window, {block}, options);
  pb.instrumentation = options.instrumentation == Instrumentation::None ? Instrumentation::Decoder
                                                                         : options.instrumentation;
  Unrolling u = unroll(design, partition, plan, pb);
  add_signature_constraints(u, design, partition, plan, snapshot, external, window.misr);
  auto session = open_session(u.cnf, options.solver);

  while (session->solve()) {
    ++out.models;
    const auto inj = decode_injections(u, *session);
    out.max_injections_per_model = std::max<std::uint64_t>(out.max_injections_per_model, inj.size());
    if (inj.empty()) break;  // the signatures are explainable without an error: not a buggy block
    const InjectionSpec found = inj.front();
    Candidate c;
    c.ff = found.ff;
    c.cycle = found.cycle;
    c.trace = extract_trace(u, *session, plan, partition, block);
    out.entries.push_back(std::move(c));

    const auto idx = static_cast<std::size_t>(std::lower_bound(u.inj_ffs.begin(), u.inj_ffs.end(), found.ff) -
                                              u.inj_ffs.begin());
    if (options.mode == CandidateMode::PerFF) {
      for (const auto& frame : u.select) session->add_clause({~frame[idx]});
    } else {
      session->add_clause({~u.select[found.cycle - window.start][idx]});
    }
    if (out.entries.size() >= options.max_candidates) {
      out.truncated = true;
      break;
    }
  }
  out.solve_calls = session->solve_calls();
  out.model_mismatch = out.entries.empty();
  return out;
}

std::vector<int> ncc_region(const Partition& partition, const SignaturePlan& plan, int block, int depth) {
  const std::string& clock = partition.blocks.at(static_cast<std::size_t>(block)).clock;
  std::map<int, std::set<int>> adj;
  for (const auto& iface : plan.interfaces) {
    if (!iface.misr || iface.extra || iface.source == kExternal) continue;
    for (int d : iface.dests) {
      if (d == kExternal || d == iface.source) continue;
      if (partition.blocks[static_cast<std::size_t>(d)].clock != clock ||
          partition.blocks[static_cast<std::size_t>(iface.source)].clock != clock)
        continue;
      adj[iface.source].insert(d);
      adj[d].insert(iface.source);
    }
  }
  std::map<int, int> dist{{block, 0}};
  std::deque<int> queue{block};
  while (!queue.empty()) {
    const int b = queue.front();
    queue.pop_front();
    if (depth >= 0 && dist[b] >= depth) continue;
    for (int n : adj[b]) {
      if (dist.count(n)) continue;
      dist[n] = dist[b] + 1;
      queue.push_back(n);
    }
  }
  std::vector<int> out{block};
  for (const auto& [b, d] : dist)
    if (b != block) out.push_back(b);
  return out;
}

namespace {

/// Problem over `blocks` restricted to the candidate's injection.
BmcProblem candidate_problem(const ElaboratedDesign& design, const Partition& partition, const AnalysisWindow& window,
                             std::vector<int> blocks, const Candidate& c, CandidateMode mode,
                             const LocalizeOptions& options) {
  BmcProblem pb = make_problem(design, partition, window, std::move(blocks), options);
  if (mode == CandidateMode::PerPair) {
    pb.forced = InjectionSpec{c.ff, c.cycle};
  } else {
    pb.instrumentation = Instrumentation::Decoder;
    pb.instrumented_ffs = {c.ff};
  }
  return pb;
}

std::vector<SignalId> intersect(const std::vector<SignalId>& a, const std::vector<SignalId>& b) {
  std::set<SignalId> sb(b.begin(), b.end());
  std::vector<SignalId> out;
  for (SignalId s : a)
    if (sb.count(s)) out.push_back(s);
  return out;
}

enum class Verdict { Consistent, Inconsistent, Undecided };

/// Neighbour-by-neighbour search. Node 0 is the candidate's block (with its
/// injection); every later node must agree with the values already chosen on
/// the signals it shares with earlier nodes. A failing node sends the search back
/// to the previous one, which blocks its full shared-boundary valuation and looks
/// for another trace.
Verdict backtracking_search(const ElaboratedDesign& design, const Partition& partition, const SignaturePlan& plan,
                            const ScanSnapshot& snapshot, const ExternalTrace& external, const AnalysisWindow& window,
                            const std::vector<int>& region, const Candidate& cand, CandidateMode mode,
                            const LocalizeOptions& options, std::uint64_t* max_inj) {
  const std::size_t n = region.size();
  std::vector<Unrolling> units;
  std::vector<std::unique_ptr<SatSession>> sessions;
  std::vector<std::vector<SignalId>> boundary;
  for (std::size_t i = 0; i < n; ++i) {
    BmcProblem pb = i == 0 ? candidate_problem(design, partition, window, {region[0]}, cand, mode, options)
                           : make_problem(design, partition, window, {region[i]}, options);
    units.push_back(unroll(design, partition, plan, pb));
    add_signature_constraints(units.back(), design, partition, plan, snapshot, external, window.misr);
    sessions.push_back(open_session(units.back().cnf, options.solver));
    boundary.push_back(boundary_signals(plan, partition, region[i]));
  }
  // shared_before[i][j]: signals node i shares with earlier node j; shared_later[i]: with any later node.
  std::vector<std::vector<std::vector<SignalId>>> shared_before(n);
  std::vector<std::vector<SignalId>> shared_later(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::set<SignalId> later;
    for (std::size_t j = 0; j < n; ++j) {
      const auto common = intersect(boundary[i], boundary[j]);
      if (j < i) shared_before[i].push_back(common);
      if (j > i) later.insert(common.begin(), common.end());
    }
    shared_later[i].assign(later.begin(), later.end());
  }

  // Values chosen at each level: signal -> per-frame bits.
  std::vector<std::map<SignalId, std::vector<bool>>> chosen(n);
  std::vector<Lit> act(n);
  std::uint64_t attempts = 0;
  std::size_t i = 0;
  act[0] = sessions[0]->new_var();
  while (true) {
    if (++attempts > options.ncc_backtrack_limit) return Verdict::Undecided;
    std::vector<Lit> assume{act[i]};
    for (std::size_t j = 0; j < i; ++j) {
      for (SignalId s : shared_before[i][j]) {
        const auto& bits = chosen[j].at(s);
        for (std::uint64_t t = 0; t < window.frames; ++t) {
          const Lit l = units[i].signal(s, t);
          if (CnfFormula::is_const(l)) {
            if ((l == CnfFormula::kTrue) != bits[t]) goto conflict;
            continue;
          }
          assume.push_back(l ^ !bits[t]);
        }
      }
    }
    if (sessions[i]->solve(assume)) {
      if (i == 0) *max_inj = std::max<std::uint64_t>(*max_inj, decode_injections(units[0], *sessions[0]).size());
      chosen[i].clear();
      std::vector<Lit> differ{~act[i]};
      for (SignalId s : boundary[i]) {
        auto& bits = chosen[i][s];
        for (std::uint64_t t = 0; t < window.frames; ++t) bits.push_back(sessions[i]->value(units[i].signal(s, t)));
      }
      for (SignalId s : shared_later[i]) {
        for (std::uint64_t t = 0; t < window.frames; ++t) {
          const Lit l = units[i].signal(s, t);
          if (!CnfFormula::is_const(l)) differ.push_back(l ^ chosen[i][s][t]);
        }
      }
      sessions[i]->add_clause(differ);
      if (++i == n) return Verdict::Consistent;
      act[i] = sessions[i]->new_var();
      continue;
    }
  conflict:
    if (i == 0) return Verdict::Inconsistent;
    --i;
  }
}

}  // namespace

std::vector<BlockTrace> candidate_traces(const ElaboratedDesign& design, const Partition& partition,
                                         const SignaturePlan& plan, const ScanSnapshot& snapshot,
                                         const ExternalTrace& external, const CandidateSet& candidates,
                                         const LocalizeOptions& options) {
  const AnalysisWindow window = select_window(plan, snapshot);
  std::vector<BlockTrace> out;
  for (const auto& c : candidates.entries) {
    Unrolling u = unroll(design, partition, plan,
                         candidate_problem(design, partition, window, {candidates.block}, c, candidates.mode, options));
    add_signature_constraints(u, design, partition, plan, snapshot, external, window.misr);
    auto session = open_session(u.cnf, options.solver);
    auto tr = canonical_trace(u, *session, plan, partition, candidates.block);
    if (!tr) throw std::logic_error("enumerated candidate has no consistent trace");
    out.push_back(std::move(*tr));
  }
  return out;
}

std::size_t distinct_traces(const std::vector<BlockTrace>& traces) {
  std::vector<const BlockTrace*> uniq;
  for (const auto& t : traces) {
    if (std::none_of(uniq.begin(), uniq.end(), [&](const BlockTrace* u) { return block_is(*u, t); })) uniq.push_back(&t);
  }
  return uniq.size();
}

NccResult ncc_filter(const ElaboratedDesign& design, const Partition& partition, const SignaturePlan& plan,
                     const ScanSnapshot& snapshot, const ExternalTrace& external, const CandidateSet& candidates,
                     const LocalizeOptions& options) {
  NccResult out;
  out.survivors = candidates;
  out.survivors.entries.clear();
  out.region = ncc_region(partition, plan, candidates.block, options.ncc_depth);
  out.kept.assign(candidates.entries.size(), true);
  if (out.region.size() == 1) {
    out.survivors = candidates;
    if (options.canonical_traces)
      out.traces = candidate_traces(design, partition, plan, snapshot, external, candidates, options);
    return out;
  }
  const AnalysisWindow window = select_window(plan, snapshot);
  for (std::size_t k = 0; k < candidates.entries.size(); ++k) {
    const Candidate& c = candidates.entries[k];
    Verdict verdict = Verdict::Consistent;
    if (options.ncc_strategy == NccStrategy::Backtracking) {
      verdict = backtracking_search(design, partition, plan, snapshot, external, window, out.region, c,
                                    candidates.mode, options, &out.max_injections_per_model);
      if (verdict == Verdict::Undecided) ++out.undecided;
    }
    std::optional<BlockTrace> trace;
    if (verdict != Verdict::Inconsistent &&
        (options.ncc_strategy == NccStrategy::Joint || options.canonical_traces)) {
      Unrolling u = unroll(design, partition, plan,
                           candidate_problem(design, partition, window, out.region, c, candidates.mode, options));
      add_signature_constraints(u, design, partition, plan, snapshot, external, window.misr);
      auto session = open_session(u.cnf, options.solver);
      if (options.canonical_traces) {
        trace = canonical_trace(u, *session, plan, partition, candidates.block);
      } else if (session->solve()) {
        trace = extract_trace(u, *session, plan, partition, candidates.block);
      }
      if (trace) {
        out.max_injections_per_model =
            std::max<std::uint64_t>(out.max_injections_per_model, decode_injections(u, *session).size());
      }
      if (options.ncc_strategy == NccStrategy::Joint) {
        verdict = trace ? Verdict::Consistent : Verdict::Inconsistent;
      } else if (verdict == Verdict::Consistent && !trace) {
        throw std::logic_error("neighbour search and joint check disagree");
      }
    }
    if (verdict == Verdict::Inconsistent) {
      out.kept[k] = false;
      continue;
    }
    Candidate kept = c;
    if (trace) kept.trace = *trace;
    out.survivors.entries.push_back(kept);
    if (options.canonical_traces) out.traces.push_back(trace ? *trace : c.trace);
  }
  return out;
}

LocalizationReport compute_report(const ElaboratedDesign& design, const std::vector<CandidateSet>& before,
                                  const std::vector<CandidateSet>& after, const StageTimes& times) {
  LocalizationReport r;
  r.total_ffs = design.total_ffs();
  r.times = times;
  std::set<int> ffs_before;
  std::set<int> ffs_after;
  for (const auto& s : before) {
    r.buggy_blocks.push_back(s.block);
    r.pairs_before += s.entries.size();
    for (int f : s.distinct_ffs()) ffs_before.insert(f);
    r.model_mismatch = r.model_mismatch || s.model_mismatch;
    r.max_injections_per_model = std::max(r.max_injections_per_model, s.max_injections_per_model);
  }
  for (const auto& s : after) {
    r.pairs_after += s.entries.size();
    for (int f : s.distinct_ffs()) ffs_after.insert(f);
    r.survivors.insert(r.survivors.end(), s.entries.begin(), s.entries.end());
  }
  r.candidate_ffs_before = ffs_before.size();
  r.candidate_ffs_after = ffs_after.size();
  if (before.empty()) {
    r.status = "none inconsistent";
  } else if (ffs_after.empty()) {
    r.status = "model mismatch";
    r.model_mismatch = true;
  } else {
    r.status = "localized";
    r.factor = static_cast<double>(r.total_ffs) / static_cast<double>(ffs_after.size());
  }
  return r;
}

LocalizationReport localize(const ElaboratedDesign& design, const Partition& partition, const SignaturePlan& plan,
                            const ScanSnapshot& snapshot, const ExternalTrace& external,
                            const LocalizeOptions& options) {
  StageTimes times;
  auto t0 = Clock::now();
  const BlockLocalization stage1 = localize_block(design, partition, plan, snapshot, external, options);
  times.localize_ms = ms_since(t0);

  std::vector<CandidateSet> before;
  std::vector<CandidateSet> after;
  std::uint64_t traces_before = 0;
  std::uint64_t traces_after = 0;
  std::uint64_t max_inj = 0;
  for (int b : stage1.buggy) {
    t0 = Clock::now();
    CandidateSet cs = enumerate_candidates(design, partition, plan, snapshot, external, b, options);
    times.enumerate_ms += ms_since(t0);
    t0 = Clock::now();
    if (options.canonical_traces && !cs.entries.empty())
      traces_before += distinct_traces(candidate_traces(design, partition, plan, snapshot, external, cs, options));
    if (options.ncc && !cs.entries.empty()) {
      NccResult ncc = ncc_filter(design, partition, plan, snapshot, external, cs, options);
      traces_after += distinct_traces(ncc.traces);
      max_inj = std::max(max_inj, ncc.max_injections_per_model);
      after.push_back(std::move(ncc.survivors));
    } else {
      after.push_back(cs);
    }
    times.ncc_ms += ms_since(t0);
    before.push_back(std::move(cs));
  }
  if (!options.ncc) traces_after = traces_before;

  LocalizationReport r = compute_report(design, before, after, times);
  r.short_window = stage1.window.short_window;
  r.window = stage1.window.frames;
  r.traces_before = traces_before;
  r.traces_after = traces_after;
  for (int b : stage1.buggy) r.trace_bits += boundary_signals(plan, partition, b).size() * stage1.window.frames;
  r.max_injections_per_model = std::max(r.max_injections_per_model, max_inj);
  r.before = std::move(before);
  r.after = std::move(after);
  return r;
}

std::string write_report(const LocalizationReport& r, const ElaboratedDesign& design) {
  std::ostringstream out;
  out << "status=" << r.status << "\n";
  out << "buggy_blocks=";
  for (std::size_t i = 0; i < r.buggy_blocks.size(); ++i) out << (i ? "," : "") << r.buggy_blocks[i];
  out << "\n";
  out << "window=" << r.window << "\n";
  out << "short_window=" << (r.short_window ? 1 : 0) << "\n";
  out << "total_ffs=" << r.total_ffs << "\n";
  out << "candidates_before=" << r.candidate_ffs_before << "\n";
  out << "candidates_after=" << r.candidate_ffs_after << "\n";
  out << "pairs_before=" << r.pairs_before << "\n";
  out << "pairs_after=" << r.pairs_after << "\n";
  out << "traces_before=" << r.traces_before << "\n";
  out << "traces_after=" << r.traces_after << "\n";
  out << "trace_bits=" << r.trace_bits << "\n";
  out << "factor=";
  if (r.factor) {
    out << *r.factor;
  } else {
    out << "undefined";
  }
  out << "\n";
  out << "t_localize_ms=" << r.times.localize_ms << "\n";
  out << "t_enumerate_ms=" << r.times.enumerate_ms << "\n";
  out << "t_ncc_ms=" << r.times.ncc_ms << "\n";
  for (const auto& c : r.survivors) {
    out << "candidate ff=" << design.ffs[static_cast<std::size_t>(c.ff)].path << " cycle=" << c.cycle
        << " block=" << c.trace.block << "\n";
  }
  return out.str();
}

std::string write_trace(const BlockTrace& trace, const ElaboratedDesign& design) {
  std::ostringstream out;
  out << "trace block=" << trace.block << " start=" << trace.start_cycle << " frames=" << trace.frames.size();
  if (trace.injection)
    out << " injection=" << design.ffs[static_cast<std::size_t>(trace.injection->ff)].path << "@"
        << trace.injection->cycle;
  out << "\nsignals ";
  for (std::size_t j = 0; j < trace.signals.size(); ++j)
    out << (j ? "," : "") << design.signal_names[static_cast<std::size_t>(trace.signals[j])];
  out << "\n";
  for (std::size_t t = 0; t < trace.frames.size(); ++t)
    out << "frame " << trace.start_cycle + t << " " << trace.frames[t].to_hex() << "\n";
  return out.str();
}

}  // namespace eqed
