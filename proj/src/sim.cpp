#include "eqed/sim.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>
#include <stdexcept>

#include "eqed/rng.hpp"

namespace eqed {

namespace {
// Stream indices above this are reserved for symbolic-init randomization.
constexpr std::uint64_t kInitStreamBase = std::uint64_t{1} << 40;
}  // namespace

const SignatureScan* ScanSnapshot::find(int interface_id) const {
  for (const auto& s : scans)
    if (s.interface_id == interface_id) return &s;
  return nullptr;
}

int ExternalTrace::column(SignalId s) const {
  auto it = std::find(signals.begin(), signals.end(), s);
  return it == signals.end() ? -1 : static_cast<int>(it - signals.begin());
}

bool ExternalTrace::value(SignalId s, std::uint64_t cycle) const {
  const int col = column(s);
  if (col < 0) throw std::out_of_range("signal is not externally traced");
  if (!covers(cycle)) throw std::out_of_range("cycle " + std::to_string(cycle) + " not in external trace");
  return frames[static_cast<std::size_t>(cycle - first_cycle)].get(static_cast<std::size_t>(col));
}

std::vector<BitVector> stimulus_vectors(const Stimulus& stimulus, std::size_t input_count) {
  if (!stimulus.vectors.empty()) {
    if (stimulus.vectors.size() < stimulus.length) throw std::invalid_argument("explicit stimulus shorter than its length");
    for (const auto& v : stimulus.vectors)
      if (v.size() != input_count) throw std::invalid_argument("explicit stimulus vector does not cover all primary inputs");
    return {stimulus.vectors.begin(), stimulus.vectors.begin() + static_cast<std::ptrdiff_t>(stimulus.length)};
  }
  std::vector<BitVector> out(stimulus.length, BitVector(input_count));
  for (std::size_t i = 0; i < input_count; ++i) {
    auto rng = Xorshift64Star::stream(stimulus.seed, i);
    for (std::uint64_t t = 0; t < stimulus.length; ++t) out[t].set(i, rng.next_bit());
  }
  return out;
}

Simulator::Simulator(const ElaboratedDesign& design, const SignaturePlan& plan)
    : design_(design), plan_(plan), trace_depth_(std::max<std::uint64_t>(2 * plan.window, 1)) {
  gates_.reserve(design.gates.size());
  for (int gi : design.gate_order()) {
    const Gate& g = design.gates[static_cast<std::size_t>(gi)];
    FlatGate fg{g.op, {-1, -1, -1}, g.output};
    for (std::size_t k = 0; k < g.inputs.size(); ++k) fg.in[k] = g.inputs[k];
    gates_.push_back(fg);
  }
  for (const auto& iface : plan.interfaces) {
    if (!iface.misr) continue;
    slots_.push_back(SigSlot{iface.id, iface.signals, iface.misr->tap_mask(), misr_reset(*iface.misr)});
  }
}

std::vector<bool> Simulator::initial_state(const Stimulus& stimulus, const SimOptions& options) const {
  std::vector<bool> state(design_.ffs.size());
  for (std::size_t f = 0; f < design_.ffs.size(); ++f) {
    switch (design_.ffs[f].init) {
      case InitValue::Zero: state[f] = false; break;
      case InitValue::One: state[f] = true; break;
      case InitValue::Symbolic:
        state[f] = stimulus.randomize_symbolic_init &&
                   Xorshift64Star::stream(stimulus.seed, kInitStreamBase + f).next_bit();
        break;
    }
  }
  for (const auto& [ff, v] : options.init_overrides) state.at(static_cast<std::size_t>(ff)) = v;
  return state;
}

SimResult Simulator::run(const Stimulus& stimulus, const SimOptions& options, std::optional<InjectionSpec> injection) const {
  if (injection) {
    if (injection->ff < 0 || static_cast<std::size_t>(injection->ff) >= design_.ffs.size())
      throw std::invalid_argument("unknown FF for injection");
    if (injection->cycle >= stimulus.length)
      throw std::invalid_argument("injection cycle " + std::to_string(injection->cycle) + " not below stimulus length " +
                                  std::to_string(stimulus.length));
  }
  const auto vectors = stimulus_vectors(stimulus, design_.inputs.size());

  SimResult res;
  res.monitors = options.monitors.value_or(design_.outputs);
  if (options.reference && options.reference->size() < stimulus.length)
    throw std::invalid_argument("reference monitor trace shorter than stimulus");

  std::vector<SignatureBlockState> blocks;
  blocks.reserve(slots_.size());
  for (const auto& slot : slots_)
    blocks.push_back(SignatureBlockState::power_on(*plan_.interface(slot.interface_id).misr, plan_.window));

  std::vector<char> values(design_.signal_count(), 0);
  const std::vector<bool> init = initial_state(stimulus, options);
  std::vector<char> state(init.begin(), init.end());

  res.external.signals = design_.inputs;
  res.external.signals.insert(res.external.signals.end(), design_.outputs.begin(), design_.outputs.end());
  std::deque<BitVector> ring;

  std::vector<BitVector> sig_inputs;
  for (const auto& slot : slots_) sig_inputs.emplace_back(slot.signals.size());

  bool in[3] = {false, false, false};
  for (std::uint64_t t = 0; t < stimulus.length; ++t) {
    const BitVector& vec = vectors[t];
    for (std::size_t i = 0; i < design_.inputs.size(); ++i) values[static_cast<std::size_t>(design_.inputs[i])] = vec.get(i);
    for (std::size_t f = 0; f < design_.ffs.size(); ++f) values[static_cast<std::size_t>(design_.ffs[f].q)] = state[f];
    for (const auto& g : gates_) {
      for (int k = 0; k < 3 && g.in[k] >= 0; ++k) in[k] = values[static_cast<std::size_t>(g.in[k])] != 0;
      values[static_cast<std::size_t>(g.out)] = eval_gate(g.op, in);
    }

    BitVector mon(res.monitors.size());
    for (std::size_t m = 0; m < res.monitors.size(); ++m) mon.set(m, values[static_cast<std::size_t>(res.monitors[m])] != 0);
    if (options.record_values) {
      BitVector all(design_.signal_count());
      for (std::size_t s = 0; s < values.size(); ++s) all.set(s, values[s] != 0);
      res.value_trace.push_back(std::move(all));
      BitVector ffv(design_.ffs.size());
      for (std::size_t f = 0; f < state.size(); ++f) ffv.set(f, state[f] != 0);
      res.ff_trace.push_back(std::move(ffv));
    }
    BitVector io(res.external.signals.size());
    for (std::size_t k = 0; k < res.external.signals.size(); ++k)
      io.set(k, values[static_cast<std::size_t>(res.external.signals[k])] != 0);
    ring.push_back(std::move(io));
    if (ring.size() > trace_depth_) ring.pop_front();

    if (options.reference && !res.detection_cycle && mon != (*options.reference)[t]) res.detection_cycle = t;
    res.monitor_trace.push_back(std::move(mon));

    for (std::size_t k = 0; k < slots_.size(); ++k) {
      BitVector& x = sig_inputs[k];
      const auto& sigs = slots_[k].signals;
      for (std::size_t j = 0; j < sigs.size(); ++j) x.set(j, values[static_cast<std::size_t>(sigs[j])] != 0);
      blocks[k].step(x, slots_[k].tap_mask, slots_[k].reset);
    }
    for (std::size_t f = 0; f < design_.ffs.size(); ++f) state[f] = values[static_cast<std::size_t>(design_.ffs[f].d)];
    if (injection && injection->cycle == t) {
      auto& s = state[static_cast<std::size_t>(injection->ff)];
      s = !s;
    }
    res.cycles_run = t + 1;
    if (res.detection_cycle && options.halt_on_detect) break;
  }

  res.external.first_cycle = res.cycles_run - ring.size();
  res.external.frames.assign(ring.begin(), ring.end());
  res.snapshot.detection_cycle = res.detection_cycle;
  res.snapshot.cycles_run = res.cycles_run;
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    res.snapshot.scans.push_back(SignatureScan{slots_[k].interface_id, blocks[k].counter, blocks[k].misr1, blocks[k].misr2});
  }
  return res;
}

SimResult simulate(const ElaboratedDesign& design, const SignaturePlan& plan, const Stimulus& stimulus,
                   const SimOptions& options) {
  return Simulator(design, plan).run(stimulus, options);
}

SimResult simulate_with_injection(const ElaboratedDesign& design, const SignaturePlan& plan, const Stimulus& stimulus,
                                  const InjectionSpec& injection, const SimOptions& options) {
  return Simulator(design, plan).run(stimulus, options, injection);
}

std::optional<std::uint64_t> detect(const SimResult& golden, const SimResult& actual, const std::vector<SignalId>& monitors) {
  if (golden.monitor_trace.size() != actual.monitor_trace.size())
    throw std::invalid_argument("detect: runs have different lengths");
  std::vector<std::pair<int, int>> cols;
  for (SignalId m : monitors) {
    auto g = std::find(golden.monitors.begin(), golden.monitors.end(), m);
    auto a = std::find(actual.monitors.begin(), actual.monitors.end(), m);
    if (g == golden.monitors.end() || a == actual.monitors.end())
      throw std::invalid_argument("detect: signal was not monitored in both runs");
    cols.emplace_back(static_cast<int>(g - golden.monitors.begin()), static_cast<int>(a - actual.monitors.begin()));
  }
  for (std::size_t t = 0; t < golden.monitor_trace.size(); ++t) {
    for (auto [gc, ac] : cols) {
      if (golden.monitor_trace[t].get(static_cast<std::size_t>(gc)) != actual.monitor_trace[t].get(static_cast<std::size_t>(ac)))
        return t;
    }
  }
  return std::nullopt;
}

SimResult run_test(const Simulator& sim, const Stimulus& stimulus, std::optional<InjectionSpec> injection,
                   const std::optional<std::vector<SignalId>>& monitors) {
  SimOptions golden_opts;
  golden_opts.monitors = monitors;
  const SimResult golden = sim.run(stimulus, golden_opts);
  SimOptions opts;
  opts.monitors = monitors;
  opts.reference = &golden.monitor_trace;
  opts.halt_on_detect = true;
  return sim.run(stimulus, opts, injection);
}

std::string write_scan(const ScanSnapshot& snapshot, const ExternalTrace& external, const ElaboratedDesign& design,
                       const SignaturePlan& plan) {
  std::ostringstream out;
  out << "detect cycle=";
  if (snapshot.detection_cycle) {
    out << *snapshot.detection_cycle;
  } else {
    out << "none";
  }
  out << " cycles=" << snapshot.cycles_run << "\n";
  for (const auto& s : snapshot.scans) {
    (void)plan.interface(s.interface_id);
    out << "scan " << s.interface_id << " counter=" << s.counter << " misr1=" << s.misr1.to_hex()
        << " misr2=" << s.misr2.to_hex() << "\n";
  }
  out << "extio_signals ";
  for (std::size_t k = 0; k < external.signals.size(); ++k)
    out << (k ? "," : "") << design.signal_names[static_cast<std::size_t>(external.signals[k])];
  out << "\n";
  for (std::size_t k = 0; k < external.frames.size(); ++k)
    out << "extio cycle=" << external.first_cycle + k << " values=" << external.frames[k].to_string() << "\n";
  return out.str();
}

std::pair<ScanSnapshot, ExternalTrace> read_scan(std::string_view text, const ElaboratedDesign& design,
                                                 const SignaturePlan& plan) {
  ScanSnapshot snap;
  ExternalTrace ext;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool have_detect = false;
  auto fail = [&](const std::string& msg) { throw std::runtime_error("scan line " + std::to_string(line_no) + ": " + msg); };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    std::map<std::string, std::string> kv;
    std::string positional;
    std::string tok;
    while (ls >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) {
        positional = tok;
      } else {
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
      }
    }
    auto get = [&](const char* key) -> const std::string& {
      auto it = kv.find(key);
      if (it == kv.end()) fail(std::string("missing ") + key);
      return it->second;
    };
    try {
      if (kind == "detect") {
        const std::string& c = get("cycle");
        if (c != "none") snap.detection_cycle = std::stoull(c);
        snap.cycles_run = kv.count("cycles") ? std::stoull(kv["cycles"]) : (snap.detection_cycle ? *snap.detection_cycle + 1 : 0);
        have_detect = true;
      } else if (kind == "scan") {
        SignatureScan s;
        s.interface_id = std::stoi(positional);
        if (s.interface_id < 0 || static_cast<std::size_t>(s.interface_id) >= plan.interfaces.size() ||
            !plan.interface(s.interface_id).misr)
          fail("scan names an interface without a signature block");
        const auto width = static_cast<std::size_t>(plan.interface(s.interface_id).misr->width);
        s.counter = std::stoull(get("counter"));
        if (s.counter >= 2 * plan.window) fail("counter out of range");
        s.misr1 = BitVector::from_hex(get("misr1"), width);
        s.misr2 = BitVector::from_hex(get("misr2"), width);
        snap.scans.push_back(std::move(s));
      } else if (kind == "extio_signals") {
        std::stringstream ss(positional);
        std::string name;
        while (std::getline(ss, name, ',')) {
          auto sig = design.find_signal(name);
          if (!sig) fail("unknown signal " + name);
          ext.signals.push_back(*sig);
        }
      } else if (kind == "extio") {
        const std::uint64_t cycle = std::stoull(get("cycle"));
        BitVector v = BitVector::from_string(get("values"));
        if (v.size() != ext.signals.size()) fail("extio width does not match extio_signals");
        if (ext.frames.empty()) {
          ext.first_cycle = cycle;
        } else if (cycle != ext.first_cycle + ext.frames.size()) {
          fail("extio cycles must be consecutive");
        }
        ext.frames.push_back(std::move(v));
      } else {
        fail("unknown record '" + kind + "'");
      }
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    } catch (const std::out_of_range& e) {
      fail(e.what());
    }
  }
  if (!have_detect) throw std::runtime_error("scan: missing detect record");
  for (int id : plan.signatured())
    if (!snap.find(id)) throw std::runtime_error("scan: no entry for signature block " + std::to_string(id));
  return {snap, ext};
}

}  // namespace eqed
