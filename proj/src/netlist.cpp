#include "eqed/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

namespace eqed {

namespace {

constexpr std::pair<GateOp, std::string_view> kOpNames[] = {
    {GateOp::And, "AND"},   {GateOp::Or, "OR"},   {GateOp::Not, "NOT"},
    {GateOp::Xor, "XOR"},   {GateOp::Nand, "NAND"}, {GateOp::Nor, "NOR"},
    {GateOp::Mux, "MUX"},   {GateOp::Const0, "CONST0"}, {GateOp::Const1, "CONST1"},
};

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '[' || c == ']';
}

bool valid_name(std::string_view s) {
  if (s.empty() || !is_name_start(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), is_name_char);
}

// Minimal tokenizer: names, single-character punctuation.
class LineLexer {
 public:
  LineLexer(std::string_view text, int line) : text_(text), line_(line) {}

  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }

  std::string name(const char* what) {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (is_name_char(text_[pos_]) || text_[pos_] == '-')) ++pos_;
    std::string tok(text_.substr(start, pos_ - start));
    if (tok.empty()) throw NetlistError(line_, std::string("expected ") + what);
    return tok;
  }

  std::string signal(const char* what) {
    std::string tok = name(what);
    if (!valid_name(tok)) throw NetlistError(line_, "invalid signal name '" + tok + "'");
    return tok;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) throw NetlistError(line_, std::string("expected '") + c + "'");
    ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void keyword(std::string_view kw) {
    const std::string tok = name(std::string(kw).c_str());
    if (tok != kw) throw NetlistError(line_, "expected '" + std::string(kw) + "', got '" + tok + "'");
  }

  void finish() {
    if (!at_end()) throw NetlistError(line_, "unexpected trailing text '" + std::string(text_.substr(pos_)) + "'");
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_;
};

// Per-module driver/use check. Requires child modules to be known.
void check_module(const ModuleDef& m, const std::map<std::string, const ModuleDef*>& by_name) {
  std::unordered_map<std::string, int> driver_line;
  auto drive = [&](const std::string& sig, int line) {
    auto [it, fresh] = driver_line.emplace(sig, line);
    if (!fresh) throw NetlistError(line, "duplicate driver: " + sig);
  };
  std::vector<std::pair<std::string, int>> uses;

  std::unordered_set<std::string> port_names;
  for (const auto& p : m.ports) {
    if (!port_names.insert(p.name).second) throw NetlistError(p.line, "duplicate port: " + p.name);
    if (p.dir == PortDir::In) {
      drive(p.name, p.line);
    } else {
      uses.emplace_back(p.name, p.line);
    }
  }
  for (const auto& g : m.gates) {
    if (static_cast<int>(g.inputs.size()) != gate_arity(g.op)) {
      throw NetlistError(g.line, "port arity mismatch: " + std::string(to_string(g.op)) + " takes " +
                                     std::to_string(gate_arity(g.op)) + " inputs, got " +
                                     std::to_string(g.inputs.size()));
    }
    drive(g.output, g.line);
    for (const auto& in : g.inputs) uses.emplace_back(in, g.line);
  }
  std::unordered_set<std::string> ff_names;
  for (const auto& f : m.flipflops) {
    if (!ff_names.insert(f.name).second) throw NetlistError(f.line, "duplicate flip-flop: " + f.name);
    drive(f.q, f.line);
    uses.emplace_back(f.d, f.line);
  }
  std::unordered_set<std::string> inst_names;
  for (const auto& inst : m.instances) {
    if (!inst_names.insert(inst.name).second) throw NetlistError(inst.line, "duplicate instance: " + inst.name);
    auto it = by_name.find(inst.child);
    if (it == by_name.end()) throw NetlistError(inst.line, "unknown child module: " + inst.child);
    const ModuleDef& child = *it->second;
    std::unordered_set<std::string> bound;
    for (const auto& [port, sig] : inst.bindings) {
      const PortDef* p = child.find_port(port);
      if (p == nullptr) throw NetlistError(inst.line, "module " + child.name + " has no port " + port);
      if (!bound.insert(port).second) throw NetlistError(inst.line, "port bound twice: " + port);
      if (p->dir == PortDir::Out) {
        drive(sig, inst.line);
      } else {
        uses.emplace_back(sig, inst.line);
      }
    }
    for (const auto& p : child.ports) {
      if (p.dir == PortDir::In && !bound.count(p.name)) {
        throw NetlistError(inst.line, "unbound input port " + p.name + " of " + inst.name);
      }
    }
  }
  for (const auto& [sig, line] : uses) {
    if (!driver_line.count(sig)) throw NetlistError(line, "no driver: " + sig);
  }
}

}  // namespace

int gate_arity(GateOp op) {
  switch (op) {
    case GateOp::Not: return 1;
    case GateOp::Mux: return 3;
    case GateOp::Const0:
    case GateOp::Const1: return 0;
    default: return 2;
  }
}

std::string_view to_string(GateOp op) {
  for (const auto& [o, n] : kOpNames)
    if (o == op) return n;
  return "?";
}

std::optional<GateOp> parse_gate_op(std::string_view name) {
  for (const auto& [o, n] : kOpNames)
    if (n == name) return o;
  return std::nullopt;
}

const PortDef* ModuleDef::find_port(std::string_view port) const {
  for (const auto& p : ports)
    if (p.name == port) return &p;
  return nullptr;
}

std::vector<ModuleDef> parse_netlist(std::string_view text) {
  std::vector<ModuleDef> modules;
  std::optional<ModuleDef> cur;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    LineLexer lex(line, line_no);
    if (lex.at_end()) {
      if (eol == text.size()) break;
      continue;
    }
    const std::string kw = lex.name("keyword");
    if (kw == "module") {
      if (cur) throw NetlistError(line_no, "nested module (missing endmodule for " + cur->name + ")");
      cur.emplace();
      cur->name = lex.signal("module name");
      cur->line = line_no;
      lex.finish();
      continue;
    }
    if (!cur) throw NetlistError(line_no, "'" + kw + "' outside of a module");
    if (kw == "endmodule") {
      lex.finish();
      for (const auto& m : modules)
        if (m.name == cur->name) throw NetlistError(cur->line, "duplicate module: " + cur->name);
      modules.push_back(std::move(*cur));
      cur.reset();
    } else if (kw == "input" || kw == "output") {
      PortDef p;
      p.name = lex.signal("port name");
      p.dir = kw == "input" ? PortDir::In : PortDir::Out;
      p.line = line_no;
      lex.finish();
      cur->ports.push_back(std::move(p));
    } else if (kw == "clock") {
      if (cur->clock) throw NetlistError(line_no, "clock declared twice in " + cur->name);
      cur->clock = lex.signal("clock name");
      lex.finish();
    } else if (kw == "ff") {
      FlipFlopDef f;
      f.line = line_no;
      f.name = lex.signal("flip-flop name");
      lex.keyword("init");
      const std::string init = lex.name("init value");
      if (init == "0") {
        f.init = InitValue::Zero;
      } else if (init == "1") {
        f.init = InitValue::One;
      } else if (init == "x") {
        f.init = InitValue::Symbolic;
      } else {
        throw NetlistError(line_no, "bad init value '" + init + "' (expected 0, 1 or x)");
      }
      lex.keyword("d");
      f.d = lex.signal("data signal");
      lex.keyword("q");
      f.q = lex.signal("output signal");
      lex.finish();
      cur->flipflops.push_back(std::move(f));
    } else if (kw == "gate") {
      GateDef g;
      g.line = line_no;
      g.output = lex.signal("gate output");
      lex.expect('=');
      const std::string op = lex.name("gate op");
      auto parsed = parse_gate_op(op);
      if (!parsed) throw NetlistError(line_no, "unknown op: " + op);
      g.op = *parsed;
      lex.expect('(');
      if (!lex.accept(')')) {
        do {
          g.inputs.push_back(lex.signal("gate input"));
        } while (lex.accept(','));
        lex.expect(')');
      }
      lex.finish();
      cur->gates.push_back(std::move(g));
    } else if (kw == "inst") {
      InstanceDef inst;
      inst.line = line_no;
      inst.child = lex.signal("child module");
      lex.keyword("AS");
      inst.name = lex.signal("instance name");
      if (!lex.at_end()) {
        lex.keyword("bind");
        lex.expect('(');
        if (!lex.accept(')')) {
          do {
            std::string port = lex.signal("port");
            lex.expect('=');
            std::string sig = lex.signal("signal");
            inst.bindings.emplace_back(std::move(port), std::move(sig));
          } while (lex.accept(','));
          lex.expect(')');
        }
      }
      lex.finish();
      cur->instances.push_back(std::move(inst));
    } else {
      throw NetlistError(line_no, "unknown statement '" + kw + "'");
    }
    if (eol == text.size()) break;
  }
  if (cur) throw NetlistError(cur->line, "missing endmodule for " + cur->name);

  std::map<std::string, const ModuleDef*> by_name;
  for (const auto& m : modules) by_name[m.name] = &m;
  for (const auto& m : modules) check_module(m, by_name);
  return modules;
}

std::string print_netlist(std::span<const ModuleDef> modules) {
  std::ostringstream out;
  for (const auto& m : modules) {
    out << "module " << m.name << "\n";
    if (m.clock) out << "  clock " << *m.clock << "\n";
    for (const auto& p : m.ports) out << "  " << (p.dir == PortDir::In ? "input " : "output ") << p.name << "\n";
    for (const auto& f : m.flipflops) {
      const char* init = f.init == InitValue::Zero ? "0" : f.init == InitValue::One ? "1" : "x";
      out << "  ff " << f.name << " init " << init << " d " << f.d << " q " << f.q << "\n";
    }
    for (const auto& g : m.gates) {
      out << "  gate " << g.output << " = " << to_string(g.op) << "(";
      for (std::size_t i = 0; i < g.inputs.size(); ++i) out << (i ? ", " : "") << g.inputs[i];
      out << ")\n";
    }
    for (const auto& inst : m.instances) {
      out << "  inst " << inst.child << " AS " << inst.name << " bind (";
      for (std::size_t i = 0; i < inst.bindings.size(); ++i)
        out << (i ? ", " : "") << inst.bindings[i].first << "=" << inst.bindings[i].second;
      out << ")\n";
    }
    out << "endmodule\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------

std::optional<SignalId> ElaboratedDesign::find_signal(std::string_view name) const {
  auto it = signal_index_.find(std::string(name));
  if (it == signal_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> ElaboratedDesign::find_ff(std::string_view path) const {
  auto it = ff_index_.find(std::string(path));
  if (it == ff_index_.end()) return std::nullopt;
  return it->second;
}

int ElaboratedDesign::subtree_cost(int node) const {
  const HierNode& n = nodes[static_cast<std::size_t>(node)];
  int cost = static_cast<int>(n.gates.size() + n.ffs.size());
  for (int c : n.children) cost += subtree_cost(c);
  return cost;
}

namespace {

class Elaborator {
 public:
  Elaborator(std::span<const ModuleDef> modules, ElaboratedDesign& out) : out_(out) {
    for (const auto& m : modules) by_name_[m.name] = &m;
  }

  const ModuleDef& module(const std::string& name, int line) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw NetlistError(line, "unknown module: " + name);
    return *it->second;
  }

  SignalId new_signal(const std::string& name) {
    const auto id = static_cast<SignalId>(out_.signal_names.size());
    out_.signal_names.push_back(name);
    out_.drivers.emplace_back();
    return id;
  }

  void run(const ModuleDef& m, const std::string& path, const std::string& clock, int parent,
           const std::unordered_map<std::string, SignalId>& portmap) {
    if (std::find(stack_.begin(), stack_.end(), m.name) != stack_.end()) {
      std::string chain;
      for (const auto& s : stack_) chain += s + " -> ";
      throw NetlistError(m.line, "recursive instantiation: " + chain + m.name);
    }
    stack_.push_back(m.name);

    const int node = static_cast<int>(out_.nodes.size());
    out_.nodes.push_back(HierNode{path, m.name, clock, parent, {}, {}, {}});
    if (parent >= 0) out_.nodes[static_cast<std::size_t>(parent)].children.push_back(node);
    if (std::find(out_.clock_domains.begin(), out_.clock_domains.end(), clock) == out_.clock_domains.end())
      out_.clock_domains.push_back(clock);

    std::unordered_map<std::string, SignalId> local = portmap;
    auto id = [&](const std::string& name) {
      auto it = local.find(name);
      if (it != local.end()) return it->second;
      const SignalId s = new_signal(path + "." + name);
      local.emplace(name, s);
      return s;
    };

    for (const auto& g : m.gates) {
      Gate flat;
      flat.op = g.op;
      for (const auto& in : g.inputs) flat.inputs.push_back(id(in));
      flat.output = id(g.output);
      flat.node = node;
      const int gi = static_cast<int>(out_.gates.size());
      out_.drivers[static_cast<std::size_t>(flat.output)] = {Driver::Kind::Gate, gi};
      out_.gates.push_back(std::move(flat));
      out_.nodes[static_cast<std::size_t>(node)].gates.push_back(gi);
    }
    for (const auto& f : m.flipflops) {
      FlipFlop flat;
      flat.path = path + "." + f.name;
      flat.d = id(f.d);
      flat.q = id(f.q);
      flat.init = f.init;
      flat.clock = clock;
      flat.node = node;
      const int fi = static_cast<int>(out_.ffs.size());
      out_.drivers[static_cast<std::size_t>(flat.q)] = {Driver::Kind::FlipFlop, fi};
      out_.ffs.push_back(std::move(flat));
      out_.nodes[static_cast<std::size_t>(node)].ffs.push_back(fi);
    }
    for (const auto& inst : m.instances) {
      const ModuleDef& child = module(inst.child, inst.line);
      std::unordered_map<std::string, SignalId> child_ports;
      for (const auto& [port, sig] : inst.bindings) child_ports[port] = id(sig);
      run(child, path + "." + inst.name, child.clock.value_or(clock), node, child_ports);
    }
    stack_.pop_back();
  }

 private:
  ElaboratedDesign& out_;
  std::map<std::string, const ModuleDef*> by_name_;
  std::vector<std::string> stack_;
};

// Kahn's algorithm restricted to `scope`; returns the order (possibly partial).
std::vector<int> kahn(const ElaboratedDesign& d, std::span<const int> scope, std::vector<int>* leftover) {
  std::unordered_map<int, int> pos;
  pos.reserve(scope.size());
  for (std::size_t i = 0; i < scope.size(); ++i) pos[scope[i]] = static_cast<int>(i);
  std::vector<int> indeg(scope.size(), 0);
  std::vector<std::vector<int>> succ(scope.size());
  for (std::size_t i = 0; i < scope.size(); ++i) {
    const Gate& g = d.gates[static_cast<std::size_t>(scope[i])];
    for (SignalId in : g.inputs) {
      const Driver& drv = d.drivers[static_cast<std::size_t>(in)];
      if (drv.kind != Driver::Kind::Gate) continue;
      auto it = pos.find(drv.index);
      if (it == pos.end()) continue;
      succ[static_cast<std::size_t>(it->second)].push_back(static_cast<int>(i));
      ++indeg[i];
    }
  }
  std::deque<int> ready;
  for (std::size_t i = 0; i < scope.size(); ++i)
    if (indeg[i] == 0) ready.push_back(static_cast<int>(i));
  std::vector<int> order;
  order.reserve(scope.size());
  while (!ready.empty()) {
    const int i = ready.front();
    ready.pop_front();
    order.push_back(scope[static_cast<std::size_t>(i)]);
    for (int s : succ[static_cast<std::size_t>(i)])
      if (--indeg[static_cast<std::size_t>(s)] == 0) ready.push_back(s);
  }
  if (leftover) {
    leftover->clear();
    for (std::size_t i = 0; i < scope.size(); ++i)
      if (indeg[i] > 0) leftover->push_back(scope[i]);
  }
  return order;
}

// Given gates that all lie on or behind a cycle, walk predecessors to extract one cycle.
std::string describe_cycle(const ElaboratedDesign& d, const std::vector<int>& stuck) {
  std::unordered_set<int> in_stuck(stuck.begin(), stuck.end());
  std::unordered_map<int, int> seen_at;
  std::vector<int> walk;
  int g = stuck.front();
  while (!seen_at.count(g)) {
    seen_at[g] = static_cast<int>(walk.size());
    walk.push_back(g);
    int next = -1;
    for (SignalId in : d.gates[static_cast<std::size_t>(g)].inputs) {
      const Driver& drv = d.drivers[static_cast<std::size_t>(in)];
      if (drv.kind == Driver::Kind::Gate && in_stuck.count(drv.index)) {
        next = drv.index;
        break;
      }
    }
    if (next < 0) break;
    g = next;
  }
  std::vector<int> cycle(walk.begin() + seen_at[g], walk.end());
  std::reverse(cycle.begin(), cycle.end());
  std::string out;
  for (int gi : cycle) out += d.signal_names[static_cast<std::size_t>(d.gates[static_cast<std::size_t>(gi)].output)] + " -> ";
  out += d.signal_names[static_cast<std::size_t>(d.gates[static_cast<std::size_t>(cycle.front())].output)];
  return out;
}

}  // namespace

ElaboratedDesign elaborate(std::span<const ModuleDef> modules, std::string_view top) {
  ElaboratedDesign d;
  Elaborator elab(modules, d);
  const ModuleDef& top_mod = elab.module(std::string(top), 0);

  std::unordered_map<std::string, SignalId> ports;
  for (const auto& p : top_mod.ports) {
    const SignalId s = elab.new_signal(top_mod.name + "." + p.name);
    ports[p.name] = s;
    if (p.dir == PortDir::In) {
      d.drivers[static_cast<std::size_t>(s)] = {Driver::Kind::Input, static_cast<int>(d.inputs.size())};
      d.inputs.push_back(s);
    } else {
      d.outputs.push_back(s);
    }
  }
  elab.run(top_mod, top_mod.name, top_mod.clock.value_or("clk"), -1, ports);

  for (SignalId s = 0; s < static_cast<SignalId>(d.signal_count()); ++s) {
    d.signal_index_[d.signal_names[static_cast<std::size_t>(s)]] = s;
  }
  for (std::size_t f = 0; f < d.ffs.size(); ++f) d.ff_index_[d.ffs[f].path] = static_cast<int>(f);
  d.gate_sinks.assign(d.signal_count(), {});
  d.ff_sinks.assign(d.signal_count(), {});
  d.is_output.assign(d.signal_count(), false);
  for (std::size_t gi = 0; gi < d.gates.size(); ++gi)
    for (SignalId in : d.gates[gi].inputs) d.gate_sinks[static_cast<std::size_t>(in)].push_back(static_cast<int>(gi));
  for (std::size_t fi = 0; fi < d.ffs.size(); ++fi)
    d.ff_sinks[static_cast<std::size_t>(d.ffs[fi].d)].push_back(static_cast<int>(fi));
  for (SignalId o : d.outputs) d.is_output[static_cast<std::size_t>(o)] = true;

  std::vector<int> all(d.gates.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  std::vector<int> stuck;
  d.gate_order_ = kahn(d, all, &stuck);
  if (!stuck.empty()) throw NetlistError(0, "combinational cycle: " + describe_cycle(d, stuck));
  return d;
}

std::vector<int> topo_order(const ElaboratedDesign& design, std::span<const int> scope) {
  std::vector<int> stuck;
  auto order = kahn(design, scope, &stuck);
  if (!stuck.empty()) throw NetlistError(0, "combinational cycle: " + describe_cycle(design, stuck));
  return order;
}

}  // namespace eqed
