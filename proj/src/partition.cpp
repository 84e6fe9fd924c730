#include "eqed/partition.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace eqed {

int Partition::driver_block(const ElaboratedDesign& d, SignalId s) const {
  const Driver& drv = d.drivers.at(static_cast<std::size_t>(s));
  switch (drv.kind) {
    case Driver::Kind::Gate: return gate_block[static_cast<std::size_t>(drv.index)];
    case Driver::Kind::FlipFlop: return ff_block[static_cast<std::size_t>(drv.index)];
    default: return kExternal;
  }
}

namespace {

class Partitioner {
 public:
  Partitioner(const ElaboratedDesign& d, int budget) : d_(d), budget_(budget) {}

  std::vector<int> descend(int node_id) {
    const HierNode& node = d_.nodes[static_cast<std::size_t>(node_id)];
    const int cost = d_.subtree_cost(node_id);
    if ((cost <= budget_ && single_domain(node_id, node.clock)) || node.children.empty()) {
      DesignBlock b;
      b.root_path = node.path;
      b.clock = node.clock;
      collect(node_id, b);
      b.cost = static_cast<int>(b.gates.size() + b.ffs.size());
      b.oversized = b.cost > budget_;
      return {emit(std::move(b))};
    }
    std::vector<int> emitted;
    for (int child : node.children) {
      auto sub = descend(child);
      emitted.insert(emitted.end(), sub.begin(), sub.end());
    }
    if (!node.gates.empty() || !node.ffs.empty()) {
      int target = -1;
      for (int id : emitted) {
        const DesignBlock& b = out_.blocks[static_cast<std::size_t>(id)];
        if (b.clock != node.clock) continue;
        if (target < 0 || b.cost < out_.blocks[static_cast<std::size_t>(target)].cost) target = id;
      }
      if (target < 0) {
        DesignBlock glue;
        glue.root_path = node.path;
        glue.clock = node.clock;
        target = emit(std::move(glue));
        emitted.push_back(target);
      }
      DesignBlock& b = out_.blocks[static_cast<std::size_t>(target)];
      b.gates.insert(b.gates.end(), node.gates.begin(), node.gates.end());
      b.ffs.insert(b.ffs.end(), node.ffs.begin(), node.ffs.end());
      b.cost = static_cast<int>(b.gates.size() + b.ffs.size());
      b.oversized = b.cost > budget_;
    }
    return emitted;
  }

  Partition finish() {
    out_.budget = budget_;
    out_.gate_block.assign(d_.gates.size(), -1);
    out_.ff_block.assign(d_.ffs.size(), -1);
    for (auto& b : out_.blocks) {
      std::sort(b.gates.begin(), b.gates.end());
      std::sort(b.ffs.begin(), b.ffs.end());
      for (int g : b.gates) out_.gate_block[static_cast<std::size_t>(g)] = b.id;
      for (int f : b.ffs) out_.ff_block[static_cast<std::size_t>(f)] = b.id;
    }
    return std::move(out_);
  }

 private:
  bool single_domain(int node_id, const std::string& clock) const {
    const HierNode& n = d_.nodes[static_cast<std::size_t>(node_id)];
    if (n.clock != clock) return false;
    return std::all_of(n.children.begin(), n.children.end(), [&](int c) { return single_domain(c, clock); });
  }

  void collect(int node_id, DesignBlock& b) const {
    const HierNode& n = d_.nodes[static_cast<std::size_t>(node_id)];
    b.gates.insert(b.gates.end(), n.gates.begin(), n.gates.end());
    b.ffs.insert(b.ffs.end(), n.ffs.begin(), n.ffs.end());
    for (int c : n.children) collect(c, b);
  }

  int emit(DesignBlock b) {
    b.id = static_cast<int>(out_.blocks.size());
    out_.blocks.push_back(std::move(b));
    return out_.blocks.back().id;
  }

  const ElaboratedDesign& d_;
  int budget_;
  Partition out_;
};

std::string block_list(const std::vector<int>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ',';
    s += ids[i] == kExternal ? "ext" : std::to_string(ids[i]);
  }
  return s;
}

std::vector<int> parse_block_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item == "ext" ? kExternal : std::stoi(item));
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoi(item));
  return out;
}

}  // namespace

Partition partition_design(const ElaboratedDesign& design, int budget) {
  if (budget <= 0) throw std::invalid_argument("partition budget must be positive");
  Partitioner p(design, budget);
  p.descend(0);
  return p.finish();
}

bool Interface::external() const {
  return source == kExternal || std::find(dests.begin(), dests.end(), kExternal) != dests.end();
}

bool Interface::touches(int block) const {
  return source == block || std::find(dests.begin(), dests.end(), block) != dests.end();
}

std::vector<Interface> group_interfaces(const ElaboratedDesign& design, const Partition& partition) {
  using Key = std::tuple<int, std::vector<int>, std::string>;
  std::map<Key, int> index;
  std::vector<Interface> out;
  auto add = [&](int src, std::vector<int> dests, const std::string& clock, SignalId s) {
    Key key{src, dests, clock};
    auto it = index.find(key);
    if (it == index.end()) {
      Interface iface;
      iface.id = static_cast<int>(out.size());
      iface.source = src;
      iface.dests = std::move(dests);
      iface.clock = clock;
      it = index.emplace(std::move(key), iface.id).first;
      out.push_back(std::move(iface));
    }
    out[static_cast<std::size_t>(it->second)].signals.push_back(s);
  };
  auto clock_of = [&](int block) -> const std::string& {
    return partition.blocks[static_cast<std::size_t>(block)].clock;
  };

  for (SignalId s = 0; s < static_cast<SignalId>(design.signal_count()); ++s) {
    const int src = partition.driver_block(design, s);
    std::set<int> sinks;
    for (int g : design.gate_sinks[static_cast<std::size_t>(s)]) sinks.insert(partition.gate_block[static_cast<std::size_t>(g)]);
    for (int f : design.ff_sinks[static_cast<std::size_t>(s)]) sinks.insert(partition.ff_block[static_cast<std::size_t>(f)]);
    if (design.is_output[static_cast<std::size_t>(s)]) sinks.insert(kExternal);
    sinks.erase(src);
    if (sinks.empty()) continue;
    std::vector<int> dests(sinks.begin(), sinks.end());

    // Receiving blocks grouped by clock domain.
    std::map<std::string, std::vector<int>> by_domain;
    for (int b : dests)
      if (b != kExternal) by_domain[clock_of(b)].push_back(b);

    if (src == kExternal) {
      for (auto& [clock, blocks] : by_domain) add(kExternal, blocks, clock, s);
      continue;
    }
    const std::string& src_clock = clock_of(src);
    add(src, dests, src_clock, s);
    for (auto& [clock, blocks] : by_domain) {
      if (clock == src_clock) continue;
      add(src, blocks, clock, s);  // receiver-side copy in the receiving domain
    }
  }
  return out;
}

int BMap::for_block(int block) const {
  auto it = per_block.find(block);
  return it == per_block.end() ? default_b : it->second;
}

std::vector<int> SignaturePlan::signatured() const {
  std::vector<int> out;
  for (const auto& i : interfaces)
    if (i.misr) out.push_back(i.id);
  return out;
}

std::vector<int> SignaturePlan::interfaces_of(const Partition& partition, int block) const {
  const std::string& clock = partition.blocks.at(static_cast<std::size_t>(block)).clock;
  std::vector<int> out;
  for (const auto& i : interfaces) {
    if (!i.touches(block)) continue;
    if (i.misr && i.clock != clock) continue;
    out.push_back(i.id);
  }
  return out;
}

std::uint64_t SignaturePlan::signature_ffs() const {
  std::uint64_t total = 0;
  for (const auto& i : interfaces)
    if (i.misr) total += 2 * static_cast<std::uint64_t>(i.misr->width) + static_cast<std::uint64_t>(counter_width);
  return total;
}

namespace {

MisrConfig make_misr(int m, int b, std::uint64_t window, std::vector<std::string>* warnings, int iface_id) {
  const int floor_k = counter_width(window);  // ceil(log2(2N)) == ceil(log2 N) + 1
  MisrConfig cfg;
  cfg.inputs = m;
  cfg.width = std::max(m * b, floor_k);
  bool fallback = false;
  cfg.taps = default_taps(cfg.width, &fallback);
  if (fallback && warnings) {
    warnings->push_back("interface " + std::to_string(iface_id) + ": no tabulated taps for K=" +
                        std::to_string(cfg.width) + ", using {K, K-1}");
  }
  return cfg;
}

}  // namespace

SignaturePlan plan_signatures(std::vector<Interface> interfaces, const BMap& b_map, std::uint64_t window) {
  if (window < 2) throw std::invalid_argument("capture window N must be >= 2");
  if (b_map.default_b < 1) throw std::invalid_argument("b must be >= 1");
  for (const auto& [blk, b] : b_map.per_block)
    if (b < 1) throw std::invalid_argument("b must be >= 1 (block " + std::to_string(blk) + ")");
  SignaturePlan plan;
  plan.window = window;
  plan.counter_width = counter_width(window);
  for (auto& iface : interfaces) {
    if (iface.signals.empty()) throw std::invalid_argument("interface " + std::to_string(iface.id) + " has M = 0");
    if (iface.external()) {
      iface.misr.reset();
      continue;
    }
    iface.misr = make_misr(static_cast<int>(iface.signals.size()), b_map.for_block(iface.source), window,
                           &plan.warnings, iface.id);
  }
  plan.interfaces = std::move(interfaces);
  return plan;
}

int add_extra_interface(SignaturePlan& plan, const ElaboratedDesign& design, const Partition& partition, int block,
                        const std::vector<SignalId>& signals, int b) {
  if (signals.empty()) throw std::invalid_argument("extra interface has M = 0");
  if (b < 1) throw std::invalid_argument("b must be >= 1");
  for (SignalId s : signals) {
    if (partition.driver_block(design, s) != block)
      throw std::invalid_argument("extra interface signal " + design.signal_names[static_cast<std::size_t>(s)] +
                                  " is not driven inside block " + std::to_string(block));
  }
  Interface iface;
  iface.id = static_cast<int>(plan.interfaces.size());
  iface.source = block;
  iface.dests = {block};
  iface.signals = signals;
  iface.clock = partition.blocks.at(static_cast<std::size_t>(block)).clock;
  iface.extra = true;
  iface.misr = make_misr(static_cast<int>(signals.size()), b, plan.window, &plan.warnings, iface.id);
  plan.interfaces.push_back(std::move(iface));
  return plan.interfaces.back().id;
}

std::string write_plan(const SignaturePlan& plan, const ElaboratedDesign& design) {
  std::ostringstream out;
  out << "plan budget=" << plan.budget << " N=" << plan.window << " C=" << plan.counter_width << "\n";
  for (const auto& i : plan.interfaces) {
    out << (i.misr ? "sig " : "ext ") << i.id << " block_src=" << block_list({i.source})
        << " block_dst=" << block_list(i.dests) << " M=" << i.signals.size();
    if (i.misr) {
      out << " K=" << i.misr->width << " taps=";
      for (std::size_t t = 0; t < i.misr->taps.size(); ++t) out << (t ? "," : "") << i.misr->taps[t];
      out << " N=" << plan.window << " C=" << plan.counter_width;
    }
    out << " clock=" << i.clock << " signals=";
    for (std::size_t s = 0; s < i.signals.size(); ++s)
      out << (s ? "," : "") << design.signal_names[static_cast<std::size_t>(i.signals[s])];
    out << "\n";
  }
  return out.str();
}

SignaturePlan read_plan(std::string_view text, const ElaboratedDesign& design) {
  SignaturePlan plan;
  bool have_header = false;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) { throw std::runtime_error("plan line " + std::to_string(line_no) + ": " + msg); };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    std::map<std::string, std::string> kv;
    std::string id_tok;
    if (kind != "plan" && !(ls >> id_tok)) fail("missing interface id");
    std::string tok;
    while (ls >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) fail("expected key=value, got '" + tok + "'");
      kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    auto get = [&](const char* key) -> const std::string& {
      auto it = kv.find(key);
      if (it == kv.end()) fail(std::string("missing ") + key);
      return it->second;
    };
    try {
      if (kind == "plan") {
        plan.budget = std::stoi(get("budget"));
        plan.window = std::stoull(get("N"));
        plan.counter_width = std::stoi(get("C"));
        have_header = true;
        continue;
      }
      if (kind != "sig" && kind != "ext") fail("unknown record '" + kind + "'");
      Interface iface;
      iface.id = std::stoi(id_tok);
      if (iface.id != static_cast<int>(plan.interfaces.size())) fail("interface ids must be consecutive from 0");
      const auto src = parse_block_list(get("block_src"));
      if (src.size() != 1) fail("block_src must name one block");
      iface.source = src[0];
      iface.dests = parse_block_list(get("block_dst"));
      iface.clock = get("clock");
      std::stringstream sigs(get("signals"));
      std::string name;
      while (std::getline(sigs, name, ',')) {
        auto s = design.find_signal(name);
        if (!s) fail("unknown signal " + name);
        iface.signals.push_back(*s);
      }
      if (std::stoul(get("M")) != iface.signals.size()) fail("M does not match signal count");
      if (kind == "sig") {
        MisrConfig cfg;
        cfg.width = std::stoi(get("K"));
        cfg.inputs = static_cast<int>(iface.signals.size());
        cfg.taps = parse_int_list(get("taps"));
        cfg.validate();
        iface.misr = cfg;
        iface.extra = iface.dests.size() == 1 && iface.dests[0] == iface.source;
      }
      plan.interfaces.push_back(std::move(iface));
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    } catch (const std::out_of_range& e) {
      fail(e.what());
    }
  }
  if (!have_header) throw std::runtime_error("plan: missing 'plan' header line");
  if (plan.counter_width != counter_width(plan.window)) throw std::runtime_error("plan: C inconsistent with N");

  // The non-extra interfaces must be exactly what the netlist partitions into.
  const Partition part = partition_design(design, plan.budget);
  const auto expected = group_interfaces(design, part);
  std::size_t n_regular = 0;
  for (const auto& i : plan.interfaces) {
    if (i.extra) {
      for (SignalId s : i.signals)
        if (part.driver_block(design, s) != i.source)
          throw std::runtime_error("plan: extra interface " + std::to_string(i.id) + " signal not driven in its block");
      continue;
    }
    if (n_regular >= expected.size()) throw std::runtime_error("plan: more interfaces than the netlist has");
    const Interface& e = expected[n_regular++];
    if (e.source != i.source || e.dests != i.dests || e.signals != i.signals || e.clock != i.clock ||
        e.external() != !i.misr.has_value()) {
      throw std::runtime_error("plan: interface " + std::to_string(i.id) + " does not match the netlist partition");
    }
  }
  if (n_regular != expected.size()) throw std::runtime_error("plan: interfaces missing for this netlist");
  return plan;
}

}  // namespace eqed
