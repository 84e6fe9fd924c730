#include "eqed/generator.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "eqed/rng.hpp"

namespace eqed {

void GeneratorParams::validate() const {
  if (rows < 1 || cols < 1) throw std::invalid_argument("generator: grid must be at least 1x1");
  if (leaf_inputs < 1) throw std::invalid_argument("generator: leaves need at least one input");
  if (front_width < 1) throw std::invalid_argument("generator: front stage needs at least one register");
  if (bus_width < 1) throw std::invalid_argument("generator: bus width must be positive (leaf outputs would be unconnected)");
  if (side_stages < 0 || side_toggles < 0 || masked_ffs < 0 || gates_per_block < 0)
    throw std::invalid_argument("generator: negative size parameter");
  if (side_stages > 0 && side_width < 1) throw std::invalid_argument("generator: side stages need a width");
  if (hub && hub_selects < 1) throw std::invalid_argument("generator: hub needs select inputs");
  if (memory && !hub) throw std::invalid_argument("generator: memory lives in the hub");
  if (memory && (memory_words < 2 || memory_width < 1)) throw std::invalid_argument("generator: memory too small");
  if (memory && memory_width > rows * cols * bus_width)
    throw std::invalid_argument("generator: memory wider than the hub's data path");
  const int weights = w_and + w_or + w_xor + w_mux + w_nand + w_nor + w_not;
  if (weights <= 0) throw std::invalid_argument("generator: all gate weights are zero");
}

namespace {

std::string idx(const std::string& base, int i) { return base + "[" + std::to_string(i) + "]"; }

class ModuleWriter {
 public:
  ModuleWriter(const GeneratorParams& p, Xorshift64Star& rng) : p_(p), rng_(rng) {}

  void line(const std::string& s) { body_ << s << "\n"; }

  std::string fresh() { return "n" + std::to_string(next_++); }

  std::string gate(const std::string& op, const std::vector<std::string>& args, std::string out = {}) {
    if (out.empty()) out = fresh();
    std::string s = "gate " + out + " = " + op + "(";
    for (std::size_t i = 0; i < args.size(); ++i) s += (i ? "," : "") + args[i];
    line(s + ")");
    return out;
  }

  void ff(const std::string& name, const std::string& d, const std::string& q) {
    const char* init = "x";
    if (p_.concrete_init) init = rng_.next_bit() ? "1" : "0";
    line("ff " + name + " init " + init + " d " + d + " q " + q);
  }

  const std::string& pick(const std::vector<std::string>& pool) {
    return pool[static_cast<std::size_t>(rng_.below(pool.size()))];
  }

  /// Random chain of `size` gates over `pool`.
  std::string expr(const std::vector<std::string>& pool, int size) {
    std::string cur = pick(pool);
    bool last_not = false;
    const int total = p_.w_and + p_.w_or + p_.w_xor + p_.w_mux + p_.w_nand + p_.w_nor + p_.w_not;
    for (int k = 0; k < size; ++k) {
      auto r = static_cast<int>(rng_.below(static_cast<std::uint64_t>(total)));
      auto take = [&](int w) {
        if (r < w) return true;
        r -= w;
        return false;
      };
      const bool swap = rng_.next_bit();
      auto two = [&](const char* op) {
        const std::string other = pick(pool);
        return swap ? gate(op, {other, cur}) : gate(op, {cur, other});
      };
      if (take(p_.w_and)) {
        cur = two("AND");
      } else if (take(p_.w_or)) {
        cur = two("OR");
      } else if (take(p_.w_xor)) {
        cur = two("XOR");
      } else if (take(p_.w_mux)) {
        const std::string sel = pick(pool);
        const std::string other = pick(pool);
        cur = swap ? gate("MUX", {sel, other, cur}) : gate("MUX", {sel, cur, other});
      } else if (take(p_.w_nand)) {
        cur = two("NAND");
      } else if (take(p_.w_nor)) {
        cur = two("NOR");
      } else if (!last_not) {
        cur = gate("NOT", {cur});
        last_not = true;
        continue;
      } else {
        cur = two("XOR");
      }
      last_not = false;
    }
    return cur;
  }

  std::string text() const { return body_.str(); }

 private:
  const GeneratorParams& p_;
  Xorshift64Star& rng_;
  std::ostringstream body_;
  int next_ = 0;
};

// Body of one leaf (ports declared by the caller).
void write_leaf_body(ModuleWriter& w, const GeneratorParams& p, Xorshift64Star& rng, bool side_in) {
  std::vector<std::string> in;
  for (int i = 0; i < p.leaf_inputs; ++i) in.push_back(idx("in", i));

  const int n_expr = p.front_width + 2 * p.bus_width + p.side_stages * p.side_width + p.masked_ffs;
  const int s = std::max(1, p.gates_per_block / std::max(1, n_expr));

  // Front stage: fed by primary inputs only.
  std::vector<std::string> front;
  for (int i = 0; i < p.front_width; ++i) {
    const std::string d = w.expr(in, s);
    front.push_back(idx("f", i));
    w.ff("front" + std::to_string(i), d, front.back());
  }

  // Main stage: the first front_width registers are a triangular (hence
  // injective) function of the front stage; the rest mix everything.
  std::vector<int> perm(static_cast<std::size_t>(p.front_width));
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.below(i))]);
  std::vector<std::string> main;
  std::vector<std::string> seen = in;
  for (int i = 0; i < p.bus_width; ++i) {
    std::string d;
    if (i < p.front_width) {
      const std::string& pivot = front[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
      d = w.gate("XOR", {pivot, w.expr(seen, s)});
      seen.push_back(pivot);
    } else {
      std::vector<std::string> pool = in;
      pool.insert(pool.end(), front.begin(), front.end());
      d = w.expr(pool, s);
    }
    main.push_back(idx("m", i));
    w.ff("main" + std::to_string(i), d, main.back());
  }

  // Bus: triangular in the main stage.
  seen = in;
  for (int i = 0; i < p.bus_width; ++i) {
    w.gate("XOR", {main[static_cast<std::size_t>(i)], w.expr(seen, s)}, idx("bus", i));
    seen.push_back(main[static_cast<std::size_t>(i)]);
  }

  // Side pipeline.
  if (p.side_stages > 0) {
    std::vector<std::string> prev;
    for (int k = 0; k < p.side_stages; ++k) {
      std::vector<std::string> cur;
      std::vector<std::string> pool = in;
      for (int j = 0; j < p.side_width; ++j) {
        std::string d;
        if (k == 0) {
          d = w.expr(in, s);
        } else {
          d = w.gate("XOR", {prev[static_cast<std::size_t>(j)], w.expr(pool, s)});
          pool.push_back(prev[static_cast<std::size_t>(j)]);
        }
        cur.push_back(idx("s" + std::to_string(k), j));
        w.ff("side" + std::to_string(k) + "_" + std::to_string(j), d, cur.back());
      }
      prev = std::move(cur);
    }
    std::string acc = prev[0];
    for (std::size_t j = 1; j < prev.size(); ++j) acc = w.gate("XOR", {acc, prev[j]});
    // Toggle registers: an error in one of them persists, unlike a pipeline error.
    for (int j = 0; j < p.side_toggles; ++j) {
      const std::string q = idx("t", j);
      w.ff("toggle" + std::to_string(j), w.gate("XOR", {q, w.gate("AND", {w.pick(in), w.pick(in)})}), q);
      acc = w.gate("XOR", {acc, q});
    }
    w.gate("OR", {acc, acc}, "side");
  }

  // Masked region: registers that only see each other and the neighbour's side signal.
  if (p.masked_ffs > 0) {
    std::vector<std::string> mq;
    for (int i = 0; i < p.masked_ffs; ++i) mq.push_back(idx("q", i));
    std::vector<std::string> pool = mq;
    pool.push_back(side_in ? "side_in" : in[0]);
    for (int i = 0; i < p.masked_ffs; ++i) {
      const std::string d = w.expr(pool, std::max(1, s / 2));
      w.ff("masked" + std::to_string(i), d, mq[static_cast<std::size_t>(i)]);
    }
  }
}

void write_leaf_ports(std::ostringstream& out, const GeneratorParams& p, bool side_in) {
  for (int i = 0; i < p.leaf_inputs; ++i) out << "input " << idx("in", i) << "\n";
  if (side_in) out << "input side_in\n";
  for (int i = 0; i < p.bus_width; ++i) out << "output " << idx("bus", i) << "\n";
  if (p.side_stages > 0) out << "output side\n";
}

int memory_addr_bits(const GeneratorParams& p) {
  int bits = 0;
  while ((1 << bits) < p.memory_words) ++bits;
  return bits;
}

}  // namespace

std::string generate_design(const GeneratorParams& p, std::uint64_t seed) {
  p.validate();
  Xorshift64Star rng = Xorshift64Star::stream(seed, 0x6e65746c697374ULL);
  std::ostringstream out;
  out << "# synthetic design: " << p.rows << "x" << p.cols << " leaves" << (p.hub ? " + hub" : "") << ", seed " << seed
      << "\n";
  const int leaves = p.rows * p.cols;
  const bool side = p.side_stages > 0;

  if (leaves == 1 && !p.hub) {
    ModuleWriter w(p, rng);
    write_leaf_body(w, p, rng, false);
    out << "module top\n";
    write_leaf_ports(out, p, false);
    out << w.text() << "endmodule\n";
    return out.str();
  }

  auto leaf_name = [&](int l) { return "leaf_" + std::to_string(l / p.cols) + "_" + std::to_string(l % p.cols); };
  auto leaf_clock = [&](int l) { return p.second_clock && l == leaves - 1 ? std::string("clk2") : std::string(); };
  const bool ring = side && leaves > 1;

  for (int l = 0; l < leaves; ++l) {
    ModuleWriter w(p, rng);
    write_leaf_body(w, p, rng, ring);
    out << "\nmodule " << leaf_name(l) << "\n";
    if (!leaf_clock(l).empty()) out << "clock " << leaf_clock(l) << "\n";
    write_leaf_ports(out, p, ring);
    out << w.text() << "endmodule\n";
  }

  // Hub inputs in order: every bus bit, then every side bit.
  std::vector<std::string> hub_in;
  for (int l = 0; l < leaves; ++l)
    for (int i = 0; i < p.bus_width; ++i) hub_in.push_back(idx("b" + std::to_string(l), i));
  if (side)
    for (int l = 0; l < leaves; ++l) hub_in.push_back(idx("side", l));
  const int n = static_cast<int>(hub_in.size());
  const int abits = p.memory ? memory_addr_bits(p) : 0;

  if (p.hub) {
    ModuleWriter w(p, rng);
    std::vector<std::string> sel;
    for (int i = 0; i < p.hub_selects; ++i) sel.push_back(idx("sel", i));
    std::vector<std::string> h1;
    for (int i = 0; i < n; ++i) {
      h1.push_back(idx("h1", i));
      w.ff("in" + std::to_string(i), hub_in[static_cast<std::size_t>(i)], h1.back());
    }
    // Crossbar: each adjacent pair swaps under one select bit.
    std::vector<std::string> x(h1);
    for (int j = 0; 2 * j + 1 < n; ++j) {
      const std::string& sb = sel[static_cast<std::size_t>(j % p.hub_selects)];
      const auto a = static_cast<std::size_t>(2 * j);
      x[a] = w.gate("MUX", {sb, h1[a], h1[a + 1]});
      x[a + 1] = w.gate("MUX", {sb, h1[a + 1], h1[a]});
    }
    std::vector<std::string> h2;
    for (int i = 0; i < n; ++i) {
      h2.push_back(idx("h2", i));
      w.ff("mix" + std::to_string(i), x[static_cast<std::size_t>(i)], h2.back());
    }
    std::vector<std::string> rd;
    if (p.memory) {
      std::vector<std::string> wa, ra;
      for (int k = 0; k < abits; ++k) {
        wa.push_back(idx("mem_wa", k));
        ra.push_back(idx("mem_ra", k));
      }
      std::vector<std::vector<std::string>> words(static_cast<std::size_t>(p.memory_words));
      for (int k = 0; k < p.memory_words; ++k) {
        std::string we = "mem_we";
        for (int b = 0; b < abits; ++b) {
          const std::string bit = ((k >> b) & 1) ? wa[static_cast<std::size_t>(b)] : w.gate("NOT", {wa[static_cast<std::size_t>(b)]});
          we = w.gate("AND", {we, bit});
        }
        for (int j = 0; j < p.memory_width; ++j) {
          const std::string q = idx("w" + std::to_string(k), j);
          const std::string d = w.gate("MUX", {we, q, h1[static_cast<std::size_t>(j)]});
          w.ff("word" + std::to_string(k) + "_" + std::to_string(j), d, q);
          words[static_cast<std::size_t>(k)].push_back(q);
        }
      }
      for (int j = 0; j < p.memory_width; ++j) {
        std::vector<std::string> level;
        for (int k = 0; k < p.memory_words; ++k) level.push_back(words[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]);
        for (int b = 0; b < abits; ++b) {
          std::vector<std::string> next;
          for (std::size_t k = 0; k < level.size(); k += 2) {
            next.push_back(k + 1 < level.size() ? w.gate("MUX", {ra[static_cast<std::size_t>(b)], level[k], level[k + 1]})
                                                : level[k]);
          }
          level = std::move(next);
        }
        rd.push_back(w.gate("OR", {level[0], level[0]}, idx("rd", j)));
      }
    }
    const int s = std::max(1, p.gates_per_block / std::max(1, n));
    std::vector<std::string> seen = sel;
    for (int i = 0; i < n; ++i) {
      std::string y = w.gate("XOR", {h2[static_cast<std::size_t>(i)], w.expr(seen, s)});
      if (i < static_cast<int>(rd.size())) y = w.gate("XOR", {y, rd[static_cast<std::size_t>(i)]});
      w.gate("OR", {y, y}, idx("out", i));
      seen.push_back(h2[static_cast<std::size_t>(i)]);
    }
    // Same-cycle view of the hub inputs, so none of them is unobservable in the
    // last frames before a scan.
    seen = sel;
    for (int i = 0; i < n; ++i) {
      const std::string& x = hub_in[static_cast<std::size_t>(i)];
      const std::string y = w.gate("XOR", {x, w.expr(seen, 2)});
      w.gate("OR", {y, y}, idx("out", n + i));
      seen.push_back(x);
    }
    out << "\nmodule hub\n";
    for (const auto& s_in : hub_in) out << "input " << s_in << "\n";
    for (const auto& s_sel : sel) out << "input " << s_sel << "\n";
    if (p.memory) {
      out << "input mem_we\n";
      for (int k = 0; k < abits; ++k) out << "input " << idx("mem_wa", k) << "\n" << "input " << idx("mem_ra", k) << "\n";
    }
    for (int i = 0; i < 2 * n; ++i) out << "output " << idx("out", i) << "\n";
    out << w.text() << "endmodule\n";
  }

  // Top level: wiring only.
  out << "\nmodule top\n";
  for (int l = 0; l < leaves; ++l)
    for (int i = 0; i < p.leaf_inputs; ++i) out << "input " << idx("in" + std::to_string(l), i) << "\n";
  if (p.hub) {
    for (int i = 0; i < p.hub_selects; ++i) out << "input " << idx("sel", i) << "\n";
    if (p.memory) {
      out << "input mem_we\n";
      for (int k = 0; k < abits; ++k) out << "input " << idx("mem_wa", k) << "\n" << "input " << idx("mem_ra", k) << "\n";
    }
    for (int i = 0; i < 2 * n; ++i) out << "output " << idx("out", i) << "\n";
  } else {
    for (int l = 0; l < leaves; ++l) {
      for (int i = 0; i < p.bus_width; ++i) out << "output " << idx("bus" + std::to_string(l), i) << "\n";
      if (side) out << "output " << idx("side", l) << "\n";
    }
  }
  for (int l = 0; l < leaves; ++l) {
    out << "inst " << leaf_name(l) << " AS u" << l << " bind (";
    for (int i = 0; i < p.leaf_inputs; ++i) out << (i ? ", " : "") << idx("in", i) << "=" << idx("in" + std::to_string(l), i);
    if (ring) out << ", side_in=" << idx("side", (l + leaves - 1) % leaves);
    for (int i = 0; i < p.bus_width; ++i) out << ", " << idx("bus", i) << "=" << idx("bus" + std::to_string(l), i);
    if (side) out << ", side=" << idx("side", l);
    out << ")\n";
  }
  if (p.hub) {
    out << "inst hub AS hub bind (";
    for (int i = 0; i < n; ++i) {
      // Hub port names match the top-level nets they bind to, except buses.
      const std::string& port = hub_in[static_cast<std::size_t>(i)];
      std::string net = port;
      if (port[0] == 'b') net = "bus" + port.substr(1);
      out << (i ? ", " : "") << port << "=" << net;
    }
    for (int i = 0; i < p.hub_selects; ++i) out << ", " << idx("sel", i) << "=" << idx("sel", i);
    if (p.memory) {
      out << ", mem_we=mem_we";
      for (int k = 0; k < abits; ++k)
        out << ", " << idx("mem_wa", k) << "=" << idx("mem_wa", k) << ", " << idx("mem_ra", k) << "=" << idx("mem_ra", k);
    }
    for (int i = 0; i < 2 * n; ++i) out << ", " << idx("out", i) << "=" << idx("out", i);
    out << ")\n";
  }
  out << "endmodule\n";
  return out.str();
}

std::vector<std::string> memory_read_signals(const GeneratorParams& p) {
  std::vector<std::string> out;
  if (!p.memory) return out;
  for (int j = 0; j < p.memory_width; ++j) out.push_back("top.hub." + idx("rd", j));
  return out;
}

}  // namespace eqed
