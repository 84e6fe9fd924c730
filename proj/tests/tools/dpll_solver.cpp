// Minimal DIMACS solver used to exercise the external-solver round trip in tests.
// Plain recursive DPLL with unit propagation: slow, but independent of the
// library's own solver. Usage: dpll_solver FILE.cnf

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Formula {
  int vars = 0;
  std::vector<std::vector<int>> clauses;
};

// value[v]: 0 unassigned, 1 true, -1 false
bool propagate(const Formula& f, std::vector<int>& value, std::vector<int>& trail) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& c : f.clauses) {
      int unassigned = 0, last = 0;
      bool sat = false;
      for (int lit : c) {
        const int v = value[static_cast<std::size_t>(std::abs(lit))];
        if (v == 0) {
          ++unassigned;
          last = lit;
        } else if ((v > 0) == (lit > 0)) {
          sat = true;
          break;
        }
      }
      if (sat) continue;
      if (unassigned == 0) return false;
      if (unassigned == 1) {
        value[static_cast<std::size_t>(std::abs(last))] = last > 0 ? 1 : -1;
        trail.push_back(std::abs(last));
        changed = true;
      }
    }
  }
  return true;
}

bool dpll(const Formula& f, std::vector<int>& value) {
  std::vector<int> trail;
  if (!propagate(f, value, trail)) {
    for (int v : trail) value[static_cast<std::size_t>(v)] = 0;
    return false;
  }
  int pick = 0;
  for (int v = 1; v <= f.vars; ++v)
    if (value[static_cast<std::size_t>(v)] == 0) {
      pick = v;
      break;
    }
  if (pick == 0) return true;
  for (int phase : {-1, 1}) {
    value[static_cast<std::size_t>(pick)] = phase;
    if (dpll(f, value)) return true;
  }
  value[static_cast<std::size_t>(pick)] = 0;
  for (int v : trail) value[static_cast<std::size_t>(v)] = 0;
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: dpll_solver FILE.cnf\n";
    return 2;
  }
  std::ifstream in(argv[1]);
  if (!in) {
    std::cerr << "cannot open " << argv[1] << "\n";
    return 2;
  }
  Formula f;
  std::string line;
  std::vector<int> cur;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'c') continue;
    std::istringstream ss(line);
    if (line[0] == 'p') {
      std::string p, cnf;
      std::size_t n = 0;
      ss >> p >> cnf >> f.vars >> n;
      continue;
    }
    int lit = 0;
    while (ss >> lit) {
      if (lit == 0) {
        f.clauses.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(lit);
      }
    }
  }
  std::vector<int> value(static_cast<std::size_t>(f.vars) + 1, 0);
  if (!dpll(f, value)) {
    std::cout << "s UNSATISFIABLE\n";
    return 20;
  }
  std::cout << "s SATISFIABLE\nv";
  for (int v = 1; v <= f.vars; ++v) std::cout << " " << (value[static_cast<std::size_t>(v)] >= 0 ? v : -v);
  std::cout << " 0\n";
  return 10;
}
