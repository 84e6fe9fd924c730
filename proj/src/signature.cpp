#include "eqed/signature.hpp"

#include <algorithm>
#include <string>

namespace eqed {

namespace {

// Maximal-length Fibonacci taps per register width (stage numbers, 1-based).
// Index = width; entries 0 and 1 are placeholders.
const std::vector<std::vector<int>>& tap_table() {
  static const std::vector<std::vector<int>> table = {
      {},
      {1},
      {2, 1},
      {3, 2},
      {4, 3},
      {5, 3},
      {6, 5},
      {7, 6},
      {8, 6, 5, 4},
      {9, 5},
      {10, 7},
      {11, 9},
      {12, 6, 4, 1},
      {13, 4, 3, 1},
      {14, 5, 3, 1},
      {15, 14},
      {16, 15, 13, 4},
      {17, 14},
      {18, 11},
      {19, 6, 2, 1},
      {20, 17},
      {21, 19},
      {22, 21},
      {23, 18},
      {24, 23, 22, 17},
      {25, 22},
      {26, 6, 2, 1},
      {27, 5, 2, 1},
      {28, 25},
      {29, 27},
      {30, 6, 4, 1},
      {31, 28},
      {32, 22, 2, 1},
      {33, 20},
      {34, 27, 2, 1},
      {35, 33},
      {36, 25},
      {37, 5, 4, 3, 2, 1},
      {38, 6, 5, 1},
      {39, 35},
      {40, 38, 21, 19},
      {41, 38},
      {42, 41, 20, 19},
      {43, 42, 38, 37},
      {44, 43, 18, 17},
      {45, 44, 42, 41},
      {46, 45, 26, 25},
      {47, 42},
      {48, 47, 21, 20},
      {49, 40},
      {50, 49, 24, 23},
      {51, 50, 36, 35},
      {52, 49},
      {53, 52, 38, 37},
      {54, 53, 18, 17},
      {55, 31},
      {56, 55, 35, 34},
      {57, 50},
      {58, 39},
      {59, 58, 38, 37},
      {60, 59},
      {61, 60, 46, 45},
      {62, 61, 6, 5},
      {63, 62},
      {64, 63, 61, 60},
  };
  return table;
}

}  // namespace

void MisrConfig::validate() const {
  if (width < 1) throw std::invalid_argument("MISR width must be >= 1");
  if (inputs < 0 || inputs > width)
    throw std::invalid_argument("MISR input count " + std::to_string(inputs) + " exceeds width " + std::to_string(width));
  if (taps.empty()) throw std::invalid_argument("MISR needs at least one feedback tap");
  for (int t : taps)
    if (t < 1 || t > width) throw std::invalid_argument("MISR tap " + std::to_string(t) + " outside 1.." + std::to_string(width));
}

BitVector MisrConfig::tap_mask() const {
  BitVector mask(static_cast<std::size_t>(width));
  for (int t : taps) mask.set(static_cast<std::size_t>(t - 1), true);
  return mask;
}

std::vector<int> default_taps(int width, bool* fallback) {
  if (width < 1) throw std::invalid_argument("MISR width must be >= 1");
  const auto& table = tap_table();
  if (fallback) *fallback = false;
  if (static_cast<std::size_t>(width) < table.size()) return table[static_cast<std::size_t>(width)];
  if (fallback) *fallback = true;
  return {width, width - 1};
}

BitVector misr_reset(const MisrConfig& config) {
  BitVector s(static_cast<std::size_t>(config.width));
  s.set(static_cast<std::size_t>(config.width - 1), true);
  return s;
}

BitVector misr_step(const MisrConfig& config, const BitVector& state, const BitVector& inputs) {
  if (inputs.size() != static_cast<std::size_t>(config.inputs))
    throw std::invalid_argument("misr_step: expected " + std::to_string(config.inputs) + " inputs, got " +
                                std::to_string(inputs.size()));
  if (state.size() != static_cast<std::size_t>(config.width))
    throw std::invalid_argument("misr_step: state width mismatch");
  BitVector next = state;
  misr_step_inplace(next, config.tap_mask(), inputs);
  return next;
}

int counter_width(std::uint64_t window) {
  int c = 0;
  while ((std::uint64_t{1} << c) < 2 * window) ++c;
  return c;
}

SignatureBlockState SignatureBlockState::power_on(const MisrConfig& config, std::uint64_t window) {
  config.validate();
  if (window < 1) throw std::invalid_argument("capture window must be >= 1");
  SignatureBlockState s;
  s.config = config;
  s.misr1 = misr_reset(config);
  s.misr2 = s.misr1;
  s.window = window;
  s.width_c = counter_width(window);
  return s;
}

void SignatureBlockState::step(const BitVector& inputs) {
  step(inputs, config.tap_mask(), misr_reset(config));
}

void SignatureBlockState::step(const BitVector& inputs, const BitVector& tap_mask, const BitVector& reset) {
  if (inputs.size() != static_cast<std::size_t>(config.inputs))
    throw std::invalid_argument("signature block: input arity mismatch");
  misr_step_inplace(misr1, tap_mask, inputs);
  misr_step_inplace(misr2, tap_mask, inputs);
  counter = (counter + 1) % (2 * window);
  if (counter == 0) misr1 = reset;
  if (counter == window) misr2 = reset;
}

WindowSelection window_lengths(std::uint64_t counter, std::uint64_t window, std::optional<std::uint64_t> cycles_run) {
  if (window < 1) throw std::invalid_argument("capture window must be >= 1");
  if (counter >= 2 * window) throw std::invalid_argument("counter value out of range");
  WindowSelection w;
  w.w1 = counter;
  w.w2 = (counter + window) % (2 * window);  // (c - N) mod 2N
  if (cycles_run) {
    w.w1 = std::min(w.w1, *cycles_run);
    w.w2 = std::min(w.w2, *cycles_run);
  }
  if (w.w2 > w.w1) {
    w.length = w.w2;
    w.misr = 2;
  } else {
    w.length = w.w1;
    w.misr = 1;
  }
  w.short_window = w.length < window;
  return w;
}

}  // namespace eqed
