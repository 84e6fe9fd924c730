#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "eqed/bitvec.hpp"

namespace eqed {

/// Shape of one MISR: `width` stages (K), `inputs` parallel inputs (M <= K),
/// feedback taps as 1-based stage numbers.
struct MisrConfig {
  int width = 0;
  int inputs = 0;
  std::vector<int> taps;

  void validate() const;
  BitVector tap_mask() const;
  bool operator==(const MisrConfig&) const = default;
};

/// Maximal-length feedback taps for a `width`-stage register. Widths up to 64
/// come from a fixed table; wider registers fall back to {width, width-1} and
/// set `*fallback` when given.
std::vector<int> default_taps(int width, bool* fallback = nullptr);

/// All zeros except stage K.
BitVector misr_reset(const MisrConfig& config);

/// One clock of the register:
///   next[1] = XOR(state[t] for t in taps) ^ in[1]
///   next[i] = state[i-1] ^ in[i]   (2 <= i <= M)
///   next[i] = state[i-1]           (M < i <= K)
BitVector misr_step(const MisrConfig& config, const BitVector& state, const BitVector& inputs);

/// In-place variant with a precomputed tap mask (hot path of the simulator).
inline void misr_step_inplace(BitVector& state, const BitVector& tap_mask, const BitVector& inputs) {
  const bool feedback = state.parity_with(tap_mask);
  state.shift_up(feedback);
  state.xor_low(inputs);
}

/// ceil(log2(2N)).
int counter_width(std::uint64_t window);

/// Dual-MISR signature block with its mod-2N counter. MISR1 restarts whenever the
/// counter wraps to 0, MISR2 whenever it reaches N; both start from reset at power-on.
struct SignatureBlockState {
  MisrConfig config;
  BitVector misr1;
  BitVector misr2;
  std::uint64_t counter = 0;
  std::uint64_t window = 0;  // N
  int width_c = 0;           // C

  static SignatureBlockState power_on(const MisrConfig& config, std::uint64_t window);
  void step(const BitVector& inputs);
  void step(const BitVector& inputs, const BitVector& tap_mask, const BitVector& reset);
};

struct WindowSelection {
  std::uint64_t w1 = 0;
  std::uint64_t w2 = 0;
  std::uint64_t length = 0;  // T
  int misr = 1;              // 1 or 2
  bool short_window = false; // T < N (detection before N cycles since power-on)
};

/// Window lengths captured by the two MISRs when the counter reads `counter`.
/// `cycles_run` (steps since power-on) caps both windows for detections before 2N.
WindowSelection window_lengths(std::uint64_t counter, std::uint64_t window,
                               std::optional<std::uint64_t> cycles_run = std::nullopt);

}  // namespace eqed
