#pragma once

#include <cstdint>
#include <random>

namespace stabtree {

enum class DaemonKind : std::uint8_t {
  Synchronous,  // every privileged node fires
  Central,      // exactly one node fires, deterministic round-robin
  Adversarial,  // seeded nonempty subset, constructively weakly fair
};

const char* daemon_kind_name(DaemonKind k);

struct Daemon {
  DaemonKind kind = DaemonKind::Central;
  std::uint64_t seed = 0;           // adversarial only
  std::uint32_t fairness_bound = 8; // adversarial only, must be positive

  friend bool operator==(const Daemon&, const Daemon&) = default;
};

// Small deterministic RNG wrapper so draws stay stable across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }
  // Uniform in [0, n); n > 0.
  std::uint32_t below(std::uint32_t n) { return static_cast<std::uint32_t>(next() % n); }
  bool coin() { return (next() & 1u) != 0; }
  double real01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double real(double lo, double hi) { return lo + (hi - lo) * real01(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace stabtree
