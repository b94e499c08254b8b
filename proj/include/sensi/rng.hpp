#pragma once

#include <cstdint>
#include <random>

namespace sensi {

/// Seeded random stream used everywhere in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Uniforms take the top 53 bits of one draw; normals use the
/// Box-Muller transform on two uniforms. Neither goes through the
/// implementation-defined std distributions, so a seed gives the same
/// numbers on every conforming platform.
class Rng
{
public:
  explicit Rng(std::uint64_t seed)
    : engine_(seed)
  {
  }

  /// Uniform on [0, 1).
  double uniform();

  /// Uniform on (0, 1].
  double uniform_open_left() { return 1.0 - uniform(); }

  double uniform(double low, double high) { return low + (high - low) * uniform(); }

  double normal();

  /// Uniform integer on [0, n).
  std::uint64_t index(std::uint64_t n);

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Seed for an independent child stream, derived with SplitMix64.
std::uint64_t
child_seed(std::uint64_t master, std::uint64_t stream);

} // namespace sensi
