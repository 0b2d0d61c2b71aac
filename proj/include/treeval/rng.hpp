#pragma once

#include <array>
#include <cstdint>

namespace treeval {

/// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as
/// 1, 2, 3", SC'11), the Random123 reference variant. Counter-based, so any
/// draw can be addressed directly and results never depend on thread
/// scheduling.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

/// Independent stream identifiers. Each one selects a disjoint region of
/// the Philox counter space for a given seed.
enum class Stream : std::uint32_t {
  Train = 1,
  Valid = 2,
  Test = 3,
  Inner = 4,
  Resample = 5,   // bootstrap / subsample index draws
  Features = 6,   // per-split coordinate subsets
  Oracle = 7,     // test-only sampling oracles
  Qmc = 8,        // randomized lattice shifts
};

/// Sequential view on one (seed, stream, lane) slice of the Philox counter
/// space. `lane` is usually a path or tree index.
///
/// Counter layout: words 0-1 = block index, word 2 = lane, word 3 = stream.
class CounterRng {
 public:
  static constexpr const char* kAlgorithm = "philox4x32-10/v1";

  CounterRng(std::uint64_t seed, Stream stream, std::uint32_t lane,
             std::uint64_t first_block = 0);

  std::uint64_t next_u64();

  /// Uniform on the open interval (0,1) with 53 random bits.
  double next_uniform();

  /// Standard normal via the inverse-CDF transform of next_uniform().
  double next_normal();

  /// Unbiased integer in [0, bound) (Lemire's multiply-shift with rejection).
  std::uint64_t next_below(std::uint64_t bound);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint32_t lane_;
  std::uint32_t stream_;
  std::uint64_t block_;
  std::array<std::uint32_t, 4> buf_{};
  int used_ = 4;
};

}  // namespace treeval
