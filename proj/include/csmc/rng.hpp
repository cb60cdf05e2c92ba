#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace csmc {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Independent random streams are keyed by subsystem so that coupled and
/// uncoupled runs consume identical shock realisations.
enum class Subsystem : std::uint32_t {
  kEconomy = 1,
  kEpidemic = 2,
  kVaccine = 3,
  kFiscal = 4,
  kResample = 5,
  kClustering = 6,
};

/// Counter-based stream for one (seed, particle, week, subsystem) cell.
///
/// Every draw is a pure function of the key and the draw index, so the
/// ensemble can be propagated in any order or on any number of threads and
/// still produce bit-identical results. Satisfies UniformRandomBitGenerator.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  CounterStream(std::uint64_t seed, std::uint32_t particle, std::uint32_t week,
                Subsystem subsystem) noexcept;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  /// Standard normal via Box-Muller; consumes two uniforms.
  double normal() noexcept;
  /// Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape) noexcept;
  double beta(double a, double b) noexcept;

  std::uint32_t draws_used() const noexcept { return draw_; }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t particle_;
  std::uint32_t week_;
  std::uint32_t subsystem_;
  std::uint32_t draw_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int cursor_ = 4;
};

}  // namespace csmc
