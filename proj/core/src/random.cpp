#include "vocabhull/random.hpp"

#include <cmath>
#include <numbers>

namespace vocabhull {

double counter_normal(std::uint64_t key, std::uint64_t k) noexcept {
  // Box-Muller on two 53-bit uniforms; u1 in (0, 1].
  const std::uint64_t a = mix64(key ^ mix64(2 * k));
  const std::uint64_t b = mix64(key ^ mix64(2 * k + 1));
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace vocabhull
