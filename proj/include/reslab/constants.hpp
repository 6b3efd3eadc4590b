#pragma once

#include <numbers>

namespace reslab::constants {

// 2019 SI defined values. These are exact by definition and fixed at compile
// time; nothing in the library can reconfigure them.
inline constexpr double h = 6.62607015e-34;    // Planck constant, J s
inline constexpr double k_b = 1.380649e-23;    // Boltzmann constant, J/K
inline constexpr double hbar = h / (2.0 * std::numbers::pi);

static_assert(h == 6.62607015e-34);
static_assert(k_b == 1.380649e-23);

}  // namespace reslab::constants
