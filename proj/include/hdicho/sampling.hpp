#pragma once

#include <cstdint>
#include <vector>

#include "hdicho/linear_system.hpp"

namespace hdicho {

inline constexpr std::size_t kAngularDirections = 720;
inline constexpr std::size_t kSphereDirections = 2000;

/// Deterministic unit directions in R^n: both signs for n = 1, a 720-point
/// half-circle for n = 2 (|Phi xi| is even in xi), and a Halton/Box-Muller
/// sphere sample for n >= 3 whose Cranley-Patterson shift is drawn from `seed`.
std::vector<Vector> sample_directions(int n, std::uint64_t seed = 0,
                                      std::size_t sphere_count = kSphereDirections);

/// Radical inverse of i in the given prime base.
double radical_inverse(std::uint64_t i, std::uint32_t base);

}  // namespace hdicho
