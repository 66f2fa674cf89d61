#ifndef HARDLABEL_SPHERE_SAMPLING_HPP
#define HARDLABEL_SPHERE_SAMPLING_HPP

#include <cstddef>
#include <vector>

namespace hardlabel {

/// Deterministic, roughly uniform unit vectors on S^{d-1}.
///   d == 1: {+1, -1} alternating
///   d == 2: evenly spaced angles 2*pi*k/n
///   d == 3: spherical Fibonacci lattice
///   d >= 4: Halton points pushed through Box-Muller, then normalised
std::vector<std::vector<double>> sphere_directions(std::size_t d,
                                                   std::size_t n);

/// Radical inverse of i in the given prime base.
double radical_inverse(std::size_t i, unsigned base);

}  // namespace hardlabel

#endif  // HARDLABEL_SPHERE_SAMPLING_HPP
