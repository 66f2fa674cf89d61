#include "hardlabel/sphere_sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hardlabel/types.hpp"

namespace hardlabel {

double radical_inverse(std::size_t i, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

namespace {

unsigned nth_prime(std::size_t n) {
  unsigned candidate = 2;
  std::size_t found = 0;
  while (true) {
    bool prime = true;
    for (unsigned p = 2; p * p <= candidate; ++p) {
      if (candidate % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime && found++ == n) return candidate;
    ++candidate;
  }
}

}  // namespace

std::vector<std::vector<double>> sphere_directions(std::size_t d,
                                                   std::size_t n) {
  using std::numbers::pi;
  if (d == 0) throw InvalidInput("sphere_directions: d must be positive");
  std::vector<std::vector<double>> out;
  out.reserve(n);
  if (d == 1) {
    for (std::size_t k = 0; k < n; ++k) out.push_back({k % 2 == 0 ? 1.0 : -1.0});
    return out;
  }
  if (d == 2) {
    for (std::size_t k = 0; k < n; ++k) {
      double a = 2.0 * pi * static_cast<double>(k) / static_cast<double>(n);
      out.push_back({std::cos(a), std::sin(a)});
    }
    return out;
  }
  if (d == 3) {
    const double golden = pi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < n; ++k) {
      double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(n);
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      double a = golden * static_cast<double>(k);
      out.push_back({r * std::cos(a), r * std::sin(a), z});
    }
    return out;
  }
  // Box-Muller over pairs of Halton coordinates gives deterministic
  // Gaussian vectors; normalising them spreads points over the sphere.
  const std::size_t pairs = (d + 1) / 2;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> v(d);
    for (std::size_t p = 0; p < pairs; ++p) {
      double u1 = radical_inverse(k + 1, nth_prime(2 * p));
      double u2 = radical_inverse(k + 1, nth_prime(2 * p + 1));
      double r = std::sqrt(-2.0 * std::log(u1));
      v[2 * p] = r * std::cos(2.0 * pi * u2);
      if (2 * p + 1 < d) v[2 * p + 1] = r * std::sin(2.0 * pi * u2);
    }
    double nv = norm2(v);
    for (double& x : v) x /= nv;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace hardlabel
