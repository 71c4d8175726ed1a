#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace gpsm {

// Algebra R_{p+q}: n = p + q anticommuting generators e_1..e_n, all with
// e_i^2 = -1.  The split into p "slice" generators and q "sphere" generators
// only matters above the algebra layer; products see just n.
struct Signature {
  int p = 0;
  int q = 1;

  static constexpr int max_generators = 12;

  Signature(int p_, int q_) : p(p_), q(q_) {
    if (p < 0) throw std::invalid_argument("Signature: p must be >= 0");
    if (q < 1) throw std::invalid_argument("Signature: q must be >= 1");
    if (p + q > max_generators)
      throw std::invalid_argument("Signature: p + q exceeds generator cap");
  }

  int n() const { return p + q; }
  std::size_t dim() const { return std::size_t{1} << n(); }
  // coordinates of a point in R^{p+q+1}
  int point_dim() const { return p + q + 1; }

  bool operator==(const Signature& o) const { return p == o.p && q == o.q; }
  bool operator!=(const Signature& o) const { return !(*this == o); }
};

// Basis blades are indexed by bitmask: bit i-1 set  <=>  e_i is a factor,
// factors in increasing index order.  Mask 0 is the scalar blade.
using BladeMask = std::uint32_t;

inline int blade_grade(BladeMask m) { return std::popcount(m); }

// Number of generator transpositions needed to sort the concatenation of two
// ordered blades: pairs (i in a, j in b) with i > j.
inline int blade_reorder_swaps(BladeMask a, BladeMask b) {
  int swaps = 0;
  a >>= 1;
  while (a != 0) {
    swaps += std::popcount(a & b);
    a >>= 1;
  }
  return swaps;
}

// Sign of e_A * e_B: (-1)^{swaps} from anticommutation and (-1)^{|A & B|}
// from e_i^2 = -1.  The resulting blade is A xor B.
inline int blade_product_sign(BladeMask a, BladeMask b) {
  const int s = blade_reorder_swaps(a, b) + std::popcount(a & b);
  return (s & 1) ? -1 : 1;
}

struct BladeProduct {
  int sign;
  BladeMask mask;
};

inline BladeProduct blade_product(BladeMask a, BladeMask b, const Signature& sig) {
  if (a >= sig.dim() || b >= sig.dim())
    throw std::invalid_argument("blade_product: mask out of range for signature");
  return {blade_product_sign(a, b), static_cast<BladeMask>(a ^ b)};
}

// Precomputed sign tables for n <= 8 (64 KB at n = 8); above that signs are
// computed on the fly.
inline const std::int8_t* sign_table(int n) {
  if (n > 8) return nullptr;
  static const std::vector<std::vector<std::int8_t>> tables = [] {
    std::vector<std::vector<std::int8_t>> t(9);
    for (int m = 0; m <= 8; ++m) {
      const std::size_t d = std::size_t{1} << m;
      t[m].resize(d * d);
      for (BladeMask a = 0; a < d; ++a)
        for (BladeMask b = 0; b < d; ++b)
          t[m][(static_cast<std::size_t>(a) << m) | b] =
              static_cast<std::int8_t>(blade_product_sign(a, b));
    }
    return t;
  }();
  return tables[n].data();
}

}  // namespace gpsm
