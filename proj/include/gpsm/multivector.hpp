#pragma once

#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpsm/signature.hpp"

namespace gpsm {

// Dense element of R_{p+q}: 2^n real coefficients, coefficient b attached to
// the basis blade with bitmask b.  Coefficient 0 is the scalar part.
class Multivector {
 public:
  explicit Multivector(Signature sig) : sig_(sig), c_(sig.dim(), 0.0) {}

  static Multivector scalar(Signature sig, double v) {
    Multivector m(sig);
    m.c_[0] = v;
    return m;
  }

  static Multivector blade(Signature sig, BladeMask mask, double v = 1.0) {
    Multivector m(sig);
    if (mask >= sig.dim())
      throw std::invalid_argument("Multivector::blade: mask out of range");
    m.c_[mask] = v;
    return m;
  }

  static Multivector generator(Signature sig, int i) {
    if (i < 1 || i > sig.n())
      throw std::invalid_argument("Multivector::generator: index out of range");
    return blade(sig, BladeMask{1} << (i - 1));
  }

  const Signature& signature() const { return sig_; }
  std::size_t size() const { return c_.size(); }

  double operator[](BladeMask m) const { return c_[m]; }
  double& operator[](BladeMask m) { return c_[m]; }

  Multivector& operator+=(const Multivector& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Multivector& operator-=(const Multivector& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Multivector& operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
  }
  Multivector& operator/=(double s) { return (*this) *= (1.0 / s); }

  friend Multivector operator+(Multivector a, const Multivector& b) { return a += b; }
  friend Multivector operator-(Multivector a, const Multivector& b) { return a -= b; }
  friend Multivector operator*(Multivector a, double s) { return a *= s; }
  friend Multivector operator*(double s, Multivector a) { return a *= s; }
  friend Multivector operator/(Multivector a, double s) { return a *= (1.0 / s); }
  friend Multivector operator-(Multivector a) { return a *= -1.0; }

  // Geometric product, bilinear extension of the blade product.
  friend Multivector operator*(const Multivector& a, const Multivector& b) {
    a.check_same(b);
    const int n = a.sig_.n();
    Multivector out(a.sig_);
    const std::int8_t* table = sign_table(n);
    const std::size_t d = a.c_.size();
    for (std::size_t i = 0; i < d; ++i) {
      const double ai = a.c_[i];
      if (ai == 0.0) continue;
      if (table != nullptr) {
        const std::int8_t* row = table + (i << n);
        for (std::size_t j = 0; j < d; ++j) {
          const double bj = b.c_[j];
          if (bj == 0.0) continue;
          out.c_[i ^ j] += row[j] * ai * bj;
        }
      } else {
        for (std::size_t j = 0; j < d; ++j) {
          const double bj = b.c_[j];
          if (bj == 0.0) continue;
          out.c_[i ^ j] += blade_product_sign(static_cast<BladeMask>(i),
                                              static_cast<BladeMask>(j)) *
                           ai * bj;
        }
      }
    }
    return out;
  }

  void check_same(const Multivector& o) const {
    if (sig_ != o.sig_)
      throw std::invalid_argument("Multivector: signature mismatch");
  }

 private:
  Signature sig_;
  std::vector<double> c_;
};

inline double scalar_part(const Multivector& a) { return a[0]; }

// Coefficient 2-norm; for paravectors this agrees with [x conj(x)]_0^{1/2}.
inline double norm(const Multivector& a) {
  double s = 0.0;
  for (BladeMask m = 0; m < a.size(); ++m) s += a[m] * a[m];
  return std::sqrt(s);
}

// Clifford conjugation: anti-automorphism with conj(e_i) = -e_i, i.e. sign
// (-1)^{k(k+1)/2} on grade-k blades.
inline Multivector conjugate(const Multivector& a) {
  Multivector out = a;
  for (BladeMask m = 1; m < a.size(); ++m) {
    const int k = blade_grade(m);
    if (((k * (k + 1)) / 2) & 1) out[m] = -out[m];
  }
  return out;
}

// Clifford reversion: factor order reversal, sign (-1)^{k(k-1)/2} on grade k.
inline Multivector reverse(const Multivector& a) {
  Multivector out = a;
  for (BladeMask m = 1; m < a.size(); ++m) {
    const int k = blade_grade(m);
    if (((k * (k - 1)) / 2) & 1) out[m] = -out[m];
  }
  return out;
}

inline Multivector grade_part(const Multivector& a, int k) {
  Multivector out(a.signature());
  for (BladeMask m = 0; m < a.size(); ++m)
    if (blade_grade(m) == k) out[m] = a[m];
  return out;
}

inline double max_abs_diff(const Multivector& a, const Multivector& b) {
  a.check_same(b);
  double d = 0.0;
  for (BladeMask m = 0; m < a.size(); ++m)
    d = std::max(d, std::abs(a[m] - b[m]));
  return d;
}

inline std::ostream& operator<<(std::ostream& os, const Multivector& a) {
  bool first = true;
  for (BladeMask m = 0; m < a.size(); ++m) {
    if (a[m] == 0.0) continue;
    if (!first) os << " + ";
    os << a[m];
    if (m != 0) {
      os << "*e_{";
      for (int i = 0; i < a.signature().n(); ++i)
        if (m & (BladeMask{1} << i)) os << (i + 1);
      os << "}";
    }
    first = false;
  }
  if (first) os << "0";
  return os;
}

// Element of grade 0 + 1, identified with a point of R^{n+1}.
struct Paravector {
  double x0 = 0.0;
  std::vector<double> vec;  // coefficients of e_1..e_n

  Multivector to_multivector(Signature sig) const {
    if (static_cast<int>(vec.size()) != sig.n())
      throw std::invalid_argument("Paravector: wrong vector length for signature");
    Multivector m = Multivector::scalar(sig, x0);
    for (int i = 0; i < sig.n(); ++i) m[BladeMask{1} << i] = vec[i];
    return m;
  }
};

inline double norm(const Paravector& x) {
  double s = x.x0 * x.x0;
  for (double v : x.vec) s += v * v;
  return std::sqrt(s);
}

// x^{-1} = conj(x) / |x|^2; two-sided inverse of a nonzero paravector.
inline Paravector paravector_inverse(const Paravector& x) {
  const double n2 = norm(x) * norm(x);
  if (n2 == 0.0) throw std::domain_error("paravector_inverse: zero paravector");
  Paravector out;
  out.x0 = x.x0 / n2;
  out.vec.resize(x.vec.size());
  for (std::size_t i = 0; i < x.vec.size(); ++i) out.vec[i] = -x.vec[i] / n2;
  return out;
}

}  // namespace gpsm
